//! Matrix model of the reductive pair `su(n+1) = h + m` with `h = su(n)`.
//!
//! Tangent vectors at the base point are pairs `(z, a)` with `z` in `C^n` and
//! `a` purely imaginary. They embed into `su(n+1)` as
//!
//! ```text
//! [ -(a/n) I_n   z ]
//! [ -conj(z)^t   a ]
//! ```
//!
//! and the isotropy algebra sits in the top-left block. All brackets are
//! computed from this realization; nothing here hard-codes structure constants.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::TAU_EXACT;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real dimension of `m` for the sphere `S^{2n+1}`.
pub fn m_dim(n: usize) -> usize {
    2 * n + 1
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidN(n))
    } else {
        Ok(())
    }
}

fn same_n(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Element `(z, a)` of `m = C^n + R i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MVec {
    z: Vec<Complex64>,
    a: Complex64,
}

impl MVec {
    /// Rejects `n = 0`, non-finite entries and any nonzero real part of `a`.
    pub fn new(z: Vec<Complex64>, a: Complex64) -> Result<Self> {
        check_n(z.len())?;
        if a.re != 0.0 {
            return Err(Error::InvalidMVec(format!(
                "a must be purely imaginary, got real part {}",
                a.re
            )));
        }
        if !a.im.is_finite() || z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidMVec("entries must be finite".into()));
        }
        Ok(Self { z, a })
    }

    /// Builds `(z, i * a_im)`.
    pub fn from_parts(z: Vec<Complex64>, a_im: f64) -> Result<Self> {
        Self::new(z, Complex64::new(0.0, a_im))
    }

    /// Constructor for values produced by closed-form expressions, whose
    /// `a`-component is imaginary up to roundoff.
    pub(crate) fn from_formula(z: Vec<Complex64>, a: Complex64) -> Self {
        debug_assert!(
            a.re.abs() <= 1e-9 * (1.0 + a.norm()),
            "closed form produced a non-imaginary a-component: {a}"
        );
        Self {
            z,
            a: Complex64::new(0.0, a.im),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            z: vec![Complex64::new(0.0, 0.0); n],
            a: Complex64::new(0.0, 0.0),
        }
    }

    /// Inverse of [`MVec::coords`].
    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        check_n(n)?;
        if coords.len() != m_dim(n) {
            return Err(Error::ShapeMismatch {
                expected: m_dim(n),
                found: coords.len(),
            });
        }
        let z = (0..n)
            .map(|k| Complex64::new(coords[2 * k], coords[2 * k + 1]))
            .collect();
        Self::from_parts(z, coords[2 * n])
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    /// Coordinates in [`standard_basis`]: `(Re z_1, Im z_1, ..., Re z_n, Im z_n, Im a)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(m_dim(self.n()));
        for c in &self.z {
            out.push(c.re);
            out.push(c.im);
        }
        out.push(self.a.im);
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum::<f64>() + self.a.norm_sqr()
    }
}

impl Add for &MVec {
    type Output = MVec;
    fn add(self, rhs: &MVec) -> MVec {
        assert_eq!(self.n(), rhs.n(), "MVec dimension mismatch");
        MVec {
            z: self.z.iter().zip(&rhs.z).map(|(x, y)| x + y).collect(),
            a: self.a + rhs.a,
        }
    }
}

impl Sub for &MVec {
    type Output = MVec;
    fn sub(self, rhs: &MVec) -> MVec {
        assert_eq!(self.n(), rhs.n(), "MVec dimension mismatch");
        MVec {
            z: self.z.iter().zip(&rhs.z).map(|(x, y)| x - y).collect(),
            a: self.a - rhs.a,
        }
    }
}

impl Mul<&MVec> for f64 {
    type Output = MVec;
    fn mul(self, rhs: &MVec) -> MVec {
        MVec {
            z: rhs.z.iter().map(|c| c * self).collect(),
            a: rhs.a * self,
        }
    }
}

impl Neg for &MVec {
    type Output = MVec;
    fn neg(self) -> MVec {
        -1.0 * self
    }
}

fn check_anti_hermitian_traceless(m: &DMatrix<Complex64>, what: &str) -> std::result::Result<(), String> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(format!("{what} has non-finite entries"));
    }
    let dev = (m + m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dev > TAU_EXACT {
        return Err(format!("{what} is not anti-Hermitian (deviation {dev:.3e})"));
    }
    let tr = m.trace().norm();
    if tr > TAU_EXACT {
        return Err(format!("{what} is not traceless (trace norm {tr:.3e})"));
    }
    Ok(())
}

/// Element `B` of the isotropy algebra `h = su(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HVec {
    b: DMatrix<Complex64>,
}

impl HVec {
    pub fn new(b: DMatrix<Complex64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::InvalidHVec("matrix must be square".into()));
        }
        check_n(b.nrows())?;
        check_anti_hermitian_traceless(&b, "B").map_err(Error::InvalidHVec)?;
        Ok(Self { b })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            b: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn norm(&self) -> f64 {
        self.b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Element of `g = su(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientMat {
    a: DMatrix<Complex64>,
}

impl AmbientMat {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() || a.nrows() < 2 {
            return Err(Error::InvalidAmbient("matrix must be square of size >= 2".into()));
        }
        check_anti_hermitian_traceless(&a, "A").map_err(Error::InvalidAmbient)?;
        Ok(Self { a })
    }

    /// `n` such that this is an element of `su(n+1)`.
    pub fn n(&self) -> usize {
        self.a.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    /// Matrix commutator `[self, other]`.
    pub fn bracket(&self, other: &AmbientMat) -> Result<AmbientMat> {
        same_n(self.n(), other.n())?;
        Ok(AmbientMat {
            a: &self.a * &other.a - &other.a * &self.a,
        })
    }
}

impl Add for &AmbientMat {
    type Output = AmbientMat;
    fn add(self, rhs: &AmbientMat) -> AmbientMat {
        AmbientMat { a: &self.a + &rhs.a }
    }
}

pub fn embed_m(x: &MVec) -> AmbientMat {
    let n = x.n();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    let diag = -x.a / n as f64;
    for k in 0..n {
        a[(k, k)] = diag;
        a[(k, n)] = x.z[k];
        a[(n, k)] = -x.z[k].conj();
    }
    a[(n, n)] = x.a;
    AmbientMat { a }
}

pub fn embed_h(h: &HVec) -> AmbientMat {
    let n = h.n();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&h.b);
    AmbientMat { a }
}

/// Splits an element of `su(n+1)` along `h + m`.
pub fn project(a: &AmbientMat) -> (HVec, MVec) {
    let n = a.n();
    let m = &a.a;
    let a_nn = Complex64::new(0.0, m[(n, n)].im);
    let z = (0..n).map(|k| m[(k, n)]).collect();
    let shift = a_nn / n as f64;
    let mut b = m.view((0, 0), (n, n)).into_owned();
    for k in 0..n {
        b[(k, k)] += shift;
    }
    (HVec { b }, MVec { z, a: a_nn })
}

/// `([X, Y]_h, [X, Y]_m)` from the ambient commutator.
pub fn bracket_mm(x: &MVec, y: &MVec) -> Result<(HVec, MVec)> {
    same_n(x.n(), y.n())?;
    let c = embed_m(x).bracket(&embed_m(y))?;
    Ok(project(&c))
}

/// Isotropy action on `m`: `B . (z, a) = (B z, 0)`.
pub fn bracket_hm(h: &HVec, x: &MVec) -> Result<MVec> {
    same_n(h.n(), x.n())?;
    let n = x.n();
    let z = (0..n)
        .map(|i| (0..n).map(|j| h.b[(i, j)] * x.z[j]).sum())
        .collect();
    Ok(MVec {
        z,
        a: Complex64::new(0.0, 0.0),
    })
}

/// Real matrix of `X -> [h, X]` on `m` in [`standard_basis`] coordinates,
/// read off the ambient commutator.
pub fn h_action_matrix(h: &HVec) -> DMatrix<f64> {
    let n = h.n();
    let d = m_dim(n);
    let eh = embed_h(h);
    let mut out = DMatrix::zeros(d, d);
    for (col, e) in standard_basis(n).iter().enumerate() {
        let c = eh.bracket(&embed_m(e)).expect("same n");
        let (_, m) = project(&c);
        for (row, v) in m.coords().into_iter().enumerate() {
            out[(row, col)] = v;
        }
    }
    out
}

/// The Berger metric `g_eps((z,a),(w,b)) = Re(z^t conj(w)) + eps a b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    n: usize,
    eps: f64,
}

impl Metric {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_n(n)?;
        if eps == 0.0 || !eps.is_finite() {
            return Err(Error::InvalidEps(eps));
        }
        Ok(Self { n, eps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        m_dim(self.n)
    }

    /// `a b` of two imaginary numbers is real; the metric uses that real value.
    pub fn eval(&self, x: &MVec, y: &MVec) -> Result<f64> {
        same_n(self.n, x.n())?;
        same_n(self.n, y.n())?;
        let zw: f64 = x.z.iter().zip(&y.z).map(|(z, w)| (z * w.conj()).re).sum();
        Ok(zw + self.eps * (x.a * y.a).re)
    }

    /// Gram matrix in [`standard_basis`]: `diag(1, ..., 1, -eps)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::identity(d, d);
        g[(d - 1, d - 1)] = -self.eps;
        g
    }

    /// Diagonal of [`Metric::gram`].
    pub fn gram_diag(&self) -> Vec<f64> {
        let mut g = vec![1.0; self.dim()];
        g[self.dim() - 1] = -self.eps;
        g
    }

    /// `(positive, negative)` counts of the Gram matrix.
    pub fn signature(&self) -> (usize, usize) {
        let g = self.gram_diag();
        let pos = g.iter().filter(|v| **v > 0.0).count();
        (pos, g.len() - pos)
    }

    pub fn is_riemannian(&self) -> bool {
        self.signature().1 == 0
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature().1 == 1
    }
}

/// `(e_k, 0), (i e_k, 0)` for `k = 1..n`, then `(0, i)`.
pub fn standard_basis(n: usize) -> Vec<MVec> {
    let d = m_dim(n);
    (0..d)
        .map(|j| {
            let mut c = vec![0.0; d];
            c[j] = 1.0;
            MVec::from_coords(n, &c).expect("valid coordinates")
        })
        .collect()
}

/// Scale factors turning [`standard_basis`] into a `g`-orthonormal basis.
pub fn orthonormal_scales(g: &Metric) -> Vec<f64> {
    let mut s = vec![1.0; g.dim()];
    s[g.dim() - 1] = 1.0 / g.eps().abs().sqrt();
    s
}

/// `g`-orthonormal basis and the signs `g(f_j, f_j)`.
pub fn orthonormal_basis(g: &Metric) -> (Vec<MVec>, Vec<f64>) {
    let scales = orthonormal_scales(g);
    let basis: Vec<MVec> = standard_basis(g.n())
        .iter()
        .zip(&scales)
        .map(|(e, s)| *s * e)
        .collect();
    let signs = basis
        .iter()
        .map(|f| g.eval(f, f).expect("same n").signum())
        .collect();
    (basis, signs)
}

/// Standard basis of `su(n)`: `E_jk - E_kj`, `i (E_jk + E_kj)` for `j < k`,
/// and `i (E_kk - E_{k+1,k+1})`. Length `n^2 - 1`.
pub fn su_basis(n: usize) -> Vec<HVec> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut b = DMatrix::from_element(n, n, zero);
            b[(j, k)] = one;
            b[(k, j)] = -one;
            out.push(HVec { b });
            let mut b = DMatrix::from_element(n, n, zero);
            b[(j, k)] = I;
            b[(k, j)] = I;
            out.push(HVec { b });
        }
    }
    for k in 0..n.saturating_sub(1) {
        let mut b = DMatrix::from_element(n, n, zero);
        b[(k, k)] = I;
        b[(k + 1, k + 1)] = -I;
        out.push(HVec { b });
    }
    out
}

/// Brackets of the standard basis of `m`, tabulated once per `n`.
///
/// `m_part[(i*d + j)*d + k]` is the `e_k` coefficient of `[e_i, e_j]_m`;
/// `h_action[((i*d + j)*d + k)*d + l]` is the `e_l` coefficient of
/// `[[e_i, e_j]_h, e_k]`.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    d: usize,
    m_part: Vec<f64>,
    h_action: Vec<f64>,
}

impl StructureConstants {
    pub fn new(n: usize) -> Self {
        let d = m_dim(n);
        let basis = standard_basis(n);
        let embedded: Vec<AmbientMat> = basis.iter().map(embed_m).collect();
        let mut m_part = vec![0.0; d * d * d];
        let mut h_action = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                let c = embedded[i].bracket(&embedded[j]).expect("same n");
                let (h, m) = project(&c);
                for (k, v) in m.coords().into_iter().enumerate() {
                    m_part[(i * d + j) * d + k] = v;
                }
                let eh = embed_h(&h);
                for (k, ek) in embedded.iter().enumerate() {
                    let (_, hk) = project(&eh.bracket(ek).expect("same n"));
                    for (l, v) in hk.coords().into_iter().enumerate() {
                        h_action[((i * d + j) * d + k) * d + l] = v;
                    }
                }
            }
        }
        Self {
            n,
            d,
            m_part,
            h_action,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn m_part(&self, i: usize, j: usize, k: usize) -> f64 {
        self.m_part[(i * self.d + j) * self.d + k]
    }

    #[inline]
    pub fn h_action(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.h_action[((i * self.d + j) * self.d + k) * self.d + l]
    }

    pub fn m_part_slice(&self) -> &[f64] {
        &self.m_part
    }
}
