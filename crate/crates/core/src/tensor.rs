//! Coefficient arrays over the standard basis of `m`.

use nalgebra::DMatrix;

use crate::algebra::{m_dim, standard_basis, MVec};
use crate::error::{Error, Result};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn frobenius(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// R-bilinear map `m x m -> m`.
///
/// `coeffs[(i*d + j)*d + k]` is the coefficient of `e_k` in `alpha(e_i, e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilin {
    n: usize,
    coeffs: Vec<f64>,
}

impl Bilin {
    pub fn zeros(n: usize) -> Self {
        let d = m_dim(n);
        Self {
            n,
            coeffs: vec![0.0; d * d * d],
        }
    }

    pub fn from_vec(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let d = m_dim(n);
        if coeffs.len() != d * d * d {
            return Err(Error::ShapeMismatch {
                expected: d * d * d,
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMVec("bilinear map has non-finite coefficients".into()));
        }
        Ok(Self { n, coeffs })
    }

    /// Tabulates a map given on vectors.
    pub fn from_fn(n: usize, f: impl Fn(&MVec, &MVec) -> MVec) -> Self {
        let basis = standard_basis(n);
        let d = basis.len();
        let mut coeffs = Vec::with_capacity(d * d * d);
        for x in &basis {
            for y in &basis {
                let v = f(x, y);
                debug_assert_eq!(v.n(), n);
                coeffs.extend(v.coords());
            }
        }
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        m_dim(self.n)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.coeffs[(i * d + j) * d + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim();
        self.coeffs[(i * d + j) * d + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluates `alpha(X, Y)` through the coefficient tensor.
    pub fn apply(&self, x: &MVec, y: &MVec) -> Result<MVec> {
        for v in [x, y] {
            if v.n() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: v.n(),
                });
            }
        }
        let d = self.dim();
        let (xc, yc) = (x.coords(), y.coords());
        let mut out = vec![0.0; d];
        for i in 0..d {
            if xc[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = xc[i] * yc[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.get(i, j, k);
                }
            }
        }
        MVec::from_coords(self.n, &out)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Bilin) -> Bilin {
        assert_eq!(self.n, other.n, "Bilin dimension mismatch");
        Bilin {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Bilin {
        Bilin {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.coeffs)
    }

    pub fn max_abs_diff(&self, other: &Bilin) -> f64 {
        assert_eq!(self.n, other.n, "Bilin dimension mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `coeffs[((i*d + j)*d + k)*d + l]` is the `e_l` coefficient of `R(e_i, e_j, e_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvTensor {
    n: usize,
    coeffs: Vec<f64>,
}

impl CurvTensor {
    pub fn zeros(n: usize) -> Self {
        let d = m_dim(n);
        Self {
            n,
            coeffs: vec![0.0; d * d * d * d],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(&MVec, &MVec, &MVec) -> MVec) -> Self {
        let basis = standard_basis(n);
        let d = basis.len();
        let mut coeffs = Vec::with_capacity(d * d * d * d);
        for x in &basis {
            for y in &basis {
                for z in &basis {
                    coeffs.extend(f(x, y, z).coords());
                }
            }
        }
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        m_dim(self.n)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim();
        self.coeffs[((i * d + j) * d + k) * d + l]
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn apply(&self, x: &MVec, y: &MVec, z: &MVec) -> Result<MVec> {
        let d = self.dim();
        for v in [x, y, z] {
            if v.n() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: v.n(),
                });
            }
        }
        let (xc, yc, zc) = (x.coords(), y.coords(), z.coords());
        let mut out = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let w = xc[i] * yc[j] * zc[k];
                    if w == 0.0 {
                        continue;
                    }
                    for (l, o) in out.iter_mut().enumerate() {
                        *o += w * self.get(i, j, k, l);
                    }
                }
            }
        }
        MVec::from_coords(self.n, &out)
    }

    pub fn add_scaled(&self, s: f64, other: &CurvTensor) -> CurvTensor {
        assert_eq!(self.n, other.n, "CurvTensor dimension mismatch");
        CurvTensor {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.coeffs)
    }

    pub fn max_abs_diff(&self, other: &CurvTensor) -> f64 {
        assert_eq!(self.n, other.n, "CurvTensor dimension mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|R(e_i,e_j) + R(e_j,e_i)|` coefficient.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        worst = worst.max((self.get(i, j, k, l) + self.get(j, i, k, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Bilinear form on `m` (Ricci, S, Gram) as a `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank2Tensor {
    n: usize,
    m: DMatrix<f64>,
}

impl Rank2Tensor {
    pub fn zeros(n: usize) -> Self {
        let d = m_dim(n);
        Self {
            n,
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn from_matrix(n: usize, m: DMatrix<f64>) -> Result<Self> {
        let d = m_dim(n);
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::ShapeMismatch {
                expected: d * d,
                found: m.nrows() * m.ncols(),
            });
        }
        Ok(Self { n, m })
    }

    pub fn from_fn(n: usize, f: impl Fn(&MVec, &MVec) -> f64) -> Self {
        let basis = standard_basis(n);
        let d = basis.len();
        let m = DMatrix::from_fn(d, d, |i, j| f(&basis[i], &basis[j]));
        Self { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn eval(&self, x: &MVec, y: &MVec) -> Result<f64> {
        for v in [x, y] {
            if v.n() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: v.n(),
                });
            }
        }
        let xc = nalgebra::DVector::from_vec(x.coords());
        let yc = nalgebra::DVector::from_vec(y.coords());
        Ok(xc.dot(&(&self.m * yc)))
    }

    /// `(T + T^t) / 2`.
    pub fn sym(&self) -> Rank2Tensor {
        Rank2Tensor {
            n: self.n,
            m: (&self.m + self.m.transpose()) * 0.5,
        }
    }

    /// `(T - T^t) / 2`.
    pub fn antisym(&self) -> Rank2Tensor {
        Rank2Tensor {
            n: self.n,
            m: (&self.m - self.m.transpose()) * 0.5,
        }
    }

    pub fn add_scaled(&self, s: f64, other: &Rank2Tensor) -> Rank2Tensor {
        assert_eq!(self.n, other.n, "Rank2Tensor dimension mismatch");
        Rank2Tensor {
            n: self.n,
            m: &self.m + &other.m * s,
        }
    }

    pub fn scale(&self, s: f64) -> Rank2Tensor {
        Rank2Tensor {
            n: self.n,
            m: &self.m * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    pub fn max_abs_diff(&self, other: &Rank2Tensor) -> f64 {
        (&self.m - &other.m).amax()
    }
}

/// Lowered torsion `omega[i][j][k] = g(T(e_i, e_j), e_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionForm {
    n: usize,
    coeffs: Vec<f64>,
}

impl TorsionForm {
    pub(crate) fn new(n: usize, coeffs: Vec<f64>) -> Self {
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = m_dim(self.n);
        self.coeffs[(i * d + j) * d + k]
    }

    /// Largest violation of `omega(X,Y,Z) = -omega(Y,X,Z) = -omega(X,Z,Y)`.
    pub fn skew_defect(&self) -> f64 {
        let d = m_dim(self.n);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let w = self.get(i, j, k);
                    worst = worst.max((w + self.get(j, i, k)).abs());
                    worst = worst.max((w + self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        self.skew_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }
}
