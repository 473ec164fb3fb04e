//! Closed-form connection families, the invariant tensors at the base point,
//! and the closed forms of their torsion, curvature and Ricci tensors.
//!
//! Vectors are written `X = (z, a)`, `Y = (w, b)`, `Z = (u, c)`.

use num_complex::Complex64;

use crate::algebra::{MVec, Metric, I};
use crate::error::{Error, Result};
use crate::nomizu::{Nomizu, RicciConvention};
use crate::tensor::{Bilin, CurvTensor, Rank2Tensor};
use crate::tolerance::TAU_NUM;

type C = Complex64;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// `u^t v` without conjugation.
fn dot(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn conj(u: &[C]) -> Vec<C> {
    u.iter().map(|c| c.conj()).collect()
}

fn cross(u: &[C], v: &[C]) -> Vec<C> {
    vec![
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn det3(u: &[C], v: &[C], w: &[C]) -> C {
    dot(u, &cross(v, w))
}

/// `theta(z1, z2) = (-conj z2, conj z1)`.
fn theta(z: &[C]) -> Vec<C> {
    vec![-z[1].conj(), z[0].conj()]
}

/// `sum_i c_i v_i`.
fn comb(n: usize, terms: &[(C, &[C])]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

/// Product of two imaginary scalars as the real number it is.
fn ab(a: C, b: C) -> f64 {
    (a * b).re
}

fn require_n(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps == 0.0 || !eps.is_finite() {
        Err(Error::InvalidEps(eps))
    } else {
        Ok(())
    }
}

/// Which extra invariant tensors exist for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `n = 1` and `n >= 4`.
    GeneralN,
    /// `n = 3`: adds the cross-product term.
    S7,
    /// `n = 2`: adds the `theta` terms.
    S5,
}

impl Regime {
    pub fn for_n(n: usize) -> Regime {
        match n {
            2 => Regime::S5,
            3 => Regime::S7,
            _ => Regime::GeneralN,
        }
    }

    /// Number of skew-torsion parameters.
    pub fn skew_dim(self) -> usize {
        match self {
            Regime::GeneralN => 1,
            Regime::S7 | Regime::S5 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::GeneralN => "general",
            Regime::S7 => "s7",
            Regime::S5 => "s5",
        }
    }
}

/// Parameters of the metric families.
///
/// The metric map is `(-eps q bz + t aw, -i Im(conj(q) z^t w))`, plus
/// `(p conj(z) x conj(w), 0)` on `S7` and
/// `(-eps p b theta(z) + p2 a theta(w), -i Im(conj(p) conj(theta(z))^t w))` on `S5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub regime: Regime,
    pub q: C,
    pub t: f64,
    pub p: C,
    pub p2: C,
}

/// `t` making the torsion of the `q`-family totally skew.
pub fn skew_t(n: usize, eps: f64, q: f64) -> f64 {
    eps * q - (n as f64 + 1.0) / n as f64 - 2.0 * eps
}

impl FamilyParams {
    pub fn metric(regime: Regime, q: C, t: f64) -> Self {
        Self {
            regime,
            q,
            t,
            p: C::new(0.0, 0.0),
            p2: C::new(0.0, 0.0),
        }
    }

    pub fn with_p(self, p: C, p2: C) -> Self {
        Self { p, p2, ..self }
    }

    pub fn levi_civita(n: usize, eps: f64) -> Self {
        Self::metric(Regime::for_n(n), re(1.0), skew_t(n, eps, 1.0))
    }

    /// The skew-torsion member with coordinates `s` and, on `S7`/`S5`,
    /// `aux = (s1, s2)` or `(s3, s4)`, so that `p = -aux[0] + i aux[1]`.
    pub fn skew(n: usize, eps: f64, s: f64, aux: [f64; 2]) -> Self {
        let regime = Regime::for_n(n);
        let q = 1.0 - s;
        let p = match regime {
            Regime::GeneralN => C::new(0.0, 0.0),
            _ => C::new(-aux[0], aux[1]),
        };
        let p2 = if regime == Regime::S5 { p * eps } else { C::new(0.0, 0.0) };
        Self {
            regime,
            q: re(q),
            t: skew_t(n, eps, q),
            p,
            p2,
        }
    }

    pub fn s(&self) -> f64 {
        1.0 - self.q.re
    }

    /// `(s1, s2)` on `S7`, `(s3, s4)` on `S5`.
    pub fn aux(&self) -> [f64; 2] {
        [-self.p.re, self.p.im]
    }

    /// Coordinates in the skew-torsion direction basis.
    pub fn coords(&self) -> Vec<f64> {
        match self.regime {
            Regime::GeneralN => vec![self.s()],
            _ => {
                let [a, b] = self.aux();
                vec![self.s(), a, b]
            }
        }
    }

    /// Inverse of [`FamilyParams::coords`] for the skew family.
    pub fn from_coords(n: usize, eps: f64, coords: &[f64]) -> Result<Self> {
        let regime = Regime::for_n(n);
        if coords.len() != regime.skew_dim() {
            return Err(Error::ShapeMismatch {
                expected: regime.skew_dim(),
                found: coords.len(),
            });
        }
        let aux = if coords.len() == 3 { [coords[1], coords[2]] } else { [0.0, 0.0] };
        Ok(Self::skew(n, eps, coords[0], aux))
    }

    /// `s^2 + |p|^2`.
    pub fn sigma(&self) -> f64 {
        let s = self.s();
        s * s + self.p.norm_sqr()
    }

    pub fn is_skew_eligible(&self, n: usize, eps: f64, tol: f64) -> bool {
        let base = self.q.im.abs() <= tol && (self.t - skew_t(n, eps, self.q.re)).abs() <= tol;
        match self.regime {
            Regime::S5 => base && (self.p2 - self.p * eps).norm() <= tol,
            _ => base,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match (self.regime, n) {
            (Regime::S7, 3) | (Regime::S5, 2) => Ok(()),
            (Regime::GeneralN, _) => Ok(()),
            (r, n) => Err(Error::Unsupported(format!("regime {} at n = {n}", r.name()))),
        }
    }
}

/// Base-point tensors of the sphere.
#[derive(Debug, Clone, Copy)]
pub struct PointTensors {
    n: usize,
}

impl PointTensors {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `psi(z, a) = (i z, 0)`.
    pub fn psi(&self, x: &MVec) -> MVec {
        MVec::from_formula(x.z().iter().map(|c| I * c).collect(), C::new(0.0, 0.0))
    }

    /// `eta(z, a) = i a`, a real number.
    pub fn eta(&self, x: &MVec) -> f64 {
        (I * x.a()).re
    }

    /// `xi = (0, -i)`.
    pub fn xi(&self) -> MVec {
        MVec::from_parts(vec![C::new(0.0, 0.0); self.n], -1.0).expect("valid")
    }

    /// `Phi(X, Y) = -Im(conj(z)^t w)`.
    pub fn phi(&self, x: &MVec, y: &MVec) -> f64 {
        -dot(&conj(x.z()), y.z()).im
    }

    fn need(&self, n: usize, what: &str) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is only defined for n = {n}")))
        }
    }

    /// `Theta(X, Y) = (-(conj z x conj w), 0)`.
    pub fn theta_form(&self, x: &MVec, y: &MVec) -> Result<MVec> {
        self.need(3, "Theta")?;
        let v = cross(&conj(x.z()), &conj(y.z()));
        Ok(MVec::from_formula(v.iter().map(|c| -c).collect(), C::new(0.0, 0.0)))
    }

    /// `Theta~(X, Y) = (i (conj z x conj w), 0)`.
    pub fn theta_tilde(&self, x: &MVec, y: &MVec) -> Result<MVec> {
        self.need(3, "Theta~")?;
        let v = cross(&conj(x.z()), &conj(y.z()));
        Ok(MVec::from_formula(v.iter().map(|c| I * c).collect(), C::new(0.0, 0.0)))
    }

    /// `Omega(X, Y, Z) = -Re det(z, w, u)`.
    pub fn omega(&self, x: &MVec, y: &MVec, z: &MVec) -> Result<f64> {
        self.need(3, "Omega")?;
        Ok(-det3(x.z(), y.z(), z.z()).re)
    }

    /// `Omega(X, Y, psi_1 Z) = Im det(z, w, u)`.
    pub fn omega_psi1(&self, x: &MVec, y: &MVec, z: &MVec) -> Result<f64> {
        self.need(3, "Omega")?;
        Ok(det3(x.z(), y.z(), z.z()).im)
    }

    /// `psi^(z, a) = (theta(z), 0)`.
    pub fn psi_hat(&self, x: &MVec) -> Result<MVec> {
        self.need(2, "psi^")?;
        Ok(MVec::from_formula(theta(x.z()), C::new(0.0, 0.0)))
    }
}

/// `(q1 bz + q2 aw, i(t ab + Im(q3 conj(z)^t w)))`.
pub fn alpha_general(n: usize, q1: C, q2: C, q3: C, t: f64) -> Bilin {
    Bilin::from_fn(n, |x, y| {
        let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
        let zp = comb(n, &[(q1 * b, z), (q2 * a, w)]);
        let ap = I * (t * ab(a, b) + (q3 * dot(&conj(z), w)).im);
        MVec::from_formula(zp, ap)
    })
}

/// General invariant map on `S7`: [`alpha_general`] plus `(q4 conj z x conj w, 0)`.
pub fn alpha_invariant_s7(q1: C, q2: C, q3: C, q4: C, t: f64) -> Bilin {
    let base = alpha_general(3, q1, q2, q3, t);
    let extra = Bilin::from_fn(3, |x, y| {
        let v = cross(&conj(x.z()), &conj(y.z()));
        MVec::from_formula(v.iter().map(|c| q4 * c).collect(), C::new(0.0, 0.0))
    });
    base.add_scaled(1.0, &extra)
}

/// General invariant map on `S5`:
/// `(q1 bz + q2 aw + p1 b theta(z) + p2 a theta(w), i(t ab + Im(q3 conj(z)^t w + p3 conj(theta(z))^t w)))`.
#[allow(clippy::too_many_arguments)]
pub fn alpha_invariant_s5(q1: C, q2: C, q3: C, p1: C, p2: C, p3: C, t: f64) -> Bilin {
    Bilin::from_fn(2, |x, y| {
        let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
        let (tz, tw) = (theta(z), theta(w));
        let zp = comb(2, &[(q1 * b, z), (q2 * a, w), (p1 * b, &tz), (p2 * a, &tw)]);
        let im = (q3 * dot(&conj(z), w) + p3 * dot(&conj(&tz), w)).im;
        MVec::from_formula(zp, I * (t * ab(a, b) + im))
    })
}

/// Metric families of every regime.
pub fn alpha_family(n: usize, eps: f64, params: &FamilyParams) -> Result<Bilin> {
    check_eps(eps)?;
    params.check(n)?;
    let FamilyParams { regime, q, t, p, p2 } = *params;
    Ok(Bilin::from_fn(n, |x, y| {
        let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
        let zbar = conj(z);
        let mut zp = comb(n, &[(-eps * q * b, z), (t * a, w)]);
        let mut im = -(q.conj() * dot(&zbar, w)).im;
        match regime {
            Regime::GeneralN => {}
            Regime::S7 => {
                let v = cross(&zbar, &conj(w));
                zp = comb(n, &[(re(1.0), &zp), (p, &v)]);
            }
            Regime::S5 => {
                let (tz, tw) = (theta(z), theta(w));
                zp = comb(n, &[(re(1.0), &zp), (-eps * p * b, &tz), (p2 * a, &tw)]);
                im -= (p.conj() * dot(&conj(&tz), w)).im;
            }
        }
        MVec::from_formula(zp, I * im)
    }))
}

/// `(-eps q bz + t aw, -i Im(conj(q) conj(z)^t w))`.
pub fn alpha_metric(n: usize, eps: f64, q: C, t: f64) -> Result<Bilin> {
    alpha_family(n, eps, &FamilyParams::metric(Regime::GeneralN, q, t))
}

/// Levi-Civita map `(-eps bz - (eps + (n+1)/n) aw, -i Im(conj(z)^t w))`.
pub fn alpha_lc(n: usize, eps: f64) -> Result<Bilin> {
    alpha_metric(n, eps, re(1.0), -eps - (n as f64 + 1.0) / n as f64)
}

/// `(eps (bz - aw), i Im(conj(z)^t w))`.
pub fn direction_s(n: usize, eps: f64) -> Bilin {
    Bilin::from_fn(n, |x, y| {
        let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
        let zp = comb(n, &[(eps * b, z), (-eps * a, w)]);
        MVec::from_formula(zp, I * dot(&conj(z), w).im)
    })
}

/// The same direction assembled from `Phi, xi, eta, psi`.
pub fn direction_s_tensorial(n: usize, eps: f64) -> Bilin {
    let pt = PointTensors::new(n);
    Bilin::from_fn(n, |x, y| {
        let first = pt.phi(x, y) * &pt.xi();
        let second = &(pt.eta(x) * &pt.psi(y)) - &(pt.eta(y) * &pt.psi(x));
        &first + &(eps * &second)
    })
}

/// `Theta` and `Theta~` as bilinear maps (`n = 3`).
pub fn directions_s7() -> [Bilin; 2] {
    let pt = PointTensors::new(3);
    [
        Bilin::from_fn(3, |x, y| pt.theta_form(x, y).expect("n = 3")),
        Bilin::from_fn(3, |x, y| pt.theta_tilde(x, y).expect("n = 3")),
    ]
}

/// The `s3` and `s4` directions in coordinates (`n = 2`):
/// `(eps(b theta(z) - a theta(w)), i Im(conj(theta(z))^t w))` and
/// `(-i eps(b theta(z) - a theta(w)), i Re(conj(theta(z))^t w))`.
pub fn directions_s5(eps: f64) -> [Bilin; 2] {
    let make = |rot: C| {
        Bilin::from_fn(2, move |x, y| {
            let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
            let (tz, tw) = (theta(z), theta(w));
            let zp = comb(2, &[(rot * eps * b, &tz), (-rot * eps * a, &tw)]);
            let c = dot(&conj(&tz), w);
            // rot = 1 picks Im, rot = -i picks Re
            let scalar = (rot.conj() * c).im;
            MVec::from_formula(zp, I * scalar)
        })
    };
    [make(re(1.0)), make(-I)]
}

/// The `s3`, `s4` directions assembled from `Phi, xi, eta, psi, psi^, g`.
pub fn directions_s5_tensorial(eps: f64) -> Result<[Bilin; 2]> {
    let pt = PointTensors::new(2);
    let g = Metric::new(2, eps)?;
    let ph = |x: &MVec| pt.psi_hat(x).expect("n = 2");
    let d3 = Bilin::from_fn(2, |x, y| {
        let first = pt.phi(&ph(x), y) * &pt.xi();
        let second = &(pt.eta(x) * &pt.psi(&ph(y))) - &(pt.eta(y) * &pt.psi(&ph(x)));
        &first + &(eps * &second)
    });
    let d4 = Bilin::from_fn(2, |x, y| {
        let first = (-g.eval(&ph(x), y).expect("n = 2")) * &pt.xi();
        let second = &(pt.eta(x) * &ph(y)) - &(pt.eta(y) * &ph(x));
        &first + &(eps * &second)
    });
    Ok([d3, d4])
}

/// Skew-torsion direction basis in the order of [`FamilyParams::coords`].
pub fn skew_directions(n: usize, eps: f64) -> Vec<Bilin> {
    let mut out = vec![direction_s(n, eps)];
    match Regime::for_n(n) {
        Regime::GeneralN => {}
        Regime::S7 => out.extend(directions_s7()),
        Regime::S5 => out.extend(directions_s5(eps)),
    }
    out
}

/// `alpha_lc + s D`.
pub fn alpha_skew(n: usize, eps: f64, s: f64) -> Result<Bilin> {
    Ok(alpha_lc(n, eps)?.add_scaled(s, &direction_s(n, eps)))
}

/// `alpha_lc + s D + s1 Theta + s2 Theta~`.
pub fn alpha_skew_s7(eps: f64, s: f64, s1: f64, s2: f64) -> Result<Bilin> {
    let [th, tt] = directions_s7();
    Ok(alpha_skew(3, eps, s)?.add_scaled(s1, &th).add_scaled(s2, &tt))
}

/// `alpha_lc + s D + s3 D3 + s4 D4`.
pub fn alpha_skew_s5(eps: f64, s: f64, s3: f64, s4: f64) -> Result<Bilin> {
    let [d3, d4] = directions_s5(eps);
    Ok(alpha_skew(2, eps, s)?.add_scaled(s3, &d3).add_scaled(s4, &d4))
}

/// Closed-form torsion of [`alpha_family`].
pub fn closed_torsion(n: usize, eps: f64, params: &FamilyParams) -> Result<Bilin> {
    check_eps(eps)?;
    params.check(n)?;
    let FamilyParams { regime, q, t, p, p2 } = *params;
    let k = -eps * q - t - (n as f64 + 1.0) / n as f64;
    Ok(Bilin::from_fn(n, |x, y| {
        let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
        let mut zp = comb(n, &[(k * b, z), (-k * a, w)]);
        let mut ap = (q.re - 1.0) * (dot(&conj(w), z) - dot(&conj(z), w));
        match regime {
            Regime::GeneralN => {}
            Regime::S7 => {
                let v = cross(&conj(z), &conj(w));
                zp = comb(n, &[(re(1.0), &zp), (2.0 * p, &v)]);
            }
            Regime::S5 => {
                let (tz, tw) = (theta(z), theta(w));
                let kp = -eps * p - p2;
                zp = comb(n, &[(re(1.0), &zp), (kp * b, &tz), (-kp * a, &tw)]);
                ap += -2.0 * I * (p.conj() * dot(&conj(&tz), w)).im;
            }
        }
        MVec::from_formula(zp, ap)
    }))
}

/// Closed-form lowered torsion `2 eps s Re(a u^t conj w + b z^t conj u + c w^t conj z)`,
/// plus `2 Re(conj(p) det(z, w, u))` on `S7`. Skew family only.
pub fn closed_torsion_form(n: usize, eps: f64, params: &FamilyParams, x: &MVec, y: &MVec, z3: &MVec) -> Result<f64> {
    params.check(n)?;
    if params.regime == Regime::S5 {
        return Err(Error::Unsupported("closed torsion form on S5".into()));
    }
    for v in [x, y, z3] {
        require_n(n, v.n())?;
    }
    let (z, a, w, b, u, c) = (x.z(), x.a(), y.z(), y.a(), z3.z(), z3.a());
    let s = params.s();
    let mut v = 2.0 * eps * s * (a * dot(u, &conj(w)) + b * dot(z, &conj(u)) + c * dot(w, &conj(z))).re;
    if params.regime == Regime::S7 {
        v += 2.0 * (params.p.conj() * det3(z, w, u)).re;
    }
    Ok(v)
}

fn closed_curvature_vec(n: usize, eps: f64, params: &FamilyParams, x: &MVec, y: &MVec, zz: &MVec) -> MVec {
    let q = params.q.re;
    let (z, a, w, b, u, c) = (x.z(), x.a(), y.z(), y.a(), zz.z(), zz.a());
    let (zb, wb, ub) = (conj(z), conj(w), conj(u));
    let e = eps;
    let k1 = re(e * q * q / 2.0);
    let qq = q * q - 2.0 * q;
    let zp = comb(
        n,
        &[
            (k1 * (dot(&wb, u) - dot(w, &ub)), z),
            (k1 * (dot(z, &ub) - dot(&zb, u)), w),
            (dot(&wb, u), z),
            (-dot(&zb, u), w),
            ((-e * q + 2.0 * e + 1.0) * (dot(&wb, z) - dot(&zb, w)), u),
            (e * e * qq * c * b, z),
            (-e * e * qq * c * a, w),
        ],
    );
    let ap = -0.5 * e * qq * ((dot(&zb, u) + dot(z, &ub)) * b - (dot(&wb, u) + dot(w, &ub)) * a);
    let mut zp = zp;
    let mut ap = ap;
    if params.regime == Regime::S7 {
        let p = params.p;
        let term1 = comb(3, &[(a, &cross(&wb, &ub)), (-b, &cross(&zb, &ub))]);
        let term3 = comb(3, &[(re(1.0), &cross(&zb, &cross(w, u))), (re(-1.0), &cross(&wb, &cross(z, u)))]);
        zp = comb(
            3,
            &[
                (re(1.0), &zp),
                ((2.0 * e * q - 4.0 * e - 4.0) * p, &term1),
                (2.0 * e * q * p * c, &cross(&zb, &wb)),
                (p * p.conj(), &term3),
            ],
        );
        ap += 2.0 * q * I * (p.conj() * det3(z, w, u)).im;
    }
    MVec::from_formula(zp, ap)
}

/// Closed-form curvature of the skew family (`q` real). Not available on `S5`.
pub fn closed_curvature(n: usize, eps: f64, params: &FamilyParams) -> Result<CurvTensor> {
    check_eps(eps)?;
    params.check(n)?;
    if params.regime == Regime::S5 {
        return Err(Error::Unsupported("closed curvature on S5; use the generic calculus".into()));
    }
    Ok(CurvTensor::from_fn(n, |x, y, z| closed_curvature_vec(n, eps, params, x, y, z)))
}

/// Closed-form Ricci tensor of the skew family. Not available on `S5`.
pub fn closed_ricci(n: usize, eps: f64, params: &FamilyParams) -> Result<Rank2Tensor> {
    check_eps(eps)?;
    params.check(n)?;
    if params.regime == Regime::S5 {
        return Err(Error::Unsupported("closed Ricci on S5; only its symmetric part is known".into()));
    }
    let q = params.q.re;
    let nf = n as f64;
    let pp = params.p.norm_sqr();
    let zc = 2.0 * (eps * (q * q - 2.0 * q + 2.0) + nf + 1.0) - 4.0 * pp;
    let ac = 2.0 * nf * eps * eps * (q * q - 2.0 * q);
    Ok(Rank2Tensor::from_fn(n, |x, y| {
        zc * dot(x.z(), &conj(y.z())).re + ac * ab(x.a(), y.a())
    }))
}

/// Closed-form `S` tensor on `S5` (skew family).
pub fn closed_s_tensor_s5(eps: f64, params: &FamilyParams) -> Result<Rank2Tensor> {
    params.check(2)?;
    let sig = params.sigma();
    Ok(Rank2Tensor::from_fn(2, |x, y| {
        -8.0 * eps * sig * dot(x.z(), &conj(y.z())).re - 16.0 * eps * eps * sig * ab(x.a(), y.a())
    }))
}

/// Closed-form symmetric Ricci tensor of the skew family, every regime.
pub fn closed_sym_ricci(n: usize, eps: f64, params: &FamilyParams) -> Result<Rank2Tensor> {
    if params.regime != Regime::S5 {
        return closed_ricci(n, eps, params);
    }
    check_eps(eps)?;
    params.check(n)?;
    let sig = params.sigma();
    Ok(Rank2Tensor::from_fn(2, |x, y| {
        (2.0 * eps + 6.0 + 2.0 * eps * sig) * dot(x.z(), &conj(y.z())).re + (sig - 1.0) * 4.0 * eps * eps * ab(x.a(), y.a())
    }))
}

/// Picks the trace convention under which the generic Ricci tensor of the
/// Levi-Civita map at `n = 2, eps = -1` equals the closed form.
pub fn calibrate_ricci_convention() -> Result<RicciConvention> {
    let n = 2;
    let eps = -1.0;
    let nz = Nomizu::new(n);
    let r = nz.curvature(&alpha_lc(n, eps)?);
    let target = closed_sym_ricci(n, eps, &FamilyParams::levi_civita(n, eps))?;
    let hits: Vec<RicciConvention> = [RicciConvention::FirstSlot, RicciConvention::SecondSlot]
        .into_iter()
        .filter(|c| nz.ricci_with(&r, *c).max_abs_diff(&target) < TAU_NUM)
        .collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::Calibration("no trace convention reproduces the round-sphere Ricci tensor".into())),
        _ => Err(Error::Calibration("both trace conventions agree; the check is degenerate".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::m_dim;
    use crate::nomizu::CALIBRATED;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_mvec(n: usize, rng: &mut ChaCha8Rng) -> MVec {
        let coords: Vec<f64> = (0..m_dim(n)).map(|_| rng.random_range(-1.0..1.0)).collect();
        MVec::from_coords(n, &coords).unwrap()
    }

    #[test]
    fn calibration_matches_constant() {
        assert_eq!(calibrate_ricci_convention().unwrap(), CALIBRATED);
    }

    #[test]
    fn general_with_lc_parameters_is_lc() {
        // the metric renaming forces q3 = -1 here
        for n in 1..=4 {
            for eps in [-2.0, 0.5] {
                let nf = n as f64;
                let g = alpha_general(n, c(-eps, 0.0), c(-(eps + (nf + 1.0) / nf), 0.0), c(-1.0, 0.0), 0.0);
                assert!(g.max_abs_diff(&alpha_lc(n, eps).unwrap()) < 1e-15);
            }
        }
    }

    #[test]
    fn all_zero_general_is_zero() {
        let z = alpha_general(2, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 0.0);
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn q_zero_t_zero_metric_map_vanishes() {
        // only the a-block t-term could survive, and t = 0
        let a = alpha_metric(3, 1.5, c(0.0, 0.0), 0.0).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        let b = alpha_metric(3, 1.5, c(0.0, 0.0), 2.0).unwrap();
        let x = MVec::from_parts(vec![c(0.0, 0.0); 3], 1.0).unwrap();
        let y = MVec::from_parts(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 0.0).unwrap();
        let v = b.apply(&x, &y).unwrap();
        assert_eq!(v.z()[0], c(0.0, 2.0));
    }

    #[test]
    fn lc_example_values() {
        // alpha_lc(2, -1)((0, i), (e1, 0)) = -(eps + 3/2) a w = -(1/2) i e1
        let a = alpha_lc(2, -1.0).unwrap();
        let x = MVec::from_parts(vec![c(0.0, 0.0); 2], 1.0).unwrap();
        let y = MVec::from_parts(vec![c(1.0, 0.0), c(0.0, 0.0)], 0.0).unwrap();
        let v = a.apply(&x, &y).unwrap();
        assert!((v.z()[0] - c(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(v.a(), c(0.0, 0.0));
        // n = 1, eps = -1: coefficient -(eps + 2) = -1 on a w
        let a1 = alpha_lc(1, -1.0).unwrap();
        let v1 = a1.apply(&MVec::from_parts(vec![c(0.0, 0.0)], 1.0).unwrap(), &MVec::from_parts(vec![c(1.0, 0.0)], 0.0).unwrap()).unwrap();
        assert!((v1.z()[0] - c(0.0, -1.0)).norm() < 1e-15);
        let a3 = alpha_lc(1, 3.0).unwrap();
        let v3 = a3.apply(&MVec::from_parts(vec![c(0.0, 0.0)], 1.0).unwrap(), &MVec::from_parts(vec![c(1.0, 0.0)], 0.0).unwrap()).unwrap();
        assert!((v3.z()[0] - c(0.0, -5.0)).norm() < 1e-15);
    }

    #[test]
    fn direction_renderings_agree() {
        for n in 1..=4 {
            for eps in [-1.3, 0.6] {
                assert!(direction_s(n, eps).max_abs_diff(&direction_s_tensorial(n, eps)) < 1e-15);
            }
        }
        for eps in [-1.3, 0.6] {
            let a = directions_s5(eps);
            let b = directions_s5_tensorial(eps).unwrap();
            assert!(a[0].max_abs_diff(&b[0]) < 1e-15);
            assert!(a[1].max_abs_diff(&b[1]) < 1e-15);
        }
    }

    #[test]
    fn skew_constructors_match_family_parameters() {
        let eps = -0.8;
        let a = alpha_skew_s7(eps, 0.3, -0.7, 1.1).unwrap();
        let b = alpha_family(3, eps, &FamilyParams::skew(3, eps, 0.3, [-0.7, 1.1])).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        let a = alpha_skew_s5(eps, 0.3, -0.7, 1.1).unwrap();
        let b = alpha_family(2, eps, &FamilyParams::skew(2, eps, 0.3, [-0.7, 1.1])).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        let a = alpha_skew(5, eps, 0.0).unwrap();
        assert!(a.max_abs_diff(&alpha_lc(5, eps).unwrap()) < 1e-15);
    }

    #[test]
    fn parameter_round_trip() {
        let p = FamilyParams::skew(3, 2.0, 0.25, [1.5, -0.5]);
        assert_eq!(p.coords(), vec![0.25, 1.5, -0.5]);
        assert!((p.s() - (1.0 - p.q.re)).abs() < 1e-15);
        assert!(p.is_skew_eligible(3, 2.0, 1e-14));
        let back = FamilyParams::from_coords(3, 2.0, &p.coords()).unwrap();
        assert_eq!(back, p);
        assert!(FamilyParams::from_coords(4, 2.0, &[1.0, 2.0]).is_err());
        let lc = FamilyParams::levi_civita(4, -1.0);
        assert!((lc.t - (1.0 - 5.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn point_tensor_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            let pt = PointTensors::new(n);
            for eps in [-2.0, 0.7] {
                let g = Metric::new(n, eps).unwrap();
                for _ in 0..10 {
                    let (x, y) = (random_mvec(n, &mut rng), random_mvec(n, &mut rng));
                    assert!((pt.phi(&x, &y) - g.eval(&x, &pt.psi(&y)).unwrap()).abs() < 1e-14);
                    let pp = pt.psi(&pt.psi(&x));
                    let zonly = MVec::from_parts(x.z().to_vec(), 0.0).unwrap();
                    assert!((&pp + &zonly).norm_sq() < 1e-28);
                }
            }
            assert!(pt.psi(&pt.xi()).norm_sq() == 0.0);
            assert!((pt.eta(&pt.xi()) - 1.0).abs() < 1e-15);
        }
        let pt3 = PointTensors::new(3);
        let g = Metric::new(3, -1.0).unwrap();
        for _ in 0..10 {
            let (x, y, z) = (random_mvec(3, &mut rng), random_mvec(3, &mut rng), random_mvec(3, &mut rng));
            let om = pt3.omega(&x, &y, &z).unwrap();
            assert!((om + pt3.omega(&y, &x, &z).unwrap()).abs() < 1e-14);
            assert!((om + pt3.omega(&x, &z, &y).unwrap()).abs() < 1e-14);
            assert!((g.eval(&pt3.theta_form(&x, &y).unwrap(), &z).unwrap() - om).abs() < 1e-14);
            let o1 = pt3.omega_psi1(&x, &y, &z).unwrap();
            assert!((g.eval(&pt3.theta_tilde(&x, &y).unwrap(), &z).unwrap() - o1).abs() < 1e-14);
        }
        assert!(PointTensors::new(4).theta_form(&random_mvec(4, &mut rng), &random_mvec(4, &mut rng)).is_err());
        assert!(PointTensors::new(3).psi_hat(&random_mvec(3, &mut rng)).is_err());
    }

    #[test]
    fn psi_hat_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pt = PointTensors::new(2);
        for eps in [-1.0, -0.4, 2.5] {
            let g = Metric::new(2, eps).unwrap();
            for _ in 0..10 {
                let (x, y) = (random_mvec(2, &mut rng), random_mvec(2, &mut rng));
                let hx = pt.psi_hat(&x).unwrap();
                let hy = pt.psi_hat(&y).unwrap();
                let (z, a, w, b) = (x.z(), x.a(), y.z(), y.a());
                let (tz, tw) = (theta(z), theta(w));
                let cc = dot(&conj(&tz), w);
                // Phi(psi^ X, Y) xi
                let lhs = pt.phi(&hx, &y) * &pt.xi();
                let rhs = MVec::from_formula(vec![c(0.0, 0.0); 2], I * cc.im);
                assert!((&lhs - &rhs).norm_sq() < 1e-28);
                // eta(X) psi(psi^ Y) - eta(Y) psi(psi^ X)
                let lhs = &(pt.eta(&x) * &pt.psi(&hy)) - &(pt.eta(&y) * &pt.psi(&hx));
                let rhs = MVec::from_formula(comb(2, &[(b, &tz), (-a, &tw)]), c(0.0, 0.0));
                assert!((&lhs - &rhs).norm_sq() < 1e-28);
                // Phi(psi(psi^ X), Y) xi
                let lhs = pt.phi(&pt.psi(&hx), &y) * &pt.xi();
                let rhs = MVec::from_formula(vec![c(0.0, 0.0); 2], -I * cc.re);
                assert!((&lhs - &rhs).norm_sq() < 1e-28);
                // eta(X) psi^ Y - eta(Y) psi^ X
                let lhs = &(pt.eta(&x) * &hy) - &(pt.eta(&y) * &hx);
                let rhs = MVec::from_formula(comb(2, &[(-I * b, &tz), (I * a, &tw)]), c(0.0, 0.0));
                assert!((&lhs - &rhs).norm_sq() < 1e-28);
                assert!((pt.phi(&pt.psi(&hx), &y) - g.eval(&hx, &y).unwrap()).abs() < 1e-14);
                // psi^ squared is minus the identity on the z-block
                let hh = pt.psi_hat(&hx).unwrap();
                assert!((&hh + &MVec::from_parts(z.to_vec(), 0.0).unwrap()).norm_sq() < 1e-28);
            }
        }
    }

    #[test]
    fn closed_forms_reject_wrong_regime() {
        let p = FamilyParams::skew(2, -1.0, 0.5, [0.1, 0.2]);
        assert!(closed_curvature(2, -1.0, &p).is_err());
        assert!(closed_ricci(2, -1.0, &p).is_err());
        assert!(closed_sym_ricci(2, -1.0, &p).is_ok());
        let s7 = FamilyParams::skew(3, -1.0, 0.5, [0.1, 0.2]);
        assert!(alpha_family(4, -1.0, &s7).is_err());
        assert!(alpha_family(4, 0.0, &FamilyParams::levi_civita(4, 1.0)).is_err());
    }

    #[test]
    fn closed_curvature_at_round_lc_is_constant_curvature() {
        for n in [1, 3, 4] {
            let g = Metric::new(n, -1.0).unwrap();
            let r = closed_curvature(n, -1.0, &FamilyParams::skew(n, -1.0, 0.0, [0.0, 0.0])).unwrap();
            assert!(r.max_abs_diff(&crate::nomizu::constant_curvature(&g, 1.0)) < 1e-13);
        }
    }
}
