//! The Einstein condition with skew torsion: its equation in the skew-torsion
//! parameters, the classification of the solution set, a numeric solver, and
//! the scalar-curvature, Ricci-flat and flatness statements.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::Metric;
use crate::equivariance::LinearSpace;
use crate::error::{Error, Result};
use crate::families::{alpha_lc, skew_directions, FamilyParams, Regime};
use crate::linalg::GaussNewton;
use crate::nomizu::{einstein_residual, Nomizu};
use crate::tensor::Bilin;
use crate::tolerance::TAU_SOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarietyClass {
    Empty,
    OnePoint,
    TwoPoints,
    Line,
    Ellipsoid,
    Cone,
    HyperboloidOneSheet,
    HyperboloidTwoSheets,
}

impl VarietyClass {
    pub fn name(self) -> &'static str {
        match self {
            VarietyClass::Empty => "empty",
            VarietyClass::OnePoint => "one_point",
            VarietyClass::TwoPoints => "two_points",
            VarietyClass::Line => "line",
            VarietyClass::Ellipsoid => "ellipsoid",
            VarietyClass::Cone => "cone",
            VarietyClass::HyperboloidOneSheet => "hyperboloid_one_sheet",
            VarietyClass::HyperboloidTwoSheets => "hyperboloid_two_sheets",
        }
    }

    pub fn is_empty(self) -> bool {
        self == VarietyClass::Empty
    }
}

impl fmt::Display for VarietyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn mul(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

/// `sum_i coeffs[i] x_i^2 = rhs` in the skew-torsion coordinates, or, for
/// `n = 1`, a condition on `eps` alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EinsteinEquation {
    Quadric {
        variables: Vec<&'static str>,
        coeffs: Vec<f64>,
        rhs: f64,
        /// Sign of `rhs` read off its factors, so that boundary values of
        /// `eps` are classified exactly.
        rhs_sign: Sign,
    },
    /// Holds for every parameter iff `eps = -1`.
    EpsOnly { holds: bool },
}

impl EinsteinEquation {
    /// `lhs - rhs`; for `n = 1` the constant `eps + 1`.
    pub fn residual(&self, eps: f64, coords: &[f64]) -> f64 {
        match self {
            EinsteinEquation::Quadric { coeffs, rhs, .. } => {
                coeffs.iter().zip(coords).map(|(c, x)| c * x * x).sum::<f64>() - rhs
            }
            EinsteinEquation::EpsOnly { .. } => eps + 1.0,
        }
    }

    pub fn holds(&self, eps: f64, coords: &[f64], tol: f64) -> bool {
        self.residual(eps, coords).abs() <= tol
    }

    pub fn text(&self) -> String {
        match self {
            EinsteinEquation::Quadric { variables, coeffs, rhs, .. } => {
                let lhs: Vec<String> = coeffs
                    .iter()
                    .zip(variables)
                    .map(|(c, v)| match *c {
                        1.0 => format!("{v}^2"),
                        -1.0 => format!("-{v}^2"),
                        c => format!("{c}*{v}^2"),
                    })
                    .collect();
                format!("{} = {}", lhs.join(" + "), rhs)
            }
            EinsteinEquation::EpsOnly { holds } => format!("eps = -1 ({})", if *holds { "holds" } else { "fails" }),
        }
    }
}

fn check(n: usize, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidN(n));
    }
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::InvalidEps(eps));
    }
    Ok(())
}

/// Einstein equation in the coordinates of the skew-torsion family.
pub fn einstein_equation(n: usize, eps: f64) -> Result<EinsteinEquation> {
    check(n, eps)?;
    let nf = n as f64;
    let ratio_sign = Sign::of(eps + 1.0).mul(Sign::of(eps));
    Ok(match n {
        1 => EinsteinEquation::EpsOnly { holds: eps == -1.0 },
        2 => EinsteinEquation::Quadric {
            variables: vec!["s", "s3", "s4"],
            coeffs: vec![1.0, 1.0, 1.0],
            rhs: 3.0 * (eps + 1.0) / eps,
            rhs_sign: ratio_sign,
        },
        3 => EinsteinEquation::Quadric {
            variables: vec!["s", "s1", "s2"],
            coeffs: vec![eps, 1.0, 1.0],
            rhs: 2.0 * (eps + 1.0),
            rhs_sign: Sign::of(eps + 1.0),
        },
        _ => EinsteinEquation::Quadric {
            variables: vec!["s"],
            coeffs: vec![1.0],
            rhs: (nf + 1.0) / (nf - 1.0) * (eps + 1.0) / eps,
            rhs_sign: ratio_sign,
        },
    })
}

/// Geometric type of the solution set of an equation.
pub fn classify_equation(eq: &EinsteinEquation) -> VarietyClass {
    use VarietyClass::*;
    match eq {
        EinsteinEquation::EpsOnly { holds: true } => Line,
        EinsteinEquation::EpsOnly { holds: false } => Empty,
        EinsteinEquation::Quadric { coeffs, rhs_sign, .. } => {
            let negative = coeffs.iter().filter(|c| **c < 0.0).count();
            match (coeffs.len(), negative, rhs_sign) {
                (1, 0, Sign::Positive) => TwoPoints,
                (1, 0, Sign::Zero) => OnePoint,
                (1, 0, Sign::Negative) => Empty,
                (3, 0, Sign::Positive) => Ellipsoid,
                (3, 0, Sign::Zero) => OnePoint,
                (3, 0, Sign::Negative) => Empty,
                (3, 1, Sign::Positive) => HyperboloidOneSheet,
                (3, 1, Sign::Zero) => Cone,
                (3, 1, Sign::Negative) => HyperboloidTwoSheets,
                _ => unreachable!("only diagonal quadrics with at most one negative coefficient arise"),
            }
        }
    }
}

pub fn classify(n: usize, eps: f64) -> Result<VarietyClass> {
    Ok(classify_equation(&einstein_equation(n, eps)?))
}

/// Rows of the expected table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsRange {
    BelowMinusOne,
    MinusOne,
    MinusOneToZero,
    Positive,
}

impl EpsRange {
    pub const ALL: [EpsRange; 4] = [EpsRange::BelowMinusOne, EpsRange::MinusOne, EpsRange::MinusOneToZero, EpsRange::Positive];

    pub fn of(eps: f64) -> Option<EpsRange> {
        if eps < -1.0 {
            Some(EpsRange::BelowMinusOne)
        } else if eps == -1.0 {
            Some(EpsRange::MinusOne)
        } else if eps < 0.0 {
            Some(EpsRange::MinusOneToZero)
        } else if eps > 0.0 {
            Some(EpsRange::Positive)
        } else {
            None
        }
    }

    pub fn representative(self) -> f64 {
        match self {
            EpsRange::BelowMinusOne => -2.0,
            EpsRange::MinusOne => -1.0,
            EpsRange::MinusOneToZero => -0.5,
            EpsRange::Positive => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EpsRange::BelowMinusOne => "eps < -1",
            EpsRange::MinusOne => "eps = -1",
            EpsRange::MinusOneToZero => "-1 < eps < 0",
            EpsRange::Positive => "eps > 0",
        }
    }
}

/// Columns of the expected table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NRange {
    AtLeastFour,
    Three,
    Two,
    One,
}

impl NRange {
    pub const ALL: [NRange; 4] = [NRange::AtLeastFour, NRange::Three, NRange::Two, NRange::One];

    pub fn of(n: usize) -> Option<NRange> {
        match n {
            0 => None,
            1 => Some(NRange::One),
            2 => Some(NRange::Two),
            3 => Some(NRange::Three),
            _ => Some(NRange::AtLeastFour),
        }
    }

    pub fn representative(self) -> usize {
        match self {
            NRange::AtLeastFour => 4,
            NRange::Three => 3,
            NRange::Two => 2,
            NRange::One => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NRange::AtLeastFour => "n >= 4",
            NRange::Three => "n = 3",
            NRange::Two => "n = 2",
            NRange::One => "n = 1",
        }
    }
}

/// Published classification, rows by `EpsRange::ALL`, columns by `NRange::ALL`.
pub const EXPECTED_TABLE: [[VarietyClass; 4]; 4] = {
    use VarietyClass::*;
    [
        [TwoPoints, HyperboloidTwoSheets, Ellipsoid, Empty],
        [OnePoint, Cone, OnePoint, Line],
        [Empty, HyperboloidOneSheet, Empty, Empty],
        [TwoPoints, Ellipsoid, Ellipsoid, Empty],
    ]
};

pub fn expected_class(nr: NRange, er: EpsRange) -> VarietyClass {
    let row = EpsRange::ALL.iter().position(|e| *e == er).expect("listed");
    let col = NRange::ALL.iter().position(|x| *x == nr).expect("listed");
    EXPECTED_TABLE[row][col]
}

/// Solver iterates beyond this coordinate size are discarded.
pub const SEARCH_BOUND: f64 = 1e3;

/// Evaluates the Einstein residual on an affine family `offset + sum c_i dir_i`.
#[derive(Debug, Clone)]
pub struct EinsteinSolver {
    n: usize,
    eps: f64,
    metric: Metric,
    nomizu: Nomizu,
    offset: Bilin,
    directions: Vec<Bilin>,
}

impl EinsteinSolver {
    pub fn new(n: usize, eps: f64, offset: Bilin, directions: Vec<Bilin>) -> Result<Self> {
        check(n, eps)?;
        for b in std::iter::once(&offset).chain(&directions) {
            if b.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.n() });
            }
        }
        Ok(Self {
            n,
            eps,
            metric: Metric::new(n, eps)?,
            nomizu: Nomizu::new(n),
            offset,
            directions,
        })
    }

    /// Uses an affine skew-torsion space whose basis is aligned with the
    /// named directions, so coordinates are the family parameters.
    pub fn from_space(space: &LinearSpace, eps: f64) -> Result<Self> {
        let offset = space
            .offset()
            .cloned()
            .ok_or_else(|| Error::Unsupported("solver needs an affine space".into()))?;
        Self::new(space.n(), eps, offset, space.basis().to_vec())
    }

    /// Uses the closed-form family directly.
    pub fn closed_form(n: usize, eps: f64) -> Result<Self> {
        check(n, eps)?;
        Self::new(n, eps, alpha_lc(n, eps)?, skew_directions(n, eps))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn nomizu(&self) -> &Nomizu {
        &self.nomizu
    }

    pub fn alpha(&self, coords: &[f64]) -> Bilin {
        assert_eq!(coords.len(), self.dim(), "coordinate count");
        coords
            .iter()
            .zip(&self.directions)
            .fold(self.offset.clone(), |acc, (c, d)| acc.add_scaled(*c, d))
    }

    /// Upper triangle of `Sym(Ric) - (scal / dim) g`.
    pub fn residual_vector(&self, coords: &[f64]) -> Vec<f64> {
        let r = einstein_residual(&self.nomizu.ricci_of(&self.alpha(coords)), &self.metric);
        let m = r.matrix();
        let d = m.nrows();
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                out.push(if i == j { m[(i, j)] } else { m[(i, j)] * std::f64::consts::SQRT_2 });
            }
        }
        out
    }

    /// Frobenius norm of the Einstein residual.
    pub fn defect(&self, coords: &[f64]) -> f64 {
        self.nomizu.einstein_defect(&self.alpha(coords), &self.metric)
    }

    /// Gauss-Newton from `seeds` random starts; returns up to `count`
    /// deduplicated points with defect at most `tol`, sorted lexicographically.
    pub fn solve(&self, count: usize, seeds: usize, seed: u64, tol: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gn = GaussNewton::default();
        let k = self.dim();
        let mut found: Vec<Vec<f64>> = Vec::new();
        for i in 0..seeds {
            // alternate a near and a wide box so both small and large components are hit
            let r = if i % 2 == 0 { 3.0 } else { 30.0 };
            let x0: Vec<f64> = (0..k).map(|_| rng.random_range(-r..r)).collect();
            let out = gn.run(|x| self.residual_vector(x), &x0);
            // far out the defect is lost to cancellation; a flat residual also
            // lets roundoff in the Jacobian throw the iterate there
            let bounded = out.x.iter().all(|v| v.abs() <= SEARCH_BOUND);
            if bounded && self.defect(&out.x) <= tol {
                found.push(out.x);
            }
        }
        // dedup in seed order so truncation keeps a spread of components
        let mut unique: Vec<Vec<f64>> = Vec::new();
        for p in found {
            let close = unique.iter().any(|q| {
                let dist = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                dist <= 1e-4
            });
            if !close {
                unique.push(p);
            }
        }
        unique.truncate(count);
        unique.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        unique
    }

    /// Minimum defect over a grid of `s` in `[lo, hi]` (first coordinate,
    /// the others held at zero), refined by Gauss-Newton from the best grid points.
    pub fn min_defect_on_line(&self, lo: f64, hi: f64, steps: usize) -> (f64, Vec<f64>) {
        let k = self.dim();
        let point = |s: f64| {
            let mut x = vec![0.0; k];
            x[0] = s;
            x
        };
        let mut grid: Vec<(f64, f64)> = (0..=steps)
            .map(|i| {
                let s = lo + (hi - lo) * i as f64 / steps as f64;
                (self.defect(&point(s)), s)
            })
            .collect();
        grid.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut best = (grid[0].0, point(grid[0].1));
        let gn = GaussNewton::default();
        for &(_, s) in grid.iter().take(5) {
            let out = gn.run(|x| self.residual_vector(x), &point(s));
            let inside = out.x[0] >= lo && out.x[0] <= hi && out.x[1..].iter().all(|v| *v == 0.0);
            let d = self.defect(&out.x);
            if inside && d < best.0 {
                best = (d, out.x);
            }
        }
        best
    }
}

/// Seeds used by [`solve_numeric`].
pub const SOLVER_SEEDS: usize = 64;

/// Numeric solutions of the Einstein condition in the family parameters.
/// Errors when the classification is nonempty but no seed converged.
pub fn solve_numeric_with(solver: &EinsteinSolver, count: usize, seed: u64, tol: f64) -> Result<Vec<Vec<f64>>> {
    let class = classify(solver.n(), solver.eps())?;
    let pts = solver.solve(count, SOLVER_SEEDS, seed, tol);
    if pts.is_empty() && !class.is_empty() {
        return Err(Error::SeedBudgetExhausted {
            seeds: SOLVER_SEEDS,
            kind: class.name().to_string(),
        });
    }
    Ok(pts)
}

/// [`solve_numeric_with`] on the closed-form family.
pub fn solve_numeric(n: usize, eps: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    solve_numeric_with(&EinsteinSolver::closed_form(n, eps)?, count, seed, TAU_SOL)
}

/// Random points of the solution set, drawn directly from the equation.
pub fn on_shell_samples(n: usize, eps: f64, count: usize, rng: &mut impl Rng) -> Result<Vec<Vec<f64>>> {
    let eq = einstein_equation(n, eps)?;
    let class = classify_equation(&eq);
    if class.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(count);
    let circle = |r: f64, rng: &mut dyn rand::RngCore| {
        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        [r * th.cos(), r * th.sin()]
    };
    for _ in 0..count {
        let p = match (&eq, n) {
            (EinsteinEquation::EpsOnly { .. }, _) => vec![rng.random_range(-10.0..10.0)],
            (EinsteinEquation::Quadric { rhs, .. }, 2) => {
                let r = rhs.max(0.0).sqrt();
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.iter().map(|x| r * x / norm).collect()
            }
            (EinsteinEquation::Quadric { rhs, .. }, 3) => {
                let c = *rhs;
                let s = if eps > 0.0 {
                    let m = (c / eps).sqrt();
                    rng.random_range(-m..=m)
                } else if c < 0.0 {
                    let m = (c / eps).sqrt();
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    sign * (m + rng.random_range(0.0..2.0))
                } else {
                    rng.random_range(-3.0..3.0)
                };
                let r2 = (c - eps * s * s).max(0.0);
                let [a, b] = circle(r2.sqrt(), rng);
                vec![s, a, b]
            }
            (EinsteinEquation::Quadric { rhs, .. }, _) => {
                let s = rhs.max(0.0).sqrt();
                vec![if rng.random_bool(0.5) { s } else { -s }]
            }
        };
        out.push(p);
    }
    Ok(out)
}

fn params(n: usize, eps: f64, coords: &[f64]) -> Result<FamilyParams> {
    FamilyParams::from_coords(n, eps, coords)
}

/// Scalar curvature of an Einstein connection from the `s`-parameters:
/// `2n(2n+1) eps (s^2 - 1)`, or `20 eps (s^2 + s3^2 + s4^2 - 1)` for `n = 2`.
/// Only meaningful on the solution set.
pub fn scalar_curvature_formula(n: usize, eps: f64, coords: &[f64]) -> Result<f64> {
    let p = params(n, eps, coords)?;
    let nf = n as f64;
    Ok(match p.regime {
        Regime::S5 => 20.0 * eps * (p.sigma() - 1.0),
        _ => 2.0 * nf * (2.0 * nf + 1.0) * eps * (p.s() * p.s() - 1.0),
    })
}

/// The same value after eliminating parameters with the equation.
pub fn scalar_curvature_reduced(n: usize, eps: f64, coords: &[f64]) -> Result<f64> {
    let p = params(n, eps, coords)?;
    let nf = n as f64;
    Ok(match n {
        1 => 6.0 * (1.0 - p.s() * p.s()),
        3 => 42.0 * (eps + 2.0 - p.p.norm_sqr()),
        _ => 2.0 * nf * (2.0 * nf + 1.0) * (2.0 * eps + nf + 1.0) / (nf - 1.0),
    })
}

/// Scalar curvature of any member of the skew family, on or off the solution set.
pub fn scalar_curvature_closed(n: usize, eps: f64, coords: &[f64]) -> Result<f64> {
    let p = params(n, eps, coords)?;
    let nf = n as f64;
    let s2 = p.s() * p.s();
    Ok(match p.regime {
        Regime::S5 => {
            let sig = p.sigma();
            8.0 * eps + 24.0 + 8.0 * eps * sig + 4.0 * eps * (sig - 1.0)
        }
        _ => 4.0 * nf * (eps * (s2 + 1.0) + nf + 1.0) + 2.0 * nf * eps * (s2 - 1.0) - 8.0 * nf * p.p.norm_sqr(),
    })
}

/// Solution set of the Einstein condition for one `(n, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinVariety {
    pub n: usize,
    pub eps: f64,
    pub kind: VarietyClass,
    pub equation: EinsteinEquation,
    pub sample_points: Vec<Vec<f64>>,
}

/// Classification together with up to `count` numerically found points.
pub fn einstein_variety(n: usize, eps: f64, count: usize, seed: u64, tol: f64) -> Result<EinsteinVariety> {
    let equation = einstein_equation(n, eps)?;
    let kind = classify_equation(&equation);
    let sample_points = solve_numeric_with(&EinsteinSolver::closed_form(n, eps)?, count, seed, tol)?;
    Ok(EinsteinVariety {
        n,
        eps,
        kind,
        equation,
        sample_points,
    })
}

/// Metric and parameters on which the Einstein connections have vanishing scalar curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciFlatLocus {
    pub n: usize,
    /// Admissible `eps`; `None` means the range in `condition`.
    pub eps: Option<f64>,
    pub condition: String,
}

impl RicciFlatLocus {
    pub fn contains_eps(&self, eps: f64) -> bool {
        match self.eps {
            Some(e) => e == eps,
            None => eps >= -2.0 && eps != 0.0,
        }
    }

    /// Points `(eps, coords)` on the locus.
    pub fn samples(&self, count: usize, rng: &mut impl Rng) -> Vec<(f64, Vec<f64>)> {
        let sign = |rng: &mut dyn rand::RngCore| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        (0..count)
            .map(|_| match self.n {
                2 => {
                    let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    (-1.5, v.iter().map(|x| x / norm).collect())
                }
                3 => {
                    let eps = if rng.random_bool(0.5) {
                        rng.random_range(-2.0..-0.01)
                    } else {
                        rng.random_range(0.01..3.0)
                    };
                    let r = (eps + 2.0_f64).sqrt();
                    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    (eps, vec![sign(rng), r * th.cos(), r * th.sin()])
                }
                n => (self.eps.unwrap_or(-(n as f64 + 1.0) / 2.0), vec![sign(rng)]),
            })
            .collect()
    }
}

pub fn ricci_flat_locus(n: usize) -> Result<RicciFlatLocus> {
    if n == 0 {
        return Err(Error::InvalidN(n));
    }
    let nf = n as f64;
    Ok(match n {
        1 => RicciFlatLocus {
            n,
            eps: Some(-1.0),
            condition: "eps = -1, s = +-1".into(),
        },
        2 => RicciFlatLocus {
            n,
            eps: Some(-1.5),
            condition: "eps = -3/2, s^2 + s3^2 + s4^2 = 1".into(),
        },
        3 => RicciFlatLocus {
            n,
            eps: None,
            condition: "0 != eps >= -2, s = +-1, s1^2 + s2^2 = eps + 2".into(),
        },
        _ => RicciFlatLocus {
            n,
            eps: Some(-(nf + 1.0) / 2.0),
            condition: format!("eps = {}, s = +-1", -(nf + 1.0) / 2.0),
        },
    })
}

/// Outcome of the search for flat connections in the skew family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatReport {
    pub n: usize,
    pub eps: f64,
    /// Smallest curvature norm found (grid plus refinement).
    pub min_curvature_norm: f64,
    pub argmin: Vec<f64>,
    /// Largest curvature norm over the predicted flat circle, when one is predicted.
    pub circle_max_curvature: Option<f64>,
}

impl FlatReport {
    pub fn flat_found(&self, tol: f64) -> bool {
        self.circle_max_curvature.is_some_and(|m| m <= tol)
    }
}

/// Curvature-norm search over the skew family. The grid covers `[-3, 3]` in
/// every coordinate; for `n = 3, eps = -1` the circle `s = 1, s1^2 + s2^2 = 1`
/// is evaluated as well.
pub fn flat_connection_check(n: usize, eps: f64) -> Result<FlatReport> {
    check(n, eps)?;
    if !(3..=6).contains(&n) {
        return Err(Error::Unsupported(format!("flatness search is implemented for 3 <= n <= 6, got {n}")));
    }
    let nz = Nomizu::new(n);
    let offset = alpha_lc(n, eps)?;
    let dirs = skew_directions(n, eps);
    let alpha = |x: &[f64]| x.iter().zip(&dirs).fold(offset.clone(), |acc, (c, d)| acc.add_scaled(*c, d));
    let curv = |x: &[f64]| nz.curvature(&alpha(x));
    let k = dirs.len();
    let axis: Vec<f64> = (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect();
    let mut grid: Vec<(f64, Vec<f64>)> = Vec::new();
    if k == 1 {
        for &s in &axis {
            grid.push((curv(&[s]).norm(), vec![s]));
        }
    } else {
        for &s in &axis {
            for &a in &axis {
                for &b in &axis {
                    let x = vec![s, a, b];
                    grid.push((curv(&x).norm(), x));
                }
            }
        }
    }
    grid.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let gn = GaussNewton::default();
    let mut best = grid[0].clone();
    for (_, x0) in grid.iter().take(5) {
        let out = gn.run(|x| curv(x).as_slice().to_vec(), x0);
        let v = curv(&out.x).norm();
        if v < best.0 {
            best = (v, out.x);
        }
    }
    let circle_max_curvature = (n == 3 && eps == -1.0).then(|| {
        (0..16)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 16.0;
                curv(&[1.0, th.cos(), th.sin()]).norm()
            })
            .fold(0.0, f64::max)
    });
    Ok(FlatReport {
        n,
        eps,
        min_curvature_norm: best.0,
        argmin: best.1,
        circle_max_curvature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_examples() {
        let eq = einstein_equation(5, -1.0).unwrap();
        assert_eq!(
            eq,
            EinsteinEquation::Quadric { variables: vec!["s"], coeffs: vec![1.0], rhs: 0.0, rhs_sign: Sign::Zero }
        );
        assert_eq!(classify_equation(&eq), VarietyClass::OnePoint);
        let eq = einstein_equation(2, -0.5).unwrap();
        match &eq {
            EinsteinEquation::Quadric { rhs, .. } => assert_eq!(*rhs, -3.0),
            _ => panic!(),
        }
        assert_eq!(classify_equation(&eq), VarietyClass::Empty);
        let eq = einstein_equation(3, -1.0).unwrap();
        assert_eq!(
            eq,
            EinsteinEquation::Quadric {
                variables: vec!["s", "s1", "s2"],
                coeffs: vec![-1.0, 1.0, 1.0],
                rhs: 0.0,
                rhs_sign: Sign::Zero
            }
        );
        assert_eq!(eq.text(), "-s^2 + s1^2 + s2^2 = 0");
        assert_eq!(classify_equation(&eq), VarietyClass::Cone);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(4, 2.0).unwrap(), VarietyClass::TwoPoints);
        assert_eq!(classify(3, -0.5).unwrap(), VarietyClass::HyperboloidOneSheet);
        assert_eq!(classify(1, -1.0).unwrap(), VarietyClass::Line);
        assert_eq!(classify(5, 0.7).unwrap(), VarietyClass::TwoPoints);
        assert!(classify(0, 1.0).is_err());
        assert!(classify(2, 0.0).is_err());
    }

    #[test]
    fn expected_table_matches_classification() {
        for er in EpsRange::ALL {
            for nr in NRange::ALL {
                let got = classify(nr.representative(), er.representative()).unwrap();
                assert_eq!(got, expected_class(nr, er), "{} {}", nr.label(), er.label());
            }
        }
    }

    #[test]
    fn classification_is_constant_on_ranges() {
        for n in 1..=7 {
            for i in 0..100 {
                let eps = -4.0 + 8.0 * (i as f64 + 0.5) / 100.0;
                if eps == 0.0 {
                    continue;
                }
                let er = EpsRange::of(eps).unwrap();
                let nr = NRange::of(n).unwrap();
                assert_eq!(classify(n, eps).unwrap(), expected_class(nr, er), "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn reduced_scalar_matches_formula_on_shell() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=5 {
            for eps in [-3.0, -1.5, -1.0, -0.5, 0.5, 2.0] {
                for p in on_shell_samples(n, eps, 20, &mut rng).unwrap() {
                    let a = scalar_curvature_formula(n, eps, &p).unwrap();
                    let b = scalar_curvature_reduced(n, eps, &p).unwrap();
                    let c = scalar_curvature_closed(n, eps, &p).unwrap();
                    let scale = 1.0 + a.abs();
                    assert!((a - b).abs() < 1e-9 * scale, "n={n} eps={eps} {a} {b}");
                    assert!((a - c).abs() < 1e-9 * scale, "n={n} eps={eps} {a} {c}");
                }
            }
        }
    }

    #[test]
    fn scalar_curvature_examples() {
        assert_eq!(scalar_curvature_formula(1, -1.0, &[1.0]).unwrap(), 0.0);
        assert_eq!(scalar_curvature_reduced(4, -2.5, &[1.0]).unwrap(), 0.0);
        assert_eq!(scalar_curvature_reduced(3, -2.0, &[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn on_shell_samples_satisfy_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for n in 1..=5 {
            for eps in [-3.0, -1.0, -0.5, 2.0] {
                let eq = einstein_equation(n, eps).unwrap();
                let pts = on_shell_samples(n, eps, 10, &mut rng).unwrap();
                assert_eq!(pts.is_empty(), classify(n, eps).unwrap().is_empty());
                for p in pts {
                    assert!(eq.holds(eps, &p, 1e-12), "n={n} eps={eps} {p:?}");
                }
            }
        }
    }

    #[test]
    fn ricci_flat_locus_descriptions() {
        assert_eq!(ricci_flat_locus(2).unwrap().eps, Some(-1.5));
        assert_eq!(ricci_flat_locus(4).unwrap().eps, Some(-2.5));
        assert!(ricci_flat_locus(3).unwrap().contains_eps(0.5));
        assert!(!ricci_flat_locus(3).unwrap().contains_eps(-2.5));
        assert!(ricci_flat_locus(0).is_err());
    }
}
