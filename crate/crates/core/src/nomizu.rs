//! Torsion, curvature and Ricci contractions of the invariant connection
//! attached to a bilinear map, computed directly from structure constants.

use nalgebra::DMatrix;

use crate::algebra::{MVec, Metric, StructureConstants};
use crate::error::{Error, Result};
use crate::tensor::{Bilin, CurvTensor, Rank2Tensor, TorsionForm};

/// Which slot of `R(X, Y, Z)` is traced to get `Ric`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicciConvention {
    /// `Ric(X, Y) = tr(Z -> R(Z, X, Y))`.
    FirstSlot,
    /// `Ric(X, Y) = tr(Z -> R(X, Z, Y))`, the negative of `FirstSlot`.
    SecondSlot,
}

impl RicciConvention {
    pub fn name(self) -> &'static str {
        match self {
            RicciConvention::FirstSlot => "first-slot",
            RicciConvention::SecondSlot => "second-slot",
        }
    }
}

impl std::str::FromStr for RicciConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-slot" => Ok(RicciConvention::FirstSlot),
            "second-slot" => Ok(RicciConvention::SecondSlot),
            other => Err(Error::Unsupported(format!("unknown Ricci convention {other:?}"))),
        }
    }
}

/// The convention that reproduces `Ric = 2n g` for the round sphere.
/// Checked by `families::calibrate_ricci_convention`.
pub const CALIBRATED: RicciConvention = RicciConvention::FirstSlot;

/// Generic calculus for one `n`.
#[derive(Debug, Clone)]
pub struct Nomizu {
    sc: StructureConstants,
}

fn check_n(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl Nomizu {
    pub fn new(n: usize) -> Self {
        Self {
            sc: StructureConstants::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.sc.n()
    }

    pub fn dim(&self) -> usize {
        self.sc.dim()
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.sc
    }

    /// `T(X,Y) = a(X,Y) - a(Y,X) - [X,Y]_m`.
    pub fn torsion(&self, alpha: &Bilin) -> Bilin {
        assert_eq!(alpha.n(), self.n(), "torsion: dimension mismatch");
        let d = self.dim();
        let mut out = Bilin::zeros(self.n());
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out.set(i, j, k, alpha.get(i, j, k) - alpha.get(j, i, k) - self.sc.m_part(i, j, k));
                }
            }
        }
        out
    }

    /// `R(X,Y)Z = a(X,a(Y,Z)) - a(Y,a(X,Z)) - a([X,Y]_m,Z) - [[X,Y]_h,Z]`.
    pub fn curvature(&self, alpha: &Bilin) -> CurvTensor {
        assert_eq!(alpha.n(), self.n(), "curvature: dimension mismatch");
        let d = self.dim();
        let a = alpha.as_slice();
        let at = |i: usize, j: usize, k: usize| a[(i * d + j) * d + k];
        let mut out = CurvTensor::zeros(self.n());
        let c = out.coeffs_mut();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let base = ((i * d + j) * d + k) * d;
                    for m in 0..d {
                        let yz = at(j, k, m);
                        let xz = at(i, k, m);
                        let xy = self.sc.m_part(i, j, m);
                        for l in 0..d {
                            c[base + l] += yz * at(i, m, l) - xz * at(j, m, l) - xy * at(m, k, l);
                        }
                    }
                    for l in 0..d {
                        c[base + l] -= self.sc.h_action(i, j, k, l);
                    }
                }
            }
        }
        out
    }

    /// Ricci contraction of a curvature tensor in the calibrated convention.
    pub fn ricci(&self, r: &CurvTensor) -> Rank2Tensor {
        self.ricci_with(r, CALIBRATED)
    }

    pub fn ricci_with(&self, r: &CurvTensor, conv: RicciConvention) -> Rank2Tensor {
        let d = r.dim();
        let m = DMatrix::from_fn(d, d, |a, b| {
            (0..d)
                .map(|l| match conv {
                    RicciConvention::FirstSlot => r.get(l, a, b, l),
                    RicciConvention::SecondSlot => r.get(a, l, b, l),
                })
                .sum()
        });
        Rank2Tensor::from_matrix(r.n(), m).expect("shape")
    }

    /// Ricci tensor of `alpha` without materializing the curvature.
    pub fn ricci_of(&self, alpha: &Bilin) -> Rank2Tensor {
        assert_eq!(alpha.n(), self.n(), "ricci: dimension mismatch");
        let d = self.dim();
        let a = alpha.as_slice();
        let at = |i: usize, j: usize, k: usize| a[(i * d + j) * d + k];
        // trace of Y -> a(Y, .) applied as the contraction a(l, m, l)
        let tr: Vec<f64> = (0..d).map(|m| (0..d).map(|l| at(l, m, l)).sum()).collect();
        let mut ric = DMatrix::zeros(d, d);
        for x in 0..d {
            for y in 0..d {
                let mut v = 0.0;
                for m in 0..d {
                    v += at(x, y, m) * tr[m];
                    for l in 0..d {
                        v -= at(l, y, m) * at(x, m, l);
                        v -= self.sc.m_part(l, x, m) * at(m, y, l);
                    }
                }
                for l in 0..d {
                    v -= self.sc.h_action(l, x, y, l);
                }
                ric[(x, y)] = v;
            }
        }
        let out = Rank2Tensor::from_matrix(self.n(), ric).expect("shape");
        match CALIBRATED {
            RicciConvention::FirstSlot => out,
            RicciConvention::SecondSlot => out.scale(-1.0),
        }
    }

    /// `g(T(e_i, e_j), e_k)`.
    pub fn torsion_form(&self, alpha: &Bilin, g: &Metric) -> TorsionForm {
        assert_eq!(g.n(), self.n(), "torsion_form: dimension mismatch");
        let t = self.torsion(alpha);
        let gd = g.gram_diag();
        let d = self.dim();
        let mut coeffs = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    coeffs.push(gd[k] * t.get(i, j, k));
                }
            }
        }
        TorsionForm::new(self.n(), coeffs)
    }

    /// `S(X,Y) = sum_j g(f_j,f_j) g(T(f_j,X), T(f_j,Y))` over the standard
    /// orthonormal basis.
    pub fn s_tensor(&self, alpha: &Bilin, g: &Metric) -> Rank2Tensor {
        assert_eq!(g.n(), self.n(), "s_tensor: dimension mismatch");
        let t = self.torsion(alpha);
        let gd = g.gram_diag();
        let d = self.dim();
        // rescaling e_j to unit length turns the weight into 1 / g(e_j, e_j)
        let m = DMatrix::from_fn(d, d, |x, y| {
            let mut v = 0.0;
            for j in 0..d {
                let mut inner = 0.0;
                for k in 0..d {
                    inner += gd[k] * t.get(j, x, k) * t.get(j, y, k);
                }
                v += inner / gd[j];
            }
            v
        });
        Rank2Tensor::from_matrix(self.n(), m).expect("shape")
    }

    /// Same sum over an arbitrary `g`-orthonormal basis with its signs.
    pub fn s_tensor_in_basis(&self, alpha: &Bilin, g: &Metric, basis: &[MVec], signs: &[f64]) -> Result<Rank2Tensor> {
        check_n(self.n(), g.n())?;
        if basis.len() != self.dim() || signs.len() != basis.len() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                found: basis.len().min(signs.len()),
            });
        }
        for f in basis {
            check_n(self.n(), f.n())?;
        }
        let t = self.torsion(alpha);
        Ok(Rank2Tensor::from_fn(self.n(), |x, y| {
            basis
                .iter()
                .zip(signs)
                .map(|(f, s)| {
                    let tx = t.apply(f, x).expect("checked n");
                    let ty = t.apply(f, y).expect("checked n");
                    s * g.eval(&tx, &ty).expect("checked n")
                })
                .sum()
        }))
    }

    /// `sum_j g(f_j,f_j) Ric(f_j,f_j)`.
    pub fn scalar(&self, ric: &Rank2Tensor, g: &Metric) -> f64 {
        let gd = g.gram_diag();
        (0..gd.len()).map(|i| ric.matrix()[(i, i)] / gd[i]).sum()
    }

    /// `|Sym(Ric) - (scal / dim) g|_F` in standard coordinates.
    pub fn einstein_defect(&self, alpha: &Bilin, g: &Metric) -> f64 {
        einstein_residual(&self.ricci_of(alpha), g).norm()
    }
}

/// The Einstein residual matrix `Sym(Ric) - (scal / dim) g` for a known Ricci tensor.
pub fn einstein_residual(ric: &Rank2Tensor, g: &Metric) -> Rank2Tensor {
    let gd = g.gram_diag();
    let scal: f64 = (0..gd.len()).map(|i| ric.matrix()[(i, i)] / gd[i]).sum();
    let gram = Rank2Tensor::from_matrix(g.n(), g.gram()).expect("shape");
    ric.sym().add_scaled(-scal / g.dim() as f64, &gram)
}

/// Constant curvature `R(X,Y)Z = k (g(Y,Z) X - g(X,Z) Y)`.
pub fn constant_curvature(g: &Metric, k: f64) -> CurvTensor {
    CurvTensor::from_fn(g.n(), |x, y, z| {
        let gyz = g.eval(y, z).expect("same n");
        let gxz = g.eval(x, z).expect("same n");
        &((k * gyz) * x) - &((k * gxz) * y)
    })
}

/// Curvature tensor evaluated through `apply`, term by term; slow and only
/// meant as a cross-check of `Nomizu::curvature`.
pub fn curvature_by_vectors(alpha: &Bilin) -> CurvTensor {
    use crate::algebra::{bracket_hm, bracket_mm};
    CurvTensor::from_fn(alpha.n(), |x, y, z| {
        let a = |u: &MVec, v: &MVec| alpha.apply(u, v).expect("same n");
        let (h, m) = bracket_mm(x, y).expect("same n");
        let t1 = a(x, &a(y, z));
        let t2 = a(y, &a(x, z));
        let t3 = a(&m, z);
        let t4 = bracket_hm(&h, z).expect("same n");
        &(&(&t1 - &t2) - &t3) - &t4
    })
}
