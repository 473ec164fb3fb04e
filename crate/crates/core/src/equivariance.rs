//! Spaces of `h`-equivariant bilinear maps `m x m -> m` computed as explicit
//! nullspaces: all invariant connections, the metric ones, and the affine
//! space of metric connections with totally skew-symmetric torsion.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{h_action_matrix, m_dim, su_basis, Metric, StructureConstants};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, nullspace_dense, nullspace_sparse, RankPolicy, SparseMatrix};
use crate::tensor::Bilin;
use crate::tolerance::TAU_NUM;

/// Linear (or affine, when `offset` is set) subspace of bilinear maps.
#[derive(Debug, Clone)]
pub struct LinearSpace {
    n: usize,
    basis: Vec<Bilin>,
    matrix: DMatrix<f64>,
    offset: Option<Bilin>,
    singular_values: Vec<f64>,
    gap: f64,
}

impl LinearSpace {
    fn from_matrix(n: usize, matrix: DMatrix<f64>, offset: Option<Bilin>, singular_values: Vec<f64>, gap: f64) -> Self {
        let basis = matrix
            .column_iter()
            .map(|c| Bilin::from_vec(n, c.iter().copied().collect()).expect("shape"))
            .collect();
        Self {
            n,
            basis,
            matrix,
            offset,
            singular_values,
            gap,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `d^3` for `d = 2n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Dimension of the direction space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Bilin] {
        &self.basis
    }

    pub fn offset(&self) -> Option<&Bilin> {
        self.offset.as_ref()
    }

    /// Singular values of the constraint system that cut this space out.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Ratio between the smallest kept and largest discarded singular value.
    pub fn rank_gap(&self) -> f64 {
        self.gap
    }

    /// Smallest singular value of the stacked basis; positive iff independent.
    pub fn basis_condition(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `offset + sum_i c_i basis_i`.
    pub fn element(&self, coords: &[f64]) -> Bilin {
        assert_eq!(coords.len(), self.dim(), "coordinate count");
        let v = &self.matrix * DVector::from_column_slice(coords);
        let lin = Bilin::from_vec(self.n, v.iter().copied().collect()).expect("shape");
        match &self.offset {
            Some(o) => o.add_scaled(1.0, &lin),
            None => lin,
        }
    }

    /// Least-squares coordinates of `alpha` and the Euclidean norm of the
    /// part of `alpha` outside the space.
    pub fn coordinates(&self, alpha: &Bilin) -> Result<(Vec<f64>, f64)> {
        if alpha.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: alpha.n(),
            });
        }
        let target = match &self.offset {
            Some(o) => alpha.add_scaled(-1.0, o),
            None => alpha.clone(),
        };
        let b = DVector::from_column_slice(target.as_slice());
        if self.dim() == 0 {
            return Ok((Vec::new(), b.norm()));
        }
        let ls = least_squares(&self.matrix, &b);
        Ok((ls.x.iter().copied().collect(), ls.residual))
    }

    /// Distance from `alpha` to the (affine) space.
    pub fn residual(&self, alpha: &Bilin) -> Result<f64> {
        Ok(self.coordinates(alpha)?.1)
    }

    /// Replaces the basis by `directions`, which must lie in the direction
    /// space and span it. The offset is kept.
    pub fn aligned(&self, directions: Vec<Bilin>, tol: f64) -> Result<LinearSpace> {
        if directions.len() != self.dim() {
            return Err(Error::Alignment(format!(
                "{} directions for a space of dimension {}",
                directions.len(),
                self.dim()
            )));
        }
        let linear = LinearSpace {
            offset: None,
            ..self.clone()
        };
        for (i, dir) in directions.iter().enumerate() {
            let r = linear.residual(dir)?;
            if r > tol * (1.0 + dir.norm()) {
                return Err(Error::Alignment(format!("direction {i} lies outside the space (residual {r:.3e})")));
            }
        }
        let d3 = self.ambient_dim();
        let mut matrix = DMatrix::zeros(d3, directions.len());
        for (j, dir) in directions.iter().enumerate() {
            matrix.set_column(j, &DVector::from_column_slice(dir.as_slice()));
        }
        let out = LinearSpace {
            n: self.n,
            basis: directions,
            matrix,
            offset: self.offset.clone(),
            singular_values: self.singular_values.clone(),
            gap: self.gap,
        };
        if out.basis_condition() <= tol {
            return Err(Error::Alignment("directions are linearly dependent".into()));
        }
        Ok(out)
    }
}

/// Stacked constraint `[h, a(X,Y)] - a([h,X],Y) - a(X,[h,Y]) = 0` over a basis of
/// `h` and all basis pairs, acting on the `d^3` coefficients of `a`.
pub fn equivariance_constraints(n: usize) -> SparseMatrix {
    let d = m_dim(n);
    let idx = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
    let mut c = SparseMatrix::new(d * d * d);
    for h in su_basis(n) {
        let rho = h_action_matrix(&h);
        let nz: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|col| (0..d).filter(|r| rho[(*r, col)] != 0.0).map(|r| (r, rho[(r, col)])).collect())
            .collect();
        let nz_rows: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|row| (0..d).filter(|c| rho[(row, *c)] != 0.0).map(|c| (c, rho[(row, c)])).collect())
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut row = Vec::new();
                    for &(m, v) in &nz_rows[k] {
                        row.push((idx(i, j, m), v));
                    }
                    for &(m, v) in &nz[i] {
                        row.push((idx(m, j, k), -v));
                    }
                    for &(m, v) in &nz[j] {
                        row.push((idx(i, m, k), -v));
                    }
                    c.push_row(row);
                }
            }
        }
    }
    c
}

/// Largest coefficient of `L_h(alpha)` over the basis of `h`.
pub fn equivariance_residual(alpha: &Bilin) -> f64 {
    let c = equivariance_constraints(alpha.n());
    c.mul_vec(alpha.as_slice()).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest `|g(a(X,Y),Z) + g(Y,a(X,Z))|` over basis triples.
pub fn metric_residual(alpha: &Bilin, g: &Metric) -> f64 {
    let d = alpha.dim();
    let gd = g.gram_diag();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                let v = gd[l] * alpha.get(i, j, l) + gd[j] * alpha.get(i, l, j);
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub fn invariant_bilinear_space(n: usize) -> Result<LinearSpace> {
    invariant_bilinear_space_with(n, RankPolicy::default())
}

pub fn invariant_bilinear_space_with(n: usize, policy: RankPolicy) -> Result<LinearSpace> {
    if n == 0 {
        return Err(Error::InvalidN(n));
    }
    let ns = nullspace_sparse(&equivariance_constraints(n), policy)?;
    Ok(LinearSpace::from_matrix(n, ns.basis, None, ns.singular_values, ns.gap))
}

/// Metric connections inside a previously computed invariant space.
pub fn metric_connection_space_in(invariant: &LinearSpace, g: &Metric) -> Result<LinearSpace> {
    let n = invariant.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.n() });
    }
    let d = m_dim(n);
    let gd = g.gram_diag();
    let k = invariant.dim();
    let mut rows = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for l in j..d {
                rows.push((i, j, l));
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), k, |r, b| {
        let (i, j, l) = rows[r];
        let beta = &invariant.basis()[b];
        gd[l] * beta.get(i, j, l) + gd[j] * beta.get(i, l, j)
    });
    let ns = nullspace_dense(&a, RankPolicy::default())?;
    let matrix = &invariant.matrix * &ns.basis;
    Ok(LinearSpace::from_matrix(n, matrix, None, ns.singular_values, ns.gap))
}

pub fn metric_connection_space(n: usize, eps: f64) -> Result<LinearSpace> {
    let g = Metric::new(n, eps)?;
    metric_connection_space_in(&invariant_bilinear_space(n)?, &g)
}

/// The unique torsion-free element of a metric connection space.
pub fn levi_civita_in(metric_space: &LinearSpace, sc: &StructureConstants) -> Result<Bilin> {
    let n = metric_space.n();
    let d = m_dim(n);
    let k = metric_space.dim();
    let rows = d * d * d;
    let a = DMatrix::from_fn(rows, k, |r, b| {
        let (i, j, l) = (r / (d * d), (r / d) % d, r % d);
        let beta = &metric_space.basis()[b];
        beta.get(i, j, l) - beta.get(j, i, l)
    });
    let rhs = DVector::from_column_slice(sc.m_part_slice());
    let ls = least_squares(&a, &rhs);
    if ls.rank != k {
        return Err(Error::NotUnique(format!(
            "torsion map has rank {} on a {}-dimensional metric space",
            ls.rank, k
        )));
    }
    if ls.residual > TAU_NUM * (1.0 + rhs.norm()) {
        return Err(Error::Inconsistent(ls.residual));
    }
    Ok(metric_space.element(&ls.x.iter().copied().collect::<Vec<_>>()))
}

pub fn levi_civita_generic(n: usize, eps: f64) -> Result<Bilin> {
    let space = metric_connection_space(n, eps)?;
    levi_civita_in(&space, &StructureConstants::new(n))
}

/// Affine space `levi_civita + V` where `V` are the metric maps whose lowered
/// torsion part `g(b(X,Y) - b(Y,X), Z)` is a 3-form.
pub fn skew_torsion_space_in(metric_space: &LinearSpace, g: &Metric, levi_civita: &Bilin) -> Result<LinearSpace> {
    let n = metric_space.n();
    let d = m_dim(n);
    let gd = g.gram_diag();
    let k = metric_space.dim();
    let omega = |beta: &Bilin, i: usize, j: usize, l: usize| gd[l] * (beta.get(i, j, l) - beta.get(j, i, l));
    let mut rows = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for l in j..d {
                rows.push((i, j, l));
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), k, |r, b| {
        let (i, j, l) = rows[r];
        let beta = &metric_space.basis()[b];
        omega(beta, i, j, l) + omega(beta, i, l, j)
    });
    let ns = nullspace_dense(&a, RankPolicy::default())?;
    let matrix = &metric_space.matrix * &ns.basis;
    Ok(LinearSpace::from_matrix(
        n,
        matrix,
        Some(levi_civita.clone()),
        ns.singular_values,
        ns.gap,
    ))
}

pub fn skew_torsion_space(n: usize, eps: f64) -> Result<LinearSpace> {
    ConnectionSpaces::compute(n, eps).map(|s| s.skew)
}

/// All spaces for one `(n, eps)`, sharing the expensive invariant nullspace.
#[derive(Debug, Clone)]
pub struct ConnectionSpaces {
    pub metric_tensor: Metric,
    pub invariant: LinearSpace,
    pub metric: LinearSpace,
    pub levi_civita: Bilin,
    pub skew: LinearSpace,
}

impl ConnectionSpaces {
    pub fn compute(n: usize, eps: f64) -> Result<Self> {
        let g = Metric::new(n, eps)?;
        Self::from_invariant(invariant_bilinear_space(n)?, eps)
            .map(|s| Self { metric_tensor: g, ..s })
    }

    /// Reuses an invariant space (which does not depend on `eps`).
    pub fn from_invariant(invariant: LinearSpace, eps: f64) -> Result<Self> {
        let n = invariant.n();
        let g = Metric::new(n, eps)?;
        let metric = metric_connection_space_in(&invariant, &g)?;
        let levi_civita = levi_civita_in(&metric, &StructureConstants::new(n))?;
        let skew = skew_torsion_space_in(&metric, &g, &levi_civita)?;
        Ok(Self {
            metric_tensor: g,
            invariant,
            metric,
            levi_civita,
            skew,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nomizu::Nomizu;

    #[test]
    fn n1_has_no_constraints() {
        let inv = invariant_bilinear_space(1).unwrap();
        assert_eq!(inv.dim(), 27);
        assert_eq!(inv.ambient_dim(), 27);
    }

    #[test]
    fn small_dimensions() {
        let inv = invariant_bilinear_space(2).unwrap();
        assert_eq!(inv.dim(), 13);
        assert!(inv.rank_gap() >= 1e6);
        for b in inv.basis() {
            assert!(equivariance_residual(b) < TAU_NUM);
        }
        for eps in [-3.0, -1.0, -0.1, 0.5, 2.0] {
            let s = ConnectionSpaces::from_invariant(inv.clone(), eps).unwrap();
            assert_eq!(s.metric.dim(), 7);
            assert_eq!(s.skew.dim(), 3);
        }
    }

    #[test]
    fn metric_space_sits_inside_invariant_space() {
        let s = ConnectionSpaces::compute(3, 0.7).unwrap();
        for b in s.metric.basis() {
            assert!(s.invariant.residual(b).unwrap() < TAU_NUM);
            assert!(metric_residual(b, &s.metric_tensor) < TAU_NUM);
        }
    }

    #[test]
    fn levi_civita_is_torsion_free_and_metric() {
        for (n, eps) in [(1, 3.0), (2, -1.0), (3, 0.4)] {
            let s = ConnectionSpaces::compute(n, eps).unwrap();
            let t = Nomizu::new(n).torsion(&s.levi_civita);
            assert!(t.max_abs() < 1e-10);
            assert!(metric_residual(&s.levi_civita, &s.metric_tensor) < 1e-10);
        }
    }

    #[test]
    fn skew_space_elements_have_three_form_torsion() {
        let s = ConnectionSpaces::compute(2, -0.6).unwrap();
        let nz = Nomizu::new(2);
        for coords in [[1.0, 0.0, 0.0], [0.3, -2.0, 0.7], [-1.0, 1.0, 1.0]] {
            let alpha = s.skew.element(&coords);
            let omega = nz.torsion_form(&alpha, &s.metric_tensor);
            assert!(omega.is_skew(TAU_NUM), "defect {}", omega.skew_defect());
        }
    }

    #[test]
    fn alignment_rejects_wrong_directions() {
        let s = ConnectionSpaces::compute(1, -1.0).unwrap();
        let mut outside = Bilin::zeros(1);
        outside.set(0, 0, 0, 1.0);
        assert!(matches!(s.skew.aligned(vec![outside], TAU_NUM), Err(Error::Alignment(_))));
        assert!(s.skew.aligned(vec![], TAU_NUM).is_err());
        let ok = s.skew.aligned(vec![s.skew.basis()[0].scale(-3.0)], TAU_NUM).unwrap();
        assert_eq!(ok.dim(), 1);
        let (c, r) = ok.coordinates(&ok.element(&[0.25])).unwrap();
        assert!((c[0] - 0.25).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn coordinates_dimension_mismatch() {
        let s = invariant_bilinear_space(1).unwrap();
        assert!(s.coordinates(&Bilin::zeros(2)).is_err());
    }
}
