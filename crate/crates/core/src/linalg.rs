//! Nullspaces with an explicit rank decision, least squares, and a damped
//! Gauss-Newton solver for small polynomial systems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tolerance::{RANK_GAP, RANK_REL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    /// Singular values at or below `rel_threshold * sigma_max` are treated as zero.
    pub rel_threshold: f64,
    /// Required ratio between the smallest kept and largest discarded singular value.
    pub min_gap: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            rel_threshold: RANK_REL,
            min_gap: RANK_GAP,
        }
    }
}

/// Right nullspace of a constraint matrix.
#[derive(Debug, Clone)]
pub struct Nullspace {
    /// Orthonormal columns spanning the nullspace (`ncols x dim`).
    pub basis: DMatrix<f64>,
    /// All singular values, descending. Has one entry per column.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `sigma[rank-1] / sigma[rank]`; infinite when nothing was discarded
    /// or the discarded values are exactly zero.
    pub gap: f64,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

fn decide_rank(sorted_desc: &[f64], policy: RankPolicy) -> Result<(usize, f64)> {
    let smax = sorted_desc.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok((0, f64::INFINITY));
    }
    let threshold = policy.rel_threshold * smax;
    let rank = sorted_desc.iter().take_while(|s| **s > threshold).count();
    let gap = match sorted_desc.get(rank) {
        None => f64::INFINITY,
        Some(&d) if d == 0.0 => f64::INFINITY,
        Some(&d) => sorted_desc[rank - 1] / d,
    };
    if gap < policy.min_gap {
        return Err(Error::RankAmbiguity {
            gap,
            required: policy.min_gap,
        });
    }
    Ok((rank, gap))
}

/// Row-sparse matrix used to assemble large constraint systems.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Merges repeated column indices and drops zero entries; empty rows are skipped.
    pub fn push_row(&mut self, mut entries: Vec<(usize, f64)>) {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!(c < self.ncols, "column index out of range");
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        if !merged.is_empty() {
            self.rows.push(merged);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(c, v)| v * x[*c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for (c, v) in r {
                m[(i, *c)] = *v;
            }
        }
        m
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Nullspace of a sparse constraint matrix `C`.
///
/// Columns are split into the connected components of the row/column
/// incidence graph, so `C` is block diagonal up to permutation. Each block is
/// handled through the symmetric eigendecomposition of `C_b^t C_b`, whose
/// eigenvectors are the right singular vectors of `C_b`; the singular values
/// are then re-measured as `|C_b v|`, which keeps the discarded ones at
/// roundoff level instead of the square root of it.
pub fn nullspace_sparse(c: &SparseMatrix, policy: RankPolicy) -> Result<Nullspace> {
    let ncols = c.ncols;
    let mut parent: Vec<usize> = (0..ncols).collect();
    for r in &c.rows {
        let first = find(&mut parent, r[0].0);
        for (col, _) in &r[1..] {
            let root = find(&mut parent, *col);
            if root != first {
                parent[root] = first;
            }
        }
    }
    let roots: Vec<usize> = (0..ncols).map(|i| find(&mut parent, i)).collect();

    let mut comp_of_root = vec![usize::MAX; ncols];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for (col, &root) in roots.iter().enumerate() {
        if comp_of_root[root] == usize::MAX {
            comp_of_root[root] = comps.len();
            comps.push(Vec::new());
        }
        comps[comp_of_root[root]].push(col);
    }
    let mut comp_rows: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for (ri, r) in c.rows.iter().enumerate() {
        comp_rows[comp_of_root[roots[r[0].0]]].push(ri);
    }

    // (sigma, component, local vector)
    let mut candidates: Vec<(f64, usize, DVector<f64>)> = Vec::with_capacity(ncols);
    let mut local_index = vec![0usize; ncols];
    for (ci, cols) in comps.iter().enumerate() {
        for (li, col) in cols.iter().enumerate() {
            local_index[*col] = li;
        }
        let m = cols.len();
        if comp_rows[ci].is_empty() {
            for li in 0..m {
                let mut v = DVector::zeros(m);
                v[li] = 1.0;
                candidates.push((0.0, ci, v));
            }
            continue;
        }
        let mut k = DMatrix::<f64>::zeros(m, m);
        for &ri in &comp_rows[ci] {
            let r = &c.rows[ri];
            for (ca, va) in r {
                let a = local_index[*ca];
                for (cb, vb) in r {
                    k[(a, local_index[*cb])] += va * vb;
                }
            }
        }
        let eig = SymmetricEigen::new(k);
        for j in 0..m {
            let v = eig.eigenvectors.column(j).into_owned();
            let sigma = comp_rows[ci]
                .iter()
                .map(|&ri| {
                    let s: f64 = c.rows[ri].iter().map(|(col, val)| val * v[local_index[*col]]).sum();
                    s * s
                })
                .sum::<f64>()
                .sqrt();
            candidates.push((sigma, ci, v));
        }
    }

    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let singular_values: Vec<f64> = candidates.iter().map(|c| c.0).collect();
    let (rank, gap) = decide_rank(&singular_values, policy)?;
    let null = &candidates[rank..];
    let mut basis = DMatrix::zeros(ncols, null.len());
    for (j, (_, ci, v)) in null.iter().enumerate() {
        for (li, col) in comps[*ci].iter().enumerate() {
            basis[(*col, j)] = v[li];
        }
    }
    Ok(Nullspace {
        basis,
        singular_values,
        rank,
        gap,
    })
}

/// Nullspace of a small dense matrix through its singular-value decomposition.
pub fn nullspace_dense(a: &DMatrix<f64>, policy: RankPolicy) -> Result<Nullspace> {
    let ncols = a.ncols();
    if ncols == 0 {
        return Ok(Nullspace {
            basis: DMatrix::zeros(0, 0),
            singular_values: Vec::new(),
            rank: 0,
            gap: f64::INFINITY,
        });
    }
    // Pad with zero rows so that V is square.
    let padded = if a.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let (rank, gap) = decide_rank(&singular_values, policy)?;
    let null = &order[rank..];
    let mut basis = DMatrix::zeros(ncols, null.len());
    for (j, &i) in null.iter().enumerate() {
        basis.set_column(j, &v_t.row(i).transpose());
    }
    Ok(Nullspace {
        basis,
        singular_values,
        rank,
        gap,
    })
}

/// Minimum-norm least-squares solution of `a x = b`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub residual: f64,
    pub rank: usize,
}

pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> LeastSquares {
    least_squares_rel(a, b, 1e-12)
}

/// [`least_squares`] discarding singular values below `rel * s_max`.
pub fn least_squares_rel(a: &DMatrix<f64>, b: &DVector<f64>, rel: f64) -> LeastSquares {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = smax * rel;
    let rank = svd.singular_values.iter().filter(|s| **s > cut).count();
    let x = if smax == 0.0 {
        DVector::zeros(a.ncols())
    } else {
        svd.solve(b, cut).expect("U and V were computed")
    };
    let residual = (a * &x - b).norm();
    LeastSquares { x, residual, rank }
}

/// Damped Gauss-Newton for residual maps `R^k -> R^m`.
///
/// The Jacobian is formed by central differences; for the quadratic residual
/// maps used in this crate that is exact up to roundoff for any step size.
#[derive(Debug, Clone, Copy)]
pub struct GaussNewton {
    /// Step fraction while the residual is above `polish_below`.
    pub damping: f64,
    /// Below this residual norm full steps are taken.
    pub polish_below: f64,
    /// Stop as soon as the residual norm reaches this value.
    pub target: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Relative singular-value cut of the Jacobian. Near a multiple root the
    /// Jacobian degenerates and roundoff in `f` would otherwise enter the step.
    pub jacobian_rel: f64,
}

impl Default for GaussNewton {
    fn default() -> Self {
        Self {
            damping: 0.5,
            polish_below: 1e-4,
            target: 1e-13,
            max_iter: 300,
            fd_step: 0.5,
            jacobian_rel: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GnOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl GaussNewton {
    pub fn jacobian(&self, f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], m: usize) -> DMatrix<f64> {
        let k = x.len();
        let mut j = DMatrix::zeros(m, k);
        let h = self.fd_step;
        let mut xp = x.to_vec();
        for c in 0..k {
            xp[c] = x[c] + h;
            let fp = f(&xp);
            xp[c] = x[c] - h;
            let fm = f(&xp);
            xp[c] = x[c];
            for r in 0..m {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    }

    /// Minimizes `|f(x)|` starting from `x0`, with backtracking so that the
    /// residual never increases.
    pub fn run(&self, f: impl Fn(&[f64]) -> Vec<f64>, x0: &[f64]) -> GnOutcome {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut x = x0.to_vec();
        let mut r = f(&x);
        let mut rn = norm(&r);
        let mut iterations = 0;
        while iterations < self.max_iter && rn > self.target {
            iterations += 1;
            let j = self.jacobian(&f, &x, r.len());
            let step = least_squares_rel(&j, &DVector::from_vec(r.clone()), self.jacobian_rel).x;
            let mut factor = if rn > self.polish_below { self.damping } else { 1.0 };
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - factor * si).collect();
                let rt = f(&trial);
                let tn = norm(&rt);
                if tn < rn {
                    accepted = rn - tn > 1e-14 * rn;
                    x = trial;
                    r = rt;
                    rn = tn;
                    break;
                }
                factor *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        GnOutcome {
            x,
            residual: rn,
            iterations,
        }
    }
}
