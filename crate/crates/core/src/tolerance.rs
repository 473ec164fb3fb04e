//! Numerical thresholds shared across the crate.

/// Structural invariants of constructed matrices (anti-Hermitian, traceless, ...).
pub const TAU_EXACT: f64 = 1e-12;

/// Derived identities between independently computed tensors.
pub const TAU_NUM: f64 = 1e-9;

/// Zero test for the Einstein defect and curvature norms of solved points.
pub const TAU_SOL: f64 = 1e-8;

/// Relative singular-value cut used for rank decisions.
pub const RANK_REL: f64 = 1e-8;

/// Minimum ratio between the smallest kept and largest discarded singular value.
pub const RANK_GAP: f64 = 1e6;

/// Runtime-adjustable tolerances; the CLI may override `num` and `sol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub exact: f64,
    pub num: f64,
    pub sol: f64,
    pub rank_rel: f64,
    pub rank_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: TAU_EXACT,
            num: TAU_NUM,
            sol: TAU_SOL,
            rank_rel: RANK_REL,
            rank_gap: RANK_GAP,
        }
    }
}

/// Agreement of the solved Levi-Civita map with its closed form.
pub const TAU_LC: f64 = 1e-10;
