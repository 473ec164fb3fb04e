//! Invariant connections on the Berger spheres `SU(n+1)/SU(n)`.
//!
//! The tangent space at the base point is modelled by [`algebra::MVec`];
//! connections are bilinear maps on it ([`tensor::Bilin`]). The
//! [`equivariance`] module computes the spaces of invariant, metric and
//! skew-torsion connections numerically, [`nomizu`] turns a connection into
//! torsion, curvature and Ricci tensors, [`families`] holds the closed-form
//! families, and [`einstein`] solves and classifies the Einstein condition.

pub mod algebra;
pub mod equivariance;
pub mod einstein;
pub mod error;
pub mod families;
pub mod linalg;
pub mod nomizu;
pub mod report;
pub mod tensor;
pub mod tolerance;

pub use algebra::{Metric, MVec};
pub use error::{Error, Result};
pub use tensor::{Bilin, CurvTensor, Rank2Tensor};
