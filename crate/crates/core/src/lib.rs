//! Certified dimensions of sets of separable states on multipartite
//! systems, and constructive algorithms for separable decompositions.
//!
//! * [`tensor`]: multipartite Hermitian operators, partial transposes,
//!   PSD/PPT/G-invariance predicates.
//! * [`linalg`]: exact (fraction-free) and numeric ranks, Hermitian
//!   coordinates.
//! * [`dim`]: dimension formulas, the product-state parametrization and its
//!   Jacobian, witness points, randomized certified probing.
//! * [`decomp`]: sampling, realification, the `2 x N` rank-length
//!   decomposition, the length-`MN` example, reduction to G-invariant states.
//! * [`io`]: JSON formats for states, decompositions and certificates.

pub mod decomp;
pub mod dim;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{GaussRat, Kind, Scalar};
pub use tensor::{HermitianOp, ProductVector, SubsetMask, SystemShape};
