//! Classification of weighted composition operators `f -> u * (f o phi)` on
//! discrete L^2 spaces.
//!
//! The library decides, exactly in rational mode, whether such an operator is
//! densely defined, leaves its domain invariant, and is k-isometric,
//! k-expansive or k-hyperexpansive, together with a bounded-depth completely
//! alternating test. Finite spaces carry an independent brute-force matrix
//! oracle against which every verdict is cross-checked; geometric-tail spaces
//! get genuine every-atom verdicts through exact analysis of geometric
//! polynomials.

pub mod calculus;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod geopoly;
pub mod oracle;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use scalar::{Ext, Scalar, Sign};
pub use space::{validate, FiniteSystem, TailMap, TailSystem, ValidatedSystem, WeightedSystem};
