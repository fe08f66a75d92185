//! Finite-dimensional PT-symmetric quantum mechanics.
//!
//! The crate classifies PT-symmetric Hamiltonians, builds metric operators,
//! constructs Hermitian dilations on the doubled space, realizes the
//! non-unitary pipeline stages as unitary-plus-post-selection primitives and
//! evaluates the two-party no-signaling experiment.

pub mod completion;
pub mod dilation;
pub mod error;
pub mod fixtures;
pub mod metric;
pub mod nosignaling;
pub mod numkernel;
pub mod pipeline;
pub mod ptcore;
pub mod report;

pub use error::{ErrorCategory, PtError, Result};
pub use numkernel::{ComplexMatrix, ComplexVector, Tolerances};
