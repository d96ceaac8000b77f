//! Lowest-order virtual element operators and global assembly.

mod assembly;
mod local;

pub use assembly::{assemble, Coefficients, GlobalSystem};
pub use local::{element_operators, local_matrices, local_projector, ElementCoefficients, LocalOperators, Projector};
