//! Finite-difference solver for the model equation on the truncated
//! cylinder, with Dirichlet rows at both ends.

mod banded;
pub mod checkpoint;
mod homotopy;
mod newton;
mod residual;

pub use banded::{BandLu, BandMatrix};
pub use homotopy::{homotopy_continue, validate_schedule, HomotopyFailure, HomotopyResult, HomotopyStage};
pub use newton::{assemble_jacobian, newton_solve, SolveReport};
pub use residual::{displace, linearization_apply, residual, ResidualField, TangentField};
