//! Complex-domain Newton load flow for power distribution grids.
//!
//! Load-flow equations are linearized with Wirtinger derivatives, so the
//! Jacobian stays in complex form: a sparse block acting on the voltage step
//! and a diagonal block acting on its conjugate. Both constant-power and
//! exponential (ZIP-type, `|v|^alpha`) load models are supported, for radial
//! and meshed feeders alike.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and the
//! command-line front end live in the `wirtflow` crate.
//!
//! Sign convention: `GridModel::injections` holds the complex power injected
//! into the network at each non-slack node, i.e. the negated load. Load records
//! carry consumed power, so a negative active power in a load record models
//! distributed generation.

#![no_std]
#![forbid(unsafe_code)]
// Negated float comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod complex;
pub mod error;
pub mod grid;
pub mod linear;
pub mod newton;
pub mod oracle;
pub mod random;
pub mod wirtinger;

pub use complex::{ComplexVector, SparseComplexMatrix};
pub use error::{Error, Result};
pub use grid::{BranchRecord, GridInputs, GridModel, LoadRecord, TieMode};
pub use linear::{solve_conjugate_block, ConjugateBlockSolver, ConjugateBlockSystem};
pub use newton::{
    batch_solve, compute_losses, solve, solve_constant_power, solve_zip, IterationRecord,
    LoadModel, MismatchNorm, SolveResult, SolverConfig,
};
pub use num_complex::Complex64;
pub use wirtinger::{wirtinger_fd, JacobianBlocks, WirtingerPair};
