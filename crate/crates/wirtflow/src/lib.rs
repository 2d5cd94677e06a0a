//! File formats, bundled feeders, reports and the command-line front end for
//! the `wirtflow-core` load-flow solver.

pub mod bundled;
pub mod check;
pub mod cli;
pub mod io;
pub mod report;

pub use io::{load_grid, parse_grid, read_grid_inputs, IngestError, IngestOptions};
pub use report::RunReport;
