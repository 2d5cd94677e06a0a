//! The IEEE 69-node feeder (12.66 kV, 10 MVA base), compiled into the binary.

use wirtflow_core::{GridInputs, GridModel, TieMode};

use crate::io::{parse_branches, parse_loads, parse_ties, IngestError};

pub const IEEE69_BRANCHES: &str = include_str!("../../../data/ieee69/branches.csv");
pub const IEEE69_LOADS: &str = include_str!("../../../data/ieee69/loads.csv");
pub const IEEE69_TIES: &str = include_str!("../../../data/ieee69/ties.csv");

pub fn ieee69_inputs() -> Result<GridInputs, IngestError> {
    let branches = parse_branches(IEEE69_BRANCHES.as_bytes(), "ieee69/branches.csv")?;
    let loads = parse_loads(IEEE69_LOADS.as_bytes(), "ieee69/loads.csv")?;
    let ties = parse_ties(IEEE69_TIES.as_bytes(), "ieee69/ties.csv")?;
    Ok(GridInputs::new(branches, loads).with_ties(ties))
}

pub fn ieee69(mode: TieMode) -> Result<GridModel, IngestError> {
    Ok(ieee69_inputs()?.set_tie_mode(mode)?.build()?)
}
