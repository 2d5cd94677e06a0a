//! CSV grid descriptions.
//!
//! A grid directory holds `branches.csv` (`from,to,r_pu,x_pu,b_pu,in_service`),
//! `loads.csv` (`node,p_pu,q_pu,alpha`) and optionally `ties.csv` (`from,to`).
//! All quantities are per-unit; node 0 is the slack unless remapped.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wirtflow_core::{BranchRecord, Complex64, GridInputs, GridModel, LoadRecord, TieMode};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Grid(#[from] wirtflow_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    /// Node id in the files that acts as the slack.
    pub slack: usize,
    pub slack_voltage: Complex64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            slack: 0,
            slack_voltage: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Deserialize)]
struct BranchRow {
    from: usize,
    to: usize,
    r_pu: f64,
    x_pu: f64,
    b_pu: f64,
    in_service: u8,
}

#[derive(Debug, Deserialize)]
struct LoadRow {
    node: usize,
    p_pu: f64,
    q_pu: f64,
    alpha: f64,
}

#[derive(Debug, Deserialize)]
struct TieRow {
    from: usize,
    to: usize,
}

fn parse_rows<T, R>(
    reader: R,
    source_name: &str,
    required: &[&str],
) -> Result<Vec<(u64, T)>, IngestError>
where
    T: for<'de> Deserialize<'de>,
    R: Read,
{
    let parse_err = |line: u64, message: String| IngestError::Parse {
        source_name: source_name.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    for column in required {
        if !headers.iter().any(|h| h == *column) {
            return Err(parse_err(1, format!("missing column `{column}`")));
        }
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: T = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;
        rows.push((line, row));
    }
    Ok(rows)
}

pub fn parse_branches<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<BranchRecord>, IngestError> {
    let rows: Vec<(u64, BranchRow)> = parse_rows(
        reader,
        source_name,
        &["from", "to", "r_pu", "x_pu", "b_pu", "in_service"],
    )?;
    rows.into_iter()
        .map(|(line, r)| {
            let in_service = match r.in_service {
                0 => false,
                1 => true,
                other => {
                    return Err(IngestError::Parse {
                        source_name: source_name.to_owned(),
                        line,
                        message: format!("in_service must be 0 or 1, got {other}"),
                    })
                }
            };
            Ok(BranchRecord {
                from: r.from,
                to: r.to,
                impedance: Complex64::new(r.r_pu, r.x_pu),
                shunt: Complex64::new(0.0, r.b_pu),
                in_service,
            })
        })
        .collect()
}

pub fn parse_loads<R: Read>(reader: R, source_name: &str) -> Result<Vec<LoadRecord>, IngestError> {
    let rows: Vec<(u64, LoadRow)> =
        parse_rows(reader, source_name, &["node", "p_pu", "q_pu", "alpha"])?;
    Ok(rows
        .into_iter()
        .map(|(_, r)| LoadRecord::new(r.node, Complex64::new(r.p_pu, r.q_pu), r.alpha))
        .collect())
}

pub fn parse_ties<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<(usize, usize)>, IngestError> {
    let rows: Vec<(u64, TieRow)> = parse_rows(reader, source_name, &["from", "to"])?;
    Ok(rows.into_iter().map(|(_, r)| (r.from, r.to)).collect())
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Builds a grid from a branch file and a load file, keeping each branch's
/// `in_service` flag as written.
pub fn parse_grid(
    branch_file: &Path,
    load_file: &Path,
    options: &IngestOptions,
) -> Result<GridModel, IngestError> {
    let branches = parse_branches(open(branch_file)?, &branch_file.display().to_string())?;
    let loads = parse_loads(open(load_file)?, &load_file.display().to_string())?;
    Ok(GridInputs::new(branches, loads)
        .with_slack(options.slack, options.slack_voltage)
        .build()?)
}

/// Reads `branches.csv`, `loads.csv` and, when present, `ties.csv` from `dir`.
pub fn read_grid_inputs(dir: &Path, options: &IngestOptions) -> Result<GridInputs, IngestError> {
    let branch_file = dir.join("branches.csv");
    let load_file = dir.join("loads.csv");
    let tie_file = dir.join("ties.csv");
    let branches = parse_branches(open(&branch_file)?, &branch_file.display().to_string())?;
    let loads = parse_loads(open(&load_file)?, &load_file.display().to_string())?;
    let ties = if tie_file.exists() {
        parse_ties(open(&tie_file)?, &tie_file.display().to_string())?
    } else {
        Vec::new()
    };
    Ok(GridInputs::new(branches, loads)
        .with_ties(ties)
        .with_slack(options.slack, options.slack_voltage))
}

/// Reads a grid directory and builds it with the tie lines in `mode`.
pub fn load_grid(
    dir: &Path,
    mode: TieMode,
    options: &IngestOptions,
) -> Result<GridModel, IngestError> {
    Ok(read_grid_inputs(dir, options)?
        .set_tie_mode(mode)?
        .build()?)
}
