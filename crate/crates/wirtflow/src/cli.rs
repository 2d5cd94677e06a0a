//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wirtflow_core::{solve, GridModel, LoadModel, MismatchNorm, SolverConfig, TieMode};

use crate::check::{check_grid, check_random, CheckConfig, GridCheck, Verdict};
use crate::io::{read_grid_inputs, IngestError, IngestOptions};
use crate::report::RunReport;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "wirtflow",
    version,
    about = "Complex-domain load flow for distribution grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one grid and report voltages, losses and the iteration history.
    Solve(SolveArgs),
    /// Cross-check Newton against the fixed-point oracle for both load models.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Cp,
    Zip,
}

impl From<ModelArg> for LoadModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Cp => LoadModel::ConstantPower,
            ModelArg::Zip => LoadModel::Zip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    Open,
    Closed,
}

impl From<TiesArg> for TieMode {
    fn from(t: TiesArg) -> Self {
        match t {
            TiesArg::Open => TieMode::Open,
            TiesArg::Closed => TieMode::Closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Inf,
    L2,
}

impl From<NormArg> for MismatchNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Inf => MismatchNorm::Infinity,
            NormArg::L2 => MismatchNorm::Euclidean,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Directory with branches.csv, loads.csv and optional ties.csv.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "open")]
    pub ties: TiesArg,
    /// Uniform load exponent replacing the per-node values.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_override: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "cp")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: NormArg,
    /// Halve steps that increase the mismatch.
    #[arg(long)]
    pub damping: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave wall-clock time out of the report.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Check this many seeded random feeders instead of --grid.
    #[arg(long, conflicts_with = "grid")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "random")]
    pub seed: u64,
    /// Newton tolerance, Euclidean norm.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
}

fn load(args: &GridArgs) -> Result<(String, Option<TieMode>, GridModel), IngestError> {
    let Some(dir) = &args.grid else {
        return Err(IngestError::Parse {
            source_name: "arguments".to_owned(),
            line: 0,
            message: "--grid is required".to_owned(),
        });
    };
    let inputs = read_grid_inputs(dir, &IngestOptions::default())?;
    let mode = (!inputs.ties.is_empty()).then_some(TieMode::from(args.ties));
    let inputs = match mode {
        Some(mode) => inputs.set_tie_mode(mode)?,
        None => inputs,
    };
    let mut grid = inputs.build()?;
    if let Some(alpha) = args.alpha_override {
        grid = grid.with_uniform_alpha(alpha);
    }
    Ok((dir.display().to_string(), mode, grid))
}

fn warn_alpha(grid: &GridModel, err: &mut dyn Write) {
    let nodes = grid.alpha_out_of_range();
    if !nodes.is_empty() {
        let _ = writeln!(
            err,
            "warning: load exponent outside [0, 2] at nodes {nodes:?}"
        );
    }
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let (source, ties, grid) = match load(&args.grid) {
        Ok(loaded) => loaded,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    warn_alpha(&grid, err);
    let cfg = SolverConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        model: args.model.into(),
        norm: args.norm.into(),
        damping: args.damping,
        ..SolverConfig::default()
    };
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }

    let start = Instant::now();
    let result = match solve(&grid, &cfg) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: solver failed: {e}");
            return EXIT_NO_CONVERGENCE;
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    let mut report = RunReport::new(
        &source,
        ties,
        &grid,
        &cfg,
        args.grid.alpha_override,
        &result,
    );
    if !args.deterministic {
        report = report.with_solve_time(elapsed);
    }
    let _ = write!(out, "{report}");
    if let Some(path) = &args.output {
        let written = report
            .to_json()
            .map_err(|e| e.to_string())
            .and_then(|json| std::fs::write(path, json + "\n").map_err(|e| e.to_string()));
        if let Err(e) = written {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    if result.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = CheckConfig {
        newton: SolverConfig::default()
            .with_tolerance(args.tol)
            .with_max_iterations(args.max_iter),
        ..CheckConfig::default()
    };
    if let Err(e) = cfg.newton.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }
    let checks: Vec<GridCheck> = match args.random {
        Some(n) => check_random(n, args.seed, args.grid.alpha_override, &cfg),
        None => match load(&args.grid) {
            Ok((source, _, grid)) => {
                warn_alpha(&grid, err);
                vec![check_grid(&source, &grid, &cfg)]
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INPUT;
            }
        },
    };

    for c in &checks {
        let _ = write!(out, "{c}");
    }
    let verdict = checks
        .iter()
        .map(GridCheck::verdict)
        .max()
        .unwrap_or(Verdict::Pass);
    let deviation = checks
        .iter()
        .map(GridCheck::max_deviation)
        .fold(0.0, f64::max);
    let passed = checks
        .iter()
        .filter(|c| c.verdict() == Verdict::Pass)
        .count();
    let _ = writeln!(
        out,
        "{passed}/{} grids pass, max per-node deviation {deviation:.3e}",
        checks.len()
    );
    verdict.exit_code()
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args, out, err),
        Command::Check(args) => cmd_check(args, out, err),
    }
}
