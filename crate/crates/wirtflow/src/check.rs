//! Cross-checks Newton against the fixed-point oracle for both load models.

use std::fmt;

use rayon::prelude::*;
use wirtflow_core::oracle::{fixed_point_solve, residual_certificate, OracleConfig};
use wirtflow_core::random::random_radial_grid;
use wirtflow_core::{solve, Complex64, GridModel, LoadModel, SolveResult, SolverConfig};

use crate::report::model_name;

/// Largest accepted per-node gap between Newton and the oracle.
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub newton: SolverConfig,
    pub oracle: OracleConfig,
    pub agreement: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            newton: SolverConfig::default().with_tolerance(1e-10),
            oracle: OracleConfig::default(),
            agreement: AGREEMENT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Disagreement,
    NonConvergence,
}

impl Verdict {
    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::NonConvergence => 2,
            Verdict::Disagreement => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheck {
    pub model: LoadModel,
    pub verdict: Verdict,
    pub newton_steps: Option<usize>,
    pub oracle_iterations: Option<usize>,
    /// Max per-node `|v_newton - v_oracle|`; NaN when either side failed.
    pub max_deviation: f64,
    pub worst_node: Option<usize>,
    /// Residual recomputed from the Newton voltages.
    pub certificate: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    pub label: String,
    pub models: Vec<ModelCheck>,
}

impl GridCheck {
    /// Non-convergence outranks disagreement.
    pub fn verdict(&self) -> Verdict {
        self.models
            .iter()
            .map(|m| m.verdict)
            .max()
            .unwrap_or(Verdict::Pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.models
            .iter()
            .map(|m| m.max_deviation)
            .fold(0.0, f64::max)
    }
}

fn check_model(grid: &GridModel, cfg: &CheckConfig, model: LoadModel) -> ModelCheck {
    let mut diagnostics = Vec::new();
    let newton = match solve(grid, &cfg.newton.clone().with_model(model)) {
        Ok(r) if r.converged => Some(r),
        Ok(r) => {
            diagnostics.push(format!(
                "newton: no convergence in {} steps, residual {:.3e}",
                r.steps(),
                r.final_residual
            ));
            None
        }
        Err(e) => {
            diagnostics.push(format!("newton: {e}"));
            None
        }
    };
    let oracle = match fixed_point_solve(
        grid,
        &OracleConfig {
            model,
            ..cfg.oracle
        },
    ) {
        Ok(r) if r.converged => Some(r),
        Ok(r) => {
            diagnostics.push(format!(
                "oracle: no convergence in {} iterations",
                r.steps()
            ));
            None
        }
        Err(e) => {
            diagnostics.push(format!("oracle: {e}"));
            None
        }
    };

    let certificate = newton
        .as_ref()
        .map_or(f64::NAN, |r| residual_certificate(grid, &r.v_n, model));
    let (max_deviation, worst_node) = match (&newton, &oracle) {
        (Some(a), Some(b)) => deviation(grid, a, b),
        _ => (f64::NAN, None),
    };
    let verdict = if newton.is_none() || oracle.is_none() {
        Verdict::NonConvergence
    } else if max_deviation.is_nan() || max_deviation >= cfg.agreement {
        diagnostics.push(format!(
            "max deviation {max_deviation:.3e} exceeds {:.0e}",
            cfg.agreement
        ));
        Verdict::Disagreement
    } else {
        Verdict::Pass
    };
    ModelCheck {
        model,
        verdict,
        newton_steps: newton.as_ref().map(SolveResult::steps),
        oracle_iterations: oracle.as_ref().map(SolveResult::steps),
        max_deviation,
        worst_node,
        certificate,
        diagnostics,
    }
}

fn deviation(grid: &GridModel, a: &SolveResult, b: &SolveResult) -> (f64, Option<usize>) {
    a.v_n
        .iter()
        .zip(b.v_n.iter())
        .map(|(x, y): (&Complex64, &Complex64)| (x - y).norm())
        .enumerate()
        .fold((0.0, None), |(best, at), (k, d)| {
            if d > best || d.is_nan() {
                (d, Some(grid.node_ids()[k + 1]))
            } else {
                (best, at)
            }
        })
}

/// Runs Newton and the oracle under both load models.
pub fn check_grid(label: &str, grid: &GridModel, cfg: &CheckConfig) -> GridCheck {
    GridCheck {
        label: label.to_owned(),
        models: [LoadModel::ConstantPower, LoadModel::Zip]
            .into_iter()
            .map(|m| check_model(grid, cfg, m))
            .collect(),
    }
}

/// Checks `count` seeded random feeders; grid `k` uses seed `seed + k`.
/// Output order is independent of thread scheduling.
pub fn check_random(
    count: usize,
    seed: u64,
    alpha_override: Option<f64>,
    cfg: &CheckConfig,
) -> Vec<GridCheck> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k);
            let label = format!("random seed {s}");
            let mut inputs = random_radial_grid(s);
            if let Some(alpha) = alpha_override {
                inputs = inputs.with_uniform_alpha(alpha);
            }
            match inputs.build() {
                Ok(grid) => check_grid(&label, &grid, cfg),
                Err(e) => GridCheck {
                    label,
                    models: vec![ModelCheck {
                        model: LoadModel::ConstantPower,
                        verdict: Verdict::NonConvergence,
                        newton_steps: None,
                        oracle_iterations: None,
                        max_deviation: f64::NAN,
                        worst_node: None,
                        certificate: f64::NAN,
                        diagnostics: vec![format!("grid: {e}")],
                    }],
                },
            }
        })
        .collect()
}

fn count(x: Option<usize>) -> String {
    x.map_or_else(|| "-".to_owned(), |n| n.to_string())
}

impl fmt::Display for GridCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.models {
            let status = match m.verdict {
                Verdict::Pass => "PASS",
                Verdict::Disagreement => "DISAGREE",
                Verdict::NonConvergence => "NO-CONV",
            };
            write!(
                f,
                "{status:<8} {:<20} {:<3} newton {:>2} oracle {:>3} max|dV| {:.3e}",
                self.label,
                model_name(m.model),
                count(m.newton_steps),
                count(m.oracle_iterations),
                m.max_deviation
            )?;
            if let Some(node) = m.worst_node {
                write!(f, " at node {node}")?;
            }
            writeln!(f, " cert {:.3e}", m.certificate)?;
            for d in &m.diagnostics {
                writeln!(f, "         {d}")?;
            }
        }
        Ok(())
    }
}
