//! Run reports: JSON for machines, a fixed-width table for people.

use std::fmt;

use serde::{Deserialize, Serialize};
use wirtflow_core::{
    Complex64, GridModel, LoadModel, MismatchNorm, SolveResult, SolverConfig, TieMode,
};

/// Sanity band for converged voltage magnitudes, per-unit.
pub const VOLTAGE_SANITY_BAND: (f64, f64) = (0.0, 2.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub source: String,
    /// Node count including the slack.
    pub nodes: usize,
    pub branches: usize,
    pub ties: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_override: Option<f64>,
    pub damping: bool,
}

/// Non-finite norms serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub index: usize,
    pub mismatch_norm: Option<f64>,
    pub mismatch_inf: Option<f64>,
    pub mismatch_l2: Option<f64>,
    pub step_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageRow {
    pub node: usize,
    pub magnitude: f64,
    /// Degrees in (-180, 180].
    pub angle_deg: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub grid: GridSummary,
    pub config: ConfigEcho,
    pub converged: bool,
    /// Voltage updates performed.
    pub steps: usize,
    pub iterations: Vec<IterationRow>,
    pub voltages: Vec<VoltageRow>,
    pub s_loss: ComplexValue,
    pub slack_injection: ComplexValue,
    pub final_residual: Option<f64>,
    pub quadratic_tail_ok: bool,
    /// Node ids whose converged magnitude falls outside the sanity band.
    pub sanity_violations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_time_s: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// `arg` in degrees, folded into (-180, 180].
pub fn angle_degrees(z: Complex64) -> f64 {
    let deg = z.arg().to_degrees();
    if deg <= -180.0 {
        deg + 360.0
    } else {
        deg
    }
}

pub fn model_name(model: LoadModel) -> &'static str {
    match model {
        LoadModel::ConstantPower => "cp",
        LoadModel::Zip => "zip",
    }
}

pub fn norm_name(norm: MismatchNorm) -> &'static str {
    match norm {
        MismatchNorm::Infinity => "inf",
        MismatchNorm::Euclidean => "l2",
    }
}

pub fn ties_name(mode: Option<TieMode>) -> &'static str {
    match mode {
        None => "none",
        Some(TieMode::Open) => "open",
        Some(TieMode::Closed) => "closed",
    }
}

impl RunReport {
    pub fn new(
        source: &str,
        ties: Option<TieMode>,
        grid: &GridModel,
        cfg: &SolverConfig,
        alpha_override: Option<f64>,
        result: &SolveResult,
    ) -> Self {
        let ids = grid.node_ids();
        let voltages: Vec<VoltageRow> = std::iter::once(grid.slack_voltage())
            .chain(result.v_n.iter().copied())
            .zip(ids)
            .map(|(v, &node)| VoltageRow {
                node,
                magnitude: v.norm(),
                angle_deg: angle_degrees(v),
                re: v.re,
                im: v.im,
            })
            .collect();
        let (lo, hi) = VOLTAGE_SANITY_BAND;
        let sanity_violations = if result.converged {
            voltages
                .iter()
                .filter(|row| !(lo..=hi).contains(&row.magnitude))
                .map(|row| row.node)
                .collect()
        } else {
            Vec::new()
        };
        Self {
            grid: GridSummary {
                source: source.to_owned(),
                nodes: grid.n() + 1,
                branches: grid.in_service_branches(),
                ties: ties_name(ties).to_owned(),
            },
            config: ConfigEcho {
                model: model_name(cfg.model).to_owned(),
                tolerance: cfg.tolerance,
                max_iterations: cfg.max_iterations,
                norm: norm_name(cfg.norm).to_owned(),
                alpha_override,
                damping: cfg.damping,
            },
            converged: result.converged,
            steps: result.steps(),
            iterations: result
                .iterations
                .iter()
                .map(|r| IterationRow {
                    index: r.index,
                    mismatch_norm: finite(r.mismatch_norm),
                    mismatch_inf: finite(r.mismatch_inf),
                    mismatch_l2: finite(r.mismatch_l2),
                    step_norm: finite(r.step_norm),
                })
                .collect(),
            voltages,
            s_loss: result.s_loss.into(),
            slack_injection: result.slack_injection.into(),
            final_residual: finite(result.final_residual),
            quadratic_tail_ok: result.quadratic_tail_ok(),
            sanity_violations,
            solve_time_s: None,
        }
    }

    pub fn with_solve_time(mut self, seconds: f64) -> Self {
        self.solve_time_s = Some(seconds);
        self
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn min_voltage(&self) -> Option<&VoltageRow> {
        self.voltages
            .iter()
            .min_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_owned(), |x| format!("{x:.3e}"))
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "grid {}: {} nodes, {} branches, ties {}",
            self.grid.source, self.grid.nodes, self.grid.branches, self.grid.ties
        )?;
        writeln!(
            f,
            "model {} tol {:e} norm {} max-iter {}",
            self.config.model, self.config.tolerance, self.config.norm, self.config.max_iterations
        )?;
        writeln!(f)?;
        writeln!(
            f,
            "{:>5} {:>12} {:>12} {:>12}",
            "iter", "|F|_2", "|F|_inf", "|dV|_inf"
        )?;
        for row in &self.iterations {
            writeln!(
                f,
                "{:>5} {:>12} {:>12} {:>12}",
                row.index,
                opt(row.mismatch_l2),
                opt(row.mismatch_inf),
                opt(row.step_norm)
            )?;
        }
        writeln!(f)?;
        writeln!(f, "{:>6} {:>10} {:>11}", "node", "|V| pu", "angle deg")?;
        for row in &self.voltages {
            let flag = if self.sanity_violations.contains(&row.node) {
                "  !"
            } else {
                ""
            };
            writeln!(
                f,
                "{:>6} {:>10.6} {:>11.5}{flag}",
                row.node, row.magnitude, row.angle_deg
            )?;
        }
        writeln!(f)?;
        let status = if self.converged {
            "converged"
        } else {
            "NOT converged"
        };
        writeln!(
            f,
            "{status} after {} steps, residual {}",
            self.steps,
            opt(self.final_residual)
        )?;
        if let Some(vmin) = self.min_voltage() {
            writeln!(f, "min |V| {:.6} pu at node {}", vmin.magnitude, vmin.node)?;
        }
        writeln!(
            f,
            "S_loss          {:.6e} {:+.6e}j pu",
            self.s_loss.re, self.s_loss.im
        )?;
        writeln!(
            f,
            "slack injection {:.6e} {:+.6e}j pu",
            self.slack_injection.re, self.slack_injection.im
        )?;
        if !self.quadratic_tail_ok {
            writeln!(f, "warning: convergence tail is not quadratic")?;
        }
        if !self.sanity_violations.is_empty() {
            writeln!(
                f,
                "warning: |V| outside [0, 2] pu at {:?}",
                self.sanity_violations
            )?;
        }
        if let Some(t) = self.solve_time_s {
            writeln!(f, "solve time {t:.6} s")?;
        }
        Ok(())
    }
}
