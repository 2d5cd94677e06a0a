//! Newton iteration for both load models, plus loss accounting.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{norm_inf, norm_l2, ComplexVector};
use crate::error::{Error, Result};
use crate::grid::GridModel;
use crate::linear::ConjugateBlockSolver;
use crate::wirtinger::{
    assemble_jacobian_cp, assemble_jacobian_zip, nodal_currents, power_mismatch, zip_residual,
};

/// Step halvings tried per iteration when damping is enabled.
const MAX_HALVINGS: usize = 10;

/// Largest constant accepted in `e_{k+1} <= C e_k^2` for the convergence tail.
pub const QUADRATIC_TAIL_CONSTANT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadModel {
    /// Every load draws its scheduled power regardless of voltage.
    ConstantPower,
    /// Loads draw `s |v|^alpha` with a per-node exponent.
    Zip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MismatchNorm {
    Infinity,
    Euclidean,
}

impl MismatchNorm {
    pub fn apply(self, v: &[Complex64]) -> f64 {
        match self {
            MismatchNorm::Infinity => norm_inf(v),
            MismatchNorm::Euclidean => norm_l2(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the residual norm, per-unit.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub model: LoadModel,
    pub norm: MismatchNorm,
    /// Flat-start value for every node; the slack voltage when `None`.
    pub flat_start_voltage: Option<Complex64>,
    /// Warm start; overrides the flat start when present.
    pub initial_voltage: Option<ComplexVector>,
    /// Halve the step while the residual norm grows.
    pub damping: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 20,
            model: LoadModel::ConstantPower,
            norm: MismatchNorm::Euclidean,
            flat_start_voltage: None,
            initial_voltage: None,
            damping: false,
        }
    }
}

impl SolverConfig {
    pub fn with_model(mut self, model: LoadModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_norm(mut self, norm: MismatchNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(
                "tolerance must be positive and finite",
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 0 is the initial point; `k` is the state after the `k`-th step.
    pub index: usize,
    /// Residual norm under the configured norm.
    pub mismatch_norm: f64,
    pub mismatch_inf: f64,
    pub mismatch_l2: f64,
    /// Infinity norm of the applied voltage step (0 for the initial point).
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub v_n: ComplexVector,
    pub i_n: ComplexVector,
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
    /// Residual recomputed from `v_n` under the configured norm.
    pub final_residual: f64,
    pub s_loss: Complex64,
    pub slack_injection: Complex64,
}

impl SolveResult {
    /// Number of voltage updates performed.
    pub fn steps(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.index)
    }

    /// Worst ratio `e_{k+1} / e_k^2` over the last two transitions, when at
    /// least three steps were taken.
    pub fn quadratic_tail_constant(&self) -> Option<f64> {
        let e: Vec<f64> = self.iterations.iter().map(|r| r.mismatch_norm).collect();
        if e.len() < 4 {
            return None;
        }
        let m = e.len();
        let ratio = |k: usize| e[k + 1] / (e[k] * e[k]);
        Some(f64::max(ratio(m - 3), ratio(m - 2)))
    }

    pub fn quadratic_tail_ok(&self) -> bool {
        self.quadratic_tail_constant()
            .is_none_or(|c| c < QUADRATIC_TAIL_CONSTANT)
    }

    /// Power drawn from the network by the non-slack nodes at the solved
    /// state, `-sum(v_k conj(i_k))`.
    pub fn absorbed_power(&self) -> Complex64 {
        -self
            .v_n
            .iter()
            .zip(self.i_n.iter())
            .map(|(v, i)| v * i.conj())
            .sum::<Complex64>()
    }
}

/// Runs the solver selected by `cfg.model`.
pub fn solve(grid: &GridModel, cfg: &SolverConfig) -> Result<SolveResult> {
    match cfg.model {
        LoadModel::ConstantPower => solve_constant_power(grid, cfg),
        LoadModel::Zip => solve_zip(grid, cfg),
    }
}

/// Newton iteration on `S - V o conj(I) = 0`; load exponents are ignored.
pub fn solve_constant_power(grid: &GridModel, cfg: &SolverConfig) -> Result<SolveResult> {
    newton(grid, cfg, LoadModel::ConstantPower)
}

/// Newton iteration on `conj(V) o I - conj(S) o |V|^alpha = 0`.
pub fn solve_zip(grid: &GridModel, cfg: &SolverConfig) -> Result<SolveResult> {
    newton(grid, cfg, LoadModel::Zip)
}

/// Solves each grid independently; one failure does not stop the rest.
pub fn batch_solve(grids: &[GridModel], cfg: &SolverConfig) -> Vec<Result<SolveResult>> {
    grids.iter().map(|g| solve(g, cfg)).collect()
}

fn residual(
    grid: &GridModel,
    model: LoadModel,
    v: &[Complex64],
) -> Result<(ComplexVector, ComplexVector)> {
    let i = nodal_currents(grid, v)?;
    let r = match model {
        LoadModel::ConstantPower => power_mismatch(grid.injections(), v, &i)?,
        LoadModel::Zip => zip_residual(grid, v, &i)?,
    };
    Ok((i, r))
}

fn newton(grid: &GridModel, cfg: &SolverConfig, model: LoadModel) -> Result<SolveResult> {
    cfg.validate()?;
    let mut v = match &cfg.initial_voltage {
        Some(v0) => {
            v0.check_len(grid.n())?;
            v0.clone()
        }
        None => ComplexVector::filled(
            grid.n(),
            cfg.flat_start_voltage.unwrap_or(grid.slack_voltage()),
        ),
    };
    if !v.is_finite() {
        return Err(Error::NonFinite("initial voltage"));
    }

    let record = |index: usize, r: &[Complex64], step_norm: f64| IterationRecord {
        index,
        mismatch_norm: cfg.norm.apply(r),
        mismatch_inf: norm_inf(r),
        mismatch_l2: norm_l2(r),
        step_norm,
    };

    let (mut i, mut r) = residual(grid, model, &v)?;
    let mut history = alloc::vec![record(0, &r, 0.0)];
    let mut eps = history[0].mismatch_norm;
    let mut solver = ConjugateBlockSolver::new();
    let mut iteration = 0;

    while eps > cfg.tolerance && eps.is_finite() && iteration < cfg.max_iterations {
        iteration += 1;
        let at = |e: Error| e.at_iteration(iteration);
        let (blocks, sign) = match model {
            LoadModel::ConstantPower => (assemble_jacobian_cp(grid, &v, &i, &r).map_err(at)?, 1.0),
            LoadModel::Zip => (assemble_jacobian_zip(grid, &v, &i, &r).map_err(at)?, -1.0),
        };
        let mut dv = solver.solve(&blocks.into_system()).map_err(at)?;

        let mut trial = advance(&v, &dv, sign);
        let mut next = residual(grid, model, &trial).map_err(at)?;
        if cfg.damping {
            let mut halvings = 0;
            while !(cfg.norm.apply(&next.1) < eps) && halvings < MAX_HALVINGS {
                for d in dv.iter_mut() {
                    *d *= 0.5;
                }
                trial = advance(&v, &dv, sign);
                next = residual(grid, model, &trial).map_err(at)?;
                halvings += 1;
            }
        }

        v = trial;
        (i, r) = next;
        let rec = record(iteration, &r, dv.norm_inf());
        eps = rec.mismatch_norm;
        history.push(rec);
    }

    // Certificate: everything below is recomputed from the final voltages.
    let (i, r) = residual(grid, model, &v)?;
    let final_residual = cfg.norm.apply(&r);
    let converged = final_residual <= cfg.tolerance;
    let (s_loss, slack_injection) = if v.is_finite() {
        compute_losses(grid, &v)?
    } else {
        (
            Complex64::new(f64::NAN, f64::NAN),
            Complex64::new(f64::NAN, f64::NAN),
        )
    };
    Ok(SolveResult {
        v_n: v,
        i_n: i,
        converged,
        iterations: history,
        final_residual,
        s_loss,
        slack_injection,
    })
}

fn advance(v: &[Complex64], dv: &[Complex64], sign: f64) -> ComplexVector {
    v.iter().zip(dv).map(|(v, d)| v + d * sign).collect()
}

/// Total complex power entering the network terminals and the slack share of
/// it: with `V = (v0, Vn)` and `I = Ybus V`, `S_loss = sum(v_k conj(i_k))` and
/// `slack_injection = v0 conj(i0)`.
pub fn compute_losses(grid: &GridModel, v_n: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if v_n.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            found: v_n.len(),
        });
    }
    let mut full = Vec::with_capacity(grid.n() + 1);
    full.push(grid.slack_voltage());
    full.extend_from_slice(v_n);
    let currents = grid.y_full().mul_vec(&full)?;
    let s_loss = full
        .iter()
        .zip(currents.iter())
        .map(|(v, i)| v * i.conj())
        .sum();
    Ok((s_loss, full[0] * currents[0].conj()))
}
