//! Independent validators for Newton results.
//!
//! Nothing here touches the Jacobian, the Wirtinger residual code or the
//! sparse LU: only the assembled admittance blocks and plain complex
//! arithmetic. Agreement with the Newton solver is therefore evidence rather
//! than a tautology.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::ComplexVector;
use crate::error::{Error, Result};
use crate::grid::GridModel;
use crate::newton::{compute_losses, IterationRecord, LoadModel, SolveResult};

/// Consecutive growing steps after which the fixed-point iteration is
/// declared divergent.
const DIVERGENCE_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Threshold on the infinity norm of successive iterate differences.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub model: LoadModel,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 500,
            model: LoadModel::ConstantPower,
        }
    }
}

/// Dense complex LU with partial pivoting.
#[derive(Debug, Clone)]
struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl DenseLu {
    fn new(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let mut lu: Vec<Complex64> = rows.into_iter().flatten().collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[a * n + k].norm().total_cmp(&lu[b * n + k].norm()))
                .unwrap();
            if !(lu[p * n + k].norm() > 1e-14 * scale) {
                return Err(Error::SingularMatrix { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

fn currents(grid: &GridModel, v: &[Complex64]) -> Vec<Complex64> {
    let v0 = grid.slack_voltage();
    let y = grid.y_nn();
    (0..grid.n())
        .map(|k| grid.y_n0()[k] * v0 + y.row(k).map(|(m, ykm)| ykm * v[m]).sum::<Complex64>())
        .collect()
}

fn exponent(grid: &GridModel, model: LoadModel, k: usize) -> f64 {
    match model {
        LoadModel::ConstantPower => 0.0,
        LoadModel::Zip => grid.alpha()[k],
    }
}

/// Z-bus fixed-point load flow:
/// `V <- Ynn^-1 (conj(S / V) |V|^alpha - Yn0 v0)`, with `Ynn` factorized once.
pub fn fixed_point_solve(grid: &GridModel, cfg: &OracleConfig) -> Result<SolveResult> {
    if !(cfg.tolerance > 0.0) || cfg.max_iterations == 0 {
        return Err(Error::InvalidConfig(
            "oracle tolerance and iteration cap must be positive",
        ));
    }
    let n = grid.n();
    let lu = DenseLu::new(grid.y_nn().to_dense())?;
    let v0 = grid.slack_voltage();
    let s = grid.injections();

    let mut v: Vec<Complex64> = vec![v0; n];
    let mut history = vec![IterationRecord {
        index: 0,
        mismatch_norm: residual_certificate(grid, &v, cfg.model),
        mismatch_inf: residual_certificate(grid, &v, cfg.model),
        mismatch_l2: f64::NAN,
        step_norm: 0.0,
    }];
    let mut converged = false;
    let mut growing = 0;
    let mut last_step = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        let rhs: Vec<Complex64> = (0..n)
            .map(|k| {
                let mag = v[k].norm();
                (s[k] / v[k]).conj() * libm::pow(mag, exponent(grid, cfg.model, k))
                    - grid.y_n0()[k] * v0
            })
            .collect();
        let next = lu.solve(&rhs);
        let step = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if !step.is_finite() {
            return Err(Error::OracleDivergence { iteration });
        }
        v = next;
        let cert = residual_certificate(grid, &v, cfg.model);
        history.push(IterationRecord {
            index: iteration,
            mismatch_norm: cert,
            mismatch_inf: cert,
            mismatch_l2: f64::NAN,
            step_norm: step,
        });
        if step < cfg.tolerance {
            converged = true;
            break;
        }
        growing = if step > last_step { growing + 1 } else { 0 };
        if growing >= DIVERGENCE_WINDOW {
            return Err(Error::OracleDivergence { iteration });
        }
        last_step = step;
    }

    let i_n: ComplexVector = currents(grid, &v).into();
    let (s_loss, slack_injection) = compute_losses(grid, &v)?;
    let final_residual = residual_certificate(grid, &v, cfg.model);
    Ok(SolveResult {
        v_n: v.into(),
        i_n,
        converged,
        iterations: history,
        final_residual,
        s_loss,
        slack_injection,
    })
}

/// Infinity norm of the model residual, recomputed from first principles:
/// `S - V o conj(I)` for constant power, `conj(V) o I - conj(S) o |V|^alpha`
/// for ZIP.
pub fn residual_certificate(grid: &GridModel, v_n: &[Complex64], model: LoadModel) -> f64 {
    let i = currents(grid, v_n);
    let s = grid.injections();
    (0..grid.n())
        .map(|k| {
            let r = match model {
                LoadModel::ConstantPower => s[k] - v_n[k] * i[k].conj(),
                LoadModel::Zip => {
                    v_n[k].conj() * i[k] - s[k].conj() * libm::pow(v_n[k].norm(), grid.alpha()[k])
                }
            };
            r.norm()
        })
        .fold(0.0, f64::max)
}

/// Both solutions of a slack node feeding one constant-power node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBusRoots {
    /// High-voltage (operational) root.
    pub operational: Complex64,
    pub low_voltage: Complex64,
}

impl TwoBusRoots {
    pub fn as_vector(&self) -> ComplexVector {
        ComplexVector::new(vec![self.operational, self.low_voltage])
    }
}

/// Solves `conj(v) y (v - v0) = conj(s)` for `v`, where `y` is the series
/// admittance and `s` the power injected at the load node.
///
/// With `u = |v|^2` the equation gives `conj(v) = (y u - conj(s)) / (y v0)`,
/// and taking the squared modulus yields
/// `|y|^2 u^2 - (2 Re(y s) + |y|^2 |v0|^2) u + |s|^2 = 0`.
pub fn two_bus_closed_form(v0: Complex64, y: Complex64, s: Complex64) -> Result<TwoBusRoots> {
    if y.norm() == 0.0 || v0.norm() == 0.0 {
        return Err(Error::InvalidConfig(
            "two-bus oracle needs nonzero y and v0",
        ));
    }
    let a = y.norm_sqr();
    let b = 2.0 * (y * s).re + a * v0.norm_sqr();
    let c = s.norm_sqr();
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::InfeasibleLoad);
    }
    let sq = libm::sqrt(disc);
    // stable pair of roots of a u^2 - b u + c
    let (hi, lo) = if b >= 0.0 {
        let hi = (b + sq) / (2.0 * a);
        (hi, if hi != 0.0 { c / (a * hi) } else { 0.0 })
    } else {
        let lo = (b - sq) / (2.0 * a);
        (if lo != 0.0 { c / (a * lo) } else { 0.0 }, lo)
    };
    if hi < 0.0 {
        return Err(Error::InfeasibleLoad);
    }
    let back = |u: f64| ((y * u - s.conj()) / (y * v0)).conj();
    Ok(TwoBusRoots {
        operational: back(hi),
        low_voltage: back(lo.max(0.0)),
    })
}
