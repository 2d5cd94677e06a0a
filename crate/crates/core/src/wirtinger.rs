//! Load-flow residuals and their Wirtinger Jacobians.
//!
//! Both residuals are linearized in `(dV, conj(dV))` and divided row-wise by
//! `conj(v_k)`, which leaves the admittance block untouched and turns the
//! conjugate-variable coefficient into a diagonal:
//!
//! ```text
//! A * dV + diag(B) * conj(dV) = rhs
//! ```
//!
//! Constant power: `A = Ynn`, `B = I / conj(V)`, `rhs = conj(dS / V)`, and the
//! step is applied as `V + dV`.
//!
//! ZIP: with `h_k = (alpha_k / 2) conj(s_k) |v_k|^(alpha_k - 2)`,
//! `A = Ynn - diag(h)`, `B = I / conj(V) - h * V / conj(V)`,
//! `rhs = F / conj(V)`, and the step is applied as `V - dV`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{ComplexVector, SparseComplexMatrix};
use crate::error::{Error, Result};
use crate::grid::GridModel;
use crate::linear::ConjugateBlockSystem;

/// Voltage magnitude (pu) below which a node is treated as short-circuited.
pub const SHORT_CIRCUIT_FLOOR: f64 = 1e-9;

/// Default central-difference step for [`wirtinger_fd`].
pub const DEFAULT_FD_STEP: f64 = 1e-7;

/// `I = Yn0 * v0 + Ynn * V`.
pub fn nodal_currents(grid: &GridModel, v: &[Complex64]) -> Result<ComplexVector> {
    let mut i = grid.y_nn().mul_vec(v)?;
    let v0 = grid.slack_voltage();
    for (ik, y) in i.iter_mut().zip(grid.y_n0().iter()) {
        *ik += y * v0;
    }
    Ok(i)
}

/// `dS = S - V o conj(I)`.
pub fn power_mismatch(s: &[Complex64], v: &[Complex64], i: &[Complex64]) -> Result<ComplexVector> {
    check_lengths(s.len(), &[v.len(), i.len()])?;
    Ok(s.iter()
        .zip(v)
        .zip(i)
        .map(|((s, v), i)| s - v * i.conj())
        .collect())
}

/// `F = conj(V) o I - conj(S) o |V|^alpha`.
pub fn zip_residual(grid: &GridModel, v: &[Complex64], i: &[Complex64]) -> Result<ComplexVector> {
    let s = grid.injections();
    let alpha = grid.alpha();
    check_lengths(s.len(), &[v.len(), i.len()])?;
    v.iter()
        .zip(i)
        .zip(s.iter().zip(alpha))
        .enumerate()
        .map(|(k, ((v, i), (s, &a)))| {
            let mag = v.norm();
            if a < 2.0 && mag < SHORT_CIRCUIT_FLOOR {
                return Err(Error::ZeroVoltage {
                    node: grid.node_ids()[k + 1],
                });
            }
            Ok(v.conj() * i - s.conj() * libm::pow(mag, a))
        })
        .collect()
}

/// Normalized Jacobian of the constant-power mismatch.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    /// Coefficient of `dV`; same pattern as `Ynn`.
    pub a: SparseComplexMatrix,
    /// Diagonal coefficient of `conj(dV)`.
    pub b: ComplexVector,
    pub rhs: ComplexVector,
}

impl JacobianBlocks {
    pub fn into_system(self) -> ConjugateBlockSystem {
        ConjugateBlockSystem::new(self.a, self.b, self.rhs)
    }
}

pub fn assemble_jacobian_cp(
    grid: &GridModel,
    v: &[Complex64],
    i: &[Complex64],
    ds: &[Complex64],
) -> Result<JacobianBlocks> {
    check_lengths(grid.n(), &[v.len(), i.len(), ds.len()])?;
    guard_short_circuit(grid, v)?;
    let b = i.iter().zip(v).map(|(i, v)| i / v.conj()).collect();
    let rhs = ds.iter().zip(v).map(|(ds, v)| (ds / v).conj()).collect();
    Ok(JacobianBlocks {
        a: grid.y_nn().clone(),
        b,
        rhs,
    })
}

pub fn assemble_jacobian_zip(
    grid: &GridModel,
    v: &[Complex64],
    i: &[Complex64],
    f: &[Complex64],
) -> Result<JacobianBlocks> {
    check_lengths(grid.n(), &[v.len(), i.len(), f.len()])?;
    guard_short_circuit(grid, v)?;
    let h: Vec<Complex64> = grid
        .injections()
        .iter()
        .zip(grid.alpha())
        .zip(v)
        .map(|((s, &a), v)| s.conj() * (0.5 * a) * libm::pow(v.norm(), a - 2.0))
        .collect();

    let y = grid.y_nn();
    let a = SparseComplexMatrix::from_triplets(
        y.nrows(),
        y.ncols(),
        y.iter().map(|(r, c, val)| {
            if r == c {
                (r, c, val - h[r])
            } else {
                (r, c, val)
            }
        }),
    );
    let b = i
        .iter()
        .zip(v)
        .zip(&h)
        .map(|((i, v), h)| i / v.conj() - h * (v / v.conj()))
        .collect();
    let rhs = f.iter().zip(v).map(|(f, v)| f / v.conj()).collect();
    Ok(JacobianBlocks { a, b, rhs })
}

fn guard_short_circuit(grid: &GridModel, v: &[Complex64]) -> Result<()> {
    match v.iter().position(|v| !(v.norm() >= SHORT_CIRCUIT_FLOOR)) {
        Some(k) => Err(Error::ShortCircuit {
            node: grid.node_ids()[k + 1],
            magnitude: v[k].norm(),
        }),
        None => Ok(()),
    }
}

fn check_lengths(expected: usize, found: &[usize]) -> Result<()> {
    match found.iter().find(|&&len| len != expected) {
        Some(&len) => Err(Error::DimensionMismatch {
            expected,
            found: len,
        }),
        None => Ok(()),
    }
}

/// The pair `(df/dz, df/dz*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirtingerPair {
    pub d_z: Complex64,
    pub d_zconj: Complex64,
}

/// Numeric Wirtinger derivatives by central differences along the real and
/// imaginary axes:
///
/// ```text
/// df/dz  = (f_x - j f_y) / 2
/// df/dz* = (f_x + j f_y) / 2
/// ```
pub fn wirtinger_fd<F>(f: F, z: Complex64, h: f64) -> Result<WirtingerPair>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(
            "finite-difference step must be positive",
        ));
    }
    let eval = |p: Complex64| {
        let w = f(p);
        if w.re.is_finite() && w.im.is_finite() {
            Ok(w)
        } else {
            Err(Error::NonFinite("function evaluation"))
        }
    };
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let fx = (eval(z + dx)? - eval(z - dx)?) / (2.0 * h);
    let fy = (eval(z + dy)? - eval(z - dy)?) / (2.0 * h);
    let j = Complex64::new(0.0, 1.0);
    Ok(WirtingerPair {
        d_z: (fx - j * fy) * 0.5,
        d_zconj: (fx + j * fy) * 0.5,
    })
}
