//! Test-only oracles. Nothing here calls into the Jacobian, residual or
//! sparse LU code of the crate; only the assembled admittance blocks are read.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirtflow_core::{wirtinger_fd, GridModel};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dense_currents(grid: &GridModel, v: &[Complex64]) -> Vec<Complex64> {
    let y = grid.y_nn().to_dense();
    let v0 = grid.slack_voltage();
    (0..grid.n())
        .map(|k| {
            let mut acc = grid.y_n0()[k] * v0;
            for m in 0..grid.n() {
                acc += y[k][m] * v[m];
            }
            acc
        })
        .collect()
}

/// `conj(V) o I - conj(S) o |V|^alpha`, written out by hand.
pub fn zip_residual_ref(grid: &GridModel, v: &[Complex64]) -> Vec<Complex64> {
    let i = dense_currents(grid, v);
    (0..grid.n())
        .map(|k| {
            v[k].conj() * i[k] - grid.injections()[k].conj() * v[k].norm().powf(grid.alpha()[k])
        })
        .collect()
}

/// `conj(V) o I` (conjugate of the computed injection).
pub fn cp_function_ref(grid: &GridModel, v: &[Complex64]) -> Vec<Complex64> {
    let i = dense_currents(grid, v);
    (0..grid.n()).map(|k| v[k].conj() * i[k]).collect()
}

/// Finite-difference Wirtinger Jacobians `(d f_k / d v_m, d f_k / d conj(v_m))`,
/// each row divided by `conj(v_k)`.
pub fn fd_normalized_jacobian<F>(
    f: F,
    v: &[Complex64],
    h: f64,
) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = v.len();
    let mut d_v = vec![vec![c(0.0, 0.0); n]; n];
    let mut d_vc = vec![vec![c(0.0, 0.0); n]; n];
    for m in 0..n {
        for k in 0..n {
            let pair = wirtinger_fd(
                |z| {
                    let mut w = v.to_vec();
                    w[m] = z;
                    f(&w)[k]
                },
                v[m],
                h,
            )
            .unwrap();
            d_v[k][m] = pair.d_z / v[k].conj();
            d_vc[k][m] = pair.d_zconj / v[k].conj();
        }
    }
    (d_v, d_vc)
}

pub fn max_abs(m: &[Vec<Complex64>]) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |fd - an| / max |an|` over a dense block.
pub fn block_relative_error(fd: &[Vec<Complex64>], an: &[Vec<Complex64>]) -> f64 {
    let diff = fd
        .iter()
        .zip(an)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    diff / max_abs(an)
}

pub fn diag(b: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = b.len();
    let mut m = vec![vec![c(0.0, 0.0); n]; n];
    for k in 0..n {
        m[k][k] = b[k];
    }
    m
}

/// Voltages within +-10% magnitude and +-0.1 rad of nominal.
pub fn random_interior_state(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::from_polar(1.0 + rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)))
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense real system.
pub fn dense_real_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        for j in k + 1..n {
            x[k] -= m[k][j] * x[j];
        }
        x[k] /= m[k][k];
    }
    x
}

/// Dense complex solve with partial pivoting.
pub fn dense_complex_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let u = m[k][j];
                m[i][j] -= f * u;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        for j in k + 1..n {
            let xj = x[j];
            x[k] -= m[k][j] * xj;
        }
        x[k] /= m[k][k];
    }
    x
}

/// Builds the `2n x 2n` real system of `A dv + diag(B) conj(dv) = r` directly
/// from the split of `(A + B conj)` acting on `x + jy`, and solves it densely.
pub fn dense_conjugate_block_solve(
    a: &[Vec<Complex64>],
    b: &[Complex64],
    r: &[Complex64],
) -> Vec<Complex64> {
    let n = r.len();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    let mut rhs = vec![0.0; 2 * n];
    for j in 0..n {
        // response to a unit real part at j, then a unit imaginary part
        for (offset, unit) in [(0, c(1.0, 0.0)), (n, c(0.0, 1.0))] {
            for i in 0..n {
                let mut out = a[i][j] * unit;
                if i == j {
                    out += b[i] * unit.conj();
                }
                m[i][offset + j] = out.re;
                m[n + i][offset + j] = out.im;
            }
        }
    }
    for i in 0..n {
        rhs[i] = r[i].re;
        rhs[n + i] = r[i].im;
    }
    let xy = dense_real_solve(&m, &rhs);
    (0..n).map(|k| c(xy[k], xy[n + k])).collect()
}
