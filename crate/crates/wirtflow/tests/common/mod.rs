//! Test-only oracles. Nothing here calls the crate's Jacobian, residual,
//! loss or sparse LU code; only the assembled admittance blocks are read.
#![allow(dead_code)]

use wirtflow_core::{wirtinger_fd, BranchRecord, Complex64, GridModel};

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

/// Voltages within +-10% magnitude and +-0.1 rad of nominal, from a
/// splitmix64 stream.
pub fn random_interior_state(seed: u64, n: usize) -> Vec<Complex64> {
    let mut state = seed;
    let mut unit = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    (0..n)
        .map(|_| Complex64::from_polar(1.0 + 0.1 * unit(), 0.1 * unit()))
        .collect()
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

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Series and shunt losses summed branch by branch. `v` is the full vector,
/// slack first, indexed by the ids used in `branches` (slack id 0).
pub fn branch_losses(branches: &[BranchRecord], v: &[Complex64]) -> Complex64 {
    branches
        .iter()
        .filter(|b| b.in_service)
        .map(|b| {
            let y = Complex64::new(1.0, 0.0) / b.impedance;
            let dv = v[b.from] - v[b.to];
            let half = b.shunt * 0.5;
            dv * (y * dv).conj() + half.conj() * (v[b.from].norm_sqr() + v[b.to].norm_sqr())
        })
        .sum()
}

/// `(Ynn - diag(conj(S_inj))) V = -Yn0 v0`: the network with every load
/// replaced by its nominal admittance.
pub fn linear_network_solution(grid: &GridModel) -> Vec<Complex64> {
    let mut a = grid.y_nn().to_dense();
    for k in 0..grid.n() {
        a[k][k] -= grid.injections()[k].conj();
    }
    let b: Vec<Complex64> = grid
        .y_n0()
        .iter()
        .map(|y| -y * grid.slack_voltage())
        .collect();
    dense_complex_solve(&a, &b)
}
