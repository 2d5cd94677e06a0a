//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints a PASS/FAIL line regardless of capture settings.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use wirtflow::bundled::{ieee69, ieee69_inputs};
use wirtflow_core::oracle::{fixed_point_solve, two_bus_closed_form, OracleConfig};
use wirtflow_core::random::random_radial_grid;
use wirtflow_core::wirtinger::{
    assemble_jacobian_cp, assemble_jacobian_zip, nodal_currents, power_mismatch, zip_residual,
};
use wirtflow_core::{
    solve, solve_constant_power, solve_zip, wirtinger_fd, BranchRecord, Complex64, GridInputs,
    GridModel, LoadModel, LoadRecord, MismatchNorm, SolveResult, SolverConfig, TieMode,
};

const SEEDS: u64 = 50;
const STATES_PER_GRID: u64 = 3;
const FD_STEP: f64 = 1e-7;

type ScalarFn = fn(Complex64) -> Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference_config() -> SolverConfig {
    SolverConfig::default()
        .with_tolerance(1e-4)
        .with_norm(MismatchNorm::Euclidean)
}

fn random_grids() -> Vec<GridModel> {
    (0..SEEDS)
        .map(|s| random_radial_grid(s).build().unwrap())
        .collect()
}

/// Generation at nodes 26 and 60, exponents cycling through 0, 1, 2.
fn mixed_profile_inputs() -> GridInputs {
    let mut inputs = ieee69_inputs().unwrap();
    for load in &mut inputs.loads {
        load.alpha = (load.node % 3) as f64;
        match load.node {
            26 => load.power = c(-0.05, 0.0),
            60 => load.power = c(-0.06, -0.02),
            _ => {}
        }
    }
    inputs
}

fn full_voltage(grid: &GridModel, v_n: &[Complex64]) -> Vec<Complex64> {
    let ids = grid.node_ids();
    let mut full = vec![c(0.0, 0.0); ids.len()];
    full[ids[0]] = grid.slack_voltage();
    for (k, v) in v_n.iter().enumerate() {
        full[ids[k + 1]] = *v;
    }
    full
}

fn criterion_radial() -> Outcome {
    let grid = ieee69(TieMode::Open).unwrap();
    let start = Instant::now();
    let res = solve_constant_power(&grid, &reference_config()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let recomputed = cp_function_ref(&grid, &res.v_n)
        .iter()
        .zip(grid.injections().iter())
        .map(|(f, s)| (s - f.conj()).norm_sqr())
        .sum::<f64>()
        .sqrt();
    outcome(
        res.converged && res.steps() <= 4 && recomputed < 1e-4 && elapsed < 1.0,
        format!(
            "{} iterations, recomputed mismatch {recomputed:.2e}, {elapsed:.4} s",
            res.steps()
        ),
    )
}

fn criterion_meshed() -> Outcome {
    let grid = ieee69(TieMode::Closed).unwrap();
    let res = solve_constant_power(&grid, &reference_config()).unwrap();
    outcome(
        res.converged && res.steps() <= 4 && grid.in_service_branches() == 73,
        format!(
            "{} iterations over {} branches",
            res.steps(),
            grid.in_service_branches()
        ),
    )
}

fn criterion_zip() -> Outcome {
    let uniform = ieee69(TieMode::Open).unwrap().with_uniform_alpha(1.0);
    let mixed = mixed_profile_inputs().build().unwrap();
    let generation = mixed.injections().iter().filter(|s| s.re > 0.0).count();
    let cfg = reference_config().with_model(LoadModel::Zip);
    let a = solve_zip(&uniform, &cfg).unwrap();
    let b = solve_zip(&mixed, &cfg).unwrap();
    outcome(
        a.converged && b.converged && a.steps() <= 4 && b.steps() <= 4 && generation >= 1,
        format!(
            "alpha=1: {} iterations, mixed ({generation} generators): {} iterations",
            a.steps(),
            b.steps()
        ),
    )
}

fn criterion_jacobian() -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, grid) in random_grids().iter().enumerate() {
        for state in 0..STATES_PER_GRID {
            let v = random_interior_state(seed as u64 * 31 + state, grid.n());
            let i = nodal_currents(grid, &v).unwrap();

            let ds = power_mismatch(grid.injections(), &v, &i).unwrap();
            let cp = assemble_jacobian_cp(grid, &v, &i, &ds).unwrap();
            let (fa, fb) = fd_normalized_jacobian(|w| cp_function_ref(grid, w), &v, FD_STEP);
            worst = worst
                .max(block_relative_error(&fa, &cp.a.to_dense()))
                .max(block_relative_error(&fb, &diag(&cp.b)));

            let f = zip_residual(grid, &v, &i).unwrap();
            let zip = assemble_jacobian_zip(grid, &v, &i, &f).unwrap();
            let (fa, fb) = fd_normalized_jacobian(|w| zip_residual_ref(grid, w), &v, FD_STEP);
            worst = worst
                .max(block_relative_error(&fa, &zip.a.to_dense()))
                .max(block_relative_error(&fb, &diag(&zip.b)));
        }
    }
    outcome(
        worst < 1e-6,
        format!("{SEEDS} grids x {STATES_PER_GRID} states, max relative error {worst:.2e}"),
    )
}

fn criterion_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for grid in random_grids() {
        for model in [LoadModel::ConstantPower, LoadModel::Zip] {
            let newton = solve(
                &grid,
                &SolverConfig::default()
                    .with_model(model)
                    .with_tolerance(1e-11),
            )
            .unwrap();
            let fp = fixed_point_solve(
                &grid,
                &OracleConfig {
                    model,
                    ..Default::default()
                },
            )
            .unwrap();
            all_converged &= newton.converged && fp.converged;
            worst = worst.max(max_diff(&newton.v_n, &fp.v_n));
        }
    }

    let mut two_bus: f64 = 0.0;
    let y = c(0.0, -10.0);
    for load in [c(0.1, 0.05), c(-0.1, -0.05), c(0.8, 0.3)] {
        let grid = GridInputs::new(
            vec![BranchRecord::new(0, 1, c(0.0, 0.1))],
            vec![LoadRecord::new(1, load, 0.0)],
        )
        .build()
        .unwrap();
        let exact = two_bus_closed_form(c(1.0, 0.0), y, -load)
            .unwrap()
            .operational;
        let newton =
            solve_constant_power(&grid, &SolverConfig::default().with_tolerance(1e-12)).unwrap();
        let fp = fixed_point_solve(&grid, &OracleConfig::default()).unwrap();
        two_bus = two_bus
            .max((newton.v_n[0] - exact).norm())
            .max((fp.v_n[0] - exact).norm());
    }
    outcome(
        all_converged && worst < 1e-8 && two_bus < 1e-10,
        format!("newton vs fixed point {worst:.2e}, two-bus vs closed form {two_bus:.2e}"),
    )
}

fn criterion_degeneration() -> Outcome {
    let mut grids = random_grids();
    grids.push(ieee69(TieMode::Open).unwrap());
    grids.push(ieee69(TieMode::Closed).unwrap());
    let cfg = SolverConfig::default().with_tolerance(1e-10);
    let mut alpha0: f64 = 0.0;
    let mut alpha2: f64 = 0.0;
    for grid in &grids {
        let g0 = grid.with_uniform_alpha(0.0);
        let cp = solve_constant_power(&g0, &cfg).unwrap();
        let zip = solve_zip(&g0, &cfg).unwrap();
        alpha0 = alpha0.max(max_diff(&cp.v_n, &zip.v_n));

        let g2 = grid.with_uniform_alpha(2.0);
        let zip = solve_zip(&g2, &cfg).unwrap();
        alpha2 = alpha2.max(max_diff(&zip.v_n, &linear_network_solution(&g2)));
    }
    outcome(
        alpha0 < 1e-12 && alpha2 < 1e-10,
        format!(
            "{} grids, alpha=0 vs cp {alpha0:.2e}, alpha=2 vs linear network {alpha2:.2e}",
            grids.len()
        ),
    )
}

fn balance_error(grid: &GridModel, branches: &[BranchRecord], res: &SolveResult) -> f64 {
    let full = full_voltage(grid, &res.v_n);
    let currents = dense_currents(grid, &res.v_n);
    let absorbed: Complex64 = -res
        .v_n
        .iter()
        .zip(&currents)
        .map(|(v, i)| v * i.conj())
        .sum::<Complex64>();
    let losses = branch_losses(branches, &full);
    let balance = (res.slack_injection - absorbed - res.s_loss).norm();
    balance.max((res.s_loss - losses).norm())
}

fn criterion_power_balance() -> Outcome {
    let mut cases: Vec<(GridInputs, LoadModel)> = Vec::new();
    let radial = ieee69_inputs().unwrap();
    cases.push((
        radial.set_tie_mode(TieMode::Open).unwrap(),
        LoadModel::ConstantPower,
    ));
    cases.push((
        radial.set_tie_mode(TieMode::Closed).unwrap(),
        LoadModel::ConstantPower,
    ));
    cases.push((
        radial
            .set_tie_mode(TieMode::Open)
            .unwrap()
            .with_uniform_alpha(1.0),
        LoadModel::Zip,
    ));
    cases.push((
        mixed_profile_inputs().set_tie_mode(TieMode::Open).unwrap(),
        LoadModel::Zip,
    ));
    for seed in 0..SEEDS {
        for model in [LoadModel::ConstantPower, LoadModel::Zip] {
            cases.push((random_radial_grid(seed), model));
        }
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (inputs, model) in &cases {
        let grid = inputs.build().unwrap();
        let res = solve(&grid, &reference_config().with_model(*model)).unwrap();
        if res.converged {
            checked += 1;
            worst = worst.max(balance_error(&grid, &inputs.branches, &res));
        }
    }
    outcome(
        checked == cases.len() && worst < 1e-10,
        format!("{checked} converged solutions, max imbalance {worst:.2e}"),
    )
}

fn criterion_fd_fixtures() -> Outcome {
    let points = [c(0.3, -0.7), c(1.0, 0.0), c(-2.0, 1.5), c(0.01, 0.02)];
    let mut worst: f64 = 0.0;
    for &z in &points {
        let p = wirtinger_fd(|w| w * w.conj(), z, FD_STEP).unwrap();
        worst = worst
            .max((p.d_z - z.conj()).norm())
            .max((p.d_zconj - z).norm());

        let analytic: [(ScalarFn, ScalarFn); 3] = [
            (|w| w * w, |w| w * 2.0),
            (|w| w.exp(), |w| w.exp()),
            (|w| w * w * w - w * 4.0, |w| w * w * 3.0 - 4.0),
        ];
        for (f, df) in analytic {
            let p = wirtinger_fd(f, z, FD_STEP).unwrap();
            worst = worst.max(p.d_zconj.norm()).max((p.d_z - df(z)).norm());
        }
    }
    outcome(worst < 1e-6, format!("max error {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 radial 69-node, constant power", criterion_radial),
        ("2 meshed 69-node", criterion_meshed),
        ("3 69-node ZIP profiles", criterion_zip),
        ("4 Jacobian vs finite differences", criterion_jacobian),
        ("5 oracle equivalence", criterion_oracle),
        ("6 model degeneration", criterion_degeneration),
        ("7 power balance", criterion_power_balance),
        ("8 Wirtinger fixtures", criterion_fd_fixtures),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let result = run();
        if !result.pass {
            failures += 1;
        }
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("acceptance {tag} [{name}] {}", result.detail);
    }
    println!("acceptance: {}/8 criteria pass", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
