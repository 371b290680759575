//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.
//!
//! Run with `cargo test -p wigdeco-core --test acceptance -- --nocapture --test-threads 1` to
//! see the lines in order.

use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use wigdeco::balance::{kernel_moments_check, residuals, theta_moments_check, worst_l2, BalanceParams};
use wigdeco::crossval::{cross_validate, CrossValidation};
use wigdeco::kernel::{build_kernel, lorentzian_kernel, quadratic_approx, ScatteringEnvironment, TabulatedScattering};
use wigdeco::moments::moments;
use wigdeco::ode::{asymptotics, equilibrium, integrate, OdeParams, OdeState};
use wigdeco::solver::{
    apply_collision_factor, apply_decoherence, apply_theta, DecoherenceMode, PotentialSpec, SolverConfig, Stepper,
    ThetaMode,
};
use wigdeco::state::{gaussian_state, GaussianParams, WignerState};
use wigdeco::PhaseGrid;

fn verdict(n: usize, name: &str, pass: bool, detail: String) {
    println!("criterion {n:>2} [{name}]: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} [{name}] failed: {detail}");
}

fn figure(kappa: f64, eta: f64) -> OdeParams {
    OdeParams::new(0.4, 1.0, 1.0, kappa, eta, 1.0).unwrap()
}

const FIGURE_INIT: OdeState = OdeState {
    a: 1.0,
    b: 0.0,
    c: 1.0,
    d: 0.0,
};

#[test]
fn criterion_01_figure_two_equilibrium() {
    let start = Instant::now();
    let traj = integrate(&figure(1.0, 0.5), FIGURE_INIT, 50.0, 1e-3, 1000).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let s = traj.last().state;
    let err = (s.a - 0.25).abs().max(s.b.abs()).max((s.c - 0.1).abs());
    verdict(
        1,
        "figure-2 equilibrium",
        err < 1e-5 && elapsed < 1.0,
        format!("(A,B,C)(50) = ({:.8}, {:.1e}, {:.8}), max abs error {err:.2e}, {elapsed:.3} s", s.a, s.b, s.c),
    );
}

#[test]
fn criterion_02_figure_one_decay() {
    let traj = integrate(&figure(1.0, 0.0), FIGURE_INIT, 50.0, 1e-3, 1000).unwrap();
    let last = traj.last();
    let s = last.state;
    let e = last.exp_minus_d();
    verdict(
        2,
        "figure-1 decay",
        s.a < 1e-3 && s.c < 1e-3 && e < 1e-3,
        format!("A(50) = {:.3e}, C(50) = {:.3e}, exp(-D(50)) = {e:.3e}; limit 1e-3", s.a, s.c),
    );
}

#[test]
fn criterion_03_figure_three_partial_stabilisation() {
    let traj = integrate(&figure(0.0, 0.5), FIGURE_INIT, 50.0, 1e-3, 1000).unwrap();
    let last = traj.last();
    let s = last.state;
    let e = last.exp_minus_d();
    verdict(
        3,
        "figure-3 partial stabilisation",
        (s.a - 0.25).abs() < 1e-5 && s.c < 1e-3 && e < 1e-3,
        format!("|A(50)-0.25| = {:.3e} (limit 1e-5), C(50) = {:.3e}, exp(-D(50)) = {e:.3e}", (s.a - 0.25).abs(), s.c),
    );
}

#[test]
fn criterion_04_asymptotic_coherence_length() {
    let mut rng = StdRng::seed_from_u64(4);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (m, tau, eta, kbt, kappa, hbar) = (
            rng.random_range(0.1..5.0),
            rng.random_range(0.1..5.0),
            rng.random_range(0.05..3.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..5.0),
            rng.random_range(0.1..2.0),
        );
        let p = OdeParams::thermal(m, tau, eta, kbt, kappa, hbar).unwrap();
        let eq = equilibrium(&p).unwrap();
        let asy = asymptotics(&p).unwrap();
        worst = worst
            .max(rel(hbar * (2.0 * eq.a).sqrt(), asy.coherence_length))
            .max(rel(asy.coherence_length, hbar * (tau * eta / p.lambda0).sqrt()))
            .max(rel(asy.coherence_length, hbar / (m * kbt).sqrt()))
            .max(rel(1.0 / (2.0 * eq.c).sqrt(), asy.position_spread))
            .max(rel(asy.position_spread, (kbt / kappa).sqrt()))
            .max(rel(asy.kbt, kbt));
    }
    verdict(
        4,
        "asymptotic coherence length",
        worst < 1e-12,
        format!("20 random parameter sets, worst relative mismatch {worst:.2e}"),
    );
}

#[test]
fn criterion_05_pde_ode_cross_validation() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for eta in [0.5, 0.0] {
        let report = cross_validate(&CrossValidation::standard(eta).unwrap()).unwrap();
        pass &= report.max_relative_deviation < 1e-3;
        details.push(format!("eta={eta}: max rel deviation {:.2e}", report.max_relative_deviation));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    verdict(
        5,
        "PDE-ODE cross-validation",
        pass,
        format!("{}; 256x256, dt=1e-3, t in [0,5]; {elapsed:.1} s", details.join(", ")),
    );
}

fn peaked(k0: f64, sigma: f64, r0_sq: f64, grid: &PhaseGrid) -> wigdeco::DecoherenceKernel {
    build_kernel(&ScatteringEnvironment::peaked_gaussian(k0, sigma, r0_sq).unwrap(), grid.xi_grid(), grid.hbar).unwrap()
}

#[test]
fn criterion_06_mass_conservation() {
    let grid = PhaseGrid::symmetric(12.0, 64, 12.0, 64, 1.0).unwrap();
    let kernel = peaked(0.5, 2.0, 0.5, &grid);
    let (l1, l2) = quadratic_approx(&kernel).unwrap();
    let quartic = PotentialSpec::Tabulated {
        values: grid.xs().iter().map(|x| 0.01 * x.powi(4) - 0.2 * x * x).collect(),
    };
    let modes = [
        DecoherenceMode::None,
        DecoherenceMode::FullKernel,
        DecoherenceMode::FokkerPlanckDrift { lambda1: l1, lambda2: l2 },
        DecoherenceMode::FokkerPlanck { lambda2: 0.5 },
        DecoherenceMode::JacoboniBordone { coherence_length: 1.0, p0: 0.2 },
    ];
    let potentials = [
        (PotentialSpec::Zero, ThetaMode::Spectral),
        (PotentialSpec::Harmonic { kappa: 0.5 }, ThetaMode::ClassicalForce),
        (PotentialSpec::Linear { force: 0.3 }, ThetaMode::Spectral),
        (quartic, ThetaMode::Spectral),
    ];
    let init = gaussian_state(GaussianParams::normalized(1.0, 0.2, 0.5, 1.0).unwrap(), &grid).unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for mode in &modes {
        for (potential, theta) in &potentials {
            for eta in [0.0, 0.5] {
                let config = SolverConfig {
                    mass: 1.0,
                    eta,
                    dt: 1e-3,
                    decoherence: mode.clone(),
                    theta: *theta,
                    ..SolverConfig::default()
                };
                let k = (*mode == DecoherenceMode::FullKernel).then_some(&kernel);
                let mut state = init.clone();
                Stepper::new(&grid, &config, potential, k).unwrap().run(&mut state, 1000).unwrap();
                worst = worst.max((state.mass() - init.mass()).abs() / init.mass());
                count += 1;
            }
        }
    }
    verdict(
        6,
        "mass conservation",
        worst < 1e-9,
        format!("{count} configurations x 1000 steps, worst relative drift {worst:.2e}"),
    );
}

#[test]
fn criterion_07_kernel_moment_identities() {
    let grid = PhaseGrid::symmetric(12.0, 32, 24.0, 512, 1.0).unwrap();
    let chi = |k0: f64, s: f64| {
        move |k: f64| Complex64::new((2.0 * s * s / std::f64::consts::PI).powf(0.25) * (-(s * s) * (k - k0).powi(2)).exp(), 0.0)
    };
    let tabulated = TabulatedScattering::from_fns(
        (-7.0, 9.0, 2401),
        |k| Complex64::new((0.6 / (1.0 + 0.3 * k * k)).sqrt(), 0.2 * k).unscale(1.0 + 0.1 * k * k),
        None,
        chi(1.0, 1.2),
    )
    .unwrap();
    let kernels = [
        ("peaked k0=1 sigma=1.5", peaked(1.0, 1.5, 0.5, &grid)),
        ("peaked k0=-0.5 sigma=2", peaked(-0.5, 2.0, 0.9, &grid)),
        ("peaked k0=0 sigma=1", peaked(0.0, 1.0, 0.3, &grid)),
        (
            "tabulated",
            build_kernel(&ScatteringEnvironment::Tabulated(tabulated), grid.xi_grid(), 1.0).unwrap(),
        ),
    ];
    let states = [
        GaussianParams::new(0.6, 0.2, 0.5, 0.0),
        GaussianParams::new(1.5, -0.4, 0.3, 0.0),
        GaussianParams::new(0.4, 0.0, 1.0, 0.0),
    ];
    let mut worst_gamma: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    for (_, kernel) in &kernels {
        let dp = kernel.xi_grid().dp(kernel.hbar());
        let total: Complex64 = kernel.momentum_kernel().iter().sum::<Complex64>() * dp;
        let scale: f64 = kernel.momentum_kernel().iter().map(|z| z.norm()).sum::<f64>() * dp;
        worst_gamma = worst_gamma.max(total.norm() / scale);
        for p in &states {
            let state = gaussian_state(*p, &grid).unwrap();
            let check = kernel_moments_check(&state, kernel, 0.4).unwrap();
            worst_moment = check.relative_errors().into_iter().fold(worst_moment, f64::max);
        }
    }
    verdict(
        7,
        "kernel-moment identities",
        worst_gamma < 1e-6 && worst_moment < 1e-6,
        format!(
            "{} kernels x {} gaussian states: |∫γ dp|/∫|γ| dp = {worst_gamma:.2e}, worst moment error {worst_moment:.2e}",
            kernels.len(),
            states.len()
        ),
    );
}

#[test]
fn criterion_08_theta_exactness_for_quadratic_potentials() {
    let grid = PhaseGrid::symmetric(10.0, 128, 10.0, 128, 0.8).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst_step: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    for _ in 0..5 {
        let (a, c): (f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let b = rng.random_range(-0.8..0.8) * (a * c).sqrt();
        let state = gaussian_state(GaussianParams::new(a, b, c, 0.0), &grid).unwrap();
        for v in [
            PotentialSpec::Harmonic { kappa: rng.random_range(0.1..2.0) },
            PotentialSpec::Linear { force: rng.random_range(-1.0..1.0) },
        ] {
            let s = apply_theta(&v, &state, ThetaMode::Spectral, 0.01).unwrap();
            let c = apply_theta(&v, &state, ThetaMode::ClassicalForce, 0.01).unwrap();
            worst_step = worst_step.max(s.max_diff(&c));
            let check = theta_moments_check(&state, &v, 0.4).unwrap();
            worst_moment = check.relative_errors().into_iter().fold(worst_moment, f64::max);
        }
    }
    verdict(
        8,
        "theta exactness for quadratic V",
        worst_step < 1e-10 && worst_moment < 1e-8,
        format!("spectral vs classical single step {worst_step:.2e}, theta-moment identities {worst_moment:.2e}"),
    );
}

#[test]
fn criterion_09_balance_law_residuals() {
    let init = GaussianParams::normalized(1.0, 0.0, 1.0, 1.0).unwrap();
    let potential = PotentialSpec::Harmonic { kappa: 1.0 };
    let mut worst = Vec::new();
    for level in 0..4 {
        let s = 1usize << level;
        let grid = PhaseGrid::symmetric(16.0, 64 * s, 12.0, 64 * s, 1.0).unwrap();
        let config = SolverConfig {
            mass: 0.4,
            eta: 0.5,
            dt: 0.01 / s as f64,
            decoherence: DecoherenceMode::FokkerPlanck { lambda2: 1.0 },
            theta: ThetaMode::ClassicalForce,
            ..SolverConfig::default()
        };
        let mut state = gaussian_state(init, &grid).unwrap();
        let mut stepper = Stepper::new(&grid, &config, &potential, None).unwrap();
        let mut snaps = vec![moments(&state, config.mass)];
        for _ in 0..10 * s {
            stepper.run(&mut state, 10).unwrap();
            snaps.push(moments(&state, config.mass));
        }
        let params = BalanceParams::from_solver(&config, &potential, &grid, None).unwrap();
        worst.push(worst_l2(&residuals(&snaps, &params).unwrap()));
    }
    let ratios: Vec<[f64; 3]> = worst
        .windows(2)
        .map(|p| [p[0][0] / p[1][0], p[0][1] / p[1][1], p[0][2] / p[1][2]])
        .collect();
    let last = ratios.last().unwrap();
    let pass = last.iter().all(|r| (3.5..4.5).contains(r));
    verdict(
        9,
        "balance-law residuals",
        pass,
        format!(
            "L2 residual ratios (N, J, E) per halving: {}",
            ratios
                .iter()
                .map(|r| format!("({:.2}, {:.2}, {:.2})", r[0], r[1], r[2]))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    );
}

#[test]
fn criterion_10_fokker_planck_limit() {
    let grid = PhaseGrid::symmetric(8.0, 32, 16.0, 256, 1.0).unwrap();
    let state = WignerState::from_fn(grid.clone(), |x, p| {
        (-x * x / 2.0 - (p - 0.5).powi(2) / 2.0).exp() + 0.5 * (-(x - 1.0).powi(2) - (p + 1.0).powi(2) / 1.5).exp()
    });
    let h = 1.0;
    let mut errors = Vec::new();
    for sigma in [2.0, 4.0, 8.0] {
        let kernel = peaked(0.0, sigma, 1.0, &grid);
        let (l1, l2) = quadratic_approx(&kernel).unwrap();
        let full = SolverConfig {
            decoherence: DecoherenceMode::FullKernel,
            ..SolverConfig::default()
        };
        let drift = SolverConfig {
            decoherence: DecoherenceMode::FokkerPlanckDrift { lambda1: l1, lambda2: l2 },
            ..SolverConfig::default()
        };
        let a = apply_decoherence(&state, &full, Some(&kernel), h).unwrap();
        let b = apply_decoherence(&state, &drift, None, h).unwrap();
        errors.push(a.max_diff(&b) / b.max_diff(&state));
    }
    let monotone = errors.windows(2).all(|p| p[1] < p[0]);
    verdict(
        10,
        "Fokker-Planck limit",
        monotone,
        format!(
            "relative FullKernel vs drift-diffusion gap over sigma = 2, 4, 8: {}",
            errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

#[test]
fn criterion_11_lorentzian_broadening() {
    // A unit-mass spike on one momentum node; the periodic grid turns the Lorentzian into its
    // periodic sum, which has the closed form below.
    let (lambda, hbar) = (1.0, 1.0);
    let grid = PhaseGrid::symmetric(4.0, 8, 20.0, 512, hbar).unwrap();
    let (period, dp) = (grid.p_max - grid.p_min, grid.dp());
    let origin = grid.n_p / 2;
    let spike = WignerState::from_fn(grid.clone(), |_, p| if p.abs() < 0.5 * dp { 1.0 / dp } else { 0.0 });
    let width = hbar / lambda;
    let periodic_lorentzian = |p: f64| {
        let (u, v) = (2.0 * std::f64::consts::PI * width / period, 2.0 * std::f64::consts::PI * p / period);
        u.sinh() / (u.cosh() - v.cos()) / period
    };
    let mut worst: f64 = 0.0;
    let mut peak_offsets = Vec::new();
    for p0 in [0.0, 1.25, -2.5] {
        let kernel = lorentzian_kernel(lambda, p0, hbar, grid.xi_grid()).unwrap();
        let out = apply_collision_factor(&spike, &kernel).unwrap();
        let row = out.w.row(3);
        let peak = (0..grid.n_p).max_by(|&i, &j| row[i].partial_cmp(&row[j]).unwrap()).unwrap();
        peak_offsets.push(grid.p(peak) - grid.p(origin));
        let scale = periodic_lorentzian(0.0);
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - periodic_lorentzian(grid.p(j) - p0)).abs() / scale);
        }
    }
    // the relaxation model damps toward that smoothed state at rate 1/τ
    let h = 1e-4;
    let jb = SolverConfig {
        decoherence: DecoherenceMode::JacoboniBordone { coherence_length: lambda, p0: 1.25 },
        ..SolverConfig::default()
    };
    let smooth = WignerState::from_fn(grid.clone(), |x, p| (-x * x - (p - 0.3).powi(2)).exp());
    let stepped = apply_decoherence(&smooth, &jb, None, h).unwrap();
    let target = apply_collision_factor(&smooth, &lorentzian_kernel(lambda, 1.25, hbar, grid.xi_grid()).unwrap()).unwrap();
    let mut rate_err: f64 = 0.0;
    for ((s, w0), wl) in stepped.w.iter().zip(smooth.w.iter()).zip(target.w.iter()) {
        rate_err = rate_err.max(((s - w0) / h - (wl - w0)).abs());
    }
    let rate_err = rate_err / smooth.max_abs();
    let shifts_ok = peak_offsets.iter().zip([0.0, 1.25, -2.5]).all(|(o, p0)| (o - p0).abs() < 0.5 * dp);
    verdict(
        11,
        "Lorentzian broadening",
        worst < 1e-10 && shifts_ok && rate_err < 1e-3,
        format!(
            "profile error {worst:.2e} of peak, peak offsets {peak_offsets:?} for p0 = 0, 1.25, -2.5, relaxation-rate error {rate_err:.1e}"
        ),
    );
}
