//! Cross-validation of the phase-space solver against the gaussian ODE reduction.
//!
//! With a harmonic trap, the classical force term, Fokker-Planck diffusion `Λ₂ = Λ₀/ħ²` and
//! optional friction, gaussian data stay gaussian. The solver output is fitted back to
//! `(A, B, C, D)` and compared with the RK4 trajectory at every sample time.

use std::io::Write;

use crate::error::{invalid, Result};
use crate::fit::{fit_gaussian, GaussianFit};
use crate::grid::PhaseGrid;
use crate::ode::{integrate, OdeParams, OdeState};
use crate::solver::{DecoherenceMode, PotentialSpec, SolverConfig, Stepper, ThetaMode};
use crate::state::{gaussian_state, GaussianParams};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub ode: OdeParams,
    pub grid: PhaseGrid,
    pub dt: f64,
    pub t_end: f64,
    /// Solver steps between comparisons.
    pub sample_every: usize,
    /// Initial quadratic form; D is chosen for unit mass.
    pub initial: (f64, f64, f64),
}

impl CrossValidation {
    /// Figure parameters (m = 0.4, τ = 1, Λ₀ = 1, κ = 1) with friction η on a 256² grid.
    pub fn standard(eta: f64) -> Result<Self> {
        let ode = OdeParams::new(0.4, 1.0, 1.0, 1.0, eta, 1.0)?;
        // the frictionless run spreads further by t = 5
        let (x_half, p_half) = if eta > 0.0 { (20.0, 12.0) } else { (40.0, 25.0) };
        Ok(Self {
            ode,
            grid: PhaseGrid::symmetric(x_half, 256, p_half, 256, 1.0)?,
            dt: 1e-3,
            t_end: 5.0,
            sample_every: 100,
            initial: (1.0, 0.0, 1.0),
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            mass: self.ode.mass,
            tau: self.ode.tau,
            eta: self.ode.eta,
            hbar: self.ode.hbar,
            dt: self.dt,
            decoherence: DecoherenceMode::FokkerPlanck {
                lambda2: self.ode.lambda0 / (self.ode.hbar * self.ode.hbar),
            },
            theta: ThetaMode::ClassicalForce,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub t: f64,
    pub pde: GaussianFit,
    pub ode: GaussianParams,
    /// max |pde − ode| / max |ode| over (A, B, C, D).
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationReport {
    pub comparisons: Vec<Comparison>,
    pub max_relative_deviation: f64,
    pub mass_drift: f64,
}

fn deviation(pde: &GaussianParams, ode: &GaussianParams) -> f64 {
    let (a, b) = (pde.as_array(), ode.as_array());
    let num = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    num / den
}

pub fn cross_validate(cv: &CrossValidation) -> Result<CrossValidationReport> {
    if cv.sample_every == 0 {
        return Err(invalid("sample_every", "must be at least 1"));
    }
    let (a, b, c) = cv.initial;
    let init = GaussianParams::normalized(a, b, c, 1.0)?;
    let mut state = gaussian_state(init, &cv.grid)?;
    let mass0 = state.mass();
    let config = cv.solver_config();
    let potential = PotentialSpec::Harmonic { kappa: cv.ode.kappa };
    let mut stepper = Stepper::new(&cv.grid, &config, &potential, None)?;
    let steps = (cv.t_end / cv.dt).round() as usize;
    let traj = integrate(&cv.ode, OdeState::from(init), cv.t_end, cv.dt, cv.sample_every)?;

    let mut comparisons = Vec::with_capacity(traj.points.len());
    let mut done = 0;
    for pt in &traj.points {
        let target = (pt.t / cv.dt).round() as usize;
        stepper.run(&mut state, target - done)?;
        done = target;
        let fit = fit_gaussian(&state);
        let ode = pt.params();
        comparisons.push(Comparison {
            t: pt.t,
            relative_deviation: deviation(&fit.params, &ode),
            pde: fit,
            ode,
        });
    }
    debug_assert_eq!(done, steps);
    let max_relative_deviation = comparisons.iter().fold(0.0f64, |m, c| m.max(c.relative_deviation));
    Ok(CrossValidationReport {
        comparisons,
        max_relative_deviation,
        mass_drift: (state.mass() - mass0).abs() / mass0,
    })
}

/// Columns `t,A_pde,B_pde,C_pde,D_pde,A_ode,B_ode,C_ode,D_ode,fit_residual,relative_deviation`.
pub fn write_report(out: &mut impl Write, report: &CrossValidationReport) -> Result<()> {
    writeln!(out, "t,A_pde,B_pde,C_pde,D_pde,A_ode,B_ode,C_ode,D_ode,fit_residual,relative_deviation")?;
    for c in &report.comparisons {
        let (p, o) = (c.pde.params, c.ode);
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            c.t, p.a, p.b, p.c, p.d, o.a, o.b, o.c, o.d, c.pde.residual, c.relative_deviation
        )?;
    }
    Ok(())
}
