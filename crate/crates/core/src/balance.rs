//! Moment balance laws of the Wigner equation and their residuals on solver output.
//!
//! Taking the `1, p/m, p²/2m` moments of the equation gives
//!
//! ```text
//! ∂N/∂t + ∂J/∂x                                                          = 0
//! ∂J/∂t + ∂(2E/m)/∂x + V′N/m − ħΛ₁N/(mτ) + ηJ                           = 0
//! ∂E/∂t + ∂𝒥_E/∂x   + V′J   − ħΛ₁J/τ − ħ²Λ₂N/(mτ) + 2ηE                = 0
//! ```
//!
//! where `𝒥_E = (1/2m²)∫p³w dp` is taken from the kinetic solution (no closure is assumed).

use crate::error::{invalid, Error, Result};
use crate::grid::PhaseGrid;
use crate::kernel::DecoherenceKernel;
use crate::moments::{moments, MomentFields};
use crate::solver::{
    convolve_momentum_kernel, theta_action, DecoherenceMode, EffectivePotential, PotentialSpec, SolverConfig, ThetaMode,
};
use crate::state::WignerState;

/// Coefficients of the balance laws.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceParams {
    pub mass: f64,
    pub tau: f64,
    pub hbar: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    /// V′ sampled on the position nodes.
    pub v_prime: Vec<f64>,
}

impl BalanceParams {
    /// Coefficients matching a solver configuration. The drift constants come from the
    /// decoherence mode; the Lorentzian model has no finite second moment and is rejected.
    pub fn from_solver(
        config: &SolverConfig,
        potential: &PotentialSpec,
        grid: &PhaseGrid,
        kernel: Option<&DecoherenceKernel>,
    ) -> Result<Self> {
        let (lambda1, lambda2) = match &config.decoherence {
            DecoherenceMode::None => (0.0, 0.0),
            DecoherenceMode::FullKernel => {
                let k = kernel.ok_or_else(|| invalid("kernel", "full-kernel decoherence needs a kernel"))?;
                (k.lambda1(), k.lambda2())
            }
            DecoherenceMode::FokkerPlanckDrift { lambda1, lambda2 } => (*lambda1, *lambda2),
            DecoherenceMode::FokkerPlanck { lambda2 } => (0.0, *lambda2),
            DecoherenceMode::JacoboniBordone { .. } => return Err(Error::NotDifferentiable),
        };
        let mut effective = EffectivePotential::new(potential, grid)?;
        if let (DecoherenceMode::FullKernel, Some(k)) = (&config.decoherence, kernel) {
            effective = effective.with_collisional_shift(k, config.hbar, config.tau);
        }
        Ok(Self {
            mass: config.mass,
            tau: config.tau,
            hbar: config.hbar,
            lambda1,
            lambda2,
            eta: config.eta,
            v_prime: grid.xs().iter().map(|&x| effective.derivative(x)).collect(),
        })
    }
}

/// Pointwise residuals of the three balance laws at one snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResidual {
    pub time: f64,
    pub r_n: Vec<f64>,
    pub r_j: Vec<f64>,
    pub r_e: Vec<f64>,
    /// L² norms (∫r² dx)^{1/2} of `r_n`, `r_j`, `r_e`.
    pub l2: [f64; 3],
    /// Max norms of `r_n`, `r_j`, `r_e`.
    pub max: [f64; 3],
    pub dt_used: f64,
    pub dx_used: f64,
}

fn check_compatible(snapshots: &[MomentFields], params: &BalanceParams) -> Result<()> {
    let first = &snapshots[0];
    for s in snapshots {
        if s.x != first.x {
            return Err(Error::GridMismatch("snapshots are on different position grids".into()));
        }
    }
    if params.v_prime.len() != first.len() {
        return Err(Error::GridMismatch(format!(
            "V′ has {} samples but the snapshots have {} positions",
            params.v_prime.len(),
            first.len()
        )));
    }
    if first.len() < 3 {
        return Err(invalid("snapshots", "need at least 3 positions for centred differences"));
    }
    for pair in snapshots.windows(2) {
        if !(pair[1].time > pair[0].time) {
            return Err(invalid("snapshots", "times must be strictly increasing"));
        }
    }
    Ok(())
}

/// Centred difference on a periodic grid.
fn ddx(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx)).collect()
}

fn norms(r: &[f64], dx: f64) -> (f64, f64) {
    let l2 = (r.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (l2, max)
}

/// Residuals at every interior snapshot, with centred differences in time and (periodic) space.
pub fn residuals(snapshots: &[MomentFields], params: &BalanceParams) -> Result<Vec<BalanceResidual>> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            got: snapshots.len(),
        });
    }
    check_compatible(snapshots, params)?;
    let (m, tau, hbar) = (params.mass, params.tau, params.hbar);
    let (l1, l2, eta) = (params.lambda1, params.lambda2, params.eta);
    let dx = snapshots[0].dx();
    let mut out = Vec::with_capacity(snapshots.len() - 2);
    for win in snapshots.windows(3) {
        let (prev, cur, next) = (&win[0], &win[1], &win[2]);
        let dt2 = next.time - prev.time;
        let dt = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (x - y) / dt2).collect() };
        let n_t = dt(&next.density, &prev.density);
        let j_t = dt(&next.current, &prev.current);
        let e_t = dt(&next.energy, &prev.energy);
        let j_x = ddx(&cur.current, dx);
        let fj_x = ddx(&cur.flux_current, dx);
        let fe_x = ddx(&cur.flux_energy, dx);
        let len = cur.len();
        let mut r_n = vec![0.0; len];
        let mut r_j = vec![0.0; len];
        let mut r_e = vec![0.0; len];
        for i in 0..len {
            let (n, j, e, vp) = (cur.density[i], cur.current[i], cur.energy[i], params.v_prime[i]);
            r_n[i] = n_t[i] + j_x[i];
            r_j[i] = j_t[i] + fj_x[i] + vp * n / m - hbar * l1 * n / (m * tau) + eta * j;
            r_e[i] = e_t[i] + fe_x[i] + vp * j - hbar * l1 * j / tau - hbar * hbar * l2 * n / (m * tau) + 2.0 * eta * e;
        }
        let (a, b, c) = (norms(&r_n, dx), norms(&r_j, dx), norms(&r_e, dx));
        out.push(BalanceResidual {
            time: cur.time,
            r_n,
            r_j,
            r_e,
            l2: [a.0, b.0, c.0],
            max: [a.1, b.1, c.1],
            dt_used: 0.5 * dt2,
            dx_used: dx,
        });
    }
    Ok(out)
}

/// Largest L² norm of each balance law over a run.
pub fn worst_l2(report: &[BalanceResidual]) -> [f64; 3] {
    report.iter().fold([0.0; 3], |acc, r| {
        [acc[0].max(r.l2[0]), acc[1].max(r.l2[1]), acc[2].max(r.l2[2])]
    })
}

/// Momentum moments `(∫f dp, (1/m)∫p f dp, (1/2m)∫p² f dp)` of some field `f` on the state grid,
/// set against their predicted profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub computed: [Vec<f64>; 3],
    pub expected: [Vec<f64>; 3],
}

impl MomentCheck {
    /// Max-norm deviation of each moment, relative to the largest expected moment
    /// (absolute when every expected moment vanishes).
    pub fn relative_errors(&self) -> [f64; 3] {
        let scale = self
            .expected
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let dev = |k: usize| {
            self.computed[k]
                .iter()
                .zip(&self.expected[k])
                .fold(0.0f64, |m, (c, e)| m.max((c - e).abs()))
                / scale
        };
        [dev(0), dev(1), dev(2)]
    }
}

fn field_moments(field: &WignerState, mass: f64) -> [Vec<f64>; 3] {
    let f = moments(field, mass);
    [f.density, f.current, f.energy]
}

/// Moments of the spectral Θ[V]w, expected to be `(0, V′N/m, V′J)`.
pub fn theta_moments_check(state: &WignerState, potential: &PotentialSpec, mass: f64) -> Result<MomentCheck> {
    let action = theta_action(potential, state, ThetaMode::Spectral)?;
    let effective = EffectivePotential::new(potential, &state.grid)?;
    let f = moments(state, mass);
    let vp: Vec<f64> = f.x.iter().map(|&x| effective.derivative(x)).collect();
    Ok(MomentCheck {
        computed: field_moments(&action, mass),
        expected: [
            vec![0.0; f.len()],
            vp.iter().zip(&f.density).map(|(v, n)| v * n / mass).collect(),
            vp.iter().zip(&f.current).map(|(v, j)| v * j).collect(),
        ],
    })
}

/// Moments of γ∗w, expected to be `(0, −ħΛ₁N/m, −ħΛ₁J − ħ²Λ₂N/m)`.
pub fn kernel_moments_check(state: &WignerState, kernel: &DecoherenceKernel, mass: f64) -> Result<MomentCheck> {
    let conv = convolve_momentum_kernel(state, kernel)?;
    let hbar = kernel.hbar();
    let (l1, l2) = (kernel.lambda1(), kernel.lambda2());
    let f = moments(state, mass);
    Ok(MomentCheck {
        computed: field_moments(&conv, mass),
        expected: [
            vec![0.0; f.len()],
            f.density.iter().map(|n| -hbar * l1 * n / mass).collect(),
            f.current
                .iter()
                .zip(&f.density)
                .map(|(j, n)| -hbar * l1 * j - hbar * hbar * l2 * n / mass)
                .collect(),
        ],
    })
}
