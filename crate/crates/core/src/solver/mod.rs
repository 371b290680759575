//! Time integration of the Wigner equation with decoherence and friction,
//!
//! ```text
//! ∂w/∂t + (p/m)∂w/∂x + Θ[V − (ħ/τ)Γ]w = −γ∗w/τ + η∂(pw)/∂p,
//! ```
//!
//! by Strang splitting of exactly solvable substeps on a periodic phase-space grid:
//! free streaming is a shift in x (exact in Fourier-x), while Θ and the decoherence term are
//! both multiplications in the (x, ξ) representation and friction is a dilation in p.

mod friction;
mod potential;

use ndarray::Array2;
use num_complex::Complex64;

pub use friction::{apply_friction, cell_average_profile, FrictionMap};
pub use potential::{EffectivePotential, PotentialSpec};

use crate::error::{invalid, Error, Result};
use crate::grid::PhaseGrid;
use crate::kernel::DecoherenceKernel;
use crate::spectral::PhaseFft;
use crate::state::WignerState;

/// Which decoherence operator to integrate.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoherenceMode {
    None,
    /// The full kernel `−γ∗w/τ` from a [`DecoherenceKernel`].
    FullKernel,
    /// Quadratic truncation `(ħ²Λ₂/τ)∂²w/∂p² − (ħΛ₁/τ)∂w/∂p`.
    FokkerPlanckDrift { lambda1: f64, lambda2: f64 },
    /// Wigner-Fokker-Planck diffusion `(ħ²Λ₂/τ)∂²w/∂p²`.
    FokkerPlanck { lambda2: f64 },
    /// Relaxation `(w_{λ,p₀} − w)/τ` towards the Lorentzian-smoothed state.
    JacoboniBordone { coherence_length: f64, p0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    /// Exact pseudo-differential operator via the (x, ξ) representation.
    Spectral,
    /// Classical force term `−V′∂w/∂p`, exact for quadratic V.
    ClassicalForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mass: f64,
    pub tau: f64,
    pub eta: f64,
    pub hbar: f64,
    pub dt: f64,
    pub decoherence: DecoherenceMode,
    pub theta: ThetaMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mass: 0.4,
            tau: 1.0,
            eta: 0.0,
            hbar: 1.0,
            dt: 1e-3,
            decoherence: DecoherenceMode::None,
            theta: ThetaMode::Spectral,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive, got {v}")))
            }
        };
        positive("mass", self.mass)?;
        positive("tau", self.tau)?;
        positive("hbar", self.hbar)?;
        positive("dt", self.dt)?;
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(invalid("eta", format!("must be >= 0, got {}", self.eta)));
        }
        match self.decoherence {
            DecoherenceMode::FokkerPlanckDrift { lambda1, lambda2 } => {
                if !lambda1.is_finite() {
                    return Err(invalid("lambda1", "must be finite"));
                }
                if !(lambda2 >= 0.0) || !lambda2.is_finite() {
                    return Err(invalid("lambda2", format!("must be >= 0, got {lambda2}")));
                }
            }
            DecoherenceMode::FokkerPlanck { lambda2 } => {
                if !(lambda2 >= 0.0) || !lambda2.is_finite() {
                    return Err(invalid("lambda2", format!("must be >= 0, got {lambda2}")));
                }
            }
            DecoherenceMode::JacoboniBordone { coherence_length, p0 } => {
                positive("coherence_length", coherence_length)?;
                if !p0.is_finite() {
                    return Err(invalid("p0", "must be finite"));
                }
            }
            DecoherenceMode::None | DecoherenceMode::FullKernel => {}
        }
        Ok(())
    }
}

/// ξ-space multiplier of the decoherence flow over `h`, in FFT bin order along p.
pub fn decoherence_profile(
    grid: &PhaseGrid,
    config: &SolverConfig,
    kernel: Option<&DecoherenceKernel>,
    h: f64,
) -> Result<Vec<Complex64>> {
    let n = grid.n_p;
    let tau = config.tau;
    let hbar = grid.hbar;
    let profile = match &config.decoherence {
        DecoherenceMode::None => vec![Complex64::new(1.0, 0.0); n],
        DecoherenceMode::FullKernel => {
            let kernel = kernel.ok_or_else(|| invalid("kernel", "FullKernel decoherence needs a kernel"))?;
            let xi = kernel.xi_grid();
            xi.check_conjugate(grid)?;
            if (kernel.hbar() - hbar).abs() > 1e-12 * hbar {
                return Err(Error::GridMismatch(format!(
                    "kernel built with hbar = {}, grid uses {hbar}",
                    kernel.hbar()
                )));
            }
            kernel.check_no_amplification()?;
            (0..n)
                .map(|k| (-kernel.lambda()[xi.index_of_bin(k)] * h / tau).exp())
                .collect()
        }
        &DecoherenceMode::FokkerPlanckDrift { lambda1, lambda2 } => (0..n)
            .map(|k| {
                let xi = grid.xi_of_bin(k);
                Complex64::new(-lambda2 * xi * xi, lambda1 * xi).scale(h / tau).exp()
            })
            .collect(),
        &DecoherenceMode::FokkerPlanck { lambda2 } => (0..n)
            .map(|k| {
                let xi = grid.xi_of_bin(k);
                Complex64::new((-lambda2 * xi * xi * h / tau).exp(), 0.0)
            })
            .collect(),
        &DecoherenceMode::JacoboniBordone { coherence_length, p0 } => (0..n)
            .map(|k| {
                let xi = grid.xi_of_bin(k);
                let factor = Complex64::from_polar((-xi.abs() / coherence_length).exp(), p0 * xi / hbar);
                (-(Complex64::new(1.0, 0.0) - factor) * h / tau).exp()
            })
            .collect(),
    };
    Ok(profile)
}

/// (x, ξ) multiplier `exp(−i h/ħ·[V(x+ξ/2) − V(x−ξ/2)])` (Spectral) or
/// `exp(−i h ξ V′(x)/ħ)` (ClassicalForce).
pub fn theta_multiplier(grid: &PhaseGrid, potential: &EffectivePotential, mode: ThetaMode, h: f64) -> Array2<Complex64> {
    let hbar = grid.hbar;
    let xs = grid.xs();
    let xis: Vec<f64> = (0..grid.n_p).map(|k| grid.xi_of_bin(k)).collect();
    let mut aliased = false;
    let out = Array2::from_shape_fn((grid.n_x, grid.n_p), |(i, k)| {
        let phase = theta_phase(potential, mode, xs[i], xis[k]) * h / hbar;
        if mode == ThetaMode::Spectral && k + 1 < grid.n_p / 2 && !aliased {
            let next = theta_phase(potential, mode, xs[i], xis[k + 1]) * h / hbar;
            if (next - phase).abs() > std::f64::consts::PI {
                aliased = true;
            }
        }
        Complex64::cis(-phase)
    });
    if aliased {
        log::warn!("potential phase changes by more than pi between adjacent xi samples; reduce dt or refine p");
    }
    out
}

fn theta_phase(potential: &EffectivePotential, mode: ThetaMode, x: f64, xi: f64) -> f64 {
    match mode {
        ThetaMode::Spectral => potential.value(x + 0.5 * xi) - potential.value(x - 0.5 * xi),
        ThetaMode::ClassicalForce => xi * potential.derivative(x),
    }
}

/// (p, k_x) multiplier of free streaming over `h`: shift by `p h/m` in x.
fn transport_multiplier(grid: &PhaseGrid, mass: f64, h: f64) -> Array2<Complex64> {
    let ps = grid.ps();
    Array2::from_shape_fn((grid.n_p, grid.n_x), |(j, k)| Complex64::cis(-grid.kx_of_bin(k) * ps[j] * h / mass))
}

/// Diagnostics accumulated over a run.
#[derive(Debug, Clone, Default)]
pub struct StepDiagnostics {
    pub steps: usize,
    /// Largest |w| on the x or p boundary relative to max |w| seen at any step.
    pub max_boundary_ratio: f64,
    pub boundary_warnings: usize,
}

/// Strang-split integrator with all substep multipliers precomputed.
///
/// Composition per step of length `dt`:
/// streaming(dt/2) · [Θ(dt/2)·D(dt/2)] · friction(dt) · [D(dt/2)·Θ(dt/2)] · streaming(dt/2),
/// where the bracketed factors act together in the (x, ξ) representation. Without friction
/// the two brackets merge into one full-step multiplication.
pub struct Stepper {
    grid: PhaseGrid,
    config: SolverConfig,
    fft: PhaseFft,
    stream_half: Array2<Complex64>,
    /// Half-step brackets around friction; they also convert to and from cell averages.
    xi_half_in: Array2<Complex64>,
    xi_half_out: Array2<Complex64>,
    xi_full: Option<Array2<Complex64>>,
    friction: Option<FrictionMap>,
    diagnostics: StepDiagnostics,
}

const BOUNDARY_WARN: f64 = 1e-8;

impl Stepper {
    pub fn new(
        grid: &PhaseGrid,
        config: &SolverConfig,
        potential: &PotentialSpec,
        kernel: Option<&DecoherenceKernel>,
    ) -> Result<Self> {
        config.validate()?;
        if (config.hbar - grid.hbar).abs() > 1e-12 * grid.hbar {
            return Err(invalid("hbar", format!("solver uses {} but grid uses {}", config.hbar, grid.hbar)));
        }
        let dt = config.dt;
        let mut effective = EffectivePotential::new(potential, grid)?;
        if let Some(k) = kernel {
            effective = effective.with_collisional_shift(k, config.hbar, config.tau);
        }
        if config.theta == ThetaMode::ClassicalForce && !effective.is_quadratic() {
            log::warn!("classical force term is only exact for quadratic potentials");
        }
        let p_extent = grid.p_min.abs().max(grid.p_max.abs());
        log::debug!(
            "streaming Courant number p_max dt/(m dx) = {:.3}",
            p_extent * dt / (config.mass * grid.dx())
        );

        let with_friction = config.eta > 0.0;
        let deco_h = if with_friction { 0.5 * dt } else { dt };
        let deco = decoherence_profile(grid, config, kernel, deco_h)?;
        let theta_half = theta_multiplier(grid, &effective, config.theta, 0.5 * dt);
        let xi_bracket = |theta: &Array2<Complex64>, extra: &[Complex64]| {
            let mut m = theta.clone();
            for mut row in m.outer_iter_mut() {
                for ((z, d), e) in row.iter_mut().zip(&deco).zip(extra) {
                    *z *= *d * *e;
                }
            }
            m
        };
        let (xi_half_in, xi_half_out, xi_full, friction) = if with_friction {
            let to_cells = friction::cell_average_profile(grid.n_p);
            let to_points: Vec<Complex64> = to_cells.iter().map(|s| 1.0 / s).collect();
            (
                xi_bracket(&theta_half, &to_cells),
                xi_bracket(&theta_half, &to_points),
                None,
                Some(FrictionMap::new(grid, config.eta, dt)),
            )
        } else {
            let theta_full = theta_multiplier(grid, &effective, config.theta, dt);
            let ones = vec![Complex64::new(1.0, 0.0); grid.n_p];
            (Array2::zeros((0, 0)), Array2::zeros((0, 0)), Some(xi_bracket(&theta_full, &ones)), None)
        };
        Ok(Self {
            grid: grid.clone(),
            config: config.clone(),
            fft: PhaseFft::new(grid.n_x, grid.n_p),
            stream_half: transport_multiplier(grid, config.mass, 0.5 * dt),
            xi_half_in,
            xi_half_out,
            xi_full,
            friction,
            diagnostics: StepDiagnostics::default(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> &StepDiagnostics {
        &self.diagnostics
    }

    /// Advances `state` by one step of length `dt`.
    pub fn step(&mut self, state: &mut WignerState) -> Result<()> {
        if !state.grid.same_shape(&self.grid) {
            return Err(Error::GridMismatch("state grid differs from the stepper grid".into()));
        }
        let w = &mut state.w;
        self.fft.apply_kx_multiplier(w, &self.stream_half);
        match (&self.xi_full, &self.friction) {
            (Some(full), _) => self.fft.apply_xi_multiplier(w, full),
            (None, Some(friction)) => {
                self.fft.apply_xi_multiplier(w, &self.xi_half_in);
                let outflow = friction.apply(w);
                friction::check_outflow(outflow)?;
                self.fft.apply_xi_multiplier(w, &self.xi_half_out);
            }
            (None, None) => unreachable!("stepper built without a xi-space substep"),
        }
        self.fft.apply_kx_multiplier(w, &self.stream_half);
        state.time += self.config.dt;

        if !state.is_finite() {
            return Err(Error::NonFinite { time: state.time });
        }
        let ratio = state.p_boundary_ratio().max(state.x_boundary_ratio());
        let d = &mut self.diagnostics;
        d.steps += 1;
        if ratio > BOUNDARY_WARN {
            if d.boundary_warnings == 0 {
                log::warn!("Wigner function reaches the grid boundary ({ratio:e} of max) at t = {}", state.time);
            }
            d.boundary_warnings += 1;
        }
        d.max_boundary_ratio = d.max_boundary_ratio.max(ratio);
        Ok(())
    }

    pub fn run(&mut self, state: &mut WignerState, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }
}

/// One step of length `config.dt`; convenience wrapper that rebuilds the multipliers.
pub fn step(
    state: &WignerState,
    config: &SolverConfig,
    potential: &PotentialSpec,
    kernel: Option<&DecoherenceKernel>,
) -> Result<WignerState> {
    let mut stepper = Stepper::new(&state.grid, config, potential, kernel)?;
    let mut out = state.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// Exact flow of `∂w/∂t + Θ[V]w = 0` over `dt`.
pub fn apply_theta(
    potential: &PotentialSpec,
    state: &WignerState,
    mode: ThetaMode,
    dt: f64,
) -> Result<WignerState> {
    let effective = EffectivePotential::new(potential, &state.grid)?;
    let mut out = state.clone();
    if effective.is_zero() {
        return Ok(out);
    }
    let m = theta_multiplier(&state.grid, &effective, mode, dt);
    PhaseFft::new(state.grid.n_x, state.grid.n_p).apply_xi_multiplier(&mut out.w, &m);
    Ok(out)
}

/// Θ[V]w itself, i.e. the generator: multiplication by (i/ħ)[V(x+ξ/2) − V(x−ξ/2)] in (x, ξ).
pub fn theta_action(potential: &PotentialSpec, state: &WignerState, mode: ThetaMode) -> Result<WignerState> {
    let effective = EffectivePotential::new(potential, &state.grid)?;
    let grid = &state.grid;
    let xs = grid.xs();
    let m = Array2::from_shape_fn((grid.n_x, grid.n_p), |(i, k)| {
        let xi = grid.xi_of_bin(k);
        // The unpaired Nyquist bin carries no odd part.
        if k == grid.n_p / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, theta_phase(&effective, mode, xs[i], xi) / grid.hbar)
    });
    let mut out = state.clone();
    PhaseFft::new(grid.n_x, grid.n_p).apply_xi_multiplier(&mut out.w, &m);
    Ok(out)
}

/// Exact flow of the decoherence term alone over `dt`.
pub fn apply_decoherence(
    state: &WignerState,
    config: &SolverConfig,
    kernel: Option<&DecoherenceKernel>,
    dt: f64,
) -> Result<WignerState> {
    let mut out = state.clone();
    if config.decoherence == DecoherenceMode::None {
        return Ok(out);
    }
    let profile = decoherence_profile(&state.grid, config, kernel, dt)?;
    PhaseFft::new(state.grid.n_x, state.grid.n_p).apply_xi_profile(&mut out.w, &profile);
    Ok(out)
}

/// γ∗w, the momentum convolution with the kernel: multiplication by Λ(ξ) in (x, ξ).
pub fn convolve_momentum_kernel(state: &WignerState, kernel: &DecoherenceKernel) -> Result<WignerState> {
    let xi = kernel.xi_grid();
    xi.check_conjugate(&state.grid)?;
    let profile: Vec<Complex64> = (0..state.grid.n_p).map(|k| kernel.lambda()[xi.index_of_bin(k)]).collect();
    let mut out = state.clone();
    PhaseFft::new(state.grid.n_x, state.grid.n_p).apply_xi_profile(&mut out.w, &profile);
    Ok(out)
}

/// (𝒲𝓘)∗w, the state after a single collision: multiplication by 1 − Λ(ξ).
pub fn apply_collision_factor(state: &WignerState, kernel: &DecoherenceKernel) -> Result<WignerState> {
    let xi = kernel.xi_grid();
    xi.check_conjugate(&state.grid)?;
    let profile: Vec<Complex64> = (0..state.grid.n_p)
        .map(|k| Complex64::new(1.0, 0.0) - kernel.lambda()[xi.index_of_bin(k)])
        .collect();
    let mut out = state.clone();
    PhaseFft::new(state.grid.n_x, state.grid.n_p).apply_xi_profile(&mut out.w, &profile);
    Ok(out)
}

/// Free streaming over `dt`.
pub fn apply_transport(state: &WignerState, mass: f64, dt: f64) -> WignerState {
    let mut out = state.clone();
    let m = transport_multiplier(&state.grid, mass, dt);
    PhaseFft::new(state.grid.n_x, state.grid.n_p).apply_kx_multiplier(&mut out.w, &m);
    out
}
