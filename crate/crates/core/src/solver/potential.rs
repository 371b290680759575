use crate::error::{invalid, Result};
use crate::grid::PhaseGrid;
use crate::kernel::DecoherenceKernel;

/// External potential energy V(x).
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `V = κx²/2`.
    Harmonic { kappa: f64 },
    /// Uniform force: `V = −force·x`.
    Linear { force: f64 },
    /// Samples of V on the position nodes of the solver grid.
    Tabulated { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self, grid: &PhaseGrid) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Harmonic { kappa } => {
                if !(*kappa >= 0.0) || !kappa.is_finite() {
                    return Err(invalid("kappa", format!("must be finite and >= 0, got {kappa}")));
                }
                Ok(())
            }
            PotentialSpec::Linear { force } => {
                if !force.is_finite() {
                    return Err(invalid("force", "must be finite"));
                }
                Ok(())
            }
            PotentialSpec::Tabulated { values } => {
                if values.len() != grid.n_x {
                    return Err(invalid(
                        "potential",
                        format!("expected {} samples, got {}", grid.n_x, values.len()),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("potential", "samples must be finite"));
                }
                Ok(())
            }
        }
    }

    /// True when V is at most quadratic, so Θ[V] reduces exactly to the classical force term.
    pub fn is_quadratic(&self) -> bool {
        !matches!(self, PotentialSpec::Tabulated { .. })
    }
}

/// V(x) − (ħ/τ) Re Γ(x), evaluable anywhere on the line.
#[derive(Debug, Clone)]
pub struct EffectivePotential<'a> {
    spec: PotentialSpec,
    x_min: f64,
    dx: f64,
    shift: Option<(f64, &'a DecoherenceKernel)>,
}

impl<'a> EffectivePotential<'a> {
    pub fn new(spec: &PotentialSpec, grid: &PhaseGrid) -> Result<Self> {
        spec.validate(grid)?;
        Ok(Self {
            spec: spec.clone(),
            x_min: grid.x_min,
            dx: grid.dx(),
            shift: None,
        })
    }

    /// Adds the collisional potential `−(ħ/τ) Re Γ` of `kernel`.
    pub fn with_collisional_shift(mut self, kernel: &'a DecoherenceKernel, hbar: f64, tau: f64) -> Self {
        if kernel.has_collisional_potential() {
            self.shift = Some((hbar / tau, kernel));
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.shift.is_none()
            && match &self.spec {
                PotentialSpec::Zero => true,
                PotentialSpec::Harmonic { kappa } => *kappa == 0.0,
                PotentialSpec::Linear { force } => *force == 0.0,
                PotentialSpec::Tabulated { values } => values.iter().all(|v| *v == 0.0),
            }
    }

    pub fn is_quadratic(&self) -> bool {
        self.shift.is_none() && self.spec.is_quadratic()
    }

    pub fn value(&self, x: f64) -> f64 {
        let base = match &self.spec {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Harmonic { kappa } => 0.5 * kappa * x * x,
            PotentialSpec::Linear { force } => -force * x,
            PotentialSpec::Tabulated { values } => cubic_lagrange(values, (x - self.x_min) / self.dx),
        };
        match self.shift {
            Some((coef, kernel)) => base - coef * kernel.collisional_potential_at(x).re,
            None => base,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let base = match &self.spec {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Harmonic { kappa } => kappa * x,
            PotentialSpec::Linear { force } => -force,
            PotentialSpec::Tabulated { values } => {
                let s = (x - self.x_min) / self.dx;
                cubic_lagrange_derivative(values, s) / self.dx
            }
        };
        match self.shift {
            Some((coef, kernel)) => base - coef * kernel.collisional_potential_derivative_at(x).re,
            None => base,
        }
    }
}

fn stencil(n: usize, s: f64) -> (usize, f64) {
    // 4-point stencil base index l−1 with fractional offset θ in [0, 1), clamped to the samples.
    let s = s.clamp(0.0, (n - 1) as f64);
    let l = (s.floor() as usize).clamp(1, n.saturating_sub(3).max(1));
    (l - 1, s - l as f64)
}

/// Cubic Lagrange interpolation of `v` at fractional index `s`; constant beyond the ends.
pub(crate) fn cubic_lagrange(v: &[f64], s: f64) -> f64 {
    let n = v.len();
    if n < 4 {
        let i = s.round().clamp(0.0, (n - 1) as f64) as usize;
        return v[i];
    }
    let (b, t) = stencil(n, s);
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    (0..4).map(|k| w[k] * v[b + k]).sum()
}

fn cubic_lagrange_derivative(v: &[f64], s: f64) -> f64 {
    let n = v.len();
    if n < 4 || s <= 0.0 || s >= (n - 1) as f64 {
        return 0.0;
    }
    let (b, t) = stencil(n, s);
    let w = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
        (3.0 * t * t - 1.0) / 6.0,
    ];
    (0..4).map(|k| w[k] * v[b + k]).sum()
}
