//! Wigner states on a phase-space grid and the gaussian ansatz.

use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::grid::PhaseGrid;

/// Gaussian tails at the grid boundary must stay below this fraction of the peak.
pub const TAIL_LIMIT: f64 = 1e-12;

/// Real Wigner function `w[[i, j]] = w(x_i, p_j)` at time `time`. Not necessarily positive.
#[derive(Debug, Clone)]
pub struct WignerState {
    pub grid: PhaseGrid,
    pub w: Array2<f64>,
    pub time: f64,
}

impl WignerState {
    pub fn zeros(grid: PhaseGrid) -> Self {
        let w = Array2::zeros((grid.n_x, grid.n_p));
        Self { grid, w, time: 0.0 }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.xs();
        let ps = grid.ps();
        let w = Array2::from_shape_fn((grid.n_x, grid.n_p), |(i, j)| f(xs[i], ps[j]));
        Self { grid, w, time: 0.0 }
    }

    pub fn from_array(grid: PhaseGrid, w: Array2<f64>, time: f64) -> Result<Self> {
        if w.dim() != (grid.n_x, grid.n_p) {
            return Err(Error::GridMismatch(format!(
                "array is {:?}, grid is ({}, {})",
                w.dim(),
                grid.n_x,
                grid.n_p
            )));
        }
        Ok(Self { grid, w, time })
    }

    /// ∫∫ w dx dp by the rectangle rule.
    pub fn mass(&self) -> f64 {
        self.w.sum() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }

    /// Largest |w| on the first and last momentum columns relative to max |w|.
    pub fn p_boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let last = self.grid.n_p - 1;
        let edge = (0..self.grid.n_x)
            .map(|i| self.w[[i, 0]].abs().max(self.w[[i, last]].abs()))
            .fold(0.0, f64::max);
        edge / max
    }

    /// Largest |w| on the first and last position rows relative to max |w|.
    pub fn x_boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let last = self.grid.n_x - 1;
        let edge = (0..self.grid.n_p)
            .map(|j| self.w[[0, j]].abs().max(self.w[[last, j]].abs()))
            .fold(0.0, f64::max);
        edge / max
    }

    /// Max-norm difference to another state on the same grid.
    pub fn max_diff(&self, other: &WignerState) -> f64 {
        self.w
            .iter()
            .zip(other.w.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Coefficients of `w(x, p) = exp(−(A p² + B p x + C x² + D))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GaussianParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Gaussian with the given quadratic part, normalized to total mass `mass`.
    pub fn normalized(a: f64, b: f64, c: f64, mass: f64) -> Result<Self> {
        let disc = 4.0 * a * c - b * b;
        if !(disc > 0.0) {
            return Err(Error::NotNormalizable { discriminant: disc });
        }
        if !(mass > 0.0) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        let d = (2.0 * std::f64::consts::PI / (mass * disc.sqrt())).ln();
        Ok(Self { a, b, c, d })
    }

    pub fn discriminant(&self) -> f64 {
        4.0 * self.a * self.c - self.b * self.b
    }

    pub fn is_normalizable(&self) -> bool {
        self.discriminant() > 0.0 && self.a > 0.0 && self.c > 0.0
    }

    /// `2π e^{−D}/√(4AC − B²)`.
    pub fn mass(&self) -> Result<f64> {
        let disc = self.discriminant();
        if !(disc > 0.0) || !(self.a > 0.0) {
            return Err(Error::NotNormalizable { discriminant: disc });
        }
        Ok(2.0 * std::f64::consts::PI * (-self.d).exp() / disc.sqrt())
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        (-(self.a * p * p + self.b * p * x + self.c * x * x + self.d)).exp()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Peak-relative value of the gaussian on the boundary of the grid's rectangle.
    pub fn boundary_ratio(&self, grid: &PhaseGrid) -> f64 {
        let disc = self.discriminant();
        // min over p of the quadratic form at fixed x is x²·disc/(4A), and symmetrically in p.
        let x_edge = grid.x_min.abs().min(grid.x_max.abs());
        let p_edge = grid.p_min.abs().min(grid.p_max.abs());
        let ex = (-(x_edge * x_edge) * disc / (4.0 * self.a)).exp();
        let ep = (-(p_edge * p_edge) * disc / (4.0 * self.c)).exp();
        ex.max(ep)
    }
}

/// Samples the gaussian ansatz on `grid`.
pub fn gaussian_state(params: GaussianParams, grid: &PhaseGrid) -> Result<WignerState> {
    if !params.is_normalizable() {
        return Err(Error::NotNormalizable {
            discriminant: params.discriminant(),
        });
    }
    if grid.x_min >= 0.0 || grid.x_max <= 0.0 || grid.p_min >= 0.0 || grid.p_max <= 0.0 {
        return Err(invalid("grid", "the grid must contain the origin to hold a centred gaussian"));
    }
    let ratio = params.boundary_ratio(grid);
    if ratio > TAIL_LIMIT {
        return Err(Error::TailTruncation {
            ratio,
            limit: TAIL_LIMIT,
        });
    }
    Ok(WignerState::from_fn(grid.clone(), |x, p| params.eval(x, p)))
}

/// Momentum spread, position spread and coherence length of a gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceMetrics {
    pub momentum_spread: f64,
    pub position_spread: f64,
    pub coherence_length: f64,
}

/// `(1/√(2A), 1/√(2C), ħ√(2A))`.
pub fn coherence_metrics(params: &GaussianParams, hbar: f64) -> Result<CoherenceMetrics> {
    if !(params.a > 0.0) {
        return Err(invalid("A", format!("must be positive, got {}", params.a)));
    }
    if !(params.c > 0.0) {
        return Err(invalid("C", format!("must be positive, got {}", params.c)));
    }
    Ok(CoherenceMetrics {
        momentum_spread: 1.0 / (2.0 * params.a).sqrt(),
        position_spread: 1.0 / (2.0 * params.c).sqrt(),
        coherence_length: hbar * (2.0 * params.a).sqrt(),
    })
}
