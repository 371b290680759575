//! Uniform periodic grids: the (x, p) phase-space grid and the correlation grid in ξ.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Rectangular phase-space grid, periodic in both directions.
///
/// Nodes sit at `x_min + i·Δx` for `i < n_x` with `Δx = (x_max − x_min)/n_x`, so `x_max`
/// itself is the periodic image of `x_min`. Likewise for `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    pub hbar: f64,
}

impl PhaseGrid {
    pub fn new(
        (x_min, x_max, n_x): (f64, f64, usize),
        (p_min, p_max, n_p): (f64, f64, usize),
        hbar: f64,
    ) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("x_max", format!("need finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if !(p_max > p_min) || !p_min.is_finite() || !p_max.is_finite() {
            return Err(invalid("p_max", format!("need finite p_min < p_max, got [{p_min}, {p_max}]")));
        }
        if !n_x.is_power_of_two() || n_x < 8 {
            return Err(invalid("n_x", format!("must be a power of two >= 8, got {n_x}")));
        }
        if !n_p.is_power_of_two() || n_p < 8 {
            return Err(invalid("n_p", format!("must be a power of two >= 8, got {n_p}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(invalid("hbar", format!("must be positive, got {hbar}")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_x,
            p_min,
            p_max,
            n_p,
            hbar,
        })
    }

    /// Square grid centred on the origin.
    pub fn symmetric(x_half: f64, n_x: usize, p_half: f64, n_p: usize, hbar: f64) -> Result<Self> {
        Self::new((-x_half, x_half, n_x), (-p_half, p_half, n_p), hbar)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_x as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    /// Spacing of the correlation variable conjugate to `p`: Δξ = 2πħ/(n_p Δp).
    pub fn dxi(&self) -> f64 {
        2.0 * PI * self.hbar / (self.n_p as f64 * self.dp())
    }

    /// The correlation grid conjugate to this grid's momentum axis.
    pub fn xi_grid(&self) -> XiGrid {
        XiGrid {
            n: self.n_p,
            dxi: self.dxi(),
        }
    }

    /// ξ value of FFT bin `k` along `p` (bins in standard FFT order).
    pub fn xi_of_bin(&self, k: usize) -> f64 {
        signed_bin(k, self.n_p) as f64 * self.dxi()
    }

    /// Angular wavenumber of FFT bin `k` along `x`.
    pub fn kx_of_bin(&self, k: usize) -> f64 {
        2.0 * PI * signed_bin(k, self.n_x) as f64 / (self.x_max - self.x_min)
    }

    pub fn same_shape(&self, other: &PhaseGrid) -> bool {
        self.n_x == other.n_x
            && self.n_p == other.n_p
            && close(self.x_min, other.x_min)
            && close(self.x_max, other.x_max)
            && close(self.p_min, other.p_min)
            && close(self.p_max, other.p_max)
            && close(self.hbar, other.hbar)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Maps an FFT bin index to its signed frequency index in `[-n/2, n/2)`.
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Uniform correlation grid `ξ_j = (j − n/2)·Δξ`, `j = 0..n`. Contains ξ = 0 at `j = n/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiGrid {
    pub n: usize,
    pub dxi: f64,
}

impl XiGrid {
    pub fn new(n: usize, dxi: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(invalid("xi_grid", format!("need an even number of points >= 4, got {n}")));
        }
        if !(dxi > 0.0) || !dxi.is_finite() {
            return Err(invalid("xi_grid", format!("spacing must be positive, got {dxi}")));
        }
        Ok(Self { n, dxi })
    }

    pub fn xi(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dxi
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.xi(j)).collect()
    }

    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    pub fn max_abs(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi
    }

    /// Sample index holding the ξ of FFT bin `k`.
    pub fn index_of_bin(&self, k: usize) -> usize {
        (signed_bin(k, self.n) + (self.n / 2) as i64) as usize
    }

    /// Momentum spacing conjugate to this grid for the given ħ.
    pub fn dp(&self, hbar: f64) -> f64 {
        2.0 * PI * hbar / (self.n as f64 * self.dxi)
    }

    pub fn p(&self, j: usize, hbar: f64) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dp(hbar)
    }

    pub fn check_conjugate(&self, grid: &PhaseGrid) -> Result<()> {
        if self.n != grid.n_p {
            return Err(Error::GridMismatch(format!(
                "kernel has {} correlation samples, state grid has n_p = {}",
                self.n, grid.n_p
            )));
        }
        let want = grid.dxi();
        if (self.dxi - want).abs() > 1e-10 * want {
            return Err(Error::GridMismatch(format!(
                "kernel spacing dxi = {} is not conjugate to the momentum grid (expected {want})",
                self.dxi
            )));
        }
        Ok(())
    }
}
