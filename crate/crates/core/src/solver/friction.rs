//! Caldeira-Leggett friction substep `∂w/∂t = η ∂(pw)/∂p`.
//!
//! The exact flow is the dilation `w(x, p) ↦ e^{ηt} w(x, p e^{ηt})`. It is applied cell by
//! cell: the new mass in `[a, b]` is the old mass in `[a e^{ηt}, b e^{ηt}]`, read off a
//! six-point Lagrange interpolant of the cumulative mass. The per-cell masses telescope, so the row mass is
//! preserved up to rounding.
//!
//! The dilation acts on cell averages, while the solver stores point values. The conversion
//! `w̄_j = w_j + (w_{j+1} − 2w_j + w_{j−1})/24` and its exact inverse are diagonal in the
//! correlation representation ([`cell_average_profile`]); without them the map would carry a
//! spurious `Δp²/12` momentum variance.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{signed_bin, PhaseGrid};
use crate::spectral::PhaseFft;

const STENCIL: usize = 6;

/// Lagrange weights on the nodes `−2, −1, 0, 1, 2, 3` at fractional position `t`.
fn lagrange_weights(t: f64) -> [f64; STENCIL] {
    let mut w = [1.0; STENCIL];
    for (k, wk) in w.iter_mut().enumerate() {
        let ok = k as f64 - 2.0;
        for m in 0..STENCIL {
            if m != k {
                let om = m as f64 - 2.0;
                *wk *= (t - om) / (ok - om);
            }
        }
    }
    w
}

/// Precomputed interpolation stencils for one dilation factor on one momentum grid.
#[derive(Debug, Clone)]
pub struct FrictionMap {
    n_p: usize,
    /// For each new cell edge: first index into the cumulative array and the stencil weights.
    edges: Vec<(usize, [f64; STENCIL])>,
    /// Edges that fall outside the grid before/after the cumulative range.
    clamp_low: Vec<bool>,
    clamp_high: Vec<bool>,
}

impl FrictionMap {
    pub fn new(grid: &PhaseGrid, eta: f64, dt: f64) -> Self {
        let n_p = grid.n_p;
        let dp = grid.dp();
        let e0 = grid.p_min - 0.5 * dp;
        let factor = (eta * dt).exp();
        let mut edges = Vec::with_capacity(n_p + 1);
        let mut clamp_low = Vec::with_capacity(n_p + 1);
        let mut clamp_high = Vec::with_capacity(n_p + 1);
        for l in 0..=n_p {
            let edge = e0 + l as f64 * dp;
            let s = (edge * factor - e0) / dp;
            clamp_low.push(s <= 0.0);
            clamp_high.push(s >= n_p as f64);
            let s = s.clamp(0.0, n_p as f64);
            let base = (s.floor() as usize).clamp(2, n_p - 3);
            edges.push((base - 2, lagrange_weights(s - base as f64)));
        }
        Self {
            n_p,
            edges,
            clamp_low,
            clamp_high,
        }
    }

    /// Applies the dilation to every row of cell averages `w`. Returns the largest relative change of a row
    /// mass, which measures outflow through the momentum boundary.
    pub fn apply(&self, w: &mut Array2<f64>) -> f64 {
        let n = self.n_p;
        let mut cumulative = vec![0.0; n + 1];
        let mut mapped = vec![0.0; n + 1];
        let mut worst: f64 = 0.0;
        for mut row in w.outer_iter_mut() {
            let mut acc = 0.0;
            let mut scale = 0.0;
            for (j, v) in row.iter().enumerate() {
                acc += v;
                scale += v.abs();
                cumulative[j + 1] = acc;
            }
            let total = cumulative[n];
            for (l, (base, wts)) in self.edges.iter().enumerate() {
                mapped[l] = if self.clamp_low[l] {
                    0.0
                } else if self.clamp_high[l] {
                    total
                } else {
                    wts.iter().zip(&cumulative[*base..base + STENCIL]).map(|(a, b)| a * b).sum()
                };
            }
            let mut new_total = 0.0;
            for (j, v) in row.iter_mut().enumerate() {
                *v = mapped[j + 1] - mapped[j];
                new_total += *v;
            }
            if scale > 0.0 {
                worst = worst.max((new_total - total).abs() / scale);
            }
        }
        worst
    }
}

/// Per-FFT-bin multiplier taking point values to fourth-order cell averages along p.
/// It equals 1 at ξ = 0, so it conserves mass, and it is bounded below by 5/6.
pub fn cell_average_profile(n_p: usize) -> Vec<Complex64> {
    (0..n_p)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * signed_bin(k, n_p) as f64 / n_p as f64;
            Complex64::new((11.0 + theta.cos()) / 12.0, 0.0)
        })
        .collect()
}

/// One friction substep of length `dt` on point values.
pub fn apply_friction(w: &mut Array2<f64>, grid: &PhaseGrid, eta: f64, dt: f64) -> Result<()> {
    if !(eta >= 0.0) {
        return Err(crate::error::invalid("eta", format!("must be >= 0, got {eta}")));
    }
    if eta == 0.0 {
        return Ok(());
    }
    let to_cells = cell_average_profile(grid.n_p);
    let to_points: Vec<Complex64> = to_cells.iter().map(|s| 1.0 / s).collect();
    let mut fft = PhaseFft::new(grid.n_x, grid.n_p);
    fft.apply_xi_profile(w, &to_cells);
    let outflow = FrictionMap::new(grid, eta, dt).apply(w);
    fft.apply_xi_profile(w, &to_points);
    check_outflow(outflow)
}

pub(crate) fn check_outflow(outflow: f64) -> Result<()> {
    if outflow > 1e-12 {
        return Err(Error::BoundaryOutflow { outflow });
    }
    Ok(())
}
