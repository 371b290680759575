//! Least-squares recovery of gaussian parameters from a sampled Wigner function.

use nalgebra::{DMatrix, DVector};

use crate::state::{GaussianParams, WignerState};

/// Points below this fraction of the maximum are left out of the fit.
pub const FIT_THRESHOLD: f64 = 1e-10;
/// Relative residual above which a state is reported as non-gaussian.
pub const NON_GAUSSIAN_RESIDUAL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub params: GaussianParams,
    /// ‖Xβ − y‖/‖y‖ for y = −log w on the fitted points.
    pub residual: f64,
    pub non_gaussian: bool,
    /// Points above the threshold in |w| whose value is not positive; they are excluded and
    /// make the fit non-gaussian.
    pub negative_points: usize,
    pub fitted_points: usize,
}

/// Fits `−log w ≈ A p² + B p x + C x² + D` on the region `|w| > 1e-10·max|w|`.
pub fn fit_gaussian(state: &WignerState) -> GaussianFit {
    let grid = &state.grid;
    let cutoff = FIT_THRESHOLD * state.max_abs();
    let xs = grid.xs();
    let ps = grid.ps();
    let mut rows: Vec<[f64; 4]> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut negative_points = 0;
    for (i, row) in state.w.outer_iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v.abs() <= cutoff || cutoff == 0.0 {
                continue;
            }
            if v <= 0.0 {
                negative_points += 1;
                continue;
            }
            let (x, p) = (xs[i], ps[j]);
            rows.push([p * p, p * x, x * x, 1.0]);
            rhs.push(-v.ln());
        }
    }
    let degenerate = GaussianFit {
        params: GaussianParams::new(0.0, 0.0, 0.0, 0.0),
        residual: f64::INFINITY,
        non_gaussian: true,
        negative_points,
        fitted_points: rows.len(),
    };
    if rows.len() < 4 {
        return degenerate;
    }
    // Columns are scaled to unit norm so that the SVD cut-off treats them alike.
    let n = rows.len();
    let mut x = DMatrix::from_fn(n, 4, |r, c| rows[r][c]);
    let mut scales = [1.0; 4];
    for (c, s) in scales.iter_mut().enumerate() {
        let norm = x.column(c).norm();
        if norm > 0.0 {
            *s = norm;
            x.column_mut(c).scale_mut(1.0 / norm);
        }
    }
    let y = DVector::from_vec(rhs);
    let Ok(beta) = x.clone().svd(true, true).solve(&y, 1e-14) else {
        return degenerate;
    };
    let residual = (&x * &beta - &y).norm() / y.norm().max(f64::MIN_POSITIVE);
    let b: Vec<f64> = (0..4).map(|c| beta[c] / scales[c]).collect();
    GaussianFit {
        params: GaussianParams::new(b[0], b[1], b[2], b[3]),
        residual,
        non_gaussian: residual > NON_GAUSSIAN_RESIDUAL || negative_points > 0,
        negative_points,
        fitted_points: n,
    }
}

/// Exact free-streaming map of the quadratic form under `x ↦ x − pt/m`.
pub fn free_streaming_params(params: &GaussianParams, t: f64, mass: f64) -> GaussianParams {
    let s = t / mass;
    GaussianParams::new(
        params.a - params.b * s + params.c * s * s,
        params.b - 2.0 * params.c * s,
        params.c,
        params.d,
    )
}
