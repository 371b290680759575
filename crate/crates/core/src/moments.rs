//! Momentum moments of a Wigner state: density, current, energy and their fluxes.

use crate::state::WignerState;

/// Spatial profiles of the first momentum moments of `w`.
///
/// `flux_current = (1/m²)∫p²w dp` (which equals `2E/m`) and `flux_energy = (1/2m²)∫p³w dp`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFields {
    pub time: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub current: Vec<f64>,
    pub energy: Vec<f64>,
    pub flux_current: Vec<f64>,
    pub flux_energy: Vec<f64>,
}

impl MomentFields {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        if self.x.len() < 2 {
            0.0
        } else {
            self.x[1] - self.x[0]
        }
    }

    /// ∫N dx, ∫J dx, ∫E dx by the rectangle rule.
    pub fn totals(&self) -> (f64, f64, f64) {
        let dx = self.dx();
        (
            self.density.iter().sum::<f64>() * dx,
            self.current.iter().sum::<f64>() * dx,
            self.energy.iter().sum::<f64>() * dx,
        )
    }
}

/// Rectangle-rule moments over the momentum grid. Each row is summed in a fixed order, so the
/// result does not depend on how rows are scheduled.
pub fn moments(state: &WignerState, mass: f64) -> MomentFields {
    let grid = &state.grid;
    let dp = grid.dp();
    let ps = grid.ps();
    let n_x = grid.n_x;
    let mut out = MomentFields {
        time: state.time,
        x: grid.xs(),
        density: vec![0.0; n_x],
        current: vec![0.0; n_x],
        energy: vec![0.0; n_x],
        flux_current: vec![0.0; n_x],
        flux_energy: vec![0.0; n_x],
    };
    for (i, row) in state.w.outer_iter().enumerate() {
        let (mut m0, mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0, 0.0);
        for (&v, &p) in row.iter().zip(&ps) {
            m0 += v;
            m1 += p * v;
            m2 += p * p * v;
            m3 += p * p * p * v;
        }
        out.density[i] = m0 * dp;
        out.current[i] = m1 * dp / mass;
        out.energy[i] = m2 * dp / (2.0 * mass);
        out.flux_current[i] = m2 * dp / (mass * mass);
        out.flux_energy[i] = m3 * dp / (2.0 * mass * mass);
    }
    let edge = state.p_boundary_ratio();
    if edge > 1e-8 {
        log::warn!("Wigner function at the momentum boundary is {edge:e} of its maximum; moments may be truncated");
    }
    out
}
