//! Built-in gaussian-reduction scenarios with the standard figure parameters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use wigdeco::io::write_trajectory;
use wigdeco::{integrate, OdeParams, OdeState, Trajectory};

use crate::CliError;

/// Shared settings of the three figure runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSettings {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// Initial `(A, B, C, D)`.
    pub initial: (f64, f64, f64, f64),
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 50.0,
            sample_every: 100,
            initial: (1.0, 0.0, 1.0, 0.0),
        }
    }
}

/// `(file stem, κ, η)` for m = 0.4, τ = 1, Λ₀ = 1, ħ = 1.
pub const FIGURES: [(&str, f64, f64); 3] = [("fig1", 1.0, 0.0), ("fig2", 1.0, 0.5), ("fig3", 0.0, 0.5)];

pub fn figure_trajectory(kappa: f64, eta: f64, settings: &FigureSettings) -> wigdeco::Result<Trajectory> {
    let params = OdeParams::new(0.4, 1.0, 1.0, kappa, eta, 1.0)?;
    let (a, b, c, d) = settings.initial;
    integrate(&params, OdeState::new(a, b, c, d), settings.t_end, settings.dt, settings.sample_every)
}

/// Writes `fig1.csv`, `fig2.csv`, `fig3.csv` and `plot_figures.py` into `dir`.
pub fn write_figures(dir: &Path, settings: &FigureSettings) -> Result<(), CliError> {
    for (stem, kappa, eta) in FIGURES {
        let traj = figure_trajectory(kappa, eta, settings).map_err(CliError::Runtime)?;
        let last = traj.last();
        log::info!(
            "{stem}: t = {} A = {:.6e} B = {:.6e} C = {:.6e} exp(-D) = {:.6e}",
            last.t,
            last.state.a,
            last.state.b,
            last.state.c,
            last.exp_minus_d()
        );
        let path = dir.join(format!("{stem}.csv"));
        let mut out = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        write_trajectory(&mut out, &traj).map_err(CliError::Runtime)?;
        out.flush().map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join("plot_figures.py");
    std::fs::write(&path, PLOT_SCRIPT).map_err(|e| CliError::io(&path, e))?;
    Ok(())
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots fig1.csv, fig2.csv and fig3.csv from this directory into fig1.png, fig2.png, fig3.png."""
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = pathlib.Path(__file__).resolve().parent
TITLES = {
    "fig1": "m=0.4, tau=1, Lambda0=1, kappa=1, eta=0",
    "fig2": "m=0.4, tau=1, Lambda0=1, kappa=1, eta=0.5",
    "fig3": "m=0.4, tau=1, Lambda0=1, kappa=0, eta=0.5",
}


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {key: [float(r[key]) for r in rows] for key in ("t", "A", "B", "C", "exp_minus_D")}


for stem, title in TITLES.items():
    data = load(HERE / f"{stem}.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, label in (("A", "A(t)"), ("B", "B(t)"), ("C", "C(t)"), ("exp_minus_D", "exp(-D(t))")):
        ax.plot(data["t"], data[key], label=label)
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(HERE / f"{stem}.png", dpi=150)
    plt.close(fig)
"#;
