//! Versioned CSV formats for states, moments, trajectories, residual reports and kernels.
//!
//! Floats are written with `{:e}`, the shortest representation that parses back to the same
//! value, so files round-trip exactly and repeated runs produce identical bytes.

use std::io::{BufRead, Write};

use crate::balance::BalanceResidual;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::kernel::DecoherenceKernel;
use crate::moments::MomentFields;
use crate::ode::Trajectory;
use crate::state::WignerState;

pub const STATE_MAGIC: &str = "# wigner-state v1";

/// Header line, column line `x,p,w`, then one row per node with `p` varying fastest.
pub fn write_state(out: &mut impl Write, state: &WignerState) -> Result<()> {
    let g = &state.grid;
    writeln!(
        out,
        "{STATE_MAGIC} n_x={} n_p={} x_min={:e} x_max={:e} p_min={:e} p_max={:e} hbar={:e} time={:e}",
        g.n_x, g.n_p, g.x_min, g.x_max, g.p_min, g.p_max, g.hbar, state.time
    )?;
    writeln!(out, "x,p,w")?;
    let (xs, ps) = (g.xs(), g.ps());
    for ((i, j), v) in state.w.indexed_iter() {
        writeln!(out, "{:e},{:e},{:e}", xs[i], ps[j], v)?;
    }
    Ok(())
}

fn header_field<'a>(fields: &'a [(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Format(format!("state header lacks `{key}`")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Format(format!("cannot parse {what} from `{s}`")))
}

pub fn read_state(input: impl BufRead) -> Result<WignerState> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty state file".into()))??;
    let rest = header
        .strip_prefix(STATE_MAGIC)
        .ok_or_else(|| Error::Format(format!("expected `{STATE_MAGIC}` header, got `{header}`")))?;
    let fields: Vec<(&str, &str)> = rest.split_whitespace().filter_map(|kv| kv.split_once('=')).collect();
    let get = |k: &str| header_field(&fields, k);
    let n_x: usize = parse(get("n_x")?, "n_x")?;
    let n_p: usize = parse(get("n_p")?, "n_p")?;
    let grid = PhaseGrid::new(
        (parse(get("x_min")?, "x_min")?, parse(get("x_max")?, "x_max")?, n_x),
        (parse(get("p_min")?, "p_min")?, parse(get("p_max")?, "p_max")?, n_p),
        parse(get("hbar")?, "hbar")?,
    )?;
    let time: f64 = parse(get("time")?, "time")?;
    let columns = lines.next().ok_or_else(|| Error::Format("missing column line".into()))??;
    if columns.trim() != "x,p,w" {
        return Err(Error::Format(format!("expected columns `x,p,w`, got `{columns}`")));
    }
    let mut values = Vec::with_capacity(n_x * n_p);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let w = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Format(format!("malformed row `{line}`")))?;
        values.push(parse::<f64>(w, "w")?);
    }
    if values.len() != n_x * n_p {
        return Err(Error::Format(format!("expected {} rows, found {}", n_x * n_p, values.len())));
    }
    let w = ndarray::Array2::from_shape_vec((n_x, n_p), values).map_err(|e| Error::Format(e.to_string()))?;
    WignerState::from_array(grid, w, time)
}

/// Columns `x,N,J,E,flux_E`.
pub fn write_moments(out: &mut impl Write, fields: &MomentFields) -> Result<()> {
    writeln!(out, "# moments v1 time={:e}", fields.time)?;
    writeln!(out, "x,N,J,E,flux_E")?;
    for i in 0..fields.len() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            fields.x[i], fields.density[i], fields.current[i], fields.energy[i], fields.flux_energy[i]
        )?;
    }
    Ok(())
}

/// Columns `t,A,B,C,D,exp_minus_D,coherence_length`; the last is empty when A ≤ 0.
pub fn write_trajectory(out: &mut impl Write, traj: &Trajectory) -> Result<()> {
    writeln!(out, "t,A,B,C,D,exp_minus_D,coherence_length")?;
    for pt in &traj.points {
        let s = pt.state;
        let coh = pt.coherence_length(traj.hbar).map(|l| format!("{l:e}")).unwrap_or_default();
        writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{coh}", pt.t, s.a, s.b, s.c, s.d, pt.exp_minus_d())?;
    }
    Ok(())
}

/// Per-snapshot norms of the three balance-law residuals.
pub fn write_residuals(out: &mut impl Write, report: &[BalanceResidual]) -> Result<()> {
    writeln!(out, "t,l2_N,l2_J,l2_E,max_N,max_J,max_E,dt,dx")?;
    for r in report {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.time, r.l2[0], r.l2[1], r.l2[2], r.max[0], r.max[1], r.max[2], r.dt_used, r.dx_used
        )?;
    }
    Ok(())
}

/// Columns `xi,re_lambda,im_lambda`.
pub fn write_lambda(out: &mut impl Write, kernel: &DecoherenceKernel) -> Result<()> {
    writeln!(out, "xi,re_lambda,im_lambda")?;
    let xi = kernel.xi_grid();
    for (j, z) in kernel.lambda().iter().enumerate() {
        writeln!(out, "{:e},{:e},{:e}", xi.xi(j), z.re, z.im)?;
    }
    Ok(())
}

/// Columns `p,re_gamma,im_gamma`.
pub fn write_momentum_kernel(out: &mut impl Write, kernel: &DecoherenceKernel) -> Result<()> {
    writeln!(out, "p,re_gamma,im_gamma")?;
    for (p, z) in kernel.momentum_nodes().iter().zip(kernel.momentum_kernel()) {
        writeln!(out, "{:e},{:e},{:e}", p, z.re, z.im)?;
    }
    Ok(())
}
