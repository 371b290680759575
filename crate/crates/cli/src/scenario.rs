//! Turns a validated configuration into a runnable job and executes it.
//!
//! Everything that can fail because of the configuration (grid sizes, kernel tables, tail
//! truncation of the initial state, ...) happens in [`prepare`] and is reported as a
//! configuration error; [`execute`] only fails for runtime reasons.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use wigdeco::crossval::write_report;
use wigdeco::io::{read_state, write_lambda, write_moments, write_momentum_kernel, write_residuals, write_state, write_trajectory};
use wigdeco::{
    build_kernel, cross_validate, gaussian_state, integrate, lorentzian_kernel, moments, quadratic_approx, residuals,
    BalanceParams, CrossValidation, DecoherenceKernel, DecoherenceMode, Error, GaussianParams, MomentFields, OdeParams,
    OdeState, PhaseGrid, PotentialSpec, ScatteringEnvironment, SolverConfig, Stepper, ThetaMode, WignerState,
};

use crate::config::{DecoherenceSection, InitialSection, KernelSection, Mode, PotentialSection, RunConfig, ThetaChoice};
use crate::figures::{write_figures, FigureSettings};
use crate::tables::{read_potential, read_scattering};
use crate::CliError;

#[derive(Debug)]
pub struct Job {
    pub scenario: String,
    pub output_dir: PathBuf,
    pub kind: JobKind,
}

#[derive(Debug)]
pub enum JobKind {
    Pde(Box<PdeJob>),
    Ode(OdeJob),
    CrossValidate(CrossValidation),
    Figures(FigureSettings),
}

#[derive(Debug)]
pub struct PdeJob {
    pub grid: PhaseGrid,
    pub solver: SolverConfig,
    pub potential: PotentialSpec,
    /// Built whenever the configuration describes one; written out for inspection.
    pub kernel: Option<DecoherenceKernel>,
    pub initial: WignerState,
    pub steps: usize,
    pub snapshot_every: usize,
    /// `None` when the decoherence model has no finite Taylor constants.
    pub balance: Option<BalanceParams>,
}

#[derive(Debug)]
pub struct OdeJob {
    pub params: OdeParams,
    pub initial: OdeState,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
}

/// Maps a library error raised while interpreting `section` to a configuration error.
fn in_section(section: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::InvalidParameter { field, reason } => CliError::Config(format!("field `{section}.{field}`: {reason}")),
        other => CliError::Config(format!("field `{section}`: {other}")),
    }
}

pub fn prepare(config: &RunConfig) -> Result<Job, CliError> {
    config.validate()?;
    let kind = match config.mode {
        Mode::Pde => JobKind::Pde(Box::new(prepare_pde(config)?)),
        Mode::Ode => JobKind::Ode(prepare_ode(config)?),
        Mode::CrossValidate => JobKind::CrossValidate(prepare_cross_validation(config)?),
        Mode::Figures => JobKind::Figures(prepare_figures(config)),
    };
    Ok(Job {
        scenario: config.scenario.clone(),
        output_dir: config.output_dir.clone(),
        kind,
    })
}

fn build_grid(config: &RunConfig) -> Result<PhaseGrid, CliError> {
    let g = config.grid.as_ref().expect("validated: grid present");
    PhaseGrid::symmetric(g.x_half, g.n_x, g.p_half, g.n_p, config.solver.hbar).map_err(in_section("grid"))
}

fn step_count(config: &RunConfig) -> Result<usize, CliError> {
    let steps = (config.solver.t_end / config.solver.dt).round();
    if (steps * config.solver.dt - config.solver.t_end).abs() > 1e-9 * config.solver.t_end {
        return Err(CliError::Config(format!(
            "field `solver.t_end`: {} is not a whole number of steps dt = {}",
            config.solver.t_end, config.solver.dt
        )));
    }
    Ok(steps as usize)
}

fn prepare_pde(config: &RunConfig) -> Result<PdeJob, CliError> {
    let s = &config.solver;
    let grid = build_grid(config)?;
    let mut kernel = match &config.kernel {
        None => None,
        Some(section) => {
            let env = match section {
                KernelSection::PeakedGaussian { k0, sigma, r0_sq } => {
                    ScatteringEnvironment::peaked_gaussian(*k0, *sigma, *r0_sq).map_err(in_section("kernel"))?
                }
                KernelSection::Tabulated { path } => ScatteringEnvironment::Tabulated(read_scattering(path)?),
            };
            Some(build_kernel(&env, grid.xi_grid(), s.hbar).map_err(in_section("kernel"))?)
        }
    };
    let decoherence = match &config.decoherence {
        DecoherenceSection::None => DecoherenceMode::None,
        DecoherenceSection::FullKernel => DecoherenceMode::FullKernel,
        &DecoherenceSection::FokkerPlanck { lambda2 } => DecoherenceMode::FokkerPlanck { lambda2 },
        &DecoherenceSection::FokkerPlanckDrift { lambda1, lambda2 } => {
            let from_kernel = match (lambda1, lambda2, &kernel) {
                (Some(_), Some(_), _) => None,
                (_, _, Some(k)) => Some(quadratic_approx(k).map_err(in_section("kernel"))?),
                _ => unreachable!("validated: constants or kernel present"),
            };
            DecoherenceMode::FokkerPlanckDrift {
                lambda1: lambda1.or(from_kernel.map(|c| c.0)).unwrap_or_default(),
                lambda2: lambda2.or(from_kernel.map(|c| c.1)).unwrap_or_default(),
            }
        }
        &DecoherenceSection::JacoboniBordone { coherence_length, p0 } => {
            if kernel.is_some() {
                log::warn!("[kernel] is ignored by the jacoboni-bordone model");
            }
            kernel = Some(
                lorentzian_kernel(coherence_length, p0, s.hbar, grid.xi_grid()).map_err(in_section("decoherence"))?,
            );
            DecoherenceMode::JacoboniBordone { coherence_length, p0 }
        }
    };
    let solver = SolverConfig {
        mass: s.mass,
        tau: s.tau,
        eta: s.eta,
        hbar: s.hbar,
        dt: s.dt,
        decoherence,
        theta: match s.theta {
            ThetaChoice::Spectral => ThetaMode::Spectral,
            ThetaChoice::ClassicalForce => ThetaMode::ClassicalForce,
        },
    };
    solver.validate().map_err(in_section("decoherence"))?;
    let potential = match &config.potential {
        PotentialSection::Zero => PotentialSpec::Zero,
        &PotentialSection::Harmonic { kappa } => PotentialSpec::Harmonic { kappa },
        &PotentialSection::Linear { force } => PotentialSpec::Linear { force },
        PotentialSection::Tabulated { path } => PotentialSpec::Tabulated {
            values: read_potential(path, &grid)?,
        },
    };
    potential.validate(&grid).map_err(in_section("potential"))?;
    // only the full kernel feeds the collisional potential shift into the dynamics
    let stepper_kernel = kernel.as_ref().filter(|_| solver.decoherence == DecoherenceMode::FullKernel);
    // construct once so that every check the stepper performs happens before the run
    Stepper::new(&grid, &solver, &potential, stepper_kernel).map_err(in_section("solver"))?;
    let balance = match BalanceParams::from_solver(&solver, &potential, &grid, stepper_kernel) {
        Ok(b) => Some(b),
        Err(Error::NotDifferentiable) => {
            log::info!("balance laws need finite kernel derivatives; skipping balance.csv");
            None
        }
        Err(e) => return Err(in_section("decoherence")(e)),
    };
    let initial = initial_state(config, &grid)?;
    Ok(PdeJob {
        steps: step_count(config)?,
        snapshot_every: s.snapshot_every,
        grid,
        solver,
        potential,
        kernel,
        initial,
        balance,
    })
}

fn initial_state(config: &RunConfig, grid: &PhaseGrid) -> Result<WignerState, CliError> {
    match &config.initial {
        &InitialSection::Gaussian { a, b, c, mass } => {
            let params = GaussianParams::normalized(a, b, c, mass).map_err(in_section("initial"))?;
            gaussian_state(params, grid).map_err(in_section("initial"))
        }
        InitialSection::Dump { path } => {
            let file = File::open(path).map_err(|e| CliError::Config(format!("field `initial.path`: {}: {e}", path.display())))?;
            let state = read_state(BufReader::new(file))
                .map_err(|e| CliError::Config(format!("field `initial.path`: {}: {e}", path.display())))?;
            if !state.grid.same_shape(grid) || (state.grid.hbar - grid.hbar).abs() > 1e-12 * grid.hbar {
                return Err(CliError::Config(format!(
                    "field `initial.path`: dump grid {:?} does not match the configured grid {:?}",
                    state.grid, grid
                )));
            }
            Ok(state)
        }
        &InitialSection::RandomBlobs { count } => {
            if count == 0 {
                return Err(CliError::Config("field `initial.count`: must be at least 1".into()));
            }
            Ok(random_blobs(grid, count, config.seed))
        }
    }
}

/// Sum of `count` positive gaussian blobs placed in the central half of the grid, unit mass.
pub fn random_blobs(grid: &PhaseGrid, count: usize, seed: u64) -> WignerState {
    let mut rng = StdRng::seed_from_u64(seed);
    let (xq, pq) = (0.25 * (grid.x_max - grid.x_min), 0.25 * (grid.p_max - grid.p_min));
    let (xc, pc) = (0.5 * (grid.x_max + grid.x_min), 0.5 * (grid.p_max + grid.p_min));
    // widths are capped so that every blob decays well inside the box
    let (sx_max, sp_max) = (xq / 8.0, pq / 8.0);
    let blobs: Vec<[f64; 5]> = (0..count)
        .map(|_| {
            let x0 = xc + rng.random_range(-xq..xq);
            let p0 = pc + rng.random_range(-pq..pq);
            let sx = sx_max * rng.random_range(0.25..1.0);
            let sp = sp_max * rng.random_range(0.25..1.0);
            let amp = rng.random_range(0.5..1.0);
            [x0, p0, sx, sp, amp]
        })
        .collect();
    let mut state = WignerState::from_fn(grid.clone(), |x, p| {
        blobs
            .iter()
            .map(|[x0, p0, sx, sp, amp]| {
                amp * (-0.5 * ((x - x0) / sx).powi(2) - 0.5 * ((p - p0) / sp).powi(2)).exp()
            })
            .sum()
    });
    let mass = state.mass();
    state.w.mapv_inplace(|v| v / mass);
    state
}

fn gaussian_init(config: &RunConfig) -> Result<GaussianParams, CliError> {
    match config.initial {
        InitialSection::Gaussian { a, b, c, mass } => {
            GaussianParams::normalized(a, b, c, mass).map_err(in_section("initial"))
        }
        _ => unreachable!("validated: gaussian initial state"),
    }
}

fn ode_params(config: &RunConfig) -> Result<OdeParams, CliError> {
    let s = &config.solver;
    let lambda0 = match config.decoherence {
        DecoherenceSection::FokkerPlanck { lambda2 } => s.hbar * s.hbar * lambda2,
        _ => 0.0,
    };
    let kappa = match config.potential {
        PotentialSection::Harmonic { kappa } => kappa,
        _ => 0.0,
    };
    OdeParams::new(s.mass, s.tau, lambda0, kappa, s.eta, s.hbar).map_err(in_section("solver"))
}

fn prepare_ode(config: &RunConfig) -> Result<OdeJob, CliError> {
    step_count(config)?;
    Ok(OdeJob {
        params: ode_params(config)?,
        initial: OdeState::from(gaussian_init(config)?),
        t_end: config.solver.t_end,
        dt: config.solver.dt,
        sample_every: config.solver.snapshot_every,
    })
}

fn prepare_cross_validation(config: &RunConfig) -> Result<CrossValidation, CliError> {
    step_count(config)?;
    let init = gaussian_init(config)?;
    if let InitialSection::Gaussian { mass, .. } = config.initial {
        if mass != 1.0 {
            log::warn!("cross-validation always starts from unit mass; initial.mass = {mass} is ignored");
        }
    }
    if config.solver.theta == ThetaChoice::Spectral {
        log::info!("cross-validation uses the classical force term (exact for the harmonic trap)");
    }
    let grid = build_grid(config)?;
    // the solver rejects initial data truncated by the box; check it here as a config error
    gaussian_state(init, &grid).map_err(in_section("grid"))?;
    Ok(CrossValidation {
        ode: ode_params(config)?,
        grid,
        dt: config.solver.dt,
        t_end: config.solver.t_end,
        sample_every: config.solver.snapshot_every,
        initial: (init.a, init.b, init.c),
    })
}

fn prepare_figures(config: &RunConfig) -> FigureSettings {
    // the figures start at D = 0 as plotted; initial.mass does not apply
    let initial = match config.initial {
        InitialSection::Gaussian { a, b, c, .. } => (a, b, c, 0.0),
        _ => {
            log::warn!("figures start from a gaussian; using the default initial data");
            FigureSettings::default().initial
        }
    };
    FigureSettings {
        dt: config.solver.dt,
        t_end: config.solver.t_end,
        sample_every: config.solver.snapshot_every,
        initial,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

/// Creates `path`, lets `body` fill it and flushes.
fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> wigdeco::Result<()>) -> Result<(), CliError> {
    let mut out = create(path)?;
    body(&mut out).map_err(|e| match e {
        Error::Io(io) => CliError::io(path, io),
        other => CliError::Runtime(other),
    })?;
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn execute(job: Job) -> Result<(), CliError> {
    let dir = &job.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    log::info!("[{}] writing to {}", job.scenario, dir.display());
    match job.kind {
        JobKind::Pde(pde) => run_pde(*pde, dir),
        JobKind::Ode(ode) => {
            let traj = integrate(&ode.params, ode.initial, ode.t_end, ode.dt, ode.sample_every).map_err(CliError::Runtime)?;
            let last = traj.last();
            log::info!(
                "[{}] t = {} A = {:.6e} B = {:.6e} C = {:.6e} exp(-D) = {:.6e}",
                job.scenario,
                last.t,
                last.state.a,
                last.state.b,
                last.state.c,
                last.exp_minus_d()
            );
            write_file(&dir.join("trajectory.csv"), |out| write_trajectory(out, &traj))
        }
        JobKind::CrossValidate(cv) => {
            let report = cross_validate(&cv).map_err(CliError::Runtime)?;
            log::info!(
                "[{}] max relative deviation {:.3e}, mass drift {:.3e}",
                job.scenario,
                report.max_relative_deviation,
                report.mass_drift
            );
            write_file(&dir.join("crossval.csv"), |out| write_report(out, &report))?;
            write_file(&dir.join("crossval_summary.csv"), |out| {
                writeln!(out, "max_relative_deviation,mass_drift")?;
                writeln!(out, "{:e},{:e}", report.max_relative_deviation, report.mass_drift)?;
                Ok(())
            })
        }
        JobKind::Figures(settings) => write_figures(dir, &settings),
    }
}

fn run_pde(job: PdeJob, dir: &Path) -> Result<(), CliError> {
    if let Some(kernel) = &job.kernel {
        write_file(&dir.join("lambda.csv"), |out| write_lambda(out, kernel))?;
        write_file(&dir.join("gamma.csv"), |out| write_momentum_kernel(out, kernel))?;
    }
    let stepper_kernel = job.kernel.as_ref().filter(|_| job.solver.decoherence == DecoherenceMode::FullKernel);
    let mut stepper = Stepper::new(&job.grid, &job.solver, &job.potential, stepper_kernel).map_err(CliError::Runtime)?;
    let mut state = job.initial;
    let mut snapshots: Vec<MomentFields> = Vec::new();
    let snapshot = |index: usize, state: &WignerState| -> Result<MomentFields, CliError> {
        let fields = moments(state, job.solver.mass);
        write_file(&dir.join(format!("state_{index:05}.csv")), |out| write_state(out, state))?;
        write_file(&dir.join(format!("moments_{index:05}.csv")), |out| write_moments(out, &fields))?;
        Ok(fields)
    };
    let mass0 = state.mass();
    snapshots.push(snapshot(0, &state)?);
    let mut done = 0;
    let mut index = 0;
    while done < job.steps {
        let chunk = job.snapshot_every.min(job.steps - done);
        stepper.run(&mut state, chunk).map_err(CliError::Runtime)?;
        done += chunk;
        index += 1;
        let fields = snapshot(index, &state)?;
        // centred time differences need equally spaced snapshots
        if chunk == job.snapshot_every {
            snapshots.push(fields);
        }
    }
    let diag = stepper.diagnostics();
    log::info!(
        "{} steps, relative mass drift {:.3e}, max boundary ratio {:.3e}",
        diag.steps,
        (state.mass() - mass0).abs() / mass0.abs().max(f64::MIN_POSITIVE),
        diag.max_boundary_ratio
    );
    match &job.balance {
        Some(params) if snapshots.len() >= 3 => {
            let report = residuals(&snapshots, params).map_err(CliError::Runtime)?;
            write_file(&dir.join("balance.csv"), |out| write_residuals(out, &report))?;
        }
        Some(_) => log::info!("fewer than 3 equally spaced snapshots; skipping balance.csv"),
        None => {}
    }
    Ok(())
}
