mod config;
mod figures;
mod scenario;
mod tables;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::figures::{write_figures, FigureSettings};

/// Replaces the base of every output directory; each run then writes to `$VAR/<scenario>`.
const OUTPUT_DIR_ENV: &str = "WIGDECO_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(wigdeco::Error),
    #[error("runtime error: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wigdeco", version, about = "Wigner equation with collisional decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more scenarios; several configs run concurrently, each in its own directory.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Write the three built-in figure trajectories and a plotting script.
    Figures { output_dir: PathBuf },
    /// Parse and check a configuration without running it.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(path)?;
    if let Some(base) = std::env::var_os(OUTPUT_DIR_ENV) {
        config.output_dir = PathBuf::from(base).join(&config.scenario);
    } else if config.output_dir.is_relative() {
        config.output_dir = path.parent().unwrap_or(Path::new(".")).join(&config.output_dir);
    }
    Ok(config)
}

fn run(paths: &[PathBuf]) -> Result<(), CliError> {
    let configs = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    for (i, a) in configs.iter().enumerate() {
        if let Some(b) = configs[..i].iter().find(|b| b.output_dir == a.output_dir) {
            return Err(CliError::Config(format!(
                "field `output_dir`: scenarios `{}` and `{}` both write to {}",
                b.scenario,
                a.scenario,
                a.output_dir.display()
            )));
        }
    }
    let jobs = configs.iter().map(scenario::prepare).collect::<Result<Vec<_>, _>>()?;
    if jobs.len() == 1 {
        return scenario::execute(jobs.into_iter().next().expect("one job"));
    }
    let results: Vec<Result<(), CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.into_iter().map(|job| s.spawn(move || scenario::execute(job))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    // report every failure, return the first
    let mut first = None;
    for err in results.into_iter().filter_map(Result::err) {
        log::error!("{err}");
        first.get_or_insert(err);
    }
    first.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { configs } => run(configs),
        Command::Figures { output_dir } => std::fs::create_dir_all(output_dir)
            .map_err(|e| CliError::io(output_dir, e))
            .and_then(|()| write_figures(output_dir, &FigureSettings::default())),
        Command::Validate { config } => load(config).and_then(|c| scenario::prepare(&c)).map(|job| {
            println!("{}: ok ({} run, output {})", config.display(), mode_name(&job.kind), job.output_dir.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn mode_name(kind: &scenario::JobKind) -> &'static str {
    match kind {
        scenario::JobKind::Pde(_) => "pde",
        scenario::JobKind::Ode(_) => "ode",
        scenario::JobKind::CrossValidate(_) => "cross-validate",
        scenario::JobKind::Figures(_) => "figures",
    }
}
