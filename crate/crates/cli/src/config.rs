//! Run configuration: one TOML file with sections mirroring the library types.
//!
//! ```toml
//! scenario = "harmonic-wfp"
//! mode = "pde"                 # pde | ode | cross-validate | figures
//! output_dir = "out/harmonic"
//! seed = 0                     # used by the random-blobs initial state
//!
//! [grid]
//! x_half = 20.0
//! n_x = 256
//! p_half = 12.0
//! n_p = 256
//!
//! [solver]
//! mass = 0.4
//! tau = 1.0
//! eta = 0.5
//! hbar = 1.0
//! dt = 1e-3
//! t_end = 5.0
//! snapshot_every = 100
//! theta = "classical-force"    # spectral | classical-force
//!
//! [decoherence]
//! model = "fokker-planck"      # none | full-kernel | fokker-planck | fokker-planck-drift | jacoboni-bordone
//! lambda2 = 1.0
//!
//! [potential]
//! type = "harmonic"            # zero | harmonic | linear | tabulated
//! kappa = 1.0
//!
//! [initial]
//! type = "gaussian"            # gaussian | dump | random-blobs
//! a = 1.0
//! b = 0.0
//! c = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pde,
    Ode,
    CrossValidate,
    Figures,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub mode: Mode,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub grid: Option<GridConfig>,
    pub solver: SolverSection,
    #[serde(default)]
    pub decoherence: DecoherenceSection,
    pub kernel: Option<KernelSection>,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub initial: InitialSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_half: f64,
    pub n_x: usize,
    pub p_half: f64,
    pub n_p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaChoice {
    #[default]
    Spectral,
    ClassicalForce,
}

fn default_mass() -> f64 {
    0.4
}
fn one() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_snapshot_every() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Mean time between collisions; deliberately has no default.
    pub tau: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub theta: ThetaChoice,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DecoherenceSection {
    #[default]
    None,
    FullKernel,
    FokkerPlanck {
        lambda2: f64,
    },
    /// Drift and diffusion constants; taken from `[kernel]` when omitted.
    FokkerPlanckDrift {
        lambda1: Option<f64>,
        lambda2: Option<f64>,
    },
    JacoboniBordone {
        coherence_length: f64,
        #[serde(default)]
        p0: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSection {
    PeakedGaussian { k0: f64, sigma: f64, r0_sq: f64 },
    /// CSV with columns `k,re_r,im_r,re_chi,im_chi` and optionally `re_t,im_t`.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSection {
    #[default]
    Zero,
    Harmonic {
        kappa: f64,
    },
    Linear {
        force: f64,
    },
    /// CSV with columns `x,V` on the position nodes of the grid.
    Tabulated {
        path: PathBuf,
    },
}

fn default_blob_count() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSection {
    /// `exp(−(a p² + b p x + c x²))` scaled to `mass`.
    Gaussian {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    /// A state written by a previous run.
    Dump { path: PathBuf },
    /// Sum of randomly placed gaussian blobs drawn from the top-level `seed`.
    RandomBlobs {
        #[serde(default = "default_blob_count")]
        count: usize,
    },
}

impl Default for InitialSection {
    fn default() -> Self {
        Self::Gaussian {
            a: 1.0,
            b: 0.0,
            c: 1.0,
            mass: 1.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(KernelSection::Tabulated { path }) = &mut self.kernel {
            fix(path);
        }
        if let PotentialSection::Tabulated { path } = &mut self.potential {
            fix(path);
        }
        if let InitialSection::Dump { path } = &mut self.initial {
            fix(path);
        }
    }

    /// Checks everything that can be checked without running: field domains, required
    /// sections per mode and that referenced files exist.
    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, reason: String| Err(CliError::Config(format!("field `{name}`: {reason}")));
        let s = &self.solver;
        for (name, v) in [("solver.mass", s.mass), ("solver.tau", s.tau), ("solver.hbar", s.hbar), ("solver.dt", s.dt)] {
            if !(v > 0.0) || !v.is_finite() {
                return field(name, format!("must be positive, got {v}"));
            }
        }
        if !(s.eta >= 0.0) {
            return field("solver.eta", format!("must be >= 0, got {}", s.eta));
        }
        if !(s.t_end > 0.0) {
            return field("solver.t_end", format!("must be positive, got {}", s.t_end));
        }
        if s.snapshot_every == 0 {
            return field("solver.snapshot_every", "must be at least 1".into());
        }
        if self.scenario.trim().is_empty() {
            return field("scenario", "must not be empty".into());
        }
        for (name, path) in self.referenced_files() {
            if !path.is_file() {
                return field(name, format!("file {} does not exist", path.display()));
            }
        }
        match self.mode {
            Mode::Pde => {
                if self.grid.is_none() {
                    return field("grid", "required for mode `pde`".into());
                }
                if matches!(self.decoherence, DecoherenceSection::FullKernel) && self.kernel.is_none() {
                    return field("kernel", "required by decoherence model `full-kernel`".into());
                }
                if let DecoherenceSection::FokkerPlanckDrift { lambda1, lambda2 } = &self.decoherence {
                    if (lambda1.is_none() || lambda2.is_none()) && self.kernel.is_none() {
                        return field("decoherence.lambda1", "give lambda1 and lambda2 or a [kernel] section".into());
                    }
                }
            }
            Mode::Ode | Mode::CrossValidate => {
                if !matches!(self.potential, PotentialSection::Harmonic { .. } | PotentialSection::Zero) {
                    return field("potential.type", "the gaussian reduction needs a zero or harmonic potential".into());
                }
                if !matches!(self.decoherence, DecoherenceSection::FokkerPlanck { .. } | DecoherenceSection::None) {
                    return field("decoherence.model", "the gaussian reduction needs `fokker-planck` or `none`".into());
                }
                if !matches!(self.initial, InitialSection::Gaussian { .. }) {
                    return field("initial.type", "the gaussian reduction needs a gaussian initial state".into());
                }
                if self.mode == Mode::CrossValidate && self.grid.is_none() {
                    return field("grid", "required for mode `cross-validate`".into());
                }
            }
            Mode::Figures => {}
        }
        Ok(())
    }

    fn referenced_files(&self) -> Vec<(&'static str, &Path)> {
        let mut out = Vec::new();
        if let Some(KernelSection::Tabulated { path }) = &self.kernel {
            out.push(("kernel.path", path.as_path()));
        }
        if let PotentialSection::Tabulated { path } = &self.potential {
            out.push(("potential.path", path.as_path()));
        }
        if let InitialSection::Dump { path } = &self.initial {
            out.push(("initial.path", path.as_path()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "t"
mode = "ode"
output_dir = "out"
[solver]
tau = 1.0
t_end = 1.0
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.solver.mass, 0.4);
        assert_eq!(c.solver.dt, 1e-3);
        assert!(matches!(c.decoherence, DecoherenceSection::None));
        assert!(matches!(c.initial, InitialSection::Gaussian { a, .. } if a == 1.0));
        c.validate().unwrap();
    }

    #[test]
    fn missing_tau_is_named() {
        let err = RunConfig::parse(&MINIMAL.replace("tau = 1.0\n", "")).unwrap_err();
        assert!(err.to_string().contains("tau"), "{err}");
    }

    #[test]
    fn domain_errors_name_the_field() {
        let c = RunConfig::parse(&MINIMAL.replace("tau = 1.0", "tau = -1.0")).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("solver.tau"));
        let c = RunConfig::parse(&MINIMAL.replace("mode = \"ode\"", "mode = \"pde\"")).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("`grid`"));
        let text = format!("{MINIMAL}[initial]\ntype = \"dump\"\npath = \"/nonexistent/state.csv\"\n");
        let c = RunConfig::parse(&text.replace("mode = \"ode\"", "mode = \"figures\"")).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("initial.path"));
        assert!(RunConfig::parse(&format!("{MINIMAL}bogus = 1\n")).is_err());
    }
}
