//! Phase-space solver for the one-dimensional Wigner equation with collisional decoherence,
//! together with the gaussian-ansatz ODE reduction and moment balance laws used to validate it.

pub mod balance;
pub mod crossval;
pub mod error;
pub mod fit;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod moments;
pub mod ode;
pub mod solver;
pub mod spectral;
pub mod state;

pub use balance::{residuals, theta_moments_check, BalanceParams, BalanceResidual};
pub use crossval::{cross_validate, CrossValidation, CrossValidationReport};
pub use error::{Error, Result};
pub use fit::{fit_gaussian, GaussianFit};
pub use grid::{PhaseGrid, XiGrid};
pub use kernel::{build_kernel, lorentzian_kernel, quadratic_approx, DecoherenceKernel, ScatteringEnvironment, TabulatedScattering};
pub use moments::{moments, MomentFields};
pub use ode::{equilibrium, integrate, ode_rhs, OdeParams, OdeState, Trajectory};
pub use solver::{DecoherenceMode, PotentialSpec, SolverConfig, Stepper, ThetaMode};
pub use state::{gaussian_state, GaussianParams, WignerState};
