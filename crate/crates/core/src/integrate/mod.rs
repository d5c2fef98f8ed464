//! Numerical integration of the complex Hamilton equations.
//!
//! State `(q, p)` is complex, time is real. Fields are compiled once from the
//! symbolic derivatives with parameters bound, then stepped with classical
//! RK4 or an adaptive Dormand–Prince 5(4) pair.

mod analysis;
mod field;
mod output;
mod solver;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::hamiltonian::HamiltonianError;
use crate::symmetry::SymmetryError;

pub use analysis::{
    check_dhdt, check_symmetry_on_trajectory, drift_order, five_point_derivative, richardson_order,
    sweep, trajectory_fd_defect, uniform_step, DhdtCheck, SweepPoint, SymmetryCheck,
};
pub use field::{CompiledField, CompiledPoly, NumericParams};
pub use output::{write_csv, CSV_HEADER};
pub use solver::{integrate, step_rk4, Method, State, Termination, Trajectory};

/// Trajectories stop when |q| falls to this value.
pub const SINGULARITY_FLOOR: f64 = 1e-8;
/// States with a component larger than this count as blown up.
pub const OVERFLOW_LIMIT: f64 = 1e100;
/// Smallest step the adaptive controller may take.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("family has no parameter `{0}`")]
    UnknownParameter(String),
    #[error("expected {expected} parameter values, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("initial |q| = {0:e} is inside the singularity floor")]
    SingularInitialCondition(f64),
    #[error("invalid time span [{0}, {1}]")]
    InvalidSpan(f64, f64),
    #[error("invalid step or tolerance {0}")]
    InvalidStep(f64),
    #[error("stage point q = {q} at t = {t} is inside the singularity floor")]
    Singularity { t: f64, q: Complex64 },
    #[error("samples are not on a uniform time grid")]
    NonUniformGrid,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("csv output failed: {0}")]
    Csv(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}
