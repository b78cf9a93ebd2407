use core::fmt;

/// Failures of the linear-algebra and eigenvalue kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum NumError {
    DimensionMismatch { expected: usize, found: usize },
    Singular { row: usize },
    NoConvergence { iterations: usize, change: f64 },
    InvalidArgument(&'static str),
}

impl fmt::Display for NumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected} values, found {found}")
            }
            NumError::Singular { row } => write!(f, "singular system (pivot at row {row})"),
            NumError::NoConvergence { iterations, change } => write!(
                f,
                "no convergence after {iterations} iterations (last change {change:e})"
            ),
            NumError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

impl core::error::Error for NumError {}

/// Rejected model parameters or a classifier applied outside its coverage.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NotPositive { name: &'static str, value: f64 },
    BirthNotAboveDeath { a: f64, b: f64 },
    /// Predictions need (gamma, sigma) = (ell, theta).
    NotSpecialCase { gamma: f64, ell: f64, sigma: f64, theta: f64 },
    UnknownParameter,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NotPositive { name, value } => {
                write!(f, "parameter {name} must be finite and > 0, got {value}")
            }
            ModelError::BirthNotAboveDeath { a, b } => {
                write!(f, "prey birth rate a = {a} must exceed death rate b = {b}")
            }
            ModelError::NotSpecialCase {
                gamma,
                ell,
                sigma,
                theta,
            } => write!(
                f,
                "classification requires (gamma, sigma) = (ell, theta); got gamma = {gamma}, ell = {ell}, sigma = {sigma}, theta = {theta}"
            ),
            ModelError::UnknownParameter => write!(f, "unknown parameter name"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Failures of the elliptic steady-state solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyError {
    Num(NumError),
    Model(ModelError),
    /// Damped Newton (and continuation, where used) failed.
    Diverged { iterations: usize, residual: f64 },
    /// A prerequisite steady state (e.g. S*) does not exist.
    MissingPrerequisite(&'static str),
    /// A decomposition produced a non-positive component, which the
    /// uniqueness theory rules out.
    Inconsistent { what: &'static str, min: f64 },
    InvalidArgument(&'static str),
}

impl fmt::Display for SteadyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteadyError::Num(e) => write!(f, "{e}"),
            SteadyError::Model(e) => write!(f, "{e}"),
            SteadyError::Diverged {
                iterations,
                residual,
            } => write!(
                f,
                "Newton diverged after {iterations} iterations (residual {residual:e})"
            ),
            SteadyError::MissingPrerequisite(what) => write!(f, "prerequisite {what} does not exist"),
            SteadyError::Inconsistent { what, min } => {
                write!(f, "internal inconsistency: {what} has minimum {min:e}")
            }
            SteadyError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

impl core::error::Error for SteadyError {}

impl From<NumError> for SteadyError {
    fn from(e: NumError) -> Self {
        SteadyError::Num(e)
    }
}

impl From<ModelError> for SteadyError {
    fn from(e: ModelError) -> Self {
        SteadyError::Model(e)
    }
}

/// Failures of the time integrator.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A field dropped below -1e-10 at an interior node: dt is too large.
    Positivity {
        t: f64,
        field: &'static str,
        node: usize,
        value: f64,
    },
    NonFinite { t: f64, field: &'static str },
    Num(NumError),
    InvalidInput(&'static str),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Positivity {
                t,
                field,
                node,
                value,
            } => write!(
                f,
                "positivity violated at t = {t}: {field}[{node}] = {value:e} (reduce dt)"
            ),
            SimError::NonFinite { t, field } => write!(f, "non-finite value in {field} at t = {t}"),
            SimError::Num(e) => write!(f, "{e}"),
            SimError::InvalidInput(what) => write!(f, "invalid input: {what}"),
        }
    }
}

impl core::error::Error for SimError {}

impl From<NumError> for SimError {
    fn from(e: NumError) -> Self {
        SimError::Num(e)
    }
}
