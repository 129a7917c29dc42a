//! Error type shared by every stage of the toolkit.

use thiserror::Error;

use crate::numerics::{ode::OdeError, quad::QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A closed-form family could not be built (extremal or naked parameters).
    #[error("construction error: {0}")]
    Construction(String),
    /// Input data violate a hypothesis of the requested pipeline.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular equation at s = {s:e}: {what}")]
    Singularity { s: f64, what: String },
    #[error("Jang slope reached the barrier |v| = 1 near s = {s:e} after {clamps} clamp events")]
    BlowUp { s: f64, clamps: usize },
    #[error("integrator stiffness near s = {s:e}: {detail}")]
    Stiffness { s: f64, detail: String },
    #[error("flow error: {0}")]
    Flow(String),
    #[error("asymptotic limit did not converge: {0}")]
    Asymptotics(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True when the failure is a violated hypothesis or invalid input rather
    /// than a solver breakdown.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self.root(),
            Error::Precondition(_) | Error::Domain(_) | Error::Construction(_) | Error::Parse(_)
        )
    }
}

impl From<QuadError> for Error {
    fn from(e: QuadError) -> Self {
        Error::Numeric(e.to_string())
    }
}

impl From<OdeError> for Error {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepUnderflow { t, h } => Error::Stiffness {
                s: t,
                detail: format!("step {h:e} underflowed"),
            },
            OdeError::TooManySteps { t, max_steps } => Error::Stiffness {
                s: t,
                detail: format!("more than {max_steps} steps"),
            },
            OdeError::Aborted { t, reason } => Error::Numeric(format!("integration aborted at s = {t:e}: {reason}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
