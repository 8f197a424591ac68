use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("could not parse configuration: {0}")]
    Parse(String),

    #[error("quadrature did not converge ({context}): estimate {estimate:e} > target {target:e}")]
    QuadratureNotConverged {
        context: &'static str,
        estimate: f64,
        target: f64,
    },

    #[error("series did not converge at t = {t} after {terms} terms")]
    SeriesDiverged { t: f64, terms: usize },

    #[error("loss of significance at t = {t}: error bound {bound:e} exceeds tolerance {tol:e}")]
    LossOfSignificance { t: f64, bound: f64, tol: f64 },

    #[error("t = {t} is outside the series domain (|z1 t^2| = {argument} > {limit})")]
    OutOfDomain { t: f64, argument: f64, limit: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("ill-conditioned residue computation at root {index}: {reason}")]
    IllConditioned { index: usize, reason: String },

    #[error("representation not applicable: {0}")]
    Inapplicable(String),

    #[error("laplace inversion failed at t = {t}: {reason}")]
    LaplaceInversion { t: f64, reason: String },

    #[error("volterra step rejected: Richardson estimate {estimate:e} exceeds tolerance {tol:e}")]
    StepRejected { estimate: f64, tol: f64 },

    #[error("tail fit rejected: max log residual {residual} exceeds {limit}")]
    TailFitRejected { residual: f64, limit: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("{method} evaluation failed at t = {t}: {source}")]
    AtTime {
        t: f64,
        method: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attaches the time and method of a failed evaluation.
    pub fn at(self, t: f64, method: &'static str) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                method,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
