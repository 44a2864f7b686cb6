use thiserror::Error;

use crate::verify::VerificationReport;

/// Errors raised by evaluation, propagation, sampling and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of its family.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument is NaN, out of range, or malformed.
    #[error("invalid input: {0}")]
    Input(String),

    /// A Pickands function or generator failed its validity checks.
    #[error("validity error: {0}")]
    Validity(String),

    /// Propagation through the model produced something that is not a copula.
    #[error("propagated copula fails the copula axioms (worst violation {:.3e})", .0.worst_violation)]
    PropagationValidity(Box<VerificationReport>),

    /// A transition between covariate values left the class of dependence functions.
    #[error("transition-domain error: {0}")]
    TransitionDomain(String),

    /// A numerical routine (root finding, inversion) failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The plug-in inversion diverges (tau equal to one).
    #[error("plug-in estimate diverges at tau = {0}")]
    Divergence(f64),

    /// Model fitting failed, e.g. a singular information matrix.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Experiment configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if x.is_nan() {
        return Err(Error::Input(format!("{name} is NaN")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Input(format!("{name} = {x} lies outside [0, 1]")));
    }
    Ok(())
}
