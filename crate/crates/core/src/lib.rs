//! Covariate-dependent bivariate copulas under proportional hazards margins.

pub mod copula;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod model;
pub mod numeric;
pub mod sampling;
pub mod verify;

pub use copula::{
    ArchimedeanGenerator, BivariateCdf, Copula, CopulaKind, GeneratorFamily, PickandsFunction,
    PickandsKind,
};
pub use error::{Error, Result};
pub use model::{CovariateLink, LinkValues, PropagatedModel, SurvivalMarginal};
