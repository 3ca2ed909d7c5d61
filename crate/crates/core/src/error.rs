use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A mode, medium or link parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// The time grid cannot hold the wave function (tail mass, norm drift or size cap).
    #[error("under-resolved grid: {0}")]
    Resolution(String),

    #[error("quadrature did not reach the requested accuracy: achieved relative error {achieved:.3e} with {panels} panels (target {target:.1e})")]
    Accuracy {
        achieved: f64,
        target: f64,
        panels: usize,
    },

    #[error("unknown medium {name:?}; valid media: {valid}")]
    UnknownMedium { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Resolution(_) | Error::Accuracy { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
