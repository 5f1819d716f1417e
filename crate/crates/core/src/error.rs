use crate::interferometer::Mirror;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid beam profile: {0}")]
    InvalidProfile(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("deflection of mirror {mirror} is {value}, beyond the hard bound {bound}")]
    DeflectionOutOfBounds { mirror: Mirror, value: f64, bound: f64 },

    #[error("grid does not cover the shifted beam: {0}")]
    GridCoverage(String),

    #[error("invalid vibration set: {0}")]
    InvalidVibration(String),

    #[error("invalid time-series configuration: {0}")]
    InvalidTimeSeries(String),

    #[error("series has {got} samples, configuration expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no reference peak: mirror {0} is at or below the noise floor")]
    NoReferencePeak(Mirror),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
