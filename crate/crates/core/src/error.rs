use thiserror::Error;

/// Failure modes shared by every module of the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested time or window lies outside the available data.
    #[error("range error: {0}")]
    Range(String),

    /// A solver or experiment configuration violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Quadrature, integration or evaluation broke down.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// No blow-up was observed before the horizon at some refinement level.
    #[error("inconclusive: no blow-up by t = {t_max} at refinement level {level} (count = {count})")]
    Inconclusive { level: usize, count: usize, t_max: f64 },

    /// A sweep member failed to blow up.
    #[error("no blow-up for {parameter} = {value}")]
    NoBlowup { parameter: &'static str, value: f64 },

    /// Trajectory file could not be read or written.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
