use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("sampler efficiency too low: acceptance rate {rate:.3e} below {floor:.1e}")]
    SamplerEfficiency { rate: f64, floor: f64 },

    #[error("radius {r} lies within {distance:.3e} of critical value {critical}")]
    CriticalValue { r: f64, critical: f64, distance: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unusable grid: every grid point is flagged as critical")]
    UnusableGrid,

    #[error("degenerate normalization: t_k = {value:.3e} +- {err:.3e} is not significantly positive")]
    DegenerateNormalization { value: f64, err: f64 },

    #[error("test form kind mismatch: {0}")]
    KindMismatch(String),

    #[error("profile alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("search exhausted: no radius qualifies (smallest witnessed ratio {min_ratio:.4})")]
    SearchExhausted { min_ratio: f64 },

    #[error("refused: map `{0}` is degenerate, criteria require a nondegenerate map")]
    DegenerateMap(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Name of the module that raises this error, used in CLI diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) | Error::NumericalDegeneracy(_) => "forms",
            Error::Catalog(_) => "geometry",
            Error::SamplerEfficiency { .. } | Error::CriticalValue { .. } => "exhaustion",
            Error::InvalidGrid(_) | Error::UnusableGrid | Error::Alignment(_) => "degrees",
            Error::DegenerateNormalization { .. } | Error::KindMismatch(_) => "currents",
            Error::InsufficientData(_) | Error::SearchExhausted { .. } | Error::DegenerateMap(_) => {
                "criteria"
            }
            Error::Config(_) | Error::Io(_) => "cli",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
