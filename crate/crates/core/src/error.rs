use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation `{operation}` does not support the {shape} pulse shape")]
    UnsupportedShape {
        operation: &'static str,
        shape: &'static str,
    },

    #[error("{statistics} pair statistics are not supported by `{operation}`")]
    UnsupportedStatistics {
        operation: &'static str,
        statistics: &'static str,
    },

    #[error("inconsistent widths: total {total_ps} ps is smaller than the quadrature sum {known_ps} ps of the known parts")]
    InconsistentWidths { total_ps: f64, known_ps: f64 },

    #[error("stabilization tolerance of {tolerance_ps} ps cannot be reached")]
    ToleranceUnreachable { tolerance_ps: f64 },

    #[error("filter too wide: photon coherence {coherence_ps:.3} ps is shorter than the pump pulse ({pump_fwhm_ps:.3} ps)")]
    FilterTooWide { coherence_ps: f64, pump_fwhm_ps: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("non-positive baseline {0} in dip fit")]
    NonpositiveBaseline(f64),

    #[error("histogram binning mismatch")]
    BinningMismatch,

    #[error("insufficient counts for a dip fit: {0}")]
    InsufficientCounts(String),

    #[error("scenario `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::UnsupportedShape { .. } => "unsupported-shape",
            Error::UnsupportedStatistics { .. } => "unsupported-statistics",
            Error::InconsistentWidths { .. } => "inconsistent-widths",
            Error::ToleranceUnreachable { .. } => "tolerance-unreachable",
            Error::FilterTooWide { .. } => "filter-too-wide",
            Error::InsufficientData(_) => "insufficient-data",
            Error::FitDiverged(_) => "fit-diverged",
            Error::NonpositiveBaseline(_) => "nonpositive-baseline",
            Error::BinningMismatch => "binning-mismatch",
            Error::InsufficientCounts(_) => "insufficient-counts",
            Error::Schema { .. } => "schema-invalid",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
