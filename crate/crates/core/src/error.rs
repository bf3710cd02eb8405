use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the model, the context derivation and the fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A zero service rate means infinite residence in an active state.
    #[error("degenerate service rate in active state {state}: rate must be > 0")]
    DegenerateRate { state: usize },

    /// The uplink share does not fit into the CA-shortened active window
    /// (d_dlul / r_dlul > 1 / a_ca). Such scenarios belong to the classic
    /// uplink model.
    #[error(
        "uplink time exceeds the active downlink window (uplink fraction {uplink_fraction} > \
         active fraction {active_fraction}); use the classic uplink model"
    )]
    ClassicRegime {
        uplink_fraction: f64,
        active_fraction: f64,
    },

    #[error("distance {distance_m} m is outside the cell (radius {radius_m} m)")]
    OutOfCell { distance_m: f64, radius_m: f64 },

    #[error("underdetermined fit: {0}")]
    UnderdeterminedFit(String),

    #[error("no breakeven boost factor in [{lower}, {upper}]: CA never pays off")]
    NoBreakeven { lower: f64, upper: f64 },

    #[error("trace parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors that come from the model domain rather than from
    /// malformed input files.
    pub fn is_model_domain(&self) -> bool {
        matches!(
            self,
            Error::DegenerateRate { .. }
                | Error::ClassicRegime { .. }
                | Error::OutOfCell { .. }
                | Error::UnderdeterminedFit(_)
                | Error::NoBreakeven { .. }
        )
    }
}
