use std::path::PathBuf;

/// Errors raised anywhere in the lab.
///
/// Numerical faults carry enough context (time, cell, residual history) to
/// reproduce the failure without rerunning under a debugger.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("point ({x}, {y}) lies outside the domain: {reason}")]
    OutsideDomain { x: f64, y: f64, reason: String },

    #[error("conformal map inversion did not converge (residual {residual:.3e} after {iterations} iterations)")]
    MapInversion { residual: f64, iterations: usize },

    #[error("linear solve stagnated after {} iterations (last residual {:.3e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { history: Vec<f64> },

    #[error("stationary gradient degenerates: min |x||grad phi| = {c_low:.3e}")]
    DegenerateGradient { c_low: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("time {t} outside the admissible range: {reason}")]
    TimeDomain { t: f64, reason: String },

    #[error("grids are incompatible: {0}")]
    IncompatibleGrids(String),

    #[error("negative density {value:.3e} in cell {cell} at t = {t}")]
    StabilityFault { t: f64, cell: usize, value: f64 },

    #[error("support is empty (no cell above threshold {threshold:.3e})")]
    EmptySupport { threshold: f64 },

    #[error("support reached the truncation buffer at t = {t} (zeta_plus = {zeta_plus}, r_out = {r_out})")]
    TruncationReached { t: f64, zeta_plus: f64, r_out: f64 },

    #[error("region contains no grid points: {0}")]
    EmptyRegion(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{0}")]
    Config(#[from] crate::harness::config::ConfigErrors),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("need ≥ {needed} points, got {got}")]
    ShortSeries { needed: usize, got: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::InvalidGeometry(msg.into())
    }

    /// Wraps `self` with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line front end: 2 for usage and
    /// configuration errors, 3 for numerical faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::InvalidGeometry(_) | Error::Format { .. } => 2,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Io(_) | Error::Csv(_) => 2,
            _ => 3,
        }
    }
}
