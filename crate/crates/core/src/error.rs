//! Error type shared by every module in the crate.

use crate::estimation::GuessDiagnostics;
use crate::linalg::GeneralizedSchur;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: lag {lag} needs more than {needed} samples, got {got}")]
    InsufficientData {
        lag: usize,
        needed: usize,
        got: usize,
    },

    #[error("matrix is not symmetric: max |m - m'| = {max_asymmetry:.3e}")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("QZ iteration did not converge within {sweeps} sweeps")]
    QzNonConvergence {
        sweeps: usize,
        /// Partial decomposition at the point the sweep budget ran out.
        partial: Box<GeneralizedSchur>,
    },

    #[error("autoregressive polynomial is unstable: spectral radius {radius:.6}")]
    UnstableModel { radius: f64 },

    #[error("noise spectrum pole too close to the unit circle: min |A(e^-jw)| = {min_gain:.3e}")]
    NearSingularSpectrum { min_gain: f64 },

    #[error("cannot normalize eigenvector: leading component {leading:.3e} is negligible")]
    DegenerateNormalization { leading: f64 },

    #[error("minimum finite generalized eigenvalue is complex: {re:.6} + {im:.6}i")]
    ComplexMinimumEigenvalue { re: f64, im: f64 },

    #[error("no equation order in [{initial}, {max}] passed verification")]
    OrderSearchFailed {
        initial: usize,
        max: usize,
        attempts: Vec<GuessDiagnostics>,
    },

    #[error("bootstrap failed: {failures} of {total} replicates unusable")]
    BootstrapFailed { failures: usize, total: usize },

    #[error("rank-deficient least-squares system: |r[{col},{col}]| = {pivot:.3e}")]
    RankDeficient { col: usize, pivot: f64 },

    #[error("percent fit undefined: reference signal is constant")]
    DegenerateFit,

    #[error("invalid PRBS configuration: {0}")]
    InvalidPrbs(String),

    #[error("CSV parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
