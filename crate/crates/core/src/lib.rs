//! Identification of SISO ARX models from input/output records.
//!
//! The crate estimates model order, input delay, difference-equation
//! coefficients and the output-noise autocovariance in one pass. The
//! estimator works in the frequency-free lag domain: lagged data
//! covariance matrices are decomposed against structured noise
//! covariance pencils with a generalized eigenvalue solver, and the
//! noise model is refined by fixed-point iteration until the parameter
//! vector settles.
//!
//! Layout:
//! - [`types`]: models, datasets, configuration and reports.
//! - [`signals`]: PRBS excitation, ARX simulation, autocovariances.
//! - [`linalg`]: QZ solver, symmetric Jacobi, QR least squares.
//! - [`estimation`]: lagged stacking, spectral order tests, the
//!   iterative identification loop.
//! - [`validation`]: residual bootstrap, reference least squares fit,
//!   fit quality scores.
//! - [`io`]: CSV record handling and JSON reports.

pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod signals;
pub mod types;
pub mod validation;

pub use error::{Error, Result};
pub use estimation::identify;
pub use types::{ArxModel, DataSet, IdentificationConfig, IdentificationReport, NoiseModel};
