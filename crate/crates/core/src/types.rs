//! Model, data, and configuration types.
//!
//! The difference equation handled throughout the crate is
//!
//! ```text
//! y[k] + a1*y[k-1] + .. + a_ny*y[k-ny] = b_D*u[k-D] + .. + b_nu*u[k-nu]
//! ```
//!
//! with output noise passing through the same autoregressive polynomial,
//! so that the measured output satisfies an ARX relation driven by white
//! innovations. Parameter vectors are normalized as
//! `theta = [1, a1..a_eta, -b_0..-b_eta]` where `eta` is the equation
//! order `max(n_y, n_u)` and absent coefficients are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version stamped into every serialized identification report.
pub const SCHEMA_VERSION: u32 = 1;

/// SISO difference-equation model with input delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArxModel {
    /// Autoregressive coefficients `a1..a_ny`.
    pub a: Vec<f64>,
    /// Input coefficients `b_D..b_nu`; empty for a model with no input path.
    pub b: Vec<f64>,
    /// Input delay `D` (index of the first input coefficient).
    pub delay: usize,
    /// Largest output lag.
    pub n_y: usize,
    /// Largest input lag (0 when `b` is empty).
    pub n_u: usize,
}

impl ArxModel {
    /// Builds a model from coefficient lists; `b[j]` multiplies `u[k-delay-j]`.
    pub fn new(a: Vec<f64>, b: Vec<f64>, delay: usize) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "model coefficients must be finite".into(),
            ));
        }
        let n_y = a.len();
        let n_u = if b.is_empty() { 0 } else { delay + b.len() - 1 };
        Ok(ArxModel {
            a,
            b,
            delay,
            n_y,
            n_u,
        })
    }

    /// Equation order `max(n_y, n_u)`; the smallest lag depth whose
    /// stacked signal vector admits the model as a linear relation.
    pub fn equation_order(&self) -> usize {
        self.n_y.max(self.n_u)
    }

    /// `b_j` by absolute lag index, zero outside `delay..=n_u`.
    pub fn b_at(&self, j: usize) -> f64 {
        if j >= self.delay && j < self.delay + self.b.len() {
            self.b[j - self.delay]
        } else {
            0.0
        }
    }

    /// `a_i` by lag index (`i >= 1`), zero outside `1..=n_y`.
    pub fn a_at(&self, i: usize) -> f64 {
        if i >= 1 && i <= self.a.len() {
            self.a[i - 1]
        } else {
            0.0
        }
    }

    /// Normalized parameter vector `[1, a1..a_eta, -b_0..-b_eta]` of
    /// length `2*(eta+1)`; `eta` must not truncate the model.
    pub fn theta(&self, eta: usize) -> Result<Vec<f64>> {
        if eta < self.equation_order() {
            return Err(Error::InvalidArgument(format!(
                "eta = {} truncates a model of equation order {}",
                eta,
                self.equation_order()
            )));
        }
        let mut theta = Vec::with_capacity(2 * (eta + 1));
        theta.push(1.0);
        for i in 1..=eta {
            theta.push(self.a_at(i));
        }
        for j in 0..=eta {
            theta.push(-self.b_at(j));
        }
        Ok(theta)
    }

    /// Recovers a model from a normalized parameter vector of length
    /// `2*(eta+1)`, treating every coefficient as structurally present
    /// (`n_y = n_u = eta`, `delay = 0`).
    pub fn from_theta(theta: &[f64]) -> Result<Self> {
        if theta.len() < 2 || !theta.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "parameter vector length {} is not 2*(eta+1)",
                theta.len()
            )));
        }
        if (theta[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "parameter vector is not normalized to a leading 1".into(),
            ));
        }
        let eta = theta.len() / 2 - 1;
        let a = theta[1..=eta].to_vec();
        let b: Vec<f64> = theta[eta + 1..].iter().map(|c| -c).collect();
        ArxModel::new(a, b, 0)
    }

    /// Monic polynomial coefficients `[1, a1, .., a_ny]`.
    pub fn a_polynomial(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_y + 1);
        p.push(1.0);
        p.extend_from_slice(&self.a);
        p
    }

    /// Largest root modulus of `z^ny + a1*z^(ny-1) + .. + a_ny`.
    ///
    /// The filter `1/A(z^-1)` is stable iff this is strictly below one.
    pub fn spectral_radius(&self) -> Result<f64> {
        crate::linalg::polynomial_spectral_radius(&self.a_polynomial())
    }

    /// True when every pole of `1/A(z^-1)` lies strictly inside the unit circle.
    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.spectral_radius()? < 1.0)
    }
}

/// Autocovariance description of the output noise `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Innovation variance.
    pub sigma_e2: f64,
    /// `acvf[l]` is the autocovariance of `v` at lag `l`.
    pub acvf: Vec<f64>,
}

impl NoiseModel {
    pub fn new(sigma_e2: f64, acvf: Vec<f64>) -> Result<Self> {
        if !(sigma_e2 >= 0.0 && sigma_e2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "innovation variance must be finite and non-negative, got {sigma_e2}"
            )));
        }
        if acvf.is_empty() || acvf.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "autocovariance sequence must be non-empty and finite".into(),
            ));
        }
        if acvf[0] < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lag-0 autocovariance must be non-negative, got {}",
                acvf[0]
            )));
        }
        Ok(NoiseModel { sigma_e2, acvf })
    }

    /// Largest lag carried by the model.
    pub fn max_lag(&self) -> usize {
        self.acvf.len() - 1
    }
}

/// Recorded input/output samples, equal length, indexed from `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl DataSet {
    pub fn new(u: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} samples, output has {}",
                u.len(),
                y.len()
            )));
        }
        if u.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("samples must be finite".into()));
        }
        Ok(DataSet { u, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Subtracts the sample mean from both channels.
    pub fn detrend(&self) -> DataSet {
        let center = |xs: &[f64]| -> Vec<f64> {
            let m = xs.iter().sum::<f64>() / xs.len().max(1) as f64;
            xs.iter().map(|x| x - m).collect()
        };
        DataSet {
            u: center(&self.u),
            y: center(&self.y),
        }
    }
}

/// Tuning knobs for the identification pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationConfig {
    /// First equation-order guess fed to the search.
    pub eta_guess_initial: usize,
    /// Upper bound on the equation-order search.
    pub eta_max: usize,
    /// Verification stacks `eta_guess + l_verify_offset` lags.
    pub l_verify_offset: usize,
    /// Half-width of the band around 1 used when counting unity eigenvalues.
    pub unity_tol: f64,
    /// Relative parameter-change threshold ending the inner iteration.
    pub conv_tol: f64,
    /// Inner-iteration budget per order guess.
    pub max_inner_iters: usize,
    /// Frequency-grid resolution for autocovariance integrals.
    pub acvf_grid_points: usize,
    /// Bootstrap replicate count.
    pub bootstrap_reps: usize,
    /// Seed for every randomized step.
    pub seed: u64,
}

impl Default for IdentificationConfig {
    fn default() -> Self {
        IdentificationConfig {
            eta_guess_initial: 1,
            eta_max: 10,
            l_verify_offset: 3,
            unity_tol: 0.15,
            conv_tol: 1e-6,
            max_inner_iters: 50,
            acvf_grid_points: 4096,
            bootstrap_reps: 100,
            seed: 0,
        }
    }
}

impl IdentificationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta_guess_initial == 0 {
            return Err(Error::InvalidArgument(
                "initial equation-order guess must be at least 1".into(),
            ));
        }
        if self.eta_max < self.eta_guess_initial {
            return Err(Error::InvalidArgument(format!(
                "eta_max = {} is below the initial guess {}",
                self.eta_max, self.eta_guess_initial
            )));
        }
        if !(self.unity_tol > 0.0 && self.unity_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "unity tolerance must lie in (0, 1), got {}",
                self.unity_tol
            )));
        }
        if !(self.conv_tol > 0.0 && self.conv_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "convergence tolerance must be positive, got {}",
                self.conv_tol
            )));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidArgument(
                "inner iteration budget must be positive".into(),
            ));
        }
        if self.acvf_grid_points < 16 {
            return Err(Error::InvalidArgument(format!(
                "autocovariance grid needs at least 16 points, got {}",
                self.acvf_grid_points
            )));
        }
        Ok(())
    }
}

/// One inner-loop iteration of a single order guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub sigma_e2: f64,
    /// Relative change `|theta_i - theta_(i-1)| / |theta_(i-1)|`;
    /// absent on the first iteration.
    pub theta_change: Option<f64>,
}

/// Full outcome of an accepted identification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    /// Accepted equation order.
    pub eta_hat: usize,
    /// Unity-eigenvalue count at the verification lag.
    pub d_hat: usize,
    /// Normalized parameters `[1, a1..a_eta, -b_0..-b_eta]`.
    pub theta: Vec<f64>,
    /// Bootstrap standard deviation per entry of `theta`.
    pub theta_std: Vec<f64>,
    /// Structure-pruned model.
    pub model: ArxModel,
    pub noise: NoiseModel,
    /// Finite generalized eigenvalues at the verification lag, ascending.
    pub eigenvalues: Vec<f64>,
    /// Inner-loop history of the accepted guess.
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    pub config: IdentificationConfig,
    pub schema_version: u32,
}
