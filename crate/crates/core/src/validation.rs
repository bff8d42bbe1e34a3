//! Statistical validation: bootstrap confidence intervals for the
//! estimated parameters, an ordinary-least-squares baseline, and the
//! simulation fit metric.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimation::inner_loop;
use crate::linalg::least_squares_qr;
use crate::types::{ArxModel, DataSet, IdentificationConfig, NoiseModel};

/// Per-coefficient bootstrap aggregates over `b` replicates.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BootstrapResult {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// 2.5th percentile of each coefficient's replicate distribution.
    pub lower: Vec<f64>,
    /// 97.5th percentile.
    pub upper: Vec<f64>,
    /// Replicates requested.
    pub b: usize,
    /// Replicates that converged and entered the aggregates.
    pub used: usize,
    pub seed: u64,
}

/// Golden-ratio increment; spreads consecutive replicate indices far
/// apart in seed space.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Residual bootstrap around a converged estimate.
///
/// The fitted model's innovations are recovered from the data,
/// centered, and resampled with replacement; each replicate rebuilds
/// the output as the fitted noise-free response plus the resampled
/// innovations refiltered through the estimated AR dynamics, then
/// re-runs the inner estimation loop at the accepted order. A
/// replicate that errors out is dropped (one that merely exhausts the
/// iteration budget still contributes its final estimate, mirroring
/// how the pipeline itself reports such runs); more than 20% dropped
/// aborts the whole summary.
pub fn bootstrap_ci(
    data: &DataSet,
    theta: &[f64],
    noise: &NoiseModel,
    config: &IdentificationConfig,
) -> Result<BootstrapResult> {
    if config.bootstrap_reps == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap replicate count must be positive".into(),
        ));
    }
    let eta = if theta.len() >= 2 && theta.len().is_multiple_of(2) {
        theta.len() / 2 - 1
    } else {
        return Err(Error::InvalidArgument(format!(
            "parameter vector length {} is not 2(eta+1)",
            theta.len()
        )));
    };
    let model = ArxModel::from_theta(theta)?;
    let n = data.len();
    if n < eta + 2 {
        return Err(Error::InsufficientData {
            lag: eta,
            needed: eta + 2,
            got: n,
        });
    }

    // Innovations e[k] = theta' z_eta[k], then centered.
    let mut innovations = Vec::with_capacity(n - eta);
    for k in eta..n {
        let mut acc = 0.0;
        for lag in 0..=eta {
            acc += theta[lag] * data.y[k - lag];
            acc += theta[eta + 1 + lag] * data.u[k - lag];
        }
        innovations.push(acc);
    }
    let mean = innovations.iter().sum::<f64>() / innovations.len() as f64;
    for e in &mut innovations {
        *e -= mean;
    }
    // The supplied noise model must belong to this theta on this data;
    // a gross mismatch means the caller mixed up estimates.
    let var_e = innovations.iter().map(|e| e * e).sum::<f64>() / innovations.len() as f64;
    if noise.sigma_e2 > 0.0 && (var_e > 4.0 * noise.sigma_e2 || var_e < 0.25 * noise.sigma_e2) {
        return Err(Error::InvalidArgument(format!(
            "noise model variance {} does not match the residual variance {} of theta",
            noise.sigma_e2, var_e
        )));
    }

    // Fitted noise-free response on the recorded input.
    let y_star = crate::signals::simulate_arx(&model, &data.u, 0.0, 0)?.y_star;

    let b = config.bootstrap_reps;
    let width = theta.len();
    let mut replicates: Vec<Vec<f64>> = Vec::with_capacity(b);
    let mut failures = 0usize;
    let inner_config = IdentificationConfig {
        bootstrap_reps: 0,
        ..config.clone()
    };

    for r in 0..b {
        let rep_seed = config.seed ^ (r as u64).wrapping_mul(SEED_STRIDE);
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        // Refilter resampled innovations through 1/A-hat.
        let mut v = vec![0.0; n];
        for k in 0..n {
            let mut next = innovations[rng.random_range(0..innovations.len())];
            for (i, ai) in model.a.iter().enumerate() {
                if k > i {
                    next -= ai * v[k - i - 1];
                }
            }
            v[k] = next;
        }
        let y_rep: Vec<f64> = y_star.iter().zip(v.iter()).map(|(s, n)| s + n).collect();
        let rep_data = match DataSet::new(data.u.clone(), y_rep) {
            Ok(d) => d,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        match inner_loop(&rep_data, eta, &inner_config) {
            Ok(run) => replicates.push(run.theta),
            Err(_) => failures += 1,
        }
    }

    if failures * 5 > b {
        return Err(Error::BootstrapFailed { failures, total: b });
    }

    let used = replicates.len();
    let mut mean = vec![0.0; width];
    for rep in &replicates {
        for (m, t) in mean.iter_mut().zip(rep.iter()) {
            *m += t;
        }
    }
    for m in &mut mean {
        *m /= used as f64;
    }
    let mut std = vec![0.0; width];
    if used > 1 {
        for rep in &replicates {
            for (s, (t, m)) in std.iter_mut().zip(rep.iter().zip(mean.iter())) {
                *s += (t - m) * (t - m);
            }
        }
        for s in &mut std {
            *s = (*s / (used - 1) as f64).sqrt();
        }
    }
    let mut lower = vec![0.0; width];
    let mut upper = vec![0.0; width];
    for c in 0..width {
        let mut column: Vec<f64> = replicates.iter().map(|rep| rep[c]).collect();
        column.sort_by(|x, y| x.partial_cmp(y).unwrap());
        lower[c] = percentile(&column, 0.025);
        upper[c] = percentile(&column, 0.975);
    }

    Ok(BootstrapResult {
        mean,
        std,
        lower,
        upper,
        b,
        used,
        seed: config.seed,
    })
}

/// Linear-interpolation percentile of a sorted sample.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        }
    }
}

/// Ordinary least squares at a known structure: regressors
/// (-y[k-1]..-y[k-n_y], u[k-delay]..u[k-n_u]) against target y[k],
/// solved by orthogonal factorization. Returns the parameter vector in
/// the structured layout [1, a1..a_ny, -b_delay..-b_nu].
pub fn ols_estimate(data: &DataSet, n_y: usize, n_u: usize, delay: usize) -> Result<Vec<f64>> {
    if delay > n_u {
        return Err(Error::InvalidArgument(format!(
            "delay {delay} exceeds input order {n_u}"
        )));
    }
    let eta = n_y.max(n_u);
    let n = data.len();
    let width = n_y + (n_u - delay + 1);
    if n < eta + 1 + width {
        return Err(Error::InsufficientData {
            lag: eta,
            needed: eta + width,
            got: n,
        });
    }
    let rows = n - eta;
    let mut phi = ndarray::Array2::zeros((rows, width));
    let mut target = Vec::with_capacity(rows);
    for r in 0..rows {
        let k = eta + r;
        for i in 1..=n_y {
            phi[[r, i - 1]] = -data.y[k - i];
        }
        for (c, j) in (delay..=n_u).enumerate() {
            phi[[r, n_y + c]] = data.u[k - j];
        }
        target.push(data.y[k]);
    }
    let beta = least_squares_qr(&phi, &target)?;
    let mut theta = Vec::with_capacity(width + 1);
    theta.push(1.0);
    theta.extend_from_slice(&beta[..n_y]);
    for bj in &beta[n_y..] {
        theta.push(-bj);
    }
    Ok(theta)
}

/// Normalized root-mean-square fit in percent:
/// 100 * (1 - ||y* - y_hat|| / ||y* - mean(y*)||). 100 means identical
/// signals; matching the mean alone scores 0; worse may go negative.
pub fn percent_fit(y_star: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y_star.len() != y_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} samples, candidate has {}",
            y_star.len(),
            y_hat.len()
        )));
    }
    if y_star.is_empty() {
        return Err(Error::InvalidArgument("empty signals".into()));
    }
    let mean = y_star.iter().sum::<f64>() / y_star.len() as f64;
    let denom = y_star
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        .sqrt();
    let err = y_star
        .iter()
        .zip(y_hat.iter())
        .map(|(s, h)| (s - h) * (s - h))
        .sum::<f64>()
        .sqrt();
    let scale = y_star
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    if denom <= 1e-12 * scale * (y_star.len() as f64).sqrt() {
        return Err(Error::DegenerateFit);
    }
    Ok(100.0 * (1.0 - err / denom))
}
