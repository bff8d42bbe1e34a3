//! The identification pipeline: lagged stacking, covariance pencils,
//! eigenvector parameter extraction, unity-eigenvalue order tests and
//! the two-loop fixed-point algorithm tying them together.
//!
//! The estimation geometry in one paragraph: stacking L past samples
//! of output and input into z_L[k] makes every ARX relation of
//! equation order eta <= L a null direction of the noise-free data
//! covariance. With output noise the null directions are lifted to
//! generalized eigenvalues exactly at 1 of the pencil (S_Z, Sigma_e),
//! where Sigma_e carries the noise autocovariance in its output block
//! and zeros elsewhere. Counting unity eigenvalues therefore reveals
//! the order (eta = L - d + 1), and the eigenvector of the smallest
//! eigenvalue at L = eta holds the coefficients. Since Sigma_e is not
//! known up front, the loop alternates: decompose with the current
//! noise model, read off theta, re-estimate the innovation variance
//! from residuals, propagate it to an autocovariance through the
//! estimated AR dynamics, rebuild Sigma_e.

use std::collections::HashSet;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{qz_solve, symmetric_eig, toeplitz_from_acvf, EigenSolution, MatrixPencil};
use crate::types::{
    ArxModel, DataSet, IdentificationConfig, IdentificationReport, IterationRecord, NoiseModel,
    SCHEMA_VERSION,
};
use crate::validation::bootstrap_ci;

/// Residual variance at or below this fraction of var(y) is treated as
/// an exactly noise-free record.
const NOISE_FREE_REL: f64 = 1e-13;

/// Relative eigenvalue threshold for counting null directions of a
/// covariance matrix in the noise-free regime.
const NULL_EIG_REL: f64 = 1e-8;

/// Lagged data matrix with rows z_L[k] = [y[k] .. y[k-L], u[k] .. u[k-L]].
#[derive(Debug, Clone)]
pub struct LaggedMatrix {
    /// (N - L) x 2(L+1).
    pub z: Array2<f64>,
    pub l: usize,
}

impl LaggedMatrix {
    pub fn rows(&self) -> usize {
        self.z.nrows()
    }

    /// Human-readable column labels, y lags first.
    pub fn column_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(2 * (self.l + 1));
        for lag in 0..=self.l {
            labels.push(format!("y[k-{lag}]"));
        }
        for lag in 0..=self.l {
            labels.push(format!("u[k-{lag}]"));
        }
        labels
    }
}

/// Stacks the record at lag L; row r is z_L[L + r], so the first row
/// holds [y[L] .. y[0], u[L] .. u[0]].
pub fn build_lagged_matrix(data: &DataSet, l: usize) -> Result<LaggedMatrix> {
    let n = data.len();
    if n < l + 1 {
        return Err(Error::InsufficientData {
            lag: l,
            needed: l + 1,
            got: n,
        });
    }
    let width = 2 * (l + 1);
    let mut z = Array2::zeros((n - l, width));
    for r in 0..n - l {
        let k = l + r;
        for lag in 0..=l {
            z[[r, lag]] = data.y[k - lag];
            z[[r, l + 1 + lag]] = data.u[k - lag];
        }
    }
    Ok(LaggedMatrix { z, l })
}

/// Stacks only the columns a known structure needs:
/// [y[k] .. y[k-n_y], u[k-delay] .. u[k-n_u]], rows k = eta .. N-1.
pub fn build_structured_matrix(
    data: &DataSet,
    n_y: usize,
    n_u: usize,
    delay: usize,
) -> Result<Array2<f64>> {
    if delay > n_u {
        return Err(Error::InvalidArgument(format!(
            "delay {delay} exceeds input order {n_u}"
        )));
    }
    let eta = n_y.max(n_u);
    let n = data.len();
    if n < eta + 1 {
        return Err(Error::InsufficientData {
            lag: eta,
            needed: eta + 1,
            got: n,
        });
    }
    let width = (n_y + 1) + (n_u - delay + 1);
    let mut z = Array2::zeros((n - eta, width));
    for r in 0..n - eta {
        let k = eta + r;
        for lag in 0..=n_y {
            z[[r, lag]] = data.y[k - lag];
        }
        for (c, lag) in (delay..=n_u).enumerate() {
            z[[r, n_y + 1 + c]] = data.u[k - lag];
        }
    }
    Ok(z)
}

/// Z' Z / rows, the paper's normalization; no mean-centering.
pub fn covariance_from_rows(z: &Array2<f64>) -> Result<Array2<f64>> {
    let rows = z.nrows();
    if rows == 0 {
        return Err(Error::InvalidArgument("empty stacked matrix".into()));
    }
    let mut s = z.t().dot(z);
    s.mapv_inplace(|v| v / rows as f64);
    Ok(s)
}

/// Sample covariance of the lagged stack (divisor N - L equals the row
/// count by construction).
pub fn sample_covariance(zl: &LaggedMatrix) -> Result<Array2<f64>> {
    covariance_from_rows(&zl.z)
}

/// Noise covariance of the balanced stack: Toeplitz of the output
/// noise ACVF in the y block, zeros in the (noise-free) input block.
pub fn build_noise_covariance(noise: &NoiseModel, l: usize) -> Result<Array2<f64>> {
    if noise.max_lag() < l {
        return Err(Error::InsufficientData {
            lag: l,
            needed: l + 1,
            got: noise.acvf.len(),
        });
    }
    let dim = 2 * (l + 1);
    let mut m = Array2::zeros((dim, dim));
    let top = toeplitz_from_acvf(&noise.acvf[..=l])?;
    m.slice_mut(ndarray::s![..l + 1, ..l + 1]).assign(&top);
    Ok(m)
}

/// Structured-stack counterpart: Toeplitz block of size n_y + 1, zeros
/// over the input columns.
pub fn build_structured_noise_covariance(
    noise: &NoiseModel,
    n_y: usize,
    n_u: usize,
    delay: usize,
) -> Result<Array2<f64>> {
    if delay > n_u {
        return Err(Error::InvalidArgument(format!(
            "delay {delay} exceeds input order {n_u}"
        )));
    }
    if noise.max_lag() < n_y {
        return Err(Error::InsufficientData {
            lag: n_y,
            needed: n_y + 1,
            got: noise.acvf.len(),
        });
    }
    let dim = (n_y + 1) + (n_u - delay + 1);
    let mut m = Array2::zeros((dim, dim));
    let top = toeplitz_from_acvf(&noise.acvf[..=n_y])?;
    m.slice_mut(ndarray::s![..n_y + 1, ..n_y + 1]).assign(&top);
    Ok(m)
}

fn require_symmetric(m: &Array2<f64>, what: &str) -> Result<()> {
    let n = m.nrows();
    let mut peak = 0.0f64;
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            peak = peak.max(m[[i, j]].abs());
            if j > i {
                asym = asym.max((m[[i, j]] - m[[j, i]]).abs());
            }
        }
    }
    if asym > 1e-10 * peak.max(1e-300) {
        let _ = what;
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// Generalized decomposition of the covariance pencil; finite
/// eigenpairs come back sorted ascending (the identification order),
/// infinite ones separated out.
pub fn identify_evd(s: &Array2<f64>, sigma_e: &Array2<f64>) -> Result<EigenSolution> {
    if s.dim() != sigma_e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "covariance {:?} vs noise covariance {:?}",
            s.dim(),
            sigma_e.dim()
        )));
    }
    require_symmetric(s, "data covariance")?;
    require_symmetric(sigma_e, "noise covariance")?;
    let pencil = MatrixPencil::new(s.clone(), sigma_e.clone())?;
    let (_, mut sol) = qz_solve(&pencil, None)?;
    sol.sort_finite_ascending();
    Ok(sol)
}

/// Finite eigenvalues as reals, ascending. The pencils here are
/// symmetric with PSD right-hand sides, so true eigenvalues are real;
/// rounding-level imaginary parts are dropped.
pub fn ascending_real_eigenvalues(sol: &EigenSolution) -> Vec<f64> {
    sol.finite
        .iter()
        .filter_map(|p| p.value())
        .map(|v| v.re)
        .collect()
}

/// Normalizes an eigenvector into a parameter vector by scaling its
/// leading entry to one.
pub fn extract_theta(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = v[0];
    if lead.abs() <= 1e-10 * norm {
        return Err(Error::DegenerateNormalization { leading: lead });
    }
    Ok(v.iter().map(|x| x / lead).collect())
}

/// Theta from the smallest finite eigenpair of a decomposition.
fn theta_from_minimum(sol: &EigenSolution) -> Result<Vec<f64>> {
    let pair = sol
        .finite
        .first()
        .ok_or_else(|| Error::InvalidArgument("pencil has no finite eigenvalues".into()))?;
    if !pair.is_real() {
        let v = pair.alpha / pair.beta;
        return Err(Error::ComplexMinimumEigenvalue { re: v.re, im: v.im });
    }
    extract_theta(&pair.real_vector().to_vec())
}

/// Innovation-variance estimate: e[k] = theta' z_eta[k] over
/// k = eta..N-1 (the A(q)y - B(q)u residual), mean-removed sample
/// variance.
pub fn residual_variance(theta: &[f64], data: &DataSet) -> Result<f64> {
    if theta.len() < 2 || !theta.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "parameter vector length {} is not 2(eta+1)",
            theta.len()
        )));
    }
    let eta = theta.len() / 2 - 1;
    let n = data.len();
    if n < eta + 2 {
        return Err(Error::InsufficientData {
            lag: eta,
            needed: eta + 2,
            got: n,
        });
    }
    let m = n - eta;
    let mut e = Vec::with_capacity(m);
    for k in eta..n {
        let mut acc = 0.0;
        for lag in 0..=eta {
            acc += theta[lag] * data.y[k - lag];
            acc += theta[eta + 1 + lag] * data.u[k - lag];
        }
        e.push(acc);
    }
    let mean = e.iter().sum::<f64>() / m as f64;
    Ok(e.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m as f64)
}

/// Output-noise ACVF implied by an AR disturbance model: the spectral
/// density sigma_e^2 / |A(e^{-jw})|^2 integrated against cos(w l) over
/// [0, pi] (even symmetry folds the full circle), trapezoidal rule on
/// a uniform grid.
pub fn acvf_from_model(
    a: &[f64],
    sigma_e2: f64,
    max_lag: usize,
    grid_points: usize,
) -> Result<Vec<f64>> {
    if sigma_e2 < 0.0 || !sigma_e2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and nonnegative, got {sigma_e2}"
        )));
    }
    if grid_points < 512 {
        return Err(Error::InvalidArgument(format!(
            "spectral grid of {grid_points} points is below the minimum 512"
        )));
    }
    let mut poly = Vec::with_capacity(a.len() + 1);
    poly.push(1.0);
    poly.extend_from_slice(a);
    let radius = crate::linalg::polynomial_spectral_radius(&poly)?;
    if radius >= 1.0 {
        return Err(Error::UnstableModel { radius });
    }

    let h = std::f64::consts::PI / grid_points as f64;
    let mut acvf = vec![0.0; max_lag + 1];
    let mut min_gain = f64::INFINITY;
    for node in 0..=grid_points {
        let omega = node as f64 * h;
        let mut re = 1.0;
        let mut im = 0.0;
        for (i, ai) in a.iter().enumerate() {
            let phase = omega * (i + 1) as f64;
            re += ai * phase.cos();
            im -= ai * phase.sin();
        }
        let gain2 = re * re + im * im;
        min_gain = min_gain.min(gain2.sqrt());
        if gain2.sqrt() < 1e-8 {
            return Err(Error::NearSingularSpectrum {
                min_gain: gain2.sqrt(),
            });
        }
        let weight = if node == 0 || node == grid_points {
            0.5
        } else {
            1.0
        };
        let f = weight / gain2;
        // cos(l * omega) by the Chebyshev recurrence.
        let c1 = omega.cos();
        let mut c_prev = 1.0;
        let mut c_cur = c1;
        acvf[0] += f;
        if max_lag >= 1 {
            acvf[1] += f * c1;
        }
        for slot in acvf.iter_mut().take(max_lag + 1).skip(2) {
            let c_next = 2.0 * c1 * c_cur - c_prev;
            *slot += f * c_next;
            c_prev = c_cur;
            c_cur = c_next;
        }
    }
    let scale = sigma_e2 * h / std::f64::consts::PI;
    for v in &mut acvf {
        *v *= scale;
    }
    Ok(acvf)
}

/// AR coefficients a_1..a_eta embedded in a normalized theta.
fn a_coefficients(theta: &[f64]) -> Vec<f64> {
    let eta = theta.len() / 2 - 1;
    theta[1..=eta].to_vec()
}

/// Result of the fixed-point noise refinement at one order guess.
#[derive(Debug, Clone)]
pub struct InnerLoop {
    /// Normalized parameter vector, length 2(eta_guess + 1).
    pub theta: Vec<f64>,
    pub noise: NoiseModel,
    pub trace: Vec<IterationRecord>,
    /// True iff the last theta change fell below the tolerance.
    pub converged: bool,
    /// Residual variance hit the noise-free floor; the verification
    /// step must count null directions instead of unity eigenvalues.
    pub noise_free: bool,
}

/// Runs the alternating decompose / re-estimate-noise iteration at
/// stacking lag L = eta_guess, starting from Sigma_e = I.
pub fn inner_loop(
    data: &DataSet,
    eta_guess: usize,
    config: &IdentificationConfig,
) -> Result<InnerLoop> {
    config.validate()?;
    let l = eta_guess;
    let n = data.len();
    if n <= 2 * (l + 1) {
        return Err(Error::InsufficientData {
            lag: l,
            needed: 2 * (l + 1) + 1,
            got: n,
        });
    }
    let z = build_lagged_matrix(data, l)?;
    let s = sample_covariance(&z)?;
    let dim = 2 * (l + 1);

    let var_y = {
        let mean = data.y.iter().sum::<f64>() / n as f64;
        data.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
    };
    let noise_floor = NOISE_FREE_REL * var_y;

    let mut sigma = Array2::eye(dim);
    let mut prev: Option<Vec<f64>> = None;
    let mut acvf_state: Option<Vec<f64>> = None;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut noise_free = false;
    let mut theta = Vec::new();
    let mut noise = NoiseModel::new(1.0, vec![1.0])?;

    for iteration in 1..=config.max_inner_iters {
        let sol = identify_evd(&s, &sigma)?;
        theta = theta_from_minimum(&sol)?;
        let sigma_e2 = residual_variance(&theta, data)?;
        let change = prev.as_ref().map(|p| relative_change(&theta, p));
        trace.push(IterationRecord {
            iteration,
            theta: theta.clone(),
            sigma_e2,
            theta_change: change,
        });

        if sigma_e2 <= noise_floor {
            // Effectively exact data; the residual is rounding noise,
            // so a white model at the measured level stands in for the
            // propagated autocovariance (which may not even exist if
            // the intermediate estimate is unstable).
            let mut acvf = vec![0.0; l + 1];
            acvf[0] = sigma_e2;
            noise = NoiseModel::new(sigma_e2, acvf)?;
            noise_free = true;
            converged = true;
            break;
        }
        let proposed = acvf_from_model(
            &a_coefficients(&theta),
            sigma_e2,
            l,
            config.acvf_grid_points,
        )?;
        // Averaging the proposal with the previous autocovariance keeps the
        // fixed points of the substitution map unchanged while suppressing
        // the period-two limit cycles it falls into at low signal-to-noise
        // ratios (a plain Krasnoselskii relaxation with factor 1/2).
        let acvf = match acvf_state.take() {
            Some(state) => state
                .iter()
                .zip(proposed.iter())
                .map(|(s, p)| 0.5 * (s + p))
                .collect(),
            None => proposed,
        };
        noise = NoiseModel::new(sigma_e2, acvf.clone())?;
        acvf_state = Some(acvf);

        if let Some(c) = change {
            if c < config.conv_tol {
                converged = true;
                break;
            }
        }
        sigma = build_noise_covariance(&noise, l)?;
        prev = Some(theta.clone());
    }

    Ok(InnerLoop {
        theta,
        noise,
        trace,
        converged,
        noise_free,
    })
}

fn relative_change(current: &[f64], previous: &[f64]) -> f64 {
    let diff: f64 = current
        .iter()
        .zip(previous.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = previous.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Counts the contiguous run of eigenvalues inside [1 - tol, 1 + tol],
/// walking the ascending list: values below the band are skipped,
/// the count stops at the first value above it.
pub fn count_unity_eigenvalues(eigenvalues: &[f64], unity_tol: f64) -> usize {
    let mut count = 0;
    for &lambda in eigenvalues {
        if lambda < 1.0 - unity_tol {
            continue;
        }
        if lambda > 1.0 + unity_tol {
            break;
        }
        count += 1;
    }
    count
}

/// The order formula eta = L - d + 1.
pub fn estimate_order(l: usize, d_hat: usize) -> usize {
    debug_assert!(d_hat <= l + 1);
    l + 1 - d_hat
}

/// Diagnostics for one rejected order guess.
#[derive(Debug, Clone)]
pub struct GuessDiagnostics {
    /// Order hypothesis that was tested.
    pub eta_guess: usize,
    /// Stacking depth used for the verification decomposition.
    pub l_verify: usize,
    /// Finite eigenvalues of the verification pencil, ascending.
    pub eigenvalues: Vec<f64>,
    /// How many fell inside the unity band.
    pub d_hat: usize,
    /// Order implied by the count (negative when no count was made).
    pub eta_implied: isize,
    /// Failure description when the guess died before verification.
    pub note: String,
}

/// Outcome of the verification decomposition at one stacking depth.
#[derive(Debug, Clone)]
pub struct Verification {
    /// Finite eigenvalues of the verification pencil, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unity count, which implies the order via `estimate_order`.
    pub d_hat: usize,
}

/// Order test at the widened stack: with noise, count unity
/// eigenvalues of the generalized pencil; without noise, count null
/// directions of the plain covariance (the zero/unity duality).
pub fn verify_order(
    data: &DataSet,
    inner: &InnerLoop,
    l_verify: usize,
    config: &IdentificationConfig,
) -> Result<Verification> {
    let n = data.len();
    if n <= 2 * (l_verify + 1) {
        return Err(Error::InsufficientData {
            lag: l_verify,
            needed: 2 * (l_verify + 1) + 1,
            got: n,
        });
    }
    let z = build_lagged_matrix(data, l_verify)?;
    let s = sample_covariance(&z)?;
    if inner.noise_free {
        let (values, _) = symmetric_eig(&s)?;
        let trace: f64 = (0..s.nrows()).map(|i| s[[i, i]]).sum();
        let d_hat = values
            .iter()
            .filter(|&&v| v <= NULL_EIG_REL * trace)
            .count();
        return Ok(Verification {
            eigenvalues: values,
            d_hat,
        });
    }
    let acvf = acvf_from_model(
        &a_coefficients(&inner.theta),
        inner.noise.sigma_e2,
        l_verify,
        config.acvf_grid_points,
    )?;
    let noise = NoiseModel::new(inner.noise.sigma_e2, acvf)?;
    let sigma = build_noise_covariance(&noise, l_verify)?;
    let sol = identify_evd(&s, &sigma)?;
    let eigenvalues = ascending_real_eigenvalues(&sol);
    let d_hat = count_unity_eigenvalues(&eigenvalues, config.unity_tol);
    Ok(Verification { eigenvalues, d_hat })
}

/// Full identification: order search, noise refinement, verification,
/// bootstrap uncertainty and structure pruning, per the two-loop
/// algorithm.
///
/// Guesses run from `eta_guess_initial` to `eta_max`; a guess is
/// accepted when the verification count implies the guess itself and
/// at least one unity eigenvalue exists. When verification implies a
/// smaller order than the current guess, that order is tried next
/// before the sweep continues.
pub fn identify(data: &DataSet, config: &IdentificationConfig) -> Result<IdentificationReport> {
    config.validate()?;
    let mut queue: Vec<usize> = (config.eta_guess_initial..=config.eta_max).rev().collect();
    let mut tried: HashSet<usize> = HashSet::new();
    let mut attempts: Vec<GuessDiagnostics> = Vec::new();

    while let Some(guess) = queue.pop() {
        if !tried.insert(guess) {
            continue;
        }
        let l_verify = guess + config.l_verify_offset;
        let inner = match inner_loop(data, guess, config) {
            Ok(inner) => inner,
            Err(e) => {
                attempts.push(GuessDiagnostics {
                    eta_guess: guess,
                    l_verify,
                    eigenvalues: Vec::new(),
                    d_hat: 0,
                    eta_implied: -1,
                    note: format!("estimation failed: {e}"),
                });
                continue;
            }
        };
        let verification = match verify_order(data, &inner, l_verify, config) {
            Ok(v) => v,
            Err(e) => {
                attempts.push(GuessDiagnostics {
                    eta_guess: guess,
                    l_verify,
                    eigenvalues: Vec::new(),
                    d_hat: 0,
                    eta_implied: -1,
                    note: format!("verification failed: {e}"),
                });
                continue;
            }
        };
        let d_hat = verification.d_hat;
        let eta_implied = l_verify as isize + 1 - d_hat as isize;

        if d_hat >= 1 && eta_implied == guess as isize {
            let theta_std = if config.bootstrap_reps > 0 {
                bootstrap_ci(data, &inner.theta, &inner.noise, config)?.std
            } else {
                Vec::new()
            };
            let model = prune_structure(
                &inner.theta,
                if theta_std.is_empty() {
                    None
                } else {
                    Some(&theta_std)
                },
            )?;
            return Ok(IdentificationReport {
                eta_hat: guess,
                d_hat,
                theta: inner.theta,
                theta_std,
                model,
                noise: inner.noise,
                eigenvalues: verification.eigenvalues,
                trace: inner.trace,
                converged: inner.converged,
                config: config.clone(),
                schema_version: SCHEMA_VERSION,
            });
        }

        attempts.push(GuessDiagnostics {
            eta_guess: guess,
            l_verify,
            eigenvalues: verification.eigenvalues,
            d_hat,
            eta_implied,
            note: String::new(),
        });
        if eta_implied >= 0 {
            let implied = eta_implied as usize;
            if implied < guess
                && implied >= config.eta_guess_initial
                && implied <= config.eta_max
                && !tried.contains(&implied)
            {
                queue.push(implied);
            }
        }
    }

    Err(Error::OrderSearchFailed {
        initial: config.eta_guess_initial,
        max: config.eta_max,
        attempts,
    })
}

/// Structure selection from a normalized theta: a coefficient is kept
/// when it clears max(2 * its bootstrap std, 5% of the largest input
/// coefficient); the delay is the first surviving input lag. At least
/// one input coefficient always survives.
pub fn prune_structure(theta: &[f64], theta_std: Option<&[f64]>) -> Result<ArxModel> {
    if theta.len() < 2 || !theta.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "parameter vector length {} is not 2(eta+1)",
            theta.len()
        )));
    }
    if let Some(stds) = theta_std {
        if stds.len() != theta.len() {
            return Err(Error::DimensionMismatch(format!(
                "theta length {} vs std length {}",
                theta.len(),
                stds.len()
            )));
        }
    }
    let eta = theta.len() / 2 - 1;
    let a_hat: Vec<f64> = theta[1..=eta].to_vec();
    let b_hat: Vec<f64> = theta[eta + 1..].iter().map(|v| -v).collect();
    let max_b = b_hat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 0.05 * max_b;
    let std_at = |idx: usize| theta_std.map_or(0.0, |s| s[idx]);

    let keep_a: Vec<bool> = a_hat
        .iter()
        .enumerate()
        .map(|(i, &c)| c.abs() > (2.0 * std_at(1 + i)).max(floor))
        .collect();
    let mut keep_b: Vec<bool> = b_hat
        .iter()
        .enumerate()
        .map(|(j, &c)| c.abs() > (2.0 * std_at(eta + 1 + j)).max(floor))
        .collect();
    if keep_b.iter().all(|&k| !k) {
        // Degenerate: keep the single largest input coefficient.
        let mut best = 0;
        for (j, c) in b_hat.iter().enumerate() {
            if c.abs() > b_hat[best].abs() {
                best = j;
            }
        }
        keep_b[best] = true;
    }

    let n_y = keep_a.iter().rposition(|&k| k).map_or(0, |i| i + 1);
    let delay = keep_b
        .iter()
        .position(|&k| k)
        .expect("at least one b survives");
    let n_u = keep_b
        .iter()
        .rposition(|&k| k)
        .expect("at least one b survives");

    let a: Vec<f64> = (0..n_y)
        .map(|i| if keep_a[i] { a_hat[i] } else { 0.0 })
        .collect();
    let b: Vec<f64> = (delay..=n_u)
        .map(|j| if keep_b[j] { b_hat[j] } else { 0.0 })
        .collect();
    ArxModel::new(a, b, delay)
}
