//! Excitation design, ARX simulation and empirical autocovariances.
//!
//! Everything here is a pure function of its inputs and an explicit
//! seed, so records regenerate bit-identically across runs and
//! platforms.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::types::ArxModel;

/// Feedback taps of a maximal-length Fibonacci LFSR for each supported
/// register length (index 0 holds length 2). Maximality is not taken
/// on faith: construction re-verifies the period.
const MAXIMAL_TAPS: [&[usize]; 15] = [
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 11, 10, 4],
    &[13, 12, 11, 8],
    &[14, 13, 12, 2],
    &[15, 14],
    &[16, 15, 13, 4],
];

/// Pseudo-random binary sequence from a Fibonacci LFSR.
///
/// Register bits are numbered 1..=n with bit 1 the newest; the output
/// symbol is bit n and the feedback (XOR over `taps`) shifts in at
/// bit 1. One period of a maximal-length register visits every nonzero
/// state exactly once.
#[derive(Debug, Clone)]
pub struct PrbsSpec {
    /// Register length n, 2..=16.
    pub register_length: usize,
    /// Tap positions in 1..=n; must include n for a full-period shift.
    pub taps: Vec<usize>,
    /// Initial register contents, nonzero, below 2^n.
    pub seed: u32,
    /// Output levels for bits (0, 1).
    pub levels: (f64, f64),
}

impl PrbsSpec {
    /// Known-maximal taps for `register_length` in 2..=16, seed 1,
    /// levels (-1, +1).
    pub fn maximal(register_length: usize) -> Result<Self> {
        if !(2..=16).contains(&register_length) {
            return Err(Error::InvalidPrbs(format!(
                "register length {register_length} outside supported range 2..=16"
            )));
        }
        Ok(PrbsSpec {
            register_length,
            taps: MAXIMAL_TAPS[register_length - 2].to_vec(),
            seed: 1,
            levels: (-1.0, 1.0),
        })
    }

    pub fn period(&self) -> usize {
        (1usize << self.register_length) - 1
    }

    fn validate(&self) -> Result<()> {
        let n = self.register_length;
        if !(2..=16).contains(&n) {
            return Err(Error::InvalidPrbs(format!(
                "register length {n} outside supported range 2..=16"
            )));
        }
        if self.seed == 0 || self.seed >= (1u32 << n) {
            return Err(Error::InvalidPrbs(format!(
                "seed {:#x} is not a nonzero {n}-bit state",
                self.seed
            )));
        }
        if self.taps.is_empty() || self.taps.iter().any(|&t| t == 0 || t > n) {
            return Err(Error::InvalidPrbs(format!(
                "taps {:?} must lie in 1..={n}",
                self.taps
            )));
        }
        if !self.levels.0.is_finite() || !self.levels.1.is_finite() {
            return Err(Error::InvalidPrbs("levels must be finite".into()));
        }
        Ok(())
    }

    fn step(&self, state: u32) -> u32 {
        let feedback = self
            .taps
            .iter()
            .fold(0u32, |acc, &t| acc ^ ((state >> (t - 1)) & 1));
        let mask = (1u32 << self.register_length) - 1;
        ((state << 1) | feedback) & mask
    }

    /// Steps until the register revisits its initial state; errors if
    /// that is not the full nonzero-state cycle, which is exactly the
    /// primitivity test for the tap polynomial.
    fn verify_maximal(&self) -> Result<()> {
        let mut state = self.seed;
        for steps in 1..=self.period() {
            state = self.step(state);
            if state == self.seed {
                if steps == self.period() {
                    return Ok(());
                }
                return Err(Error::InvalidPrbs(format!(
                    "taps {:?} give period {steps}, not the maximal {}",
                    self.taps,
                    self.period()
                )));
            }
        }
        // Reachable when the step map is not injective (taps omit bit
        // n): the orbit enters a cycle that skips the seed state.
        Err(Error::InvalidPrbs(format!(
            "taps {:?} never return to the seed state",
            self.taps
        )))
    }
}

/// One full period (2^n - 1 samples) of the sequence.
pub fn generate_prbs(spec: &PrbsSpec) -> Result<Vec<f64>> {
    generate_prbs_samples(spec, spec.period())
}

/// Arbitrary-length generation; the sequence repeats with the register
/// period.
pub fn generate_prbs_samples(spec: &PrbsSpec, len: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    spec.verify_maximal()?;
    let n = spec.register_length;
    let mut state = spec.seed;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let bit = (state >> (n - 1)) & 1;
        out.push(if bit == 1 {
            spec.levels.1
        } else {
            spec.levels.0
        });
        state = spec.step(state);
    }
    Ok(out)
}

/// Knobs for [`simulate_arx_with`].
#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    /// Extra noise-filter steps discarded before the record starts, so
    /// the disturbance begins near its stationary law. The plant keeps
    /// exact zero initial conditions regardless.
    pub burn_in: usize,
    /// Permit an unstable A-polynomial (outputs will diverge).
    pub allow_unstable: bool,
}

/// Simulated process record: noise-free response, disturbance, and
/// their sum as measured.
#[derive(Debug, Clone)]
pub struct SimulatedRecord {
    pub y_star: Vec<f64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

/// Simulates the difference equation with zero initial conditions and
/// adds AR-colored Gaussian output noise driven through the same
/// A-polynomial, per the ARX structure.
pub fn simulate_arx(
    model: &ArxModel,
    u: &[f64],
    sigma_e2: f64,
    seed: u64,
) -> Result<SimulatedRecord> {
    simulate_arx_with(model, u, sigma_e2, seed, &SimulateOptions::default())
}

pub fn simulate_arx_with(
    model: &ArxModel,
    u: &[f64],
    sigma_e2: f64,
    seed: u64,
    options: &SimulateOptions,
) -> Result<SimulatedRecord> {
    if sigma_e2 < 0.0 || !sigma_e2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and nonnegative, got {sigma_e2}"
        )));
    }
    if !options.allow_unstable && !model.is_stable()? {
        return Err(Error::UnstableModel {
            radius: model.spectral_radius()?,
        });
    }
    let eta = model.equation_order();
    if u.len() < eta {
        return Err(Error::InsufficientData {
            lag: eta,
            needed: eta,
            got: u.len(),
        });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "input contains non-finite samples".into(),
        ));
    }

    let n = u.len();
    let n_y = model.n_y;
    let mut y_star = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for i in 1..=n_y {
            if k >= i {
                acc -= model.a_at(i) * y_star[k - i];
            }
        }
        for j in model.delay..=model.n_u {
            if k >= j {
                acc += model.b_at(j) * u[k - j];
            }
        }
        y_star[k] = acc;
    }

    let mut v = vec![0.0; n];
    if sigma_e2 > 0.0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma_e2.sqrt())
            .map_err(|e| Error::InvalidArgument(format!("invalid noise distribution: {e}")))?;
        // History long enough for the AR recursion across the burn-in
        // boundary.
        let mut history = vec![0.0; options.burn_in + n];
        for k in 0..history.len() {
            let mut acc = normal.sample(&mut rng);
            for i in 1..=n_y {
                if k >= i {
                    acc -= model.a_at(i) * history[k - i];
                }
            }
            history[k] = acc;
        }
        v.copy_from_slice(&history[options.burn_in..]);
    }

    let y = y_star.iter().zip(v.iter()).map(|(a, b)| a + b).collect();
    Ok(SimulatedRecord { y_star, y, v })
}

/// Noise gain g = sum of squared impulse-response samples of 1/A, the
/// stationary variance amplification from innovation to disturbance.
/// The series is truncated once a geometric bound on the remaining
/// tail drops below 1e-12 of the accumulated sum.
pub fn noise_gain(model: &ArxModel) -> Result<f64> {
    let radius = model.spectral_radius()?;
    if radius >= 1.0 {
        return Err(Error::UnstableModel { radius });
    }
    let n_y = model.n_y;
    if n_y == 0 {
        return Ok(1.0);
    }
    // h[0] = 1, h[k] = -sum a_i h[k-i].
    let window = n_y + 1;
    let mut h = vec![0.0; window];
    h[0] = 1.0;
    let mut g = 1.0;
    let ratio = (radius * radius).min(1.0 - 1e-12);
    let mut k = 0usize;
    loop {
        k += 1;
        let mut next = 0.0;
        for i in 1..=n_y {
            if k >= i {
                next -= model.a_at(i) * h[(k - i) % window];
            }
        }
        h[k % window] = next;
        g += next * next;
        if k >= window {
            // Window sums decay at least geometrically with the squared
            // spectral radius once past the transient.
            let recent: f64 = h.iter().map(|x| x * x).sum();
            let tail_bound = recent / (1.0 - ratio);
            if tail_bound <= 1e-12 * g {
                break;
            }
        }
        if k > 50_000_000 {
            return Err(Error::NearSingularSpectrum {
                min_gain: 1.0 - radius,
            });
        }
    }
    Ok(g)
}

/// Innovation variance that realizes `var(y_star) / var(v) == snr` in
/// expectation: `var(y_star) / (snr * g)` with g from [`noise_gain`].
pub fn noise_variance_for_snr(model: &ArxModel, u: &[f64], snr: f64) -> Result<f64> {
    if snr <= 0.0 || !snr.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "signal-to-noise ratio must be positive, got {snr}"
        )));
    }
    let g = noise_gain(model)?;
    let record = simulate_arx(model, u, 0.0, 0)?;
    let n = record.y_star.len() as f64;
    let mean = record.y_star.iter().sum::<f64>() / n;
    let var = record
        .y_star
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / n;
    Ok(var / (snr * g))
}

/// Biased sample autocovariance sigma[l] = (1/N) sum (x[k] - xbar) *
/// (x[k+l] - xbar) for l = 0..=max_lag. The biased form keeps the
/// implied Toeplitz matrix positive semidefinite.
pub fn sample_acvf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    if max_lag >= x.len() {
        return Err(Error::InsufficientData {
            lag: max_lag,
            needed: max_lag + 1,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut acvf = Vec::with_capacity(max_lag + 1);
    for l in 0..=max_lag {
        let s: f64 = (0..x.len() - l)
            .map(|k| (x[k] - mean) * (x[k + l] - mean))
            .sum();
        acvf.push(s / n);
    }
    Ok(acvf)
}
