//! The measurement model: stations, scenarios, and sampled epochs.
//!
//! Every station `i` reports `y_i = x + b_i + n_i` where `x` is the common
//! unknown position, `n_i` is zero-mean Gaussian noise with known standard
//! deviation, and `b_i` is a bias that is present only when the station is
//! faulted. Faults are independent Bernoulli events with known prior
//! probability, and a present bias is Gaussian with known mean and spread, so
//! the prior on `b_i` is a two-component mixture: a Dirac delta at zero plus
//! a wide Gaussian.

use crate::numerics::{GaussianMixture, WeightedGaussian};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Per-station parameters.
///
/// `bias_mean` and `bias_std` describe the bias when the station is faulted;
/// `theta` is the prior fault probability. The interesting regime has small
/// `theta` and `bias_std` well above `noise_std`, but the endpoints 0 and 1
/// are accepted because degenerate stations are useful in tests and sanity
/// checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsParams {
    pub theta: f64,
    pub bias_mean: f64,
    pub bias_std: f64,
    pub noise_std: f64,
}

/// Prior on the unknown position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionPrior {
    /// Improper flat prior: the posterior is shaped by measurements alone.
    ImproperFlat,
    /// Proper Gaussian prior.
    Gaussian { mean: f64, variance: f64 },
}

/// A full problem description: the stations plus the integrity knobs shared
/// by both algorithms.
///
/// `tir` is the target integrity risk the protection level must meet.
/// `theta_threshold` drives Bayesian fault exclusion (a posterior fault
/// probability strictly above it gets a station excluded; 1.0 disables
/// exclusion). `p_fa` is the false-alarm budget the baseline splits across
/// its solution-separation tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub stations: Vec<BsParams>,
    pub tir: f64,
    pub theta_threshold: f64,
    pub p_fa: f64,
    pub prior: PositionPrior,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("scenario has no stations")]
    NoStations,
    #[error("station {index}: {reason}")]
    BadStation { index: usize, reason: String },
    #[error("{name} = {value} must lie in {range}")]
    BadParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

impl Scenario {
    /// Validates the scenario. Hard violations come back as errors; suspect
    /// but legal configurations (a bias spread that does not dominate the
    /// noise, so faults hide inside the noise floor) come back as warnings
    /// for the caller to surface.
    pub fn validate(&self) -> Result<Vec<String>, ModelError> {
        if self.stations.is_empty() {
            return Err(ModelError::NoStations);
        }
        for (index, s) in self.stations.iter().enumerate() {
            let bad = |reason: String| ModelError::BadStation { index, reason };
            if !(s.theta >= 0.0 && s.theta <= 1.0) {
                return Err(bad(format!("fault probability {} outside [0, 1]", s.theta)));
            }
            if !(s.bias_std > 0.0 && s.bias_std.is_finite()) {
                return Err(bad(format!("bias spread {} must be positive", s.bias_std)));
            }
            if !(s.noise_std > 0.0 && s.noise_std.is_finite()) {
                return Err(bad(format!("noise level {} must be positive", s.noise_std)));
            }
            if !s.bias_mean.is_finite() {
                return Err(bad(format!("bias mean {} must be finite", s.bias_mean)));
            }
        }
        if !(self.tir > 0.0 && self.tir < 1.0) {
            return Err(ModelError::BadParameter {
                name: "tir",
                value: self.tir,
                range: "(0, 1)",
            });
        }
        if !(self.theta_threshold > 0.0 && self.theta_threshold <= 1.0) {
            return Err(ModelError::BadParameter {
                name: "theta_threshold",
                value: self.theta_threshold,
                range: "(0, 1]",
            });
        }
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(ModelError::BadParameter {
                name: "p_fa",
                value: self.p_fa,
                range: "(0, 1)",
            });
        }
        if let PositionPrior::Gaussian { mean, variance } = self.prior {
            if !mean.is_finite() || !(variance > 0.0 && variance.is_finite()) {
                return Err(ModelError::BadParameter {
                    name: "prior",
                    value: variance,
                    range: "finite mean, positive variance",
                });
            }
        }
        let mut warnings = Vec::new();
        for (i, s) in self.stations.iter().enumerate() {
            if s.bias_std <= s.noise_std {
                warnings.push(format!(
                    "station {i}: bias spread {} does not exceed noise level {}; \
                     faults will be hard to distinguish from noise",
                    s.bias_std, s.noise_std
                ));
            }
        }
        Ok(warnings)
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn noise_stds(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.noise_std).collect()
    }
}

/// The prior on a station's bias as an explicit mixture:
/// `(1 - theta) * delta(b) + theta * N(b; bias_mean, bias_std^2)`.
/// Degenerate fault probabilities drop the zero-weight component.
pub fn bias_prior_mixture(p: &BsParams) -> GaussianMixture {
    let mut components = Vec::with_capacity(2);
    if p.theta < 1.0 {
        components.push(WeightedGaussian::new(1.0 - p.theta, 0.0, 0.0));
    }
    if p.theta > 0.0 {
        components.push(WeightedGaussian::new(
            p.theta,
            p.bias_mean,
            p.bias_std * p.bias_std,
        ));
    }
    GaussianMixture::new(components)
}

/// One simulated epoch. `measurements[i]` is constructed as exactly
/// `true_x + biases[i] + noises[i]` (same expression, same rounding), so that
/// identity can be checked bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub true_x: f64,
    pub faults: Vec<bool>,
    pub biases: Vec<f64>,
    pub noises: Vec<f64>,
    pub measurements: Vec<f64>,
}

/// Draws one epoch from the scenario's generative model.
///
/// The generator is ChaCha8 keyed by `seed` alone, so a given `(scenario,
/// seed)` pair always produces the same epoch, on any platform and at any
/// level of surrounding parallelism.
pub fn sample_epoch(scenario: &Scenario, seed: u64) -> Epoch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_epoch_from(scenario, &mut rng)
}

/// Draws one epoch from a caller-managed generator, for callers that need
/// other draws on the same stream. Draw order: the true position first
/// (fixed at 0 under the flat prior), then per station the fault indicator,
/// the bias for faulted stations, and the noise.
pub fn sample_epoch_from<R: Rng>(scenario: &Scenario, rng: &mut R) -> Epoch {
    let true_x = match scenario.prior {
        PositionPrior::ImproperFlat => 0.0,
        PositionPrior::Gaussian { mean, variance } => {
            mean + variance.sqrt() * rng.sample::<f64, _>(StandardNormal)
        }
    };
    let m = scenario.stations.len();
    let mut faults = Vec::with_capacity(m);
    let mut biases = Vec::with_capacity(m);
    let mut noises = Vec::with_capacity(m);
    let mut measurements = Vec::with_capacity(m);
    for s in &scenario.stations {
        let faulted = rng.random_bool(s.theta);
        let bias = if faulted {
            s.bias_mean + s.bias_std * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let noise = s.noise_std * rng.sample::<f64, _>(StandardNormal);
        faults.push(faulted);
        biases.push(bias);
        noises.push(noise);
        measurements.push(true_x + bias + noise);
    }
    Epoch {
        true_x,
        faults,
        biases,
        noises,
        measurements,
    }
}
