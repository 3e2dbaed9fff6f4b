//! Reference posterior by brute force: enumerate every fault pattern,
//! marginalize the biases analytically, and normalize with a log-sum-exp.
//! Exponential in the station count, so only usable for small scenarios,
//! which is exactly what makes it an independent check on message passing.

use raim::model::{PositionPrior, Scenario};
use raim::numerics::gaussian_pdf;
use std::f64::consts::TAU;

pub struct PatternTerm {
    pub faulty: Vec<bool>,
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

pub struct BruteForce {
    pub terms: Vec<PatternTerm>,
}

impl BruteForce {
    pub fn enumerate(scenario: &Scenario, measurements: &[f64]) -> Self {
        let m = scenario.stations.len();
        assert_eq!(m, measurements.len(), "one measurement per station");
        assert!(m <= 20, "pattern enumeration is 2^m");
        let mut raw: Vec<(f64, Vec<bool>, f64, f64)> = Vec::new();
        'patterns: for bits in 0u32..1 << m {
            let mut log_weight = 0.0;
            let mut faulty = vec![false; m];
            // Gaussian likelihood factors in x as (mean, variance) pairs.
            let mut factors: Vec<(f64, f64)> = Vec::with_capacity(m + 1);
            if let PositionPrior::Gaussian { mean, variance } = scenario.prior {
                factors.push((mean, variance));
            }
            for (i, (station, &y)) in scenario.stations.iter().zip(measurements).enumerate() {
                let is_faulty = bits >> i & 1 == 1;
                faulty[i] = is_faulty;
                let p = if is_faulty {
                    station.theta
                } else {
                    1.0 - station.theta
                };
                if p == 0.0 {
                    continue 'patterns;
                }
                log_weight += p.ln();
                if is_faulty {
                    factors.push((
                        y - station.bias_mean,
                        station.noise_std.powi(2) + station.bias_std.powi(2),
                    ));
                } else {
                    factors.push((y, station.noise_std.powi(2)));
                }
            }
            let precision: f64 = factors.iter().map(|&(_, v)| v.recip()).sum();
            let variance = precision.recip();
            let mean = variance * factors.iter().map(|&(mu, v)| mu / v).sum::<f64>();
            // Normalization constant of the factor product, evaluated through
            // squared residuals about the product mean to avoid cancellation.
            let mut log_z = 0.5 * (TAU * variance).ln();
            for &(mu, v) in &factors {
                log_z -= 0.5 * (TAU * v).ln() + 0.5 * (mean - mu).powi(2) / v;
            }
            raw.push((log_weight + log_z, faulty, mean, variance));
        }
        let max_log = raw.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = raw.iter().map(|r| (r.0 - max_log).exp()).sum();
        let terms = raw
            .into_iter()
            .map(|(lw, faulty, mean, variance)| PatternTerm {
                faulty,
                weight: (lw - max_log).exp() / total,
                mean,
                variance,
            })
            .collect();
        Self { terms }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * gaussian_pdf(x, t.mean, t.variance))
            .sum()
    }

    pub fn fault_posterior(&self, station: usize) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.faulty[station])
            .map(|t| t.weight)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.mean).sum()
    }

    /// Grid spanning the bulk of the posterior: mean plus or minus four
    /// spreads, where the spread covers every component's offset and width.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let center = self.mean();
        let spread = self
            .terms
            .iter()
            .map(|t| t.variance.sqrt() + (t.mean - center).abs())
            .fold(0.0f64, f64::max)
            .max(1e-6);
        let lo = center - 4.0 * spread;
        let step = 8.0 * spread / (points - 1) as f64;
        (0..points).map(|k| lo + step * k as f64).collect()
    }
}
