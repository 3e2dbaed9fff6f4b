//! Solution-separation integrity monitoring as the comparison point.
//!
//! The monitor works from weighted-least-squares geometry alone. For every
//! monitored fault mode (a candidate set of simultaneously faulted stations,
//! leaving at least two survivors) it compares the subset estimate that
//! ignores those stations against the all-in-view estimate. Under no fault
//! the separation is zero-mean Gaussian with a variance fixed by the
//! geometry, so each test gets a threshold that splits a false-alarm budget
//! evenly across all monitored modes and both tails.
//!
//! The protection level is not data driven: it is the smallest radius that
//! bounds the integrity risk assuming each fault mode at its prior
//! probability pushes the estimate just past its detection threshold. That
//! makes the protection level a function of the survivor set only, which is
//! why tables are built once and reused across epochs.
//!
//! When a test fires, exclusion retries fault modes in decreasing prior
//! order: drop the mode's stations, rerun the full detection battery on the
//! survivors, and accept the first set that screens clean. If nothing does,
//! the all-in-view estimate is returned marked untrusted, with no protection
//! level.

use crate::model::{ModelError, Scenario};
use crate::numerics::{bisect_min_radius, q_function, q_inverse, Bracket, NumericsError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("solution separation needs at least 3 stations, got {stations}")]
    TooFewStations { stations: usize },
    #[error("table covers {expected} stations but {got} measurements were supplied")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A weighted-least-squares estimator over a station subset: inverse-variance
/// weights, normalized, zero at excluded stations.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEstimator {
    pub coefficients: Vec<f64>,
    /// Variance of the estimate under the fault-free model.
    pub variance: f64,
}

impl SubsetEstimator {
    /// Builds the estimator using every station `i` with `excluded[i]` false.
    pub fn new(noise_stds: &[f64], excluded: &[bool]) -> Self {
        assert_eq!(noise_stds.len(), excluded.len());
        let precision: f64 = noise_stds
            .iter()
            .zip(excluded)
            .filter(|&(_, &e)| !e)
            .map(|(s, _)| 1.0 / (s * s))
            .sum();
        assert!(precision > 0.0, "estimator over an empty subset");
        let variance = 1.0 / precision;
        let coefficients = noise_stds
            .iter()
            .zip(excluded)
            .map(|(s, &e)| if e { 0.0 } else { variance / (s * s) })
            .collect();
        Self {
            coefficients,
            variance,
        }
    }

    pub fn estimate(&self, measurements: &[f64]) -> f64 {
        assert_eq!(measurements.len(), self.coefficients.len());
        self.coefficients
            .iter()
            .zip(measurements)
            .map(|(c, y)| c * y)
            .sum()
    }
}

/// One monitored fault mode with its precomputed test quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultMode {
    /// Which stations this mode assumes faulted.
    pub faulty: Vec<bool>,
    /// The same set as ascending indices.
    pub faulted_indices: Vec<usize>,
    /// Prior probability of exactly this fault pattern.
    pub prior_probability: f64,
    /// Subset estimator over the mode's survivors.
    pub estimator: SubsetEstimator,
    /// Fault-free standard deviation of `subset estimate - all-in-view`.
    pub separation_std: f64,
    /// Two-sided detection threshold on the separation.
    pub threshold: f64,
}

/// Everything solution separation precomputes for one survivor set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub all_in_view: SubsetEstimator,
    /// Monitored modes, sorted by descending prior probability with ties
    /// broken by ascending faulted-index lists.
    pub monitored: Vec<FaultMode>,
    /// Per-test, per-tail false-alarm budget.
    pub false_alarm_share: f64,
    /// Protection level for this survivor set, valid whenever detection
    /// passes.
    pub pl: f64,
    tir: f64,
}

/// Outcome of running every separation test against one measurement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCheck {
    /// Subset estimate minus all-in-view estimate.
    pub separation: f64,
    pub alarm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// All-in-view estimate.
    pub estimate: f64,
    /// One entry per monitored mode, in table order. Every test is always
    /// evaluated; detection never short-circuits.
    pub checks: Vec<ModeCheck>,
    /// True when no test alarmed.
    pub pass: bool,
}

impl ModeTable {
    /// Builds the table for the scenario's full station set: estimators,
    /// priors, separation spreads, thresholds, and the protection level.
    pub fn build(scenario: &Scenario) -> Result<Self, BaselineError> {
        scenario.validate()?;
        let m = scenario.stations.len();
        if m < 3 {
            return Err(BaselineError::TooFewStations { stations: m });
        }
        let noise_stds = scenario.noise_stds();
        let all_in_view = SubsetEstimator::new(&noise_stds, &vec![false; m]);

        let mut monitored = Vec::new();
        for pattern in 1u64..(1 << m) {
            let faults = pattern.count_ones() as usize;
            if faults > m - 2 {
                continue;
            }
            let faulty: Vec<bool> = (0..m).map(|i| pattern >> i & 1 == 1).collect();
            let faulted_indices: Vec<usize> = (0..m).filter(|&i| faulty[i]).collect();
            // The faulted and clean factors are multiplied as two separate
            // runs so that modes with identical fault multisets get
            // bit-identical priors and the index tiebreak below stays
            // meaningful.
            let faulted: f64 = faulted_indices
                .iter()
                .map(|&i| scenario.stations[i].theta)
                .product();
            let clean: f64 = (0..m)
                .filter(|&i| !faulty[i])
                .map(|i| 1.0 - scenario.stations[i].theta)
                .product();
            let prior_probability = faulted * clean;
            let estimator = SubsetEstimator::new(&noise_stds, &faulty);
            let separation_var: f64 = estimator
                .coefficients
                .iter()
                .zip(&all_in_view.coefficients)
                .zip(&noise_stds)
                .map(|((ck, c0), s)| (ck - c0) * (ck - c0) * s * s)
                .sum();
            monitored.push(FaultMode {
                faulty,
                faulted_indices,
                prior_probability,
                estimator,
                separation_std: separation_var.sqrt(),
                threshold: f64::NAN,
            });
        }
        monitored.sort_by(|a, b| {
            b.prior_probability
                .total_cmp(&a.prior_probability)
                .then_with(|| a.faulted_indices.cmp(&b.faulted_indices))
        });

        let false_alarm_share = scenario.p_fa / (2.0 * monitored.len() as f64);
        let z = q_inverse(false_alarm_share)?;
        for mode in &mut monitored {
            mode.threshold = mode.separation_std * z;
        }

        let tir = scenario.tir;
        let risk = |pl: f64| {
            let mut r = 2.0 * q_function(pl / all_in_view.variance.sqrt());
            for mode in &monitored {
                r += mode.prior_probability
                    * q_function((pl - mode.threshold) / mode.estimator.variance.sqrt());
            }
            r
        };
        let hi = 1.0
            + 10.0 * all_in_view.variance.sqrt()
            + monitored
                .iter()
                .map(|m| m.threshold + 10.0 * m.estimator.variance.sqrt())
                .fold(0.0, f64::max);
        let pl = bisect_min_radius(risk, tir, Bracket::new(0.0, hi, 1e-12, 200))?;

        Ok(Self {
            all_in_view,
            monitored,
            false_alarm_share,
            pl,
            tir,
        })
    }

    pub fn station_count(&self) -> usize {
        self.all_in_view.coefficients.len()
    }

    /// The integrity risk the protection-level equation assigns to radius
    /// `pl`: both fault-free tails plus, per monitored mode, the prior-
    /// weighted chance the subset estimate errs past `pl` while the
    /// separation sits at its detection threshold.
    pub fn risk(&self, pl: f64) -> f64 {
        let mut r = 2.0 * q_function(pl / self.all_in_view.variance.sqrt());
        for mode in &self.monitored {
            r += mode.prior_probability
                * q_function((pl - mode.threshold) / mode.estimator.variance.sqrt());
        }
        r
    }

    pub fn target_integrity_risk(&self) -> f64 {
        self.tir
    }

    /// Evaluates every monitored separation test.
    pub fn detect(&self, measurements: &[f64]) -> Result<Detection, BaselineError> {
        if measurements.len() != self.station_count() {
            return Err(BaselineError::ArityMismatch {
                expected: self.station_count(),
                got: measurements.len(),
            });
        }
        let estimate = self.all_in_view.estimate(measurements);
        let checks: Vec<ModeCheck> = self
            .monitored
            .iter()
            .map(|mode| {
                let separation = mode.estimator.estimate(measurements) - estimate;
                ModeCheck {
                    separation,
                    alarm: separation.abs() > mode.threshold,
                }
            })
            .collect();
        let pass = checks.iter().all(|c| !c.alarm);
        Ok(Detection {
            estimate,
            checks,
            pass,
        })
    }
}

struct Retry {
    /// Surviving stations, ascending original indices.
    survivors: Vec<usize>,
    table: ModeTable,
}

/// The full table plus one retry table per monitored mode whose exclusion
/// leaves enough survivors to monitor.
pub struct BaselinePrecomp {
    pub full: ModeTable,
    retries: Vec<Option<Retry>>,
}

/// What the monitor reports for one measurement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    /// All-in-view estimate over the trusted survivor set, or over every
    /// station when no trusted set was found.
    pub estimate: f64,
    /// Protection level of the trusted survivor set; absent when untrusted.
    pub pl: Option<f64>,
    /// Stations excluded to reach the trusted set, ascending.
    pub excluded: Vec<usize>,
    /// False when every exclusion retry still alarmed.
    pub trusted: bool,
    /// Total separation tests evaluated, across the full set and retries.
    pub tests_run: usize,
}

impl BaselinePrecomp {
    pub fn new(scenario: &Scenario) -> Result<Self, BaselineError> {
        let full = ModeTable::build(scenario)?;
        let mut retries = Vec::with_capacity(full.monitored.len());
        for mode in &full.monitored {
            let survivors: Vec<usize> = (0..scenario.stations.len())
                .filter(|&i| !mode.faulty[i])
                .collect();
            if survivors.len() < 3 {
                retries.push(None);
                continue;
            }
            let sub = Scenario {
                stations: survivors.iter().map(|&i| scenario.stations[i]).collect(),
                ..scenario.clone()
            };
            retries.push(Some(Retry {
                survivors,
                table: ModeTable::build(&sub)?,
            }));
        }
        Ok(Self { full, retries })
    }

    /// Every mode table the monitor can answer from: the full set first,
    /// then one per retained exclusion retry. The protection level of any
    /// trusted answer is the `pl` of exactly one of these, which is what
    /// makes the returned levels a small discrete set.
    pub fn tables(&self) -> impl Iterator<Item = &ModeTable> {
        std::iter::once(&self.full).chain(self.retries.iter().flatten().map(|r| &r.table))
    }

    /// Detection, exclusion retries, and the final verdict for one epoch.
    pub fn run(&self, measurements: &[f64]) -> Result<BaselineResult, BaselineError> {
        let detection = self.full.detect(measurements)?;
        let mut tests_run = detection.checks.len();
        if detection.pass {
            return Ok(BaselineResult {
                estimate: detection.estimate,
                pl: Some(self.full.pl),
                excluded: Vec::new(),
                trusted: true,
                tests_run,
            });
        }
        for (mode, retry) in self.full.monitored.iter().zip(&self.retries) {
            let Some(retry) = retry else { continue };
            let sub_y: Vec<f64> = retry.survivors.iter().map(|&i| measurements[i]).collect();
            let sub_detection = retry.table.detect(&sub_y)?;
            tests_run += sub_detection.checks.len();
            if sub_detection.pass {
                return Ok(BaselineResult {
                    estimate: sub_detection.estimate,
                    pl: Some(retry.table.pl),
                    excluded: mode.faulted_indices.clone(),
                    trusted: true,
                    tests_run,
                });
            }
        }
        Ok(BaselineResult {
            estimate: detection.estimate,
            pl: None,
            excluded: Vec::new(),
            trusted: false,
            tests_run,
        })
    }
}
