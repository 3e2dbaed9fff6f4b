//! TOML configuration schema and its resolution into library types.
//!
//! Two scenario forms are accepted. The homogeneous form names a station
//! count and one set of station parameters; the heterogeneous form lists
//! stations one by one. The fault bias mean is either a fixed number or a
//! range `[lo, hi]` from which each simulated cell draws its station means
//! once; giving neither means the default range [-50, 50] for the
//! homogeneous form, giving both is an error.

use std::path::Path;

use raim::model::{BsParams, PositionPrior, Scenario};
use raim::montecarlo::{Algorithm, RunConfig, SweepCell};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub algorithms: AlgorithmsSection,
    #[serde(default)]
    pub sweep: Vec<SweepEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Homogeneous form: how many identical stations.
    pub stations: Option<usize>,
    pub theta: Option<f64>,
    pub bias_mean: Option<f64>,
    pub bias_mean_range: Option<[f64; 2]>,
    pub bias_std: Option<f64>,
    pub noise_std: Option<f64>,
    /// Heterogeneous form: explicit station list.
    #[serde(default)]
    pub station: Vec<StationSection>,
    pub tir: f64,
    pub theta_threshold: Option<f64>,
    pub p_fa: Option<f64>,
    pub prior: Option<PriorSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSection {
    pub theta: f64,
    pub bias_mean: f64,
    pub bias_std: f64,
    pub noise_std: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub epochs: Option<u64>,
    pub seed: Option<u64>,
    pub pixel: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmsSection {
    pub bayes_fe: bool,
    pub bayes_nfe: bool,
    pub baseline: bool,
}

impl Default for AlgorithmsSection {
    fn default() -> Self {
        Self {
            bayes_fe: true,
            bayes_nfe: true,
            baseline: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub m: usize,
    pub noise_std: f64,
}

pub const DEFAULT_EPOCHS: u64 = 200_000;
pub const DEFAULT_PIXEL: f64 = 0.01;
pub const DEFAULT_BIAS_MEAN_RANGE: (f64, f64) = (-50.0, 50.0);

pub fn load(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

/// A scenario plus the bias-mean draw range, if one applies, plus any
/// validation warnings for the caller to surface.
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub bias_mean_range: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

pub fn resolve_scenario(section: &ScenarioSection) -> Result<ResolvedScenario, String> {
    let bias_mean_range = match (section.bias_mean, section.bias_mean_range) {
        (Some(_), Some(_)) => {
            return Err("give bias_mean or bias_mean_range, not both".into());
        }
        (None, Some([lo, hi])) => Some((lo, hi)),
        (Some(_), None) => None,
        // An explicit station list fixes each mean; only the homogeneous
        // template defaults to a drawn range.
        (None, None) if !section.station.is_empty() => None,
        (None, None) => Some(DEFAULT_BIAS_MEAN_RANGE),
    };
    // The template mean for a range is its midpoint; every simulated cell
    // replaces it with its own per-station draws.
    let template_mean = |range: Option<(f64, f64)>| match (section.bias_mean, range) {
        (Some(m), _) => m,
        (None, Some((lo, hi))) => 0.5 * (lo + hi),
        (None, None) => unreachable!("one branch above always applies"),
    };

    let stations: Vec<BsParams> = if section.station.is_empty() {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| {
                format!("scenario is missing `{name}` (or a [[scenario.station]] list)")
            })
        };
        let count = section
            .stations
            .ok_or("scenario is missing `stations` (or a [[scenario.station]] list)")?;
        if count == 0 {
            return Err("`stations` must be at least 1".into());
        }
        let params = BsParams {
            theta: need("theta", section.theta)?,
            bias_mean: template_mean(bias_mean_range),
            bias_std: need("bias_std", section.bias_std)?,
            noise_std: need("noise_std", section.noise_std)?,
        };
        vec![params; count]
    } else {
        if section.stations.is_some()
            || section.theta.is_some()
            || section.bias_mean.is_some()
            || section.bias_std.is_some()
            || section.noise_std.is_some()
        {
            return Err(
                "use either the homogeneous scenario fields or [[scenario.station]], not both"
                    .into(),
            );
        }
        section
            .station
            .iter()
            .map(|s| BsParams {
                theta: s.theta,
                bias_mean: s.bias_mean,
                bias_std: s.bias_std,
                noise_std: s.noise_std,
            })
            .collect()
    };

    let prior = match &section.prior {
        None => PositionPrior::ImproperFlat,
        Some(p) => PositionPrior::Gaussian {
            mean: p.mean,
            variance: p.variance,
        },
    };
    let scenario = Scenario {
        stations,
        tir: section.tir,
        theta_threshold: section.theta_threshold.unwrap_or(0.5),
        p_fa: section.p_fa.unwrap_or(0.05),
        prior,
    };
    let warnings = scenario.validate().map_err(|e| e.to_string())?;
    Ok(ResolvedScenario {
        scenario,
        bias_mean_range,
        warnings,
    })
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epochs: Option<u64>,
    pub algorithms: Option<Vec<Algorithm>>,
}

pub fn resolve_run(
    config: &ConfigFile,
    overrides: &Overrides,
) -> Result<(RunConfig, Vec<String>), String> {
    let resolved = resolve_scenario(&config.scenario)?;
    let algorithms = match &overrides.algorithms {
        Some(list) => list.clone(),
        None => {
            let mut list = Vec::new();
            if config.algorithms.bayes_fe {
                list.push(Algorithm::BayesFe);
            }
            if config.algorithms.bayes_nfe {
                list.push(Algorithm::BayesNfe);
            }
            if config.algorithms.baseline {
                list.push(Algorithm::Baseline);
            }
            list
        }
    };
    if algorithms.is_empty() {
        return Err("every algorithm is disabled; nothing to run".into());
    }
    let run = RunConfig {
        scenario: resolved.scenario,
        bias_mean_range: resolved.bias_mean_range,
        n_epochs: overrides
            .epochs
            .or(config.run.epochs)
            .unwrap_or(DEFAULT_EPOCHS),
        master_seed: overrides.seed.or(config.run.seed).unwrap_or(0),
        algorithms,
        sweep: config
            .sweep
            .iter()
            .map(|s| SweepCell {
                m: s.m,
                noise_std: s.noise_std,
            })
            .collect(),
        pixel: config.run.pixel.unwrap_or(DEFAULT_PIXEL),
    };
    Ok((run, resolved.warnings))
}

pub fn parse_algorithm(label: &str) -> Result<Algorithm, String> {
    match label {
        "bayes_fe" => Ok(Algorithm::BayesFe),
        "bayes_nfe" => Ok(Algorithm::BayesNfe),
        "baseline" => Ok(Algorithm::Baseline),
        other => Err(format!(
            "unknown algorithm `{other}` (expected bayes_fe, bayes_nfe, or baseline)"
        )),
    }
}
