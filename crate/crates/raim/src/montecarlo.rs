//! Deterministic Monte-Carlo evaluation of the positioning algorithms.
//!
//! A run sweeps cells (station count and noise level combinations), plays
//! the same simulated epochs through every requested algorithm, and
//! aggregates integrity statistics: how often the true position escaped the
//! protection level, how often no trusted answer existed at all, the
//! protection-level distribution, and a pixelized error-versus-protection-
//! level scatter.
//!
//! Everything is reproducible down to the bit. Epoch seeds are derived from
//! the master seed, the cell parameters, and the epoch index through a fixed
//! integer mix, never from thread identity; epochs are processed in fixed
//! 1024-epoch batches whose partial results are folded in batch order. The
//! same configuration therefore produces identical output on any thread
//! count, which also makes every aggregate exactly auditable.

use crate::baseline::{BaselineError, BaselinePrecomp};
use crate::bayes::{run_message_passing, BayesError};
use crate::model::{sample_epoch_from, ModelError, Scenario};
use crate::numerics::NumericsError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("bad run configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// The algorithms the simulator can play an epoch through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Message passing with fault exclusion at the scenario's threshold.
    BayesFe,
    /// Message passing with exclusion disabled (threshold one).
    BayesNfe,
    /// Solution-separation monitor.
    Baseline,
}

impl Algorithm {
    /// Stable identifier used in file names and report columns.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::BayesFe => "bayes_fe",
            Algorithm::BayesNfe => "bayes_nfe",
            Algorithm::Baseline => "baseline",
        }
    }
}

/// One sweep point: a station count and a shared noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub m: usize,
    pub noise_std: f64,
}

/// Full simulation request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Station and integrity parameters. With a non-empty sweep this is a
    /// homogeneous template whose first station is replicated per cell.
    pub scenario: Scenario,
    /// When set, each cell draws every station's bias mean uniformly from
    /// this closed range, seeded by the cell, and holds the draws fixed for
    /// all of the cell's epochs, in the generator and in the algorithms
    /// alike. When absent the scenario's own bias means hold.
    pub bias_mean_range: Option<(f64, f64)>,
    pub n_epochs: u64,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Cells to simulate; empty means one cell, the scenario as configured.
    pub sweep: Vec<SweepCell>,
    /// Pixel edge length for the error-versus-protection-level diagram.
    pub pixel: f64,
}

/// Tally of scatter points falling in one pixel, split by whether the true
/// error exceeded the protection level. The split keeps the diagram exactly
/// reconcilable with the failure counter even for pixels the diagonal cuts
/// through.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PixelTally {
    pub safe: u64,
    pub failures: u64,
}

/// Pixelized scatter of absolute estimate error against protection level.
#[derive(Debug, Clone, PartialEq)]
pub struct StanfordDiagram {
    pub pixel: f64,
    /// Keyed by `(floor(|error| / pixel), floor(pl / pixel))`.
    pub cells: BTreeMap<(u64, u64), PixelTally>,
}

impl StanfordDiagram {
    fn new(pixel: f64) -> Self {
        Self {
            pixel,
            cells: BTreeMap::new(),
        }
    }

    fn record(&mut self, abs_error: f64, pl: f64) {
        let key = (
            (abs_error / self.pixel).floor() as u64,
            (pl / self.pixel).floor() as u64,
        );
        let tally = self.cells.entry(key).or_default();
        if abs_error > pl {
            tally.failures += 1;
        } else {
            tally.safe += 1;
        }
    }

    pub fn total_points(&self) -> u64 {
        self.cells.values().map(|t| t.safe + t.failures).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.cells.values().map(|t| t.failures).sum()
    }
}

/// Per-algorithm aggregate over one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Epochs played.
    pub epochs: u64,
    /// Epochs that produced an estimate with a protection level.
    pub evaluated: u64,
    /// Evaluated epochs whose true error exceeded the protection level.
    pub failures: u64,
    /// Epochs with no trusted answer: exclusion removed every station, the
    /// measurements were irreconcilable, or the monitor kept alarming.
    pub no_trust: u64,
    /// `failures / evaluated`.
    pub simulated_ir: Option<f64>,
    /// `no_trust / epochs`.
    pub no_trust_rate: f64,
    pub stanford: StanfordDiagram,
    /// Protection levels of evaluated epochs, ascending.
    pub pl_sorted: Vec<f64>,
    /// 99th percentile protection level, nearest-rank.
    pub pl_p99: Option<f64>,
    /// Bitwise-distinct protection-level values seen.
    pub distinct_pl_values: usize,
    /// Distinct exclusion outcomes seen (the empty set counts).
    pub distinct_exclusion_sets: usize,
}

/// Everything measured for one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: SweepCell,
    /// The exact scenario the cell ran, drawn bias means included.
    pub scenario: Scenario,
    pub cell_seed: u64,
    pub algorithms: Vec<AlgorithmSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub cells: Vec<CellSummary>,
}

const GOLDEN_GAMMA: u64 = 0x9e3779b97f4a7c15;

/// The 64-bit finalizer of the SplitMix64 generator, used as a stateless
/// mixing function for seed derivation.
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for one cell, derived from the master seed and the cell parameters.
pub fn cell_seed(master_seed: u64, m: usize, noise_std: f64) -> u64 {
    let mixed_m = splitmix_finalize(master_seed ^ GOLDEN_GAMMA.wrapping_mul(m as u64 + 1));
    splitmix_finalize(mixed_m ^ noise_std.to_bits())
}

/// Seed for one epoch within a cell.
pub fn epoch_seed(cell_seed: u64, index: u64) -> u64 {
    splitmix_finalize(cell_seed ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)))
}

/// Expands the sweep into concrete cells; an empty sweep yields the scenario
/// itself as one cell labeled by its own station count and first noise level.
fn effective_cells(config: &RunConfig) -> Vec<SweepCell> {
    if config.sweep.is_empty() {
        vec![SweepCell {
            m: config.scenario.stations.len(),
            noise_std: config.scenario.stations[0].noise_std,
        }]
    } else {
        config.sweep.clone()
    }
}

/// Builds the scenario a cell runs: for a sweep cell, the first station of
/// the template replicated `m` times at the cell's noise level. A bias-mean
/// range resolves here to one draw per station from the cell's seed, held
/// fixed across the cell's epochs.
pub fn materialize_cell(config: &RunConfig, cell: &SweepCell) -> Scenario {
    let mut scenario = if config.sweep.is_empty() {
        config.scenario.clone()
    } else {
        let mut station = config.scenario.stations[0];
        station.noise_std = cell.noise_std;
        Scenario {
            stations: vec![station; cell.m],
            ..config.scenario.clone()
        }
    };
    if let Some((lo, hi)) = config.bias_mean_range {
        let seed = cell_seed(config.master_seed, cell.m, cell.noise_std);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut scenario.stations {
            s.bias_mean = rng.random_range(lo..=hi);
        }
    }
    scenario
}

fn validate_config(config: &RunConfig) -> Result<(), McError> {
    config.scenario.validate()?;
    if config.n_epochs == 0 {
        return Err(McError::BadConfig("n_epochs must be positive".into()));
    }
    if !(config.pixel > 0.0 && config.pixel.is_finite()) {
        return Err(McError::BadConfig(format!(
            "pixel size {} must be positive",
            config.pixel
        )));
    }
    if config.algorithms.is_empty() {
        return Err(McError::BadConfig("no algorithms requested".into()));
    }
    for (i, a) in config.algorithms.iter().enumerate() {
        if config.algorithms[..i].contains(a) {
            return Err(McError::BadConfig(format!(
                "algorithm {} requested twice",
                a.label()
            )));
        }
    }
    if let Some((lo, hi)) = config.bias_mean_range {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(McError::BadConfig(format!(
                "bias mean range [{lo}, {hi}] is not a finite, ordered interval"
            )));
        }
    }
    if !config.sweep.is_empty() {
        let template = config.scenario.stations[0];
        if config.scenario.stations.iter().any(|s| *s != template) {
            return Err(McError::BadConfig(
                "sweeping requires a homogeneous station template".into(),
            ));
        }
        for cell in &config.sweep {
            if cell.m == 0 {
                return Err(McError::BadConfig("sweep cell with zero stations".into()));
            }
            if !(cell.noise_std > 0.0 && cell.noise_std.is_finite()) {
                return Err(McError::BadConfig(format!(
                    "sweep cell noise level {} must be positive",
                    cell.noise_std
                )));
            }
        }
    }
    Ok(())
}

/// One evaluated epoch's contribution to an algorithm's aggregate.
#[derive(Debug, Clone)]
struct EpochRecord {
    pl: f64,
    abs_error: f64,
    excluded: Vec<usize>,
}

#[derive(Debug, Default)]
struct AlgorithmBatch {
    records: Vec<EpochRecord>,
    no_trust: u64,
}

/// Data-driven dead ends that mark an epoch untrusted rather than aborting
/// the run: every station excluded, or the measurements so far apart that
/// every hypothesis underflows.
fn is_degenerate_data(e: &BayesError) -> bool {
    matches!(
        e,
        BayesError::AllExcluded
            | BayesError::BothLambdaMassesZero { .. }
            | BayesError::Numerics(NumericsError::NoMass { .. })
    )
}

const BATCH_EPOCHS: u64 = 1024;

/// Runs the full simulation described by `config`.
pub fn run(config: &RunConfig) -> Result<RunOutput, McError> {
    validate_config(config)?;
    let mut cells = Vec::new();
    for cell in effective_cells(config) {
        cells.push(run_cell(config, cell)?);
    }
    Ok(RunOutput { cells })
}

fn run_cell(config: &RunConfig, cell: SweepCell) -> Result<CellSummary, McError> {
    let scenario = materialize_cell(config, &cell);
    scenario.validate()?;
    let seed = cell_seed(config.master_seed, cell.m, cell.noise_std);
    let want = |a: Algorithm| config.algorithms.contains(&a);
    let precomp = if want(Algorithm::Baseline) {
        Some(BaselinePrecomp::new(&scenario)?)
    } else {
        None
    };

    let n = config.n_epochs;
    let n_batches = n.div_ceil(BATCH_EPOCHS);
    let batch_results: Vec<Result<Vec<AlgorithmBatch>, McError>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let first = batch * BATCH_EPOCHS;
            let last = (first + BATCH_EPOCHS).min(n);
            run_batch(config, &scenario, seed, precomp.as_ref(), first..last)
        })
        .collect();

    let mut merged: Vec<AlgorithmBatch> = config
        .algorithms
        .iter()
        .map(|_| AlgorithmBatch::default())
        .collect();
    for result in batch_results {
        for (acc, batch) in merged.iter_mut().zip(result?) {
            acc.records.extend(batch.records);
            acc.no_trust += batch.no_trust;
        }
    }

    let algorithms = config
        .algorithms
        .iter()
        .zip(merged)
        .map(|(&algorithm, batch)| summarize(algorithm, n, config.pixel, batch))
        .collect();
    Ok(CellSummary {
        cell,
        scenario,
        cell_seed: seed,
        algorithms,
    })
}

fn run_batch(
    config: &RunConfig,
    scenario: &Scenario,
    cell_seed: u64,
    precomp: Option<&BaselinePrecomp>,
    epochs: std::ops::Range<u64>,
) -> Result<Vec<AlgorithmBatch>, McError> {
    let mut out: Vec<AlgorithmBatch> = config
        .algorithms
        .iter()
        .map(|_| AlgorithmBatch::default())
        .collect();
    let slot = |a: Algorithm| config.algorithms.iter().position(|&x| x == a);
    let fe_slot = slot(Algorithm::BayesFe);
    let nfe_slot = slot(Algorithm::BayesNfe);
    let baseline_slot = slot(Algorithm::Baseline);

    for index in epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(cell_seed, index));
        let epoch = sample_epoch_from(scenario, &mut rng);

        if fe_slot.is_some() || nfe_slot.is_some() {
            match run_message_passing(scenario, &epoch.measurements) {
                Ok(mp) => {
                    let fe = if fe_slot.is_some() {
                        Some(mp.resolve(scenario.tir, scenario.theta_threshold))
                    } else {
                        None
                    };
                    if let Some(i) = nfe_slot {
                        // With nothing excluded the two resolutions are the
                        // same computation, so the exclusion result is
                        // reused verbatim.
                        let nfe = match &fe {
                            Some(Ok(r)) if r.excluded.is_empty() => Ok(r.clone()),
                            _ => mp.resolve(scenario.tir, 1.0),
                        };
                        record_bayes(&mut out[i], nfe, epoch.true_x)?;
                    }
                    if let Some(i) = fe_slot {
                        record_bayes(&mut out[i], fe.unwrap(), epoch.true_x)?;
                    }
                }
                Err(e) if is_degenerate_data(&e) => {
                    if let Some(i) = fe_slot {
                        out[i].no_trust += 1;
                    }
                    if let Some(i) = nfe_slot {
                        out[i].no_trust += 1;
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }

        if let Some(i) = baseline_slot {
            let r = precomp
                .expect("baseline requested but not precomputed")
                .run(&epoch.measurements)?;
            if r.trusted {
                out[i].records.push(EpochRecord {
                    pl: r.pl.expect("trusted result always carries a level"),
                    abs_error: (epoch.true_x - r.estimate).abs(),
                    excluded: r.excluded,
                });
            } else {
                out[i].no_trust += 1;
            }
        }
    }
    Ok(out)
}

fn record_bayes(
    out: &mut AlgorithmBatch,
    result: Result<crate::bayes::BayesResult, BayesError>,
    true_x: f64,
) -> Result<(), McError> {
    match result {
        Ok(r) => {
            out.records.push(EpochRecord {
                pl: r.pl,
                abs_error: (true_x - r.estimate).abs(),
                excluded: r.excluded,
            });
            Ok(())
        }
        Err(e) if is_degenerate_data(&e) => {
            out.no_trust += 1;
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn summarize(
    algorithm: Algorithm,
    epochs: u64,
    pixel: f64,
    batch: AlgorithmBatch,
) -> AlgorithmSummary {
    let evaluated = batch.records.len() as u64;
    let mut failures = 0u64;
    let mut stanford = StanfordDiagram::new(pixel);
    let mut exclusion_sets = BTreeSet::new();
    let mut pl_sorted = Vec::with_capacity(batch.records.len());
    for r in &batch.records {
        if r.abs_error > r.pl {
            failures += 1;
        }
        stanford.record(r.abs_error, r.pl);
        exclusion_sets.insert(r.excluded.clone());
        pl_sorted.push(r.pl);
    }
    pl_sorted.sort_by(f64::total_cmp);
    let distinct_pl_values = pl_sorted
        .iter()
        .enumerate()
        .filter(|&(i, v)| i == 0 || pl_sorted[i - 1].to_bits() != v.to_bits())
        .count();
    AlgorithmSummary {
        algorithm,
        epochs,
        evaluated,
        failures,
        no_trust: batch.no_trust,
        simulated_ir: (evaluated > 0).then(|| failures as f64 / evaluated as f64),
        no_trust_rate: batch.no_trust as f64 / epochs as f64,
        stanford,
        pl_p99: percentile_nearest_rank(&pl_sorted, 0.99),
        distinct_pl_values,
        distinct_exclusion_sets: exclusion_sets.len(),
        pl_sorted,
    }
}

/// Nearest-rank percentile of an ascending sample: the smallest element whose
/// rank is at least `q * n`. `None` on an empty sample.
pub fn percentile_nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    assert!((0.0..=1.0).contains(&q), "quantile {q} outside [0, 1]");
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Complementary CDF sampled at each distinct value: pairs of
/// `(value, fraction of the sample strictly above it)`, ascending.
pub fn ccdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j].to_bits() == v.to_bits() {
            j += 1;
        }
        points.push((v, (sorted.len() - j) as f64 / n));
        i = j;
    }
    points
}

/// Mean seconds per epoch of one full sweep (message passing plus both
/// resolutions) for each station count, under a homogeneous reference
/// scenario. Input to [`geometric_growth_base`].
pub fn measure_bayes_scaling(
    station_counts: &[usize],
    reps: u32,
    seed: u64,
) -> Result<Vec<(usize, f64)>, McError> {
    use crate::model::{BsParams, PositionPrior};
    let mut points = Vec::with_capacity(station_counts.len());
    for &m in station_counts {
        let scenario = Scenario {
            stations: vec![
                BsParams {
                    theta: 0.05,
                    bias_mean: 10.0,
                    bias_std: 50.0,
                    noise_std: 1.0,
                };
                m
            ],
            tir: 1e-2,
            theta_threshold: 0.5,
            p_fa: 0.05,
            prior: PositionPrior::ImproperFlat,
        };
        let cell = cell_seed(seed, m, 1.0);
        let epochs: Vec<_> = (0..reps as u64)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(cell, i));
                sample_epoch_from(&scenario, &mut rng)
            })
            .collect();
        let start = Instant::now();
        for epoch in &epochs {
            let mp = run_message_passing(&scenario, &epoch.measurements)?;
            match mp.resolve(scenario.tir, scenario.theta_threshold) {
                Ok(_) => {}
                Err(e) if is_degenerate_data(&e) => {}
                Err(e) => return Err(e.into()),
            }
            mp.resolve(scenario.tir, 1.0)?;
        }
        points.push((m, start.elapsed().as_secs_f64() / reps as f64));
    }
    Ok(points)
}

/// Least-squares base of a geometric growth law `t = c * base^m` through
/// timing points `(m, t)`: the slope of `ln t` against `m`, exponentiated.
pub fn geometric_growth_base(points: &[(usize, f64)]) -> f64 {
    assert!(points.len() >= 2, "need at least two points to fit growth");
    let n = points.len() as f64;
    let mean_m = points.iter().map(|&(m, _)| m as f64).sum::<f64>() / n;
    let mean_ln = points.iter().map(|&(_, t)| t.ln()).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(m, t) in points {
        let dm = m as f64 - mean_m;
        cov += dm * (t.ln() - mean_ln);
        var += dm * dm;
    }
    assert!(var > 0.0, "station counts must not all coincide");
    (cov / var).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BsParams, PositionPrior};
    use approx::assert_relative_eq;

    fn small_config() -> RunConfig {
        RunConfig {
            scenario: Scenario {
                stations: vec![
                    BsParams {
                        theta: 0.05,
                        bias_mean: 10.0,
                        bias_std: 50.0,
                        noise_std: 1.0,
                    };
                    4
                ],
                tir: 1e-2,
                theta_threshold: 0.5,
                p_fa: 0.05,
                prior: PositionPrior::ImproperFlat,
            },
            bias_mean_range: Some((-50.0, 50.0)),
            n_epochs: 3000,
            master_seed: 7,
            algorithms: vec![Algorithm::BayesFe, Algorithm::BayesNfe, Algorithm::Baseline],
            sweep: Vec::new(),
            pixel: 0.01,
        }
    }

    #[test]
    fn identical_output_on_any_thread_count() {
        let config = small_config();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run(&config).unwrap());
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run(&config).unwrap());
        assert_eq!(single, quad);
        let again = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run(&config).unwrap());
        assert_eq!(quad, again);
    }

    #[test]
    fn counters_and_diagram_reconcile() {
        let out = run(&small_config()).unwrap();
        assert_eq!(out.cells.len(), 1);
        let cell = &out.cells[0];
        assert_eq!(cell.cell.m, 4);
        for s in &cell.algorithms {
            assert_eq!(s.epochs, 3000);
            assert_eq!(s.evaluated + s.no_trust, s.epochs);
            assert_eq!(s.stanford.total_points(), s.evaluated);
            assert_eq!(s.stanford.total_failures(), s.failures);
            assert_eq!(s.pl_sorted.len() as u64, s.evaluated);
            assert!(s.pl_sorted.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.distinct_pl_values <= s.pl_sorted.len());
            assert!(s.distinct_exclusion_sets >= 1);
            if let Some(ir) = s.simulated_ir {
                assert_eq!(ir, s.failures as f64 / s.evaluated as f64);
            }
        }
        // Each trusted survivor set has one cached level, so the monitor can
        // never show more distinct levels than exclusion outcomes.
        let baseline = cell
            .algorithms
            .iter()
            .find(|s| s.algorithm == Algorithm::Baseline)
            .unwrap();
        assert!(baseline.distinct_pl_values <= baseline.distinct_exclusion_sets);
    }

    #[test]
    fn sweep_materializes_cells() {
        let mut config = small_config();
        config.n_epochs = 200;
        config.sweep = vec![
            SweepCell {
                m: 3,
                noise_std: 1.0,
            },
            SweepCell {
                m: 5,
                noise_std: 9.0,
            },
        ];
        let out = run(&config).unwrap();
        assert_eq!(out.cells.len(), 2);
        assert_eq!(out.cells[0].scenario.stations.len(), 3);
        assert_eq!(out.cells[1].scenario.stations.len(), 5);
        assert_eq!(out.cells[1].scenario.stations[0].noise_std, 9.0);
        assert_ne!(out.cells[0].cell_seed, out.cells[1].cell_seed);
    }

    #[test]
    fn heterogeneous_template_cannot_sweep() {
        let mut config = small_config();
        config.scenario.stations[2].noise_std = 2.0;
        config.sweep = vec![SweepCell {
            m: 4,
            noise_std: 1.0,
        }];
        assert!(matches!(run(&config), Err(McError::BadConfig(_))));
        config.sweep.clear();
        // Without a sweep the heterogeneous scenario is fine as-is.
        config.n_epochs = 64;
        assert!(run(&config).is_ok());
    }

    #[test]
    fn duplicate_algorithms_are_rejected() {
        let mut config = small_config();
        config.algorithms = vec![Algorithm::Baseline, Algorithm::Baseline];
        assert!(matches!(run(&config), Err(McError::BadConfig(_))));
    }

    #[test]
    fn percentile_and_ccdf_examples() {
        let sample: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile_nearest_rank(&sample, 0.99), Some(99.0));
        assert_eq!(percentile_nearest_rank(&sample, 1.0), Some(100.0));
        assert_eq!(percentile_nearest_rank(&sample, 0.0), Some(1.0));
        assert_eq!(percentile_nearest_rank(&[], 0.5), None);

        let sorted = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(ccdf(&sorted), vec![(1.0, 0.75), (2.0, 0.25), (3.0, 0.0)]);
    }

    #[test]
    fn growth_base_recovers_synthetic_laws() {
        let doubling: Vec<(usize, f64)> =
            (5..=10).map(|m| (m, 3.5 * 2.0f64.powi(m as i32))).collect();
        assert_relative_eq!(geometric_growth_base(&doubling), 2.0, max_relative = 1e-12);
        let tripling: Vec<(usize, f64)> =
            (5..=10).map(|m| (m, 0.2 * 3.0f64.powi(m as i32))).collect();
        assert_relative_eq!(geometric_growth_base(&tripling), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn scaling_measurement_returns_positive_times() {
        let points = measure_bayes_scaling(&[3, 4], 3, 11).unwrap();
        assert_eq!(points.len(), 2);
        assert!(points.iter().all(|&(_, t)| t > 0.0));
    }

    #[test]
    fn seed_derivation_disperses() {
        let a = cell_seed(0, 5, 1.0);
        let b = cell_seed(0, 6, 1.0);
        let c = cell_seed(0, 5, 9.0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        let s0 = epoch_seed(a, 0);
        let s1 = epoch_seed(a, 1);
        assert_ne!(s0, s1);
    }
}
