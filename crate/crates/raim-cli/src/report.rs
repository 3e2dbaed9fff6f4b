//! Report files for a finished run: CSV tables plus a JSON manifest.
//!
//! Every file is written deterministically. Floats go through the default
//! formatter, which prints the shortest string that parses back to the same
//! value, so two runs that computed identical numbers produce identical
//! bytes. The manifest carries no timestamps for the same reason.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use raim::model::{PositionPrior, Scenario};
use raim::montecarlo::{ccdf, RunConfig, RunOutput};
use serde::Serialize;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Manifest {
    format_version: u32,
    master_seed: u64,
    epochs: u64,
    pixel: f64,
    algorithms: Vec<&'static str>,
    bias_mean_range: Option<[f64; 2]>,
    scenario: ManifestScenario,
    summary_file: String,
    cells: Vec<ManifestCell>,
}

#[derive(Serialize)]
struct ManifestScenario {
    tir: f64,
    theta_threshold: f64,
    p_fa: f64,
    prior: Option<ManifestPrior>,
    stations: Vec<ManifestStation>,
}

#[derive(Serialize)]
struct ManifestPrior {
    mean: f64,
    variance: f64,
}

#[derive(Serialize)]
struct ManifestStation {
    theta: f64,
    bias_mean: f64,
    bias_std: f64,
    noise_std: f64,
}

#[derive(Serialize)]
struct ManifestCell {
    m: usize,
    noise_std: f64,
    cell_seed: u64,
    /// Resolved per-station bias means, including any draws from
    /// `bias_mean_range`.
    bias_means: Vec<f64>,
    stanford_files: BTreeMap<&'static str, String>,
    ccdf_files: BTreeMap<&'static str, String>,
}

fn manifest_scenario(s: &Scenario) -> ManifestScenario {
    ManifestScenario {
        tir: s.tir,
        theta_threshold: s.theta_threshold,
        p_fa: s.p_fa,
        prior: match s.prior {
            PositionPrior::ImproperFlat => None,
            PositionPrior::Gaussian { mean, variance } => Some(ManifestPrior { mean, variance }),
        },
        stations: s
            .stations
            .iter()
            .map(|b| ManifestStation {
                theta: b.theta,
                bias_mean: b.bias_mean,
                bias_std: b.bias_std,
                noise_std: b.noise_std,
            })
            .collect(),
    }
}

/// `9` stays `9`, `0.5` becomes `0p5`: dots do not belong in file names.
fn noise_label(noise_std: f64) -> String {
    format!("{noise_std}").replace('.', "p").replace('-', "m")
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes summary.csv, the per-cell per-algorithm scatter and CCDF tables,
/// and manifest.json into `out_dir`. Returns the number of files written.
pub fn write_reports(
    out_dir: &Path,
    config: &RunConfig,
    output: &RunOutput,
) -> Result<usize, String> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let write = |name: &str, text: &str| -> Result<PathBuf, String> {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    };
    let mut files_written = 0usize;

    let mut summary = String::from(
        "m,noise_std,algorithm,epochs,evaluated,failures,simulated_ir,no_trust,no_trust_rate,\
         pl_p99,distinct_pl_values,distinct_exclusion_sets\n",
    );
    let mut cells = Vec::new();
    for cell in &output.cells {
        let mut stanford_files = BTreeMap::new();
        let mut ccdf_files = BTreeMap::new();
        for alg in &cell.algorithms {
            let label = alg.algorithm.label();
            writeln!(
                summary,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                cell.cell.m,
                cell.cell.noise_std,
                label,
                alg.epochs,
                alg.evaluated,
                alg.failures,
                opt(alg.simulated_ir),
                alg.no_trust,
                alg.no_trust_rate,
                opt(alg.pl_p99),
                alg.distinct_pl_values,
                alg.distinct_exclusion_sets,
            )
            .expect("writing to a string cannot fail");

            let suffix = format!(
                "{label}_m{}_sn{}",
                cell.cell.m,
                noise_label(cell.cell.noise_std)
            );
            let mut stanford = String::from("err_index,pl_index,err_lo,pl_lo,safe,failures\n");
            for (&(ei, pi), tally) in &alg.stanford.cells {
                writeln!(
                    stanford,
                    "{ei},{pi},{},{},{},{}",
                    ei as f64 * alg.stanford.pixel,
                    pi as f64 * alg.stanford.pixel,
                    tally.safe,
                    tally.failures,
                )
                .expect("writing to a string cannot fail");
            }
            let stanford_name = format!("stanford_{suffix}.csv");
            write(&stanford_name, &stanford)?;
            files_written += 1;
            stanford_files.insert(label, stanford_name);

            let mut ccdf_text = String::from("pl,fraction_above\n");
            for (value, fraction) in ccdf(&alg.pl_sorted) {
                writeln!(ccdf_text, "{value},{fraction}").expect("writing to a string cannot fail");
            }
            let ccdf_name = format!("ccdf_{suffix}.csv");
            write(&ccdf_name, &ccdf_text)?;
            files_written += 1;
            ccdf_files.insert(label, ccdf_name);
        }
        cells.push(ManifestCell {
            m: cell.cell.m,
            noise_std: cell.cell.noise_std,
            cell_seed: cell.cell_seed,
            bias_means: cell.scenario.stations.iter().map(|s| s.bias_mean).collect(),
            stanford_files,
            ccdf_files,
        });
    }
    write("summary.csv", &summary)?;
    files_written += 1;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        master_seed: config.master_seed,
        epochs: config.n_epochs,
        pixel: config.pixel,
        algorithms: config.algorithms.iter().map(|a| a.label()).collect(),
        bias_mean_range: config.bias_mean_range.map(|(lo, hi)| [lo, hi]),
        scenario: manifest_scenario(&config.scenario),
        summary_file: "summary.csv".into(),
        cells,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format!("cannot serialize manifest: {e}"))?;
    write("manifest.json", &format!("{json}\n"))?;
    files_written += 1;
    Ok(files_written)
}
