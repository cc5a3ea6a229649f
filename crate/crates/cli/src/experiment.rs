//! Batch comparison of the synthesized strategy against the geometric
//! heuristics.

use std::path::{Path, PathBuf};

use bidsynth::pareto::synthesize;
use bidsynth::{DiscretePrediction, RobustnessReq};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{gen_dataset, standard_datasets};
use crate::error::{write_file, CliError, CliResult};
use crate::heuristics::{adversarial_prediction, heuristic_strategy, AdversarialKind, HeuristicKind};
use crate::svg::{line_plot, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pareto,
    Zeta1,
    HalfR,
    Zeta2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Pareto, Algorithm::Zeta1, Algorithm::HalfR, Algorithm::Zeta2];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pareto => "pareto",
            Algorithm::Zeta1 => "zeta1",
            Algorithm::HalfR => "half-r",
            Algorithm::Zeta2 => "zeta2",
        }
    }

    fn heuristic(self) -> Option<HeuristicKind> {
        match self {
            Algorithm::Pareto => None,
            Algorithm::Zeta1 => Some(HeuristicKind::Zeta1),
            Algorithm::HalfR => Some(HeuristicKind::HalfR),
            Algorithm::Zeta2 => Some(HeuristicKind::Zeta2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialSweep {
    #[serde(flatten)]
    pub instance: AdversarialKind,
    pub r_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    /// Names of the standard datasets to run; all six when absent.
    #[serde(default)]
    pub datasets: Option<Vec<String>>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub adversarial: Vec<AdversarialSweep>,
    /// Overrides the global seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_svg")]
    pub svg: bool,
}

fn default_samples() -> usize {
    10
}
fn default_k() -> usize {
    4
}
fn default_r_values() -> Vec<f64> {
    (4..=12).map(f64::from).collect()
}
fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}
fn default_svg() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            samples: default_samples(),
            k: default_k(),
            r_values: default_r_values(),
            datasets: None,
            algorithms: default_algorithms(),
            adversarial: Vec::new(),
            seed: None,
            svg: default_svg(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub r: f64,
    pub algorithm: Algorithm,
    pub mean: f64,
    pub stddev: f64,
    pub values: Vec<f64>,
}

/// An instance where the synthesized strategy lost to a heuristic by more
/// than the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub dataset: String,
    pub sample: usize,
    pub r: f64,
    pub algorithm: Algorithm,
    pub pareto: f64,
    pub heuristic: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<AggregateRow>,
    pub violations: Vec<Violation>,
}

/// Consistency of every algorithm on one instance, in `algorithms` order.
pub fn evaluate_instance(mu: &DiscretePrediction, r: RobustnessReq, algorithms: &[Algorithm]) -> CliResult<Vec<f64>> {
    algorithms
        .iter()
        .map(|a| {
            Ok(match a.heuristic() {
                None => synthesize(mu, r)?.consistency,
                Some(kind) => heuristic_strategy(kind, mu, r)?.consistency,
            })
        })
        .collect()
}

struct Group {
    name: String,
    instances: Vec<DiscretePrediction>,
    r: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the grid on `threads` workers (all cores when `None`). Results do not
/// depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig, seed: u64, threads: Option<usize>, tol: f64) -> CliResult<ExperimentReport> {
    if config.algorithms.is_empty() {
        return Err(CliError::Usage("no algorithms selected".into()));
    }
    let seed = config.seed.unwrap_or(seed);
    let specs = standard_datasets(config.samples, config.k);
    if let Some(names) = &config.datasets {
        if let Some(bad) = names.iter().find(|n| !specs.iter().any(|s| &s.name == *n)) {
            return Err(CliError::Usage(format!("unknown dataset {bad}")));
        }
    }
    let mut groups = Vec::new();
    for (idx, spec) in specs.iter().enumerate() {
        if config.datasets.as_ref().is_some_and(|names| !names.contains(&spec.name)) {
            continue;
        }
        // One stream per standard dataset, so filtering leaves the data unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64);
        let data = gen_dataset(spec, &mut rng)?;
        for &r in &config.r_values {
            groups.push(Group { name: spec.name.clone(), instances: data.clone(), r });
        }
    }
    for sweep in &config.adversarial {
        for &r in &sweep.r_values {
            let req = RobustnessReq::new(r)?;
            let mu = adversarial_prediction(sweep.instance, req)?;
            groups.push(Group { name: sweep.instance.label(), instances: vec![mu], r });
        }
    }

    let tasks: Vec<(usize, usize)> =
        groups.iter().enumerate().flat_map(|(g, grp)| (0..grp.instances.len()).map(move |i| (g, i))).collect();
    let eval = || {
        tasks
            .par_iter()
            .map(|&(g, i)| {
                let grp = &groups[g];
                evaluate_instance(&grp.instances[i], RobustnessReq::new(grp.r)?, &config.algorithms)
            })
            .collect::<CliResult<Vec<Vec<f64>>>>()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(eval)?,
        None => eval()?,
    };

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut cursor = 0;
    for grp in &groups {
        let per_instance = &results[cursor..cursor + grp.instances.len()];
        cursor += grp.instances.len();
        for (a_idx, &alg) in config.algorithms.iter().enumerate() {
            let values: Vec<f64> = per_instance.iter().map(|v| v[a_idx]).collect();
            let (mean, stddev) = mean_std(&values);
            rows.push(AggregateRow { dataset: grp.name.clone(), r: grp.r, algorithm: alg, mean, stddev, values });
        }
        if let Some(p_idx) = config.algorithms.iter().position(|a| *a == Algorithm::Pareto) {
            for (sample, v) in per_instance.iter().enumerate() {
                for (a_idx, &alg) in config.algorithms.iter().enumerate() {
                    if alg != Algorithm::Pareto && v[p_idx] > v[a_idx] + tol {
                        violations.push(Violation {
                            dataset: grp.name.clone(),
                            sample,
                            r: grp.r,
                            algorithm: alg,
                            pareto: v[p_idx],
                            heuristic: v[a_idx],
                        });
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.dataset.cmp(&b.dataset).then(a.r.total_cmp(&b.r)).then(a.algorithm.cmp(&b.algorithm))
    });
    for v in &violations {
        log::warn!("{} sample {} r={}: pareto {} > {} {}", v.dataset, v.sample, v.r, v.pareto, v.algorithm.name(), v.heuristic);
    }
    Ok(ExperimentReport { rows, violations })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    dataset: &'a str,
    r: f64,
    algorithm: &'static str,
    mean: f64,
    stddev: f64,
    values: String,
}

pub fn rows_to_csv(rows: &[AggregateRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        let values: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        w.serialize(CsvRow {
            dataset: &row.dataset,
            r: row.r,
            algorithm: row.algorithm.name(),
            mean: row.mean,
            stddev: row.stddev,
            values: values.join(";"),
        })?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

/// One plot per dataset: mean consistency against `r` for each algorithm.
pub fn rows_to_svgs(rows: &[AggregateRow]) -> Vec<(String, String)> {
    let mut names: Vec<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let mut algs: Vec<Algorithm> = rows.iter().filter(|r| r.dataset == name).map(|r| r.algorithm).collect();
            algs.sort();
            algs.dedup();
            let series: Vec<Series> = algs
                .into_iter()
                .map(|alg| Series {
                    name: alg.name().to_string(),
                    points: rows
                        .iter()
                        .filter(|r| r.dataset == name && r.algorithm == alg)
                        .map(|r| (r.r, r.mean, r.stddev))
                        .collect(),
                })
                .collect();
            (name.to_string(), line_plot(name, "robustness r", "consistency", &series))
        })
        .collect()
}

/// Writes `experiment.csv` and, if enabled, one SVG per dataset. Returns the
/// written paths.
pub fn write_outputs(report: &ExperimentReport, config: &ExperimentConfig, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    let csv_path = out_dir.join("experiment.csv");
    write_file(&csv_path, &rows_to_csv(&report.rows)?)?;
    written.push(csv_path);
    if config.svg {
        for (name, svg) in rows_to_svgs(&report.rows) {
            let path = out_dir.join(format!("{name}.svg"));
            write_file(&path, svg.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
