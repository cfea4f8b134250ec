//! Replicated experiment execution and aggregation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use scout_core::diagnostics::{report, DiagnosticsReport, ReportOptions};
use scout_core::samplers::{run, CholeskySnapshot, RunResult, SamplerKind};

use crate::config::{ExperimentConfig, SharedTarget};
use crate::export::{self, PlotRow};
use crate::HarnessError;

/// One (sampler row, seed) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub row: usize,
    pub seed: u64,
}

/// What a job produced.
#[derive(Debug)]
pub struct JobOutcome {
    pub job: Job,
    pub label: String,
    pub sampler: SamplerKind,
    pub report: Result<DiagnosticsReport, String>,
    /// Files written, relative to the experiment directory.
    pub files: Vec<PathBuf>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replicate.
    pub sd: f64,
    pub median: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self { mean, sd, median, n })
    }
}

/// Replicate summary of one sampler row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub sampler: SamplerKind,
    pub completed: usize,
    pub failed: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
}

/// Named scalar metrics of a report, in table order.
pub fn report_metrics(r: &DiagnosticsReport) -> Vec<(&'static str, f64)> {
    let mut m = vec![("acceptance_rate", r.acceptance_rate), ("esjd", r.esjd)];
    if r.mean_error.is_finite() {
        m.push(("mean_error", r.mean_error));
    }
    if let Some(v) = r.second_moment_error {
        m.push(("second_moment_error", v));
    }
    if let Some(v) = r.phase2_acceptance_rate {
        m.push(("phase2_acceptance_rate", v));
    }
    if let Some(v) = r.left_fraction {
        m.push(("left_fraction", v));
    }
    if let Some(v) = &r.mode_visits {
        m.push(("modes_visited", v.values().filter(|c| **c > 0).count() as f64));
    }
    m
}

pub fn aggregate(config: &ExperimentConfig, outcomes: &[JobOutcome]) -> Vec<AggregateRow> {
    let labels = config.labels();
    labels
        .iter()
        .enumerate()
        .map(|(row, label)| {
            let mine: Vec<&JobOutcome> = outcomes.iter().filter(|o| o.job.row == row).collect();
            let reports: Vec<&DiagnosticsReport> = mine.iter().filter_map(|o| o.report.as_ref().ok()).collect();
            let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in &reports {
                for (k, v) in report_metrics(r) {
                    values.entry(k.to_string()).or_default().push(v);
                }
            }
            AggregateRow {
                label: label.clone(),
                sampler: config.samplers[row].id,
                completed: reports.len(),
                failed: mine.len() - reports.len(),
                metrics: values
                    .into_iter()
                    .filter_map(|(k, v)| MetricSummary::from_values(&v).map(|s| (k, s)))
                    .collect(),
            }
        })
        .collect()
}

fn replicate_dir(label: &str, seed: u64) -> PathBuf {
    Path::new(label).join(format!("seed_{seed}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Writes the per-replicate files and returns their relative paths.
fn write_replicate(
    config: &ExperimentConfig,
    root: &Path,
    dir: &Path,
    result: &RunResult,
    rep: &DiagnosticsReport,
) -> Result<Vec<PathBuf>, HarnessError> {
    let abs = root.join(dir);
    std::fs::create_dir_all(&abs).map_err(|e| HarnessError::io(&abs, e))?;
    let stride = config.export.sample_stride;
    let mut files = Vec::new();
    let mut add = |name: String| {
        files.push(dir.join(&name));
        abs.join(name)
    };
    export::write_samples_csv(&add("samples.csv".into()), result, stride)?;
    write_json(&add("report.json".into()), rep)?;
    for &(a, b) in &config.export.projections {
        export::emit_projection_csv(&add(format!("projection_{a}_{b}.csv")), result, (a, b), config.burn_in, stride)?;
    }
    if config.export.trace {
        export::emit_trace_csv(&add("trace.csv".into()), result, config.burn_in, stride)?;
    }
    if !result.snapshots.is_empty() {
        export::write_cholesky_csv(&add("cholesky.csv".into()), result.dim, &result.snapshots)?;
    }
    if let Some(factor) = &result.final_state.factor {
        let last = CholeskySnapshot {
            iteration: result.len(),
            factor: factor.clone(),
        };
        export::write_cholesky_csv(&add("final_factor.csv".into()), result.dim, &[last])?;
    }
    Ok(files)
}

/// Runs every (row, seed) job on a pool of scoped threads.
///
/// With `out` set, each job writes its own files under
/// `out/<label>/seed_<seed>/` before its samples are dropped.
pub fn execute(
    config: &ExperimentConfig,
    target: &SharedTarget,
    out: Option<&Path>,
) -> Result<Vec<JobOutcome>, HarnessError> {
    let labels = config.labels();
    let dim = target.dim();
    let jobs: Vec<Job> = (0..config.samplers.len())
        .flat_map(|row| config.seeds().into_iter().map(move |seed| Job { row, seed }))
        .collect();
    let options = ReportOptions {
        burn_in: config.burn_in,
        mode_radius: config.diagnostics.mode_radius,
        left_fraction: config.diagnostics.left_fraction,
    };
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(jobs.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<JobOutcome, HarnessError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&job) = jobs.get(i) else { break };
                let outcome = run_job(config, target, dim, &labels, job, &options, out);
                results.lock().expect("no worker panicked")[i] = Some(outcome);
            });
        }
    });

    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn run_job(
    config: &ExperimentConfig,
    target: &SharedTarget,
    dim: usize,
    labels: &[String],
    job: Job,
    options: &ReportOptions,
    out: Option<&Path>,
) -> Result<JobOutcome, HarnessError> {
    let label = labels[job.row].clone();
    let sampler = config.samplers[job.row].id;
    let sc = config.sampler_config(job.row, dim, job.seed);
    let start = Instant::now();
    let outcome = run(target.as_ref(), &sc).and_then(|r| report(&r, target.as_ref(), options).map(|rep| (r, rep)));
    let elapsed_seconds = start.elapsed().as_secs_f64();
    let (report, files) = match outcome {
        Ok((result, rep)) => {
            let files = match out {
                Some(root) => write_replicate(config, root, &replicate_dir(&label, job.seed), &result, &rep)?,
                None => Vec::new(),
            };
            (Ok(rep), files)
        }
        Err(e) => (Err(e.to_string()), Vec::new()),
    };
    Ok(JobOutcome {
        job,
        label,
        sampler,
        report,
        files,
        elapsed_seconds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_seconds: f64,
}

/// Index of everything an experiment wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    /// Set when at least one replicate stopped on a numerical error.
    pub partial: bool,
    pub runs: Vec<RunRecord>,
    /// Paths relative to the experiment directory.
    pub files: Vec<PathBuf>,
}

/// Per-replicate reports, their aggregate and the file manifest.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub directory: PathBuf,
    pub outcomes: Vec<JobOutcome>,
    pub aggregate: Vec<AggregateRow>,
    pub manifest: Manifest,
}

fn summary_csv(rows: &[AggregateRow]) -> String {
    let mut s = String::from("label,sampler,metric,mean,sd,median,n\n");
    for r in rows {
        for (k, m) in &r.metrics {
            s.push_str(&format!("{},{},{k},{},{},{},{}\n", r.label, r.sampler, m.mean, m.sd, m.median, m.n));
        }
    }
    s
}

/// Validates, runs and writes a whole experiment under `config.output_dir`.
///
/// Numerical failures do not abort the other replicates; the manifest is
/// then flagged partial.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let target = config.validate()?;
    let root = config.output_dir.clone();
    std::fs::create_dir_all(&root).map_err(|e| HarnessError::io(&root, e))?;
    let outcomes = execute(config, &target, Some(&root))?;
    let aggregate = aggregate(config, &outcomes);

    let mut files = vec![PathBuf::from("config.json"), PathBuf::from("summary.json"), PathBuf::from("summary.csv")];
    std::fs::write(root.join("config.json"), config.to_json() + "\n").map_err(|e| HarnessError::io(&root, e))?;
    write_json(&root.join("summary.json"), &aggregate)?;
    std::fs::write(root.join("summary.csv"), summary_csv(&aggregate)).map_err(|e| HarnessError::io(&root, e))?;
    if config.export.plot_script {
        let dim = target.dim();
        let labels = config.labels();
        let rows: Vec<PlotRow<'_>> = labels
            .iter()
            .map(|l| PlotRow {
                label: l,
                dir: replicate_dir(l, config.seed).display().to_string(),
                dim,
            })
            .collect();
        let script = export::plot_script(&config.name, &rows, &config.export.projections, config.export.trace);
        std::fs::write(root.join("plot.gp"), script).map_err(|e| HarnessError::io(&root, e))?;
        files.push(PathBuf::from("plot.gp"));
    }
    for o in &outcomes {
        files.extend(o.files.iter().cloned());
    }
    files.push(PathBuf::from("manifest.json"));
    let runs: Vec<RunRecord> = outcomes
        .iter()
        .map(|o| RunRecord {
            label: o.label.clone(),
            sampler: o.sampler,
            seed: o.job.seed,
            ok: o.report.is_ok(),
            error: o.report.as_ref().err().cloned(),
            elapsed_seconds: o.elapsed_seconds,
        })
        .collect();
    let manifest = Manifest {
        name: config.name.clone(),
        partial: runs.iter().any(|r| !r.ok),
        runs,
        files,
    };
    write_json(&root.join("manifest.json"), &manifest)?;
    Ok(ExperimentOutput {
        directory: root,
        outcomes,
        aggregate,
        manifest,
    })
}
