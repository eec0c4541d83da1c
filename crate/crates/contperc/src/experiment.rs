//! Experiment plumbing: spec files (TOML or JSON), job execution, CSV
//! results, the JSON manifest, and tidy plot-data reshaping.
//!
//! Results CSV schema (frozen, see `docs/csv_schema.md`):
//! `job,model,lambda,params,event,scale,trials,hits,p_hat,ci_low,ci_high,seed,seconds`
//! in that order, one row per estimate. `seconds` is wall time and is the
//! only column that may differ between identical runs.

use crate::analysis::{
    bisect_critical_intensity, estimate_event_probability, estimate_lambda_ladder,
    longest_edge_tail_scan, theta_upper_bound, CriticalSearchResult, EstimateError,
    EstimateResult, PreparedModel, TailScanResult,
};
use crate::config::{ConfigError, EventSpec, ModelConfig, ModelKind};
use crate::events::EventError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Process exit codes, documented in the book and `--help`.
pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_REGION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("region error: {0}")]
    Region(String),
    #[error("run error: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Region(_) => EXIT_REGION,
            CliError::Run(_) => EXIT_RUN,
        }
    }
}

fn classify_config(e: ConfigError) -> CliError {
    match &e {
        ConfigError::Invalid { field, .. } if field == "event" => CliError::Region(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

fn classify_estimate(e: EstimateError) -> CliError {
    match e {
        EstimateError::Config(c) => classify_config(c),
        EstimateError::Event(ev) => match ev {
            EventError::RegionOutsideWindow { .. } | EventError::EndpointOutsideConfinement => {
                CliError::Region(ev.to_string())
            }
            _ => CliError::Validation(ev.to_string()),
        },
        EstimateError::InvalidParameter(m) => CliError::Validation(m),
        other => CliError::Run(other.to_string()),
    }
}

/// One estimation job: an event with a trial count, optionally repeated
/// along a thinning-coupled intensity ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub name: String,
    pub trials: u64,
    pub event: EventSpec,
    /// When set, the job runs once per intensity with one coupled point
    /// process per trial (non-decreasing hits for increasing events).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub config: ModelConfig,
    pub master_seed: u64,
    #[serde(default)]
    pub jobs: Vec<JobSpec>,
    /// Worker threads; flag and env var take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Parse a spec file; `.json` is read as JSON, anything else as TOML.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().map_or(false, |e| e == "json");
        if is_json {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
    }
}

/// One results row in the frozen CSV schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub job: String,
    pub model: String,
    pub lambda: f64,
    /// Connection or stick parameters as canonical JSON.
    pub params: String,
    /// Event as canonical JSON.
    pub event: String,
    /// Characteristic scale of the event region.
    pub scale: f64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub seconds: f64,
}

fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Rcm => "rcm",
        ModelKind::Ercm => "ercm",
        ModelKind::Iercm => "iercm",
        ModelKind::Sticks => "sticks",
    }
}

fn params_json(cfg: &ModelConfig) -> String {
    if cfg.model == ModelKind::Sticks {
        serde_json::to_string(&cfg.stick).expect("serializable")
    } else {
        let mut v = serde_json::to_value(&cfg.connection).expect("serializable");
        if let (Some(b), Some(obj)) = (cfg.weight_beta, v.as_object_mut()) {
            obj.insert("beta".into(), serde_json::json!(b));
        }
        v.to_string()
    }
}

fn event_scale(event: &EventSpec) -> f64 {
    match event {
        EventSpec::CompositeCrossing { s, .. } => *s,
        _ => {
            let b = event.outer_box();
            (b.hi.x - b.lo.x).max(b.hi.y - b.lo.y)
        }
    }
}

fn result_row(
    job: &str,
    cfg: &ModelConfig,
    event: &EventSpec,
    est: &EstimateResult,
) -> ResultRow {
    ResultRow {
        job: job.to_string(),
        model: model_name(cfg.model).to_string(),
        lambda: cfg.lambda,
        params: params_json(cfg),
        event: serde_json::to_string(event).expect("serializable"),
        scale: event_scale(event),
        trials: est.trials,
        hits: est.hits,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        seed: est.master_seed,
        seconds: est.wall_seconds,
    }
}

/// Everything a finished experiment wrote, for the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub model: String,
    pub lambda: f64,
    pub core_half: f64,
    pub padding: f64,
    pub truncation: Option<f64>,
    /// Hypothesis and parameter warnings; never silently dropped.
    pub warnings: Vec<String>,
    pub jobs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

/// Execute every job of a spec. All jobs are validated against the core
/// window before any trial runs, so a region error produces no partial
/// output.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let cfg = &spec.config;
    let prepared = PreparedModel::new(cfg).map_err(classify_estimate)?;
    for job in &spec.jobs {
        job.event.validate_against(cfg).map_err(classify_config)?;
        if job.trials == 0 {
            return Err(CliError::Validation(format!("job `{}` has zero trials", job.name)));
        }
        if let Some(lams) = &job.lambdas {
            if lams.is_empty() || lams.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(CliError::Validation(format!(
                    "job `{}` ladder must be non-empty and non-decreasing",
                    job.name
                )));
            }
        }
    }
    let mut rows = Vec::new();
    for job in &spec.jobs {
        match &job.lambdas {
            None => {
                let est = estimate_event_probability(cfg, &job.event, job.trials, spec.master_seed)
                    .map_err(classify_estimate)?;
                rows.push(result_row(&job.name, cfg, &job.event, &est));
            }
            Some(lams) => {
                let out =
                    estimate_lambda_ladder(cfg, lams, &job.event, job.trials, spec.master_seed)
                        .map_err(classify_estimate)?;
                for (lam, est) in lams.iter().zip(&out.estimates) {
                    let mut c = cfg.clone();
                    c.lambda = *lam;
                    rows.push(result_row(&job.name, &c, &job.event, est));
                }
            }
        }
    }
    let manifest = Manifest {
        master_seed: spec.master_seed,
        model: model_name(cfg.model).to_string(),
        lambda: cfg.lambda,
        core_half: cfg.core_half,
        padding: prepared.padding,
        truncation: prepared.truncation,
        warnings: prepared.warnings.clone(),
        jobs: spec.jobs.iter().map(|j| j.name.clone()).collect(),
        outputs: Vec::new(),
    };
    Ok(RunOutput { rows, manifest })
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Run(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Run(e.to_string()))
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).expect("serializable");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))
}

/// Tail scan rows in the same frozen schema (`scale` = s, threshold folded
/// into the event JSON; censored rows carry zero trials).
pub fn tailscan_rows(
    spec: &ExperimentSpec,
    scan: &TailScanResult,
    t: f64,
) -> Vec<ResultRow> {
    scan.rows
        .iter()
        .map(|row| {
            let event = EventSpec::LongestEdgeExceeds {
                region: crate::geometry::Box2::centered(t * row.s / 2.0),
                threshold: row.threshold,
            };
            let mut r = result_row("tailscan", &spec.config, &event, &row.estimate);
            r.scale = row.s;
            r
        })
        .collect()
}

pub fn run_tailscan(
    spec: &ExperimentSpec,
    t: f64,
    tau: f64,
    s_grid: &[f64],
    trials: u64,
) -> Result<(TailScanResult, Vec<ResultRow>), CliError> {
    let scan = longest_edge_tail_scan(&spec.config, t, tau, s_grid, trials, spec.master_seed)
        .map_err(classify_estimate)?;
    let rows = tailscan_rows(spec, &scan, t);
    Ok((scan, rows))
}

#[allow(clippy::too_many_arguments)]
pub fn run_bisect(
    spec: &ExperimentSpec,
    p_star: f64,
    bracket: (f64, f64),
    trials: u64,
    tolerance: f64,
    budget: u64,
) -> Result<(CriticalSearchResult, Vec<ResultRow>), CliError> {
    let job = spec
        .jobs
        .first()
        .ok_or_else(|| CliError::Validation("bisect needs one job with the target event".into()))?;
    let out = bisect_critical_intensity(
        &spec.config,
        &job.event,
        p_star,
        bracket,
        trials,
        tolerance,
        budget,
        spec.master_seed,
    )
    .map_err(classify_estimate)?;
    let rows = out
        .estimates
        .iter()
        .map(|(lam, est)| {
            let mut c = spec.config.clone();
            c.lambda = *lam;
            result_row(&job.name, &c, &job.event, est)
        })
        .collect();
    Ok((out, rows))
}

/// Per-length bound table emitted by the `bounds` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u32,
    pub per_n: f64,
    pub refined_per_n: f64,
    pub constant: f64,
    pub lambda: f64,
}

pub fn run_bounds(spec: &ExperimentSpec, n_max: u32) -> Result<Vec<BoundRow>, CliError> {
    let g = spec
        .config
        .g_spec()
        .map_err(classify_config)?
        .ok_or_else(|| CliError::Validation("bound series needs a point-pair model".into()))?;
    let b = theta_upper_bound(spec.config.lambda, n_max, &g)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((1..=n_max)
        .map(|n| BoundRow {
            n,
            per_n: b.per_n[(n - 1) as usize],
            refined_per_n: b.refined_per_n[(n - 1) as usize],
            constant: b.constant,
            lambda: b.lambda,
        })
        .collect())
}

pub fn write_bounds_csv(rows: &[BoundRow], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Run(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Run(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    CrossingVsLambda,
    TailVsS,
    BoundVsN,
}

/// Reshape a results (or bounds) CSV into a tidy x/y/ci series, sorted by x.
pub fn emit_plot_data(input: &Path, kind: PlotKind, output: &Path) -> Result<usize, CliError> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", input.display())))?;
    let mut series: Vec<(f64, f64, f64, f64)> = Vec::new();
    match kind {
        PlotKind::CrossingVsLambda | PlotKind::TailVsS => {
            for rec in reader.deserialize::<ResultRow>() {
                let row = rec.map_err(|e| {
                    CliError::Validation(format!("{} does not match the results schema: {e}", input.display()))
                })?;
                let x = if kind == PlotKind::CrossingVsLambda { row.lambda } else { row.scale };
                series.push((x, row.p_hat, row.ci_low, row.ci_high));
            }
        }
        PlotKind::BoundVsN => {
            for rec in reader.deserialize::<BoundRow>() {
                let row = rec.map_err(|e| {
                    CliError::Validation(format!("{} does not match the bounds schema: {e}", input.display()))
                })?;
                series.push((row.n as f64, row.per_n, row.refined_per_n, row.constant));
            }
        }
    }
    series.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut w = csv::Writer::from_path(output)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", output.display())))?;
    let header: [&str; 4] = match kind {
        PlotKind::CrossingVsLambda => ["lambda", "p_hat", "ci_low", "ci_high"],
        PlotKind::TailVsS => ["s", "p_hat", "ci_low", "ci_high"],
        PlotKind::BoundVsN => ["n", "bound", "refined_bound", "constant"],
    };
    w.write_record(header).map_err(|e| CliError::Run(e.to_string()))?;
    for (x, y, lo, hi) in &series {
        w.write_record([x.to_string(), y.to_string(), lo.to_string(), hi.to_string()])
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Run(e.to_string()))?;
    Ok(series.len())
}
