//! Experiment runner for the continuum percolation library.
//!
//! Exit codes: 0 success, 1 run error, 2 parse error, 3 validation error,
//! 4 event-region error.

use clap::{Parser, Subcommand};
use contperc::experiment::{
    emit_plot_data, run_bisect, run_bounds, run_experiment, run_tailscan, write_bounds_csv,
    write_manifest, write_results_csv, CliError, ExperimentSpec, PlotKind,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "contperc",
    about = "Continuum percolation experiments: crossings, circuits, arms, \
             edge tails, bound series",
    version
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CONTPERC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Experiment spec file (TOML, or JSON with a .json extension).
    #[arg(long)]
    spec: PathBuf,
    /// Override the configured intensity.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override every job's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: spec's out_dir, else current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every estimation job of a spec; writes results.csv and
    /// manifest.json.
    Run(SpecArgs),
    /// Bisect for the intensity where the spec's first job's event has
    /// probability p-star; writes bisect.csv and bisect.json.
    Bisect {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0.5)]
        p_star: f64,
        #[arg(long)]
        bracket_low: f64,
        #[arg(long)]
        bracket_high: f64,
        /// Bracket width at which the search stops.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Total trial budget across all estimates.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Longest-edge tail scan over a grid of scales; writes tailscan.csv and
    /// tailscan.json.
    Tailscan {
        #[command(flatten)]
        spec: SpecArgs,
        /// Box side factor: the observation box has side t*s.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Threshold exponent: edges longer than s^tau count.
        #[arg(long)]
        tau: f64,
        /// Comma-separated scales.
        #[arg(long, value_delimiter = ',', required = true)]
        s_grid: Vec<f64>,
    },
    /// Path-counting bound series for the configured model; writes
    /// bounds.csv.
    Bounds {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Reshape a results or bounds CSV into a tidy x/y/ci series.
    Plotdata {
        /// Input CSV (results.csv, tailscan.csv, or bounds.csv).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotDataKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PlotDataKind {
    CrossingVsLambda,
    TailVsS,
    BoundVsN,
}

impl From<PlotDataKind> for PlotKind {
    fn from(k: PlotDataKind) -> PlotKind {
        match k {
            PlotDataKind::CrossingVsLambda => PlotKind::CrossingVsLambda,
            PlotDataKind::TailVsS => PlotKind::TailVsS,
            PlotDataKind::BoundVsN => PlotKind::BoundVsN,
        }
    }
}

fn load_spec(args: &SpecArgs) -> Result<(ExperimentSpec, PathBuf), CliError> {
    let mut spec = ExperimentSpec::from_file(&args.spec)?;
    if let Some(l) = args.lambda {
        spec.config.lambda = l;
    }
    if let Some(t) = args.trials {
        for job in &mut spec.jobs {
            job.trials = t;
        }
    }
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Run(format!("cannot create {}: {e}", out_dir.display())))?;
    Ok((spec, out_dir))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let (spec, out_dir) = load_spec(&args)?;
            if let Some(n) = cli.threads.or(spec.threads) {
                init_threads(n)?;
            }
            let mut out = run_experiment(&spec)?;
            let csv_path = out_dir.join("results.csv");
            let manifest_path = out_dir.join("manifest.json");
            write_results_csv(&out.rows, &csv_path)?;
            out.manifest.outputs = vec![csv_path.display().to_string()];
            write_manifest(&out.manifest, &manifest_path)?;
            for w in &out.manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} rows -> {}", out.rows.len(), csv_path.display());
            Ok(())
        }
        Command::Bisect { spec: args, p_star, bracket_low, bracket_high, tolerance, budget } => {
            let (spec, out_dir) = load_spec(&args)?;
            if let Some(n) = cli.threads.or(spec.threads) {
                init_threads(n)?;
            }
            let trials = spec.jobs.first().map(|j| j.trials).unwrap_or(1000);
            let (result, rows) =
                run_bisect(&spec, p_star, (bracket_low, bracket_high), trials, tolerance, budget)?;
            write_results_csv(&rows, &out_dir.join("bisect.csv"))?;
            let text = serde_json::to_string_pretty(&result).expect("serializable");
            std::fs::write(out_dir.join("bisect.json"), text + "\n")
                .map_err(|e| CliError::Run(e.to_string()))?;
            for d in &result.diagnostics {
                eprintln!("warning: {d}");
            }
            println!(
                "bracket [{}, {}] after {} iterations (converged: {})",
                result.bracket_low, result.bracket_high, result.iterations, result.converged
            );
            Ok(())
        }
        Command::Tailscan { spec: args, t, tau, s_grid } => {
            let (spec, out_dir) = load_spec(&args)?;
            if let Some(n) = cli.threads.or(spec.threads) {
                init_threads(n)?;
            }
            let trials = args.trials.unwrap_or(2000);
            let (scan, rows) = run_tailscan(&spec, t, tau, &s_grid, trials)?;
            write_results_csv(&rows, &out_dir.join("tailscan.csv"))?;
            let text = serde_json::to_string_pretty(&scan).expect("serializable");
            std::fs::write(out_dir.join("tailscan.json"), text + "\n")
                .map_err(|e| CliError::Run(e.to_string()))?;
            for w in &scan.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} scales -> {}", scan.rows.len(), out_dir.join("tailscan.csv").display());
            Ok(())
        }
        Command::Bounds { spec: args, n_max } => {
            let (spec, out_dir) = load_spec(&args)?;
            let rows = run_bounds(&spec, n_max)?;
            write_bounds_csv(&rows, &out_dir.join("bounds.csv"))?;
            println!("{} rows -> {}", rows.len(), out_dir.join("bounds.csv").display());
            Ok(())
        }
        Command::Plotdata { input, kind, out } => {
            let n = emit_plot_data(&input, kind.into(), &out)?;
            println!("{n} rows -> {}", out.display());
            Ok(())
        }
    }
}

fn init_threads(n: usize) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Run(format!("thread pool: {e}")))
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
