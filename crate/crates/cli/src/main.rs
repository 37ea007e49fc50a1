use std::path::PathBuf;

use anyhow::{Context, Result};
use bandit_core::harness::{
    emit_plot, run_experiment, run_sweep, value_csv_path, write_csv, write_summary, ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bandit", about = "Pure-exploration contextual bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its regret trace as CSV.
    Run(RunArgs),
    /// Repeat an experiment over a grid of one parameter.
    Sweep(SweepArgs),
    /// Render an SVG chart from a results CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Overrides {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm name, or a comma-separated list.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)
                .with_context(|| format!("loading config {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.algo {
            cfg.set("algo", a)?;
        }
        if let Some(t) = self.horizon {
            cfg.horizon = t;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_csv = o.clone();
        }
        if let Some(p) = &self.plot {
            cfg.out_plot = Some(p.clone());
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("`--set {kv}` is not KEY=VALUE"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Config key to vary, e.g. `K` or `M`.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Summary CSV path; defaults to `<out stem>_summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    log_y: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = args.overrides.load()?;
            let results = run_experiment(&cfg)?;
            write_csv(&results, &cfg.out_csv)?;
            eprintln!("wrote {}", cfg.out_csv.display());
            if let Some(p) = &cfg.out_plot {
                emit_plot(&cfg.out_csv, p, cfg.log_y)?;
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Sweep(args) => {
            let cfg = args.overrides.load()?;
            let rows = run_sweep(&cfg, &args.param, &args.values)?;
            let summary = args.summary.unwrap_or_else(|| {
                let stem = cfg.out_csv.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
                cfg.out_csv.with_file_name(format!("{stem}_summary.csv"))
            });
            write_summary(&rows, &summary)?;
            for v in &args.values {
                eprintln!("wrote {}", value_csv_path(&cfg.out_csv, &args.param, v).display());
            }
            eprintln!("wrote {}", summary.display());
        }
        Command::Plot(args) => {
            emit_plot(&args.csv, &args.out, args.log_y)?;
            eprintln!("wrote {}", args.out.display());
        }
    }
    Ok(())
}
