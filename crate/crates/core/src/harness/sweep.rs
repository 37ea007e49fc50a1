//! Parameter sweeps summarised by rounds-to-threshold.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::csv::write_csv;
use super::runner::{run_experiment, RunResult};
use crate::error::{io_err, BanditError, Result};
use crate::policies::Variant;

pub const SUMMARY_HEADER: &str = "param,value,algo,runs,reached,mean_rounds_to_threshold";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: String,
    pub algo: Variant,
    pub runs: usize,
    pub reached: usize,
    /// Mean over the runs that reached the threshold.
    pub mean_rounds: Option<f64>,
}

/// Per-value CSV path derived from the base output path.
pub fn value_csv_path(base: &Path, param: &str, value: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let clean: String = value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    base.with_file_name(format!("{stem}_{param}_{clean}.csv"))
}

pub fn summarize(param: &str, value: &str, results: &[RunResult], algos: &[Variant]) -> Vec<SweepRow> {
    algos
        .iter()
        .map(|&algo| {
            let mine: Vec<&RunResult> = results.iter().filter(|r| r.algo == algo).collect();
            let hits: Vec<usize> = mine.iter().filter_map(|r| r.rounds_to_threshold).collect();
            SweepRow {
                param: param.to_string(),
                value: value.to_string(),
                algo,
                runs: mine.len(),
                reached: hits.len(),
                mean_rounds: if hits.is_empty() {
                    None
                } else {
                    Some(hits.iter().sum::<usize>() as f64 / hits.len() as f64)
                },
            }
        })
        .collect()
}

/// Runs `cfg` once per value of `param`, writing one CSV per value next to
/// `cfg.out_csv`, and returns the summary rows.
pub fn run_sweep(cfg: &ExperimentConfig, param: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(BanditError::Config("sweep needs at least one value".into()));
    }
    if cfg.threshold.is_none() {
        return Err(BanditError::Config("sweep needs a `threshold`".into()));
    }
    let mut rows = Vec::new();
    for value in values {
        let mut c = cfg.clone();
        c.set(param, value)?;
        let results = run_experiment(&c)?;
        write_csv(&results, &value_csv_path(&cfg.out_csv, param, value))?;
        rows.extend(summarize(param, value, &results, &c.algos));
    }
    Ok(rows)
}

pub fn render_summary(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let mean = r.mean_rounds.map(|m| format!("{m:.15e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{}", r.param, r.value, r.algo, r.runs, r.reached, mean);
    }
    out
}

pub fn write_summary(rows: &[SweepRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, render_summary(rows)).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runner::EvalRow;

    fn result(algo: Variant, rounds: Option<usize>) -> RunResult {
        RunResult {
            algo,
            run_id: 0,
            rows: vec![EvalRow {
                t: 0,
                simple_regret: 1.0,
                stderr: None,
            }],
            rounds_to_threshold: rounds,
            final_theta: vec![],
            pull_counts: vec![],
        }
    }

    #[test]
    fn summary_averages_reached_runs() {
        let rs = vec![
            result(Variant::Uniform, Some(10)),
            result(Variant::Uniform, Some(30)),
            result(Variant::Uniform, None),
            result(Variant::SimpleLinTs, None),
        ];
        let rows = summarize("K", "8", &rs, &[Variant::SimpleLinTs, Variant::Uniform]);
        assert_eq!(rows[0].reached, 0);
        assert_eq!(rows[0].mean_rounds, None);
        assert_eq!((rows[1].runs, rows[1].reached), (3, 2));
        assert_eq!(rows[1].mean_rounds, Some(20.0));
        let text = render_summary(&rows);
        assert!(text.starts_with(SUMMARY_HEADER));
        assert!(text.lines().nth(1).unwrap().ends_with(",0,"));
    }

    #[test]
    fn per_value_paths() {
        let p = value_csv_path(Path::new("out/res.csv"), "K", "32");
        assert_eq!(p, PathBuf::from("out/res_K_32.csv"));
    }
}
