//! Result persistence in a fixed six-column CSV schema.

use std::fmt::Write as _;
use std::path::Path;

use super::runner::RunResult;
use crate::error::{io_err, BanditError, Result};

pub const CSV_HEADER: &str = "algo,run,t,simple_regret,stderr,rounds_to_threshold";

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub algo: String,
    pub run: usize,
    pub t: usize,
    pub simple_regret: f64,
    pub stderr: Option<f64>,
    pub rounds_to_threshold: Option<usize>,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn render_csv(results: &[RunResult]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        let rounds = r.rounds_to_threshold.map(|n| n.to_string()).unwrap_or_default();
        for row in &r.rows {
            let stderr = row.stderr.map(fmt_float).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.algo,
                r.run_id,
                row.t,
                fmt_float(row.simple_regret),
                stderr,
                rounds
            );
        }
    }
    out
}

pub fn write_csv(results: &[RunResult], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, render_csv(results)).map_err(|e| io_err(path, e))
}

fn csv_err(line: usize, reason: impl Into<String>) -> BanditError {
    BanditError::Csv {
        line,
        reason: reason.into(),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some(_) => return Err(csv_err(1, format!("header must be `{CSV_HEADER}`"))),
        None => return Err(csv_err(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let n = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(csv_err(n, format!("expected 6 fields, found {}", fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| csv_err(n, format!("bad {what} `{s}`")))?;
            if !v.is_finite() {
                return Err(csv_err(n, format!("non-finite {what}")));
            }
            Ok(v)
        };
        let int = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| csv_err(n, format!("bad {what} `{s}`")))
        };
        if fields[0].is_empty() {
            return Err(csv_err(n, "empty algo"));
        }
        rows.push(CsvRow {
            algo: fields[0].to_string(),
            run: int(fields[1], "run")?,
            t: int(fields[2], "t")?,
            simple_regret: num(fields[3], "simple_regret")?,
            stderr: match fields[4] {
                "" => None,
                s => Some(num(s, "stderr")?),
            },
            rounds_to_threshold: match fields[5] {
                "" => None,
                s => Some(int(s, "rounds_to_threshold")?),
            },
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_csv(&text)
}
