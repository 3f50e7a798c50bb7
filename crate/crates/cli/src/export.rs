//! Output records, CSV matrices and gnuplot scripts.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

/// One JSON record per run. `params` is the full command configuration, so
/// a record can be replayed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub operation: String,
    pub params: Value,
    pub value: Value,
    pub std_error: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    #[serde(rename = "git-describe")]
    pub git_describe: String,
}

impl Record {
    pub fn new(operation: &str, params: Value, value: Value, std_error: Option<f64>, warnings: Vec<String>) -> Self {
        Record {
            operation: operation.into(),
            params,
            value,
            std_error,
            warnings,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            git_describe: git_describe(),
        }
    }
}

/// `git describe --always --dirty` of the source tree, or of the working
/// directory when run elsewhere; "unknown" without git.
pub fn git_describe() -> String {
    let dir = option_env!("CARGO_MANIFEST_DIR").unwrap_or(".");
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(dir)
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

pub fn write_json(path: &Path, record: &Record) -> Result<()> {
    let s = serde_json::to_string_pretty(record)?;
    std::fs::write(path, s + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_record(path: &Path) -> Result<Record> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing record {}", path.display()))
}

/// CSV text from a header and rows of numbers (shortest round-trip digits).
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Gnuplot script plotting columns `ys` against column `x` of a CSV file.
pub fn gnuplot_script(csv_name: &str, title: &str, x: (usize, &str), ys: &[(usize, &str)], log_y: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{}'\n", x.1));
    if log_y {
        s.push_str("set logscale y\n");
    }
    let plots: Vec<String> = ys
        .iter()
        .map(|(c, name)| format!("'{csv_name}' using {}:{} with linespoints title '{name}'", x.0, c))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Write `csv_path` and a sibling `.gp` script.
pub fn write_csv_with_plot(
    csv_path: &Path,
    content: &str,
    title: &str,
    x: (usize, &str),
    ys: &[(usize, &str)],
    log_y: bool,
) -> Result<()> {
    std::fs::write(csv_path, content).with_context(|| format!("writing {}", csv_path.display()))?;
    let name = csv_path.file_name().and_then(|n| n.to_str()).unwrap_or("data.csv");
    let gp = csv_path.with_extension("gp");
    std::fs::write(&gp, gnuplot_script(name, title, x, ys, log_y))
        .with_context(|| format!("writing {}", gp.display()))
}
