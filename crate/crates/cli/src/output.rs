//! Result tables and file emission. Float columns are printed with six
//! significant digits in a form that parses back to the printed value, and
//! a failed command removes whatever it already wrote.

use std::fs;
use std::path::{Path, PathBuf};

use seawatch_core::SweepRow;

use crate::CliError;

pub const RESULT_TABLE_HEADER: &str =
    "sweep_value,aoi_avg_s,aoi_stderr_s,paoi_avg_s,paoi_stderr_s,p_m,delivered,lost_comm,lost_detect";

/// Six significant digits, scientific: stable under reparse-and-reformat.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.5e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: u32,
    pub aoi_avg_s: f64,
    pub aoi_stderr_s: f64,
    pub paoi_avg_s: f64,
    pub paoi_stderr_s: f64,
    pub p_m: f64,
    pub delivered: u64,
    pub lost_comm: u64,
    pub lost_detect: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn from_sweep(rows: &[SweepRow]) -> Result<Self, CliError> {
        let mut table = ResultTable::default();
        for row in rows {
            let out = &row.outcome;
            let (Some(aoi), Some(aoi_se), Some(paoi), Some(paoi_se)) =
                (out.aoi_mean_s, out.aoi_stderr_s, out.paoi_mean_s, out.paoi_stderr_s)
            else {
                return Err(CliError::Output(format!(
                    "sweep point {} delivered no frames; age metrics are undefined (coverage {:.4})",
                    row.value, out.p_m_mean
                )));
            };
            table.rows.push(ResultRow {
                sweep_value: row.value,
                aoi_avg_s: aoi,
                aoi_stderr_s: aoi_se,
                paoi_avg_s: paoi,
                paoi_stderr_s: paoi_se,
                p_m: out.p_m_mean,
                delivered: out.delivered,
                lost_comm: out.lost_comm,
                lost_detect: out.lost_detection,
            });
        }
        table.check_finite()?;
        Ok(table)
    }

    /// Every float must be finite before anything is written.
    pub fn check_finite(&self) -> Result<(), CliError> {
        for row in &self.rows {
            let floats =
                [row.aoi_avg_s, row.aoi_stderr_s, row.paoi_avg_s, row.paoi_stderr_s, row.p_m];
            if floats.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Output(format!(
                    "non-finite value in result row for sweep value {}",
                    row.sweep_value
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULT_TABLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.sweep_value,
                fmt_sig(r.aoi_avg_s),
                fmt_sig(r.aoi_stderr_s),
                fmt_sig(r.paoi_avg_s),
                fmt_sig(r.paoi_stderr_s),
                fmt_sig(r.p_m),
                r.delivered,
                r.lost_comm,
                r.lost_detect
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header == RESULT_TABLE_HEADER => {}
            other => {
                return Err(CliError::Output(format!("unexpected result-table header: {other:?}")))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(CliError::Output(format!("row {}: expected 9 columns", i + 1)));
            }
            let parse_f = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| CliError::Output(format!("row {}: {e}", i + 1)))
            };
            let parse_u = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| CliError::Output(format!("row {}: {e}", i + 1)))
            };
            rows.push(ResultRow {
                sweep_value: fields[0]
                    .parse()
                    .map_err(|e| CliError::Output(format!("row {}: {e}", i + 1)))?,
                aoi_avg_s: parse_f(fields[1])?,
                aoi_stderr_s: parse_f(fields[2])?,
                paoi_avg_s: parse_f(fields[3])?,
                paoi_stderr_s: parse_f(fields[4])?,
                p_m: parse_f(fields[5])?,
                delivered: parse_u(fields[6])?,
                lost_comm: parse_u(fields[7])?,
                lost_detect: parse_u(fields[8])?,
            });
        }
        Ok(ResultTable { rows })
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "sweep_value": r.sweep_value,
                    "aoi_avg_s": r.aoi_avg_s,
                    "aoi_stderr_s": r.aoi_stderr_s,
                    "paoi_avg_s": r.paoi_avg_s,
                    "paoi_stderr_s": r.paoi_stderr_s,
                    "p_m": r.p_m,
                    "delivered": r.delivered,
                    "lost_comm": r.lost_comm,
                    "lost_detect": r.lost_detect,
                })
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("plain numbers serialize")
    }
}

/// Collects output files so a failing command can take back everything it
/// already wrote.
pub struct OutputSession {
    directory: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSession {
    pub fn new(directory: impl Into<PathBuf>) -> Self {
        OutputSession { directory: directory.into(), written: Vec::new() }
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.directory).map_err(|e| CliError::Io {
            path: self.directory.display().to_string(),
            message: e.to_string(),
        })?;
        let path = self.directory.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Removes every file written so far (best effort).
    pub fn abort(self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }

    pub fn finish(self) -> Vec<PathBuf> {
        self.written
    }
}
