//! Report rows and their table, CSV and JSON renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError};
use crate::estimators::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// One row of a theoretical comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub estimator: String,
    pub config: Estimator,
    pub bias: f64,
    pub mse: f64,
    pub pre: f64,
}

/// Simulated or enumerated design moments of one estimator, next to its
/// first-order theory under both `theta` conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub estimator: String,
    pub config: Estimator,
    pub mean: Option<f64>,
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    pub pre: Option<f64>,
    pub stderr: Option<f64>,
    pub evaluated: u64,
    pub failed_samples: u64,
    pub negative_estimates: u64,
    pub sample_space_size: Option<u64>,
    pub theory_bias_fpc: Option<f64>,
    pub theory_mse_fpc: Option<f64>,
    pub theory_mse_no_fpc: Option<f64>,
}

/// One estimate computed from a single sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub estimator: String,
    pub config: Estimator,
    pub estimate: Option<f64>,
    pub negative: bool,
    pub expansion_invalid: bool,
    pub clamped: bool,
    pub error: Option<String>,
}

/// Name/value listing used by `varest moments`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub name: String,
    pub value: Option<f64>,
}

pub trait Tabular {
    fn headers() -> Vec<&'static str>;
    /// Cells for text and CSV output.
    fn cells(&self) -> Vec<String>;
}

fn fixed(v: f64, places: usize) -> String {
    // adding 0.0 turns -0.0 into 0.0
    format!("{:.places$}", v + 0.0)
}

fn opt(v: Option<f64>, places: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |v| fixed(v, places))
}

impl Tabular for TheoryRow {
    fn headers() -> Vec<&'static str> {
        vec!["estimator", "bias", "mse", "pre"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.estimator.clone(),
            fixed(self.bias, 3),
            fixed(self.mse, 3),
            fixed(self.pre, 3),
        ]
    }
}

impl Tabular for EmpiricalRow {
    fn headers() -> Vec<&'static str> {
        vec![
            "estimator",
            "mean",
            "bias",
            "mse",
            "pre",
            "stderr",
            "evaluated",
            "failed_samples",
            "negative_estimates",
            "sample_space_size",
            "theory_bias_fpc",
            "theory_mse_fpc",
            "theory_mse_no_fpc",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.estimator.clone(),
            opt(self.mean, 6),
            opt(self.bias, 6),
            opt(self.mse, 6),
            opt(self.pre, 3),
            opt(self.stderr, 6),
            self.evaluated.to_string(),
            self.failed_samples.to_string(),
            self.negative_estimates.to_string(),
            self.sample_space_size.map_or_else(|| "NA".into(), |s| s.to_string()),
            opt(self.theory_bias_fpc, 6),
            opt(self.theory_mse_fpc, 6),
            opt(self.theory_mse_no_fpc, 6),
        ]
    }
}

impl Tabular for EstimateRow {
    fn headers() -> Vec<&'static str> {
        vec![
            "estimator",
            "estimate",
            "negative",
            "expansion_invalid",
            "clamped",
            "error",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.estimator.clone(),
            opt(self.estimate, 6),
            self.negative.to_string(),
            self.expansion_invalid.to_string(),
            self.clamped.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl Tabular for MomentRow {
    fn headers() -> Vec<&'static str> {
        vec!["name", "value"]
    }

    fn cells(&self) -> Vec<String> {
        vec![self.name.clone(), opt(self.value, 6)]
    }
}

fn render_table<R: Tabular>(rows: &[R]) -> String {
    let headers = R::headers();
    let body: Vec<Vec<String>> = rows.iter().map(Tabular::cells).collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| body.iter().map(|r| r[i].len()).chain([h.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let joined: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", joined.join("  ").trim_end());
    };
    line(headers.clone());
    for r in &body {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

fn render_csv<R: Tabular>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| VarestError::InvalidArgument(format!("CSV output: {e}"));
    w.write_record(R::headers()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.cells()).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| VarestError::InvalidArgument(format!("CSV output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV writer emits UTF-8"))
}

pub fn render<R: Tabular + Serialize>(rows: &[R], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Table => Ok(render_table(rows)),
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)
                .map_err(|e| VarestError::InvalidArgument(format!("JSON output: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<TheoryRow> {
        vec![
            TheoryRow {
                estimator: "unbiased".into(),
                config: Estimator::Unbiased,
                bias: 0.0,
                mse: 14392.617001717428,
                pre: 100.0,
            },
            TheoryRow {
                estimator: "ratio".into(),
                config: Estimator::Ratio,
                bias: 12.5,
                mse: 4861.205368807866,
                pre: 296.0679,
            },
        ]
    }

    #[test]
    fn table_uses_three_decimals() {
        let t = render(&rows(), OutputFormat::Table).unwrap();
        assert!(t.contains("14392.617"));
        assert!(t.contains("296.068"));
        assert!(t.lines().next().unwrap().starts_with("estimator"));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = render(&rows(), OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = c.lines().collect();
        assert_eq!(lines[0], "estimator,bias,mse,pre");
        assert_eq!(lines[2], "ratio,12.500,4861.205,296.068");
    }

    #[test]
    fn json_round_trips_exactly() {
        let j = render(&rows(), OutputFormat::Json).unwrap();
        let back: Vec<TheoryRow> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, rows());
    }
}
