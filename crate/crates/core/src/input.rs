//! Readers for unit-level CSV data and summary-parameter files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarestError};
use crate::moments::{Population, PopulationMoments, ThetaMode};

/// Reads a population from a CSV file with header `y,x`.
pub fn load_population_csv(path: &Path) -> Result<Population> {
    let text = std::fs::read_to_string(path).map_err(|source| VarestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_population_csv(&text, &path.display().to_string())
}

pub fn parse_population_csv(text: &str, origin: &str) -> Result<Population> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| VarestError::Schema {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| VarestError::Schema {
                path: origin.to_string(),
                message: format!("missing column \"{name}\" (header must contain y,x)"),
            })
    };
    let (yi, xi) = (column("y")?, column("x")?);

    let mut y = Vec::new();
    let mut x = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| VarestError::Parse {
            path: origin.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| VarestError::Parse {
                path: origin.to_string(),
                line,
                message: format!("column {name}: cannot parse {raw:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(VarestError::Parse {
                    path: origin.to_string(),
                    line,
                    message: format!("column {name}: non-finite value {raw:?}"),
                });
            }
            Ok(v)
        };
        y.push(field(yi, "y")?);
        x.push(field(xi, "x")?);
    }
    if y.len() < 2 {
        return Err(VarestError::Schema {
            path: origin.to_string(),
            message: format!("at least 2 data rows are required, found {}", y.len()),
        });
    }
    Population::new(y, x)
}

/// Published summary statistics of a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SummaryParams {
    pub N: usize,
    pub n: Option<usize>,
    pub S_y: f64,
    pub S_x: f64,
    pub C_y: f64,
    pub C_x: f64,
    pub rho_yx: f64,
    pub C_yx: f64,
    pub beta2y: f64,
    pub beta2x: f64,
    pub lambda22: f64,
}

const REQUIRED_KEYS: [&str; 10] = [
    "N", "S_y", "S_x", "C_y", "C_x", "rho_yx", "C_yx", "beta2y", "beta2x", "lambda22",
];

impl SummaryParams {
    pub fn parse(text: &str, origin: &str) -> Result<SummaryParams> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| VarestError::Parse {
                path: origin.to_string(),
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "n" && !REQUIRED_KEYS.contains(&key) {
                return Err(parse_err(format!("unknown key \"{key}\"")));
            }
            if values.insert(key, (line_no, value)).is_some() {
                return Err(parse_err(format!("duplicate key \"{key}\"")));
            }
        }
        if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !values.contains_key(*k)) {
            return Err(VarestError::MissingKey(missing.to_string()));
        }

        let real = |key: &str| -> Result<f64> {
            let (line, raw) = values[key];
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| VarestError::Parse {
                    path: origin.to_string(),
                    line,
                    message: format!("{key}: cannot parse {raw:?} as a finite number"),
                })
        };
        let count = |key: &str| -> Result<usize> {
            let (line, raw) = values[key];
            raw.parse::<usize>().map_err(|_| VarestError::Parse {
                path: origin.to_string(),
                line,
                message: format!("{key}: cannot parse {raw:?} as a non-negative integer"),
            })
        };
        Ok(SummaryParams {
            N: count("N")?,
            n: values.contains_key("n").then(|| count("n")).transpose()?,
            S_y: real("S_y")?,
            S_x: real("S_x")?,
            C_y: real("C_y")?,
            C_x: real("C_x")?,
            rho_yx: real("rho_yx")?,
            C_yx: real("C_yx")?,
            beta2y: real("beta2y")?,
            beta2x: real("beta2x")?,
            lambda22: real("lambda22")?,
        })
    }

    /// Population moments at sample size `n` (falls back to the file's `n`).
    pub fn to_moments(&self, n: Option<usize>, theta_mode: ThetaMode) -> Result<PopulationMoments> {
        let n = n.or(self.n).ok_or_else(|| VarestError::MissingKey("n".into()))?;
        let mut pm = PopulationMoments::from_parts(
            Some(self.N),
            n,
            theta_mode,
            self.S_y * self.S_y,
            self.S_x * self.S_x,
            self.beta2y,
            self.beta2x,
            self.lambda22,
        )?;
        pm.cv_y = Some(self.C_y);
        pm.cv_x = Some(self.C_x);
        pm.rho_yx = self.rho_yx;
        pm.c_yx = Some(self.C_yx);
        Ok(pm)
    }
}

pub fn load_summary_file(path: &Path) -> Result<SummaryParams> {
    let text = std::fs::read_to_string(path).map_err(|source| VarestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SummaryParams::parse(&text, &path.display().to_string())
}

/// Reads a summary-parameter file and forms the population moments.
pub fn load_summary_params(path: &Path, n: Option<usize>, theta_mode: ThetaMode) -> Result<PopulationMoments> {
    load_summary_file(path)?.to_moments(n, theta_mode)
}
