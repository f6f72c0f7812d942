//! Experiment reports: per-point metrics, fits, gates and a fingerprint.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, LabResult};

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
}

/// Smallest coefficient of determination for a fit to count.
pub const MIN_R_SQUARED: f64 = 0.95;

impl Fit {
    pub fn valid(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED
    }
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> LabResult<Fit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(LabError::param("fit", "need at least two paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(LabError::Numerical("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let max_residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).abs())
        .fold(0.0, f64::max);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
        max_residual,
    })
}

/// One gated assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub metric: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Gate {
    pub fn at_most(metric: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            metric: metric.into(),
            value,
            bound: format!("<= {bound:e}"),
            passed: value <= bound,
        }
    }

    pub fn at_least(metric: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            metric: metric.into(),
            value,
            bound: format!(">= {bound:e}"),
            passed: value >= bound,
        }
    }

    pub fn above(metric: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            metric: metric.into(),
            value,
            bound: format!("> {bound:e}"),
            passed: value > bound,
        }
    }

    pub fn within(metric: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            metric: metric.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fit: Option<Fit>,
    pub gates: Vec<Gate>,
    pub notes: Vec<String>,
    /// Grid, seeds, tolerances and anything else needed to rerun.
    pub fingerprint: BTreeMap<String, serde_json::Value>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            gates: Vec::new(),
            notes: Vec::new(),
            fingerprint: BTreeMap::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.fingerprint.insert(key.to_string(), v);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn first_failure(&self) -> Option<&Gate> {
        self.gates.iter().find(|g| !g.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_summary_json(&self) -> LabResult<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            experiment: &'a str,
            passed: bool,
            fit: &'a Option<Fit>,
            gates: &'a [Gate],
            notes: &'a [String],
            fingerprint: &'a BTreeMap<String, serde_json::Value>,
            columns: &'a [String],
        }
        serde_json::to_string_pretty(&Summary {
            experiment: &self.experiment,
            passed: self.passed(),
            fit: &self.fit,
            gates: &self.gates,
            notes: &self.notes,
            fingerprint: &self.fingerprint,
            columns: &self.columns,
        })
        .map_err(|e| LabError::Format(e.to_string()))
    }

    /// Writes `<experiment>.csv` and `<experiment>.summary.json` into `dir`.
    pub fn emit(&self, dir: &Path) -> LabResult<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.experiment));
        let json = dir.join(format!("{}.summary.json", self.experiment));
        std::fs::File::create(&csv)?.write_all(self.to_csv().as_bytes())?;
        let mut j = self.to_summary_json()?;
        j.push('\n');
        std::fs::File::create(&json)?.write_all(j.as_bytes())?;
        Ok((csv, json))
    }
}
