//! Run bundles: `config.json`, `metrics.json` and plot-ready CSV series.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub file: String,
    pub csv: String,
}

impl Series {
    pub fn new(file: impl Into<String>, csv: String) -> Self {
        Self {
            file: file.into(),
            csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBundle {
    pub experiment: String,
    pub config: Value,
    pub metrics: Value,
    pub series: Vec<Series>,
}

impl RunBundle {
    pub fn new<C: Serialize, M: Serialize>(
        experiment: &str,
        config: &C,
        metrics: &M,
        series: Vec<Series>,
    ) -> Result<Self> {
        Ok(Self {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config)?,
            metrics: serde_json::to_value(metrics)?,
            series,
        })
    }

    /// SHA-256 of the compact config JSON (keys sorted).
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.experiment, &self.config)
    }

    pub fn metrics_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.metrics)?;
        s.push('\n');
        Ok(s)
    }

    pub fn config_json(&self) -> Result<String> {
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "fingerprint": self.fingerprint(),
            "config": self.config,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), self.config_json()?)?;
        fs::write(dir.join("metrics.json"), self.metrics_json()?)?;
        for s in &self.series {
            fs::write(dir.join(&s.file), &s.csv)?;
        }
        Ok(())
    }
}

pub fn fingerprint(experiment: &str, config: &Value) -> String {
    let mut h = Sha256::new();
    h.update(experiment.as_bytes());
    h.update([0u8]);
    h.update(config.to_string().as_bytes());
    hex::encode(h.finalize())
}

/// CSV with a `time` column followed by the named columns.
pub fn columns_csv(times: &[f64], names: &[String], columns: &[&[f64]]) -> String {
    let mut out = String::from("time");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (k, t) in times.iter().enumerate() {
        out.push_str(&t.to_string());
        for c in columns {
            out.push(',');
            out.push_str(&c[k].to_string());
        }
        out.push('\n');
    }
    out
}

/// CSV of an N × K matrix sampled at `times`, one row per sample.
pub fn matrix_csv(times: &[f64], prefix: &str, m: &nalgebra::DMatrix<f64>) -> String {
    let names: Vec<String> = (0..m.nrows()).map(|i| format!("{prefix}{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    let cols: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    columns_csv(times, &names, &cols)
}
