//! Per-trial records and the files written for them.
//!
//! `trials.csv` has the fixed columns `trial,metric,value`: one row per
//! metric, and every trial also gets a `status` row (0 ok, 1 error, 2 budget).
//! `report.json` holds the config echo and the aggregates. Wall times are the
//! only non-reproducible numbers, so they live apart in `timing.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Ok,
    Error,
    Budget,
}

impl TrialStatus {
    pub fn code(self) -> f64 {
        match self {
            TrialStatus::Ok => 0.0,
            TrialStatus::Error => 1.0,
            TrialStatus::Budget => 2.0,
        }
    }
}

/// Named numbers recorded by one trial, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics(pub Vec<(String, f64)>);

impl Metrics {
    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        // adding +0 folds -0 into 0, so empty sums print as 0
        self.0.push((name.into(), value + 0.0));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub metrics: Metrics,
    pub message: Option<String>,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Aggregate {
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, std: var.sqrt(), min, max, n }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
}

impl Report {
    pub fn count(&self, status: TrialStatus) -> usize {
        self.trials.iter().filter(|t| t.status == status).count()
    }

    /// Values of `name` over the successful trials, in trial order.
    pub fn metric(&self, name: &str) -> Vec<f64> {
        self.ok_trials().filter_map(|t| t.metrics.get(name)).collect()
    }

    fn ok_trials(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| t.status == TrialStatus::Ok)
    }

    /// Mean/σ/min/max of every metric over the successful trials.
    pub fn aggregates(&self) -> BTreeMap<String, Aggregate> {
        let mut by_name: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for t in self.ok_trials() {
            for (name, v) in &t.metrics.0 {
                by_name.entry(name.clone()).or_default().push(*v);
            }
        }
        by_name.into_iter().map(|(k, v)| (k, Aggregate::of(&v))).collect()
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "metric", "value"]).expect("in-memory write");
        for t in &self.trials {
            let trial = t.trial.to_string();
            w.write_record([trial.as_str(), "status", &t.status.code().to_string()]).expect("in-memory write");
            for (name, v) in &t.metrics.0 {
                w.write_record([trial.as_str(), name, &v.to_string()]).expect("in-memory write");
            }
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let errors: Vec<_> = self
            .trials
            .iter()
            .filter(|t| t.status != TrialStatus::Ok)
            .map(|t| serde_json::json!({"trial": t.trial, "seed": t.seed, "status": t.status, "message": t.message}))
            .collect();
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "library_version": env!("CARGO_PKG_VERSION"),
            "mode": self.config.mode,
            "config": self.config,
            "trials": self.trials.len(),
            "status": {
                "ok": self.count(TrialStatus::Ok),
                "error": self.count(TrialStatus::Error),
                "budget": self.count(TrialStatus::Budget),
            },
            "aggregate": self.aggregates(),
            "errors": errors,
        })
    }

    pub fn timing_json(&self) -> serde_json::Value {
        let walls: Vec<f64> = self.trials.iter().map(|t| t.wall_secs).collect();
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "total_secs": walls.iter().sum::<f64>(),
            "wall_secs": walls,
        })
    }

    /// Write `trials.csv`, `report.json` and `timing.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trials.csv"), self.csv_bytes())?;
        let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json values serialize");
        std::fs::write(dir.join("report.json"), pretty(&self.summary_json()) + "\n")?;
        std::fs::write(dir.join("timing.json"), pretty(&self.timing_json()) + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, status: TrialStatus, m: &[(&str, f64)]) -> TrialRecord {
        TrialRecord {
            trial,
            seed: trial as u64,
            status,
            metrics: Metrics(m.iter().map(|(n, v)| (n.to_string(), *v)).collect()),
            message: None,
            wall_secs: 0.5,
        }
    }

    #[test]
    fn csv_layout_and_aggregates() {
        let config = ExperimentConfig::from_json(r#"{"mode":"balance"}"#).unwrap();
        let report = Report {
            config,
            trials: vec![
                record(0, TrialStatus::Ok, &[("x", 1.0)]),
                record(1, TrialStatus::Ok, &[("x", 3.0)]),
                record(2, TrialStatus::Budget, &[]),
            ],
        };
        let text = String::from_utf8(report.csv_bytes()).unwrap();
        assert_eq!(text, "trial,metric,value\n0,status,0\n0,x,1\n1,status,0\n1,x,3\n2,status,2\n");
        let agg = &report.aggregates()["x"];
        assert_eq!((agg.mean, agg.n), (2.0, 2));
        assert!((agg.std - 2f64.sqrt()).abs() < 1e-15);
        let s = report.summary_json();
        assert_eq!(s["status"]["budget"], 1);
        assert_eq!(s["schema_version"], SCHEMA_VERSION);
    }
}
