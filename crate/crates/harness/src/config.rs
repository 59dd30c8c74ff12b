//! Experiment configuration files.
//!
//! A config is one JSON object. The common fields sit at the top level and
//! everything specific to a pipeline goes under `params`, which is checked
//! against the mode's own schema. Unknown fields are rejected at both levels.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use shiftlab_core::tds_boost::BoostSettings;
use shiftlab_core::toy::{ScenarioError, ShiftScenario};
use shiftlab_core::weak_distinguisher::WdConfig;
use thiserror::Error;

use crate::scenario::{ContinuousParams, ScenarioSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid params for mode {mode}: {source}")]
    Params { mode: &'static str, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PqHalfspace,
    Tdsboost,
    ForsterCheck,
    Weakdist,
    Margin,
    Balance,
    Hybrid,
    Martingale,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::PqHalfspace => "pq-halfspace",
            Mode::Tdsboost => "tdsboost",
            Mode::ForsterCheck => "forster-check",
            Mode::Weakdist => "weakdist",
            Mode::Margin => "margin",
            Mode::Balance => "balance",
            Mode::Hybrid => "hybrid",
            Mode::Martingale => "martingale",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_trials() -> usize {
    1
}

fn default_eps() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Switches `tdsboost` to the agnostic variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Per-trial wall-time budget in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

/// Which toy learner a discrete pipeline uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearnerSpec {
    Support { m: usize },
    Histogram {
        #[serde(default)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PqParams {
    /// Learn `sign(w·x − offset)` through the lift instead of a homogeneous target.
    pub general: bool,
    pub offset: f64,
    /// Fresh train draws used to measure the rejection rate.
    pub holdout: usize,
    /// Test points placed near the target and selector boundaries.
    pub adversarial: usize,
    pub margin_samples: Option<usize>,
    pub forster_eps: f64,
}

impl Default for PqParams {
    fn default() -> Self {
        Self { general: false, offset: 0.0, holdout: 20_000, adversarial: 50_000, margin_samples: None, forster_eps: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostConfig {
    pub learner: LearnerSpec,
    /// Overrides on top of [`BoostSettings::desk_scale`]; nested objects merge field by field.
    #[serde(default = "BoostSettings::desk_scale", deserialize_with = "desk_scale_with")]
    pub settings: BoostSettings,
    /// Monte-Carlo draws per law for cross-checking the exact metrics (0 = skip).
    #[serde(default)]
    pub mc_eval: usize,
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn desk_scale_with<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BoostSettings, D::Error> {
    let over = serde_json::Value::deserialize(d)?;
    let mut base = serde_json::to_value(BoostSettings::desk_scale()).map_err(serde::de::Error::custom)?;
    merge(&mut base, over);
    serde_json::from_value(base).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForsterParams {
    /// Random directions per certified set for the anticoncentration check.
    pub directions: usize,
    pub max_iters: Option<usize>,
}

impl Default for ForsterParams {
    fn default() -> Self {
        Self { directions: 100, max_iters: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakdistParams {
    pub learner: LearnerSpec,
    #[serde(default)]
    pub wd: WdConfig,
    /// Monte-Carlo draws per law for the measured advantage (0 = skip).
    #[serde(default)]
    pub n_eval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarginParams {
    pub dim: usize,
    pub gamma: f64,
    pub samples: Option<usize>,
    /// Probe points per run for the selector and label checks.
    pub probes: usize,
}

impl Default for MarginParams {
    fn default() -> Self {
        Self { dim: 3, gamma: 0.3, samples: None, probes: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceParams {
    pub q: Vec<f64>,
    pub draws: usize,
}

impl Default for BalanceParams {
    fn default() -> Self {
        Self { q: (0..=10).map(|k| k as f64 / 10.0).collect(), draws: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HybridParams {
    pub k: usize,
    pub m: usize,
}

impl Default for HybridParams {
    fn default() -> Self {
        Self { k: 4, m: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MartingaleParams {
    /// Range of the per-node distinguisher advantage, sampled per trial.
    pub gamma: [f64; 2],
    /// Range of the level count, sampled per trial.
    pub levels: [usize; 2],
}

impl Default for MartingaleParams {
    fn default() -> Self {
        Self { gamma: [0.1, 0.3], levels: [4, 12] }
    }
}

/// A config checked against its mode.
#[derive(Debug, Clone)]
pub enum Pipeline {
    PqHalfspace { scenario: ContinuousParams, kind: ScenarioSpec, params: PqParams },
    Tdsboost { scenario: ShiftScenario, params: BoostConfig },
    ForsterCheck { scenario: ContinuousParams, kind: ScenarioSpec, params: ForsterParams },
    Weakdist { scenario: ShiftScenario, params: WeakdistParams },
    Margin(MarginParams),
    Balance(BalanceParams),
    Hybrid(HybridParams),
    Martingale(MartingaleParams),
}

fn params<P: DeserializeOwned>(mode: Mode, v: &serde_json::Value, required: bool) -> Result<P, ConfigError> {
    let v = if v.is_null() && !required { serde_json::json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|source| ConfigError::Params { mode: mode.name(), source })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    /// Check every field and parse `params` for the mode.
    pub fn validate(&self) -> Result<Pipeline, ConfigError> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(invalid(format!("eta must lie in (0,1], got {eta}")));
            }
            if self.mode != Mode::Tdsboost {
                return Err(invalid("eta only applies to tdsboost"));
            }
        }
        if let Some(b) = self.budget_secs {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid("budget_secs must be positive"));
            }
        }
        let continuous = || -> Result<(ContinuousParams, ScenarioSpec), ConfigError> {
            match &self.scenario {
                Some(s) => {
                    let p = s.continuous().ok_or_else(|| invalid(format!("mode {} needs a continuous scenario", self.mode)))?;
                    p.validate().map_err(invalid)?;
                    Ok((p.clone(), s.clone()))
                }
                None => Err(invalid(format!("mode {} needs a scenario", self.mode))),
            }
        };
        let discrete = || -> Result<ShiftScenario, ConfigError> {
            match &self.scenario {
                Some(ScenarioSpec::DiscreteK(s)) => {
                    s.validate()?;
                    Ok(s.clone())
                }
                _ => Err(invalid(format!("mode {} needs a discrete-k scenario", self.mode))),
            }
        };
        let no_scenario = || {
            if self.scenario.is_some() {
                Err(invalid(format!("mode {} takes no scenario", self.mode)))
            } else {
                Ok(())
            }
        };
        let pipeline = match self.mode {
            Mode::PqHalfspace => {
                let (scenario, kind) = continuous()?;
                let params: PqParams = params(self.mode, &self.params, false)?;
                if params.general && params.offset.abs() >= 1.0 {
                    return Err(invalid("offset must lie in (−1, 1) so the target cuts the sphere"));
                }
                Pipeline::PqHalfspace { scenario, kind, params }
            }
            Mode::ForsterCheck => {
                let (scenario, kind) = continuous()?;
                Pipeline::ForsterCheck { scenario, kind, params: params(self.mode, &self.params, false)? }
            }
            Mode::Tdsboost => {
                let scenario = discrete()?;
                let params: BoostConfig = params(self.mode, &self.params, true)?;
                check_learner(&params.learner, scenario.k)?;
                Pipeline::Tdsboost { scenario, params }
            }
            Mode::Weakdist => {
                let scenario = discrete()?;
                let params: WeakdistParams = params(self.mode, &self.params, true)?;
                check_learner(&params.learner, scenario.k)?;
                Pipeline::Weakdist { scenario, params }
            }
            Mode::Margin => {
                no_scenario()?;
                let p: MarginParams = params(self.mode, &self.params, false)?;
                if p.dim == 0 || !(p.gamma > 0.0 && p.gamma < 1.0) {
                    return Err(invalid("margin needs dim ≥ 1 and gamma in (0,1)"));
                }
                Pipeline::Margin(p)
            }
            Mode::Balance => {
                no_scenario()?;
                let p: BalanceParams = params(self.mode, &self.params, false)?;
                if p.draws == 0 || p.q.iter().any(|q| !(0.0..=1.0).contains(q)) {
                    return Err(invalid("balance needs draws ≥ 1 and every q in [0,1]"));
                }
                Pipeline::Balance(p)
            }
            Mode::Hybrid => {
                no_scenario()?;
                let p: HybridParams = params(self.mode, &self.params, false)?;
                if p.k < 2 || p.m == 0 || (p.k as f64).powi(p.m as i32) > 1e6 {
                    return Err(invalid("hybrid needs k ≥ 2, m ≥ 1 and k^m ≤ 10⁶"));
                }
                Pipeline::Hybrid(p)
            }
            Mode::Martingale => {
                no_scenario()?;
                let p: MartingaleParams = params(self.mode, &self.params, false)?;
                let [g0, g1] = p.gamma;
                let [t0, t1] = p.levels;
                if !(g0 > 0.0 && g0 <= g1 && g1 <= 1.0) || !(2 <= t0 && t0 <= t1 && t1 <= 24) {
                    return Err(invalid("martingale needs 0 < gamma ≤ 1 and 2 ≤ levels ≤ 24, as ordered ranges"));
                }
                Pipeline::Martingale(p)
            }
        };
        Ok(pipeline)
    }
}

fn check_learner(l: &LearnerSpec, k: usize) -> Result<(), ConfigError> {
    match l {
        LearnerSpec::Support { m } if *m == 0 => Err(invalid("support learner needs m ≥ 1")),
        LearnerSpec::Histogram { samples: Some(0) } => Err(invalid("histogram learner needs samples ≥ 1")),
        _ if k < 2 => Err(invalid("discrete scenarios need k ≥ 2")),
        _ => Ok(()),
    }
}
