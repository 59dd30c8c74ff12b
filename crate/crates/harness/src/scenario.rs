//! Named scenario generators.
//!
//! Continuous scenarios draw unit vectors in `R^n` and a random unit target
//! normal. The discrete one echoes its probability tables.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use shiftlab_core::domain::Point;
use shiftlab_core::linalg::{self, dot};
use shiftlab_core::toy::ShiftScenario;
use thiserror::Error;

/// A fixed count or an inclusive `[lo, hi]` range sampled per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Span {
    Fixed(usize),
    Range([usize; 2]),
}

impl Span {
    pub fn sample(self, rng: &mut dyn RngCore) -> usize {
        match self {
            Span::Fixed(v) => v,
            Span::Range([lo, hi]) => rng.random_range(lo..=hi),
        }
    }

    fn bounds(self) -> (usize, usize) {
        match self {
            Span::Fixed(v) => (v, v),
            Span::Range([lo, hi]) => (lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousParams {
    pub dim: Span,
    pub train_size: Span,
    #[serde(default)]
    pub test_size: usize,
    /// subspace-concentrated: dimension of the heavy subspace (default `⌈n/2⌉`, capped at `n − 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_dim: Option<usize>,
    /// subspace-concentrated: share of points on the heavy subspace.
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    /// boundary-concentrated: maximal `|w·x|` of a test point.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// gaussian-normalized: per-axis standard deviations (default `2^{-i}`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
}

fn default_fraction() -> f64 {
    0.5
}

fn default_margin() -> f64 {
    0.01
}

impl ContinuousParams {
    pub fn validate(&self) -> Result<(), String> {
        let (lo, hi) = self.dim.bounds();
        if lo == 0 || lo > hi {
            return Err("dim must be a positive count or an ordered range".into());
        }
        let (slo, shi) = self.train_size.bounds();
        if slo == 0 || slo > shi {
            return Err("train_size must be a positive count or an ordered range".into());
        }
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err("fraction must lie in [0,1]".into());
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err("margin must lie in (0,1)".into());
        }
        if let Some(s) = &self.scales {
            if s.len() < hi || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err("scales needs one positive entry per dimension".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ScenarioSpec {
    SphereUniform(ContinuousParams),
    GaussianNormalized(ContinuousParams),
    SubspaceConcentrated(ContinuousParams),
    BoundaryConcentrated(ContinuousParams),
    /// One of the four continuous generators, picked per trial.
    Mixed(ContinuousParams),
    DiscreteK(ShiftScenario),
}

impl ScenarioSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioSpec::SphereUniform(_) => "sphere-uniform",
            ScenarioSpec::GaussianNormalized(_) => "gaussian-normalized",
            ScenarioSpec::SubspaceConcentrated(_) => "subspace-concentrated",
            ScenarioSpec::BoundaryConcentrated(_) => "boundary-concentrated",
            ScenarioSpec::Mixed(_) => "mixed",
            ScenarioSpec::DiscreteK(_) => "discrete-k",
        }
    }

    pub fn continuous(&self) -> Option<&ContinuousParams> {
        match self {
            ScenarioSpec::SphereUniform(p)
            | ScenarioSpec::GaussianNormalized(p)
            | ScenarioSpec::SubspaceConcentrated(p)
            | ScenarioSpec::BoundaryConcentrated(p)
            | ScenarioSpec::Mixed(p) => Some(p),
            ScenarioSpec::DiscreteK(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioGenError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{0} is not a continuous scenario")]
    NotContinuous(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Sphere,
    Gaussian,
    Subspace,
    Boundary,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::Sphere => "sphere-uniform",
            LawKind::Gaussian => "gaussian-normalized",
            LawKind::Subspace => "subspace-concentrated",
            LawKind::Boundary => "boundary-concentrated",
        }
    }

    /// Stable numeric code for reports.
    pub fn code(self) -> f64 {
        match self {
            LawKind::Sphere => 0.0,
            LawKind::Gaussian => 1.0,
            LawKind::Subspace => 2.0,
            LawKind::Boundary => 3.0,
        }
    }
}

/// A drawn continuous scenario: its laws are fixed, samples can be redrawn.
#[derive(Debug, Clone)]
pub struct ContinuousLaw {
    pub kind: LawKind,
    pub dim: usize,
    /// Unit normal of the target halfspace.
    pub target: Vec<f64>,
    scales: Vec<f64>,
    /// Orthonormal basis of the heavy subspace (subspace-concentrated only).
    subspace: Vec<Vec<f64>>,
    fraction: f64,
    margin: f64,
}

pub fn random_unit(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = linalg::normalize(&v) {
            return u;
        }
    }
}

/// Random unit vector orthogonal to the unit vector `w`.
pub fn random_orthogonal_unit(w: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let u = random_unit(w.len(), rng);
        let c = dot(&u, w);
        let p: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - c * b).collect();
        if let Some(v) = linalg::normalize(&p) {
            return v;
        }
    }
}

/// Random unit vector `x` with `w·x = s`, for a unit `w` and `|s| ≤ 1`.
/// In one dimension the only candidates are `±w`, so the sign of `s` picks one.
pub fn unit_with_projection(w: &[f64], s: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    if w.len() == 1 {
        return vec![if s < 0.0 { -w[0] } else { w[0] }];
    }
    let u = random_orthogonal_unit(w, rng);
    let c = (1.0 - s * s).max(0.0).sqrt();
    u.iter().zip(w).map(|(a, b)| c * a + s * b).collect()
}

impl ContinuousLaw {
    fn new(kind: LawKind, p: &ContinuousParams, rng: &mut dyn RngCore) -> Self {
        let dim = p.dim.sample(rng);
        let target = random_unit(dim, rng);
        let scales = match &p.scales {
            Some(s) => s[..dim].to_vec(),
            None => (0..dim).map(|i| 0.5f64.powi(i as i32)).collect(),
        };
        let subspace = if kind == LawKind::Subspace && dim >= 2 {
            let k = p.subspace_dim.unwrap_or(dim.div_ceil(2)).clamp(1, dim - 1);
            let raw: Vec<Vec<f64>> = (0..k).map(|_| random_unit(dim, rng)).collect();
            linalg::orthonormal_basis(&raw, 1e-9)
        } else {
            Vec::new()
        };
        Self { kind, dim, target, scales, subspace, fraction: p.fraction, margin: p.margin }
    }

    fn gaussian(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        loop {
            let v: Vec<f64> = self.scales.iter().map(|s| s * Distribution::<f64>::sample(&StandardNormal, &mut *rng)).collect();
            if let Some(u) = linalg::normalize(&v) {
                return u;
            }
        }
    }

    fn on_subspace(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        loop {
            let mut v = vec![0.0; self.dim];
            for b in &self.subspace {
                let g: f64 = StandardNormal.sample(rng);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += g * bi;
                }
            }
            if let Some(u) = linalg::normalize(&v) {
                return u;
            }
        }
    }

    /// Unit vector with `|w·x| ≤ margin`.
    pub fn near_target(&self, margin: f64, rng: &mut dyn RngCore) -> Vec<f64> {
        let s: f64 = rng.random_range(-margin..=margin);
        unit_with_projection(&self.target, s, rng)
    }

    pub fn draw_train(&self, rng: &mut dyn RngCore) -> Point<f64> {
        Point(match self.kind {
            LawKind::Sphere | LawKind::Boundary => random_unit(self.dim, rng),
            LawKind::Gaussian => self.gaussian(rng),
            LawKind::Subspace => {
                if !self.subspace.is_empty() && rng.random_bool(self.fraction) {
                    self.on_subspace(rng)
                } else {
                    random_unit(self.dim, rng)
                }
            }
        })
    }

    pub fn draw_test(&self, rng: &mut dyn RngCore) -> Point<f64> {
        match self.kind {
            LawKind::Boundary => Point(self.near_target(self.margin, rng)),
            _ => self.draw_train(rng),
        }
    }

    pub fn draw_train_n(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Point<f64>> {
        (0..n).map(|_| self.draw_train(rng)).collect()
    }

    pub fn draw_test_n(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Point<f64>> {
        (0..n).map(|_| self.draw_test(rng)).collect()
    }
}

/// A continuous law together with one train and one test sample.
#[derive(Debug, Clone)]
pub struct ContinuousScenario {
    pub law: ContinuousLaw,
    pub train: Vec<Point<f64>>,
    pub test: Vec<Point<f64>>,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    Continuous(ContinuousScenario),
    Discrete(ShiftScenario),
}

fn law_kind(spec: &ScenarioSpec, rng: &mut dyn RngCore) -> Option<LawKind> {
    const ALL: [LawKind; 4] = [LawKind::Sphere, LawKind::Gaussian, LawKind::Subspace, LawKind::Boundary];
    match spec {
        ScenarioSpec::SphereUniform(_) => Some(LawKind::Sphere),
        ScenarioSpec::GaussianNormalized(_) => Some(LawKind::Gaussian),
        ScenarioSpec::SubspaceConcentrated(_) => Some(LawKind::Subspace),
        ScenarioSpec::BoundaryConcentrated(_) => Some(LawKind::Boundary),
        ScenarioSpec::Mixed(_) => Some(ALL[rng.random_range(0..ALL.len())]),
        ScenarioSpec::DiscreteK(_) => None,
    }
}

/// Draw a continuous law (without samples).
pub fn continuous_law(spec: &ScenarioSpec, rng: &mut dyn RngCore) -> Result<ContinuousLaw, ScenarioGenError> {
    let p = spec.continuous().ok_or(ScenarioGenError::NotContinuous(spec.name()))?;
    let kind = law_kind(spec, rng).ok_or(ScenarioGenError::NotContinuous(spec.name()))?;
    Ok(ContinuousLaw::new(kind, p, rng))
}

pub fn generate_scenario(spec: &ScenarioSpec, rng: &mut dyn RngCore) -> Scenario {
    match spec {
        ScenarioSpec::DiscreteK(s) => Scenario::Discrete(s.clone()),
        _ => {
            let p = spec.continuous().expect("non-discrete scenarios are continuous");
            let law = continuous_law(spec, rng).expect("continuous spec");
            let n = p.train_size.sample(rng);
            let train = law.draw_train_n(n, rng);
            let test = law.draw_test_n(p.test_size, rng);
            Scenario::Continuous(ContinuousScenario { law, train, test })
        }
    }
}

/// Look a scenario up by name, with its parameters as JSON.
pub fn generate_named(name: &str, params: serde_json::Value, rng: &mut dyn RngCore) -> Result<Scenario, ScenarioGenError> {
    let mut obj = match params {
        serde_json::Value::Object(m) => m,
        _ => serde_json::Map::new(),
    };
    obj.insert("name".into(), serde_json::Value::String(name.to_owned()));
    let spec: ScenarioSpec = serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|_| ScenarioGenError::UnknownScenario(name.to_owned()))?;
    Ok(generate_scenario(&spec, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shiftlab_core::rng::rng_from_seed;

    fn spec(name: &str, extra: serde_json::Value) -> ScenarioSpec {
        let mut v = serde_json::json!({"name": name, "dim": 3, "train_size": 200, "test_size": 200});
        for (k, x) in extra.as_object().unwrap() {
            v[k] = x.clone();
        }
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn continuous_samples_are_unit() {
        let mut rng = rng_from_seed(1);
        for name in ["sphere-uniform", "gaussian-normalized", "subspace-concentrated", "boundary-concentrated", "mixed"] {
            let Scenario::Continuous(s) = generate_scenario(&spec(name, serde_json::json!({})), &mut rng) else {
                panic!("{name} is continuous");
            };
            for p in s.train.iter().chain(&s.test) {
                assert_eq!(p.dim(), 3);
                assert!((p.norm() - 1.0).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn boundary_points_lie_within_margin() {
        let mut rng = rng_from_seed(2);
        let Scenario::Continuous(s) =
            generate_scenario(&spec("boundary-concentrated", serde_json::json!({"margin": 0.01})), &mut rng)
        else {
            unreachable!()
        };
        assert!(s.test.iter().all(|x| dot(x, &s.law.target).abs() <= 0.01));
    }

    #[test]
    fn subspace_share_is_heavy() {
        let mut rng = rng_from_seed(3);
        let sp = spec("subspace-concentrated", serde_json::json!({"dim": 4, "subspace_dim": 1, "fraction": 0.6, "train_size": 2000}));
        let Scenario::Continuous(s) = generate_scenario(&sp, &mut rng) else { unreachable!() };
        let b = &s.law.subspace[0];
        let on = s.train.iter().filter(|x| (dot(x, b).abs() - 1.0).abs() < 1e-9).count();
        let frac = on as f64 / 2000.0;
        assert!((frac - 0.6).abs() < 0.05, "{frac}");
    }

    #[test]
    fn discrete_echoes_tables() {
        let mut rng = rng_from_seed(4);
        let text = serde_json::json!({"k": 2, "train": [0.25, 0.75], "test": [1.0, 0.0], "concept": [1, -1]});
        let Scenario::Discrete(s) = generate_named("discrete-k", text, &mut rng).unwrap() else { unreachable!() };
        assert_eq!(s.train, vec![0.25, 0.75]);
        assert_eq!(s.test, vec![1.0, 0.0]);
        assert!(matches!(generate_named("torus", serde_json::json!({}), &mut rng), Err(ScenarioGenError::UnknownScenario(_))));
    }

    #[test]
    fn spans_parse_both_forms() {
        let a: Span = serde_json::from_str("5").unwrap();
        let b: Span = serde_json::from_str("[2, 8]").unwrap();
        assert_eq!(a, Span::Fixed(5));
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let v = b.sample(&mut rng);
            assert!((2..=8).contains(&v));
        }
    }
}
