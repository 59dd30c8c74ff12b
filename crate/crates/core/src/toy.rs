//! Reference TDS learners and shift scenarios over `{0, …, k−1}`.
//!
//! Everything here is small enough to enumerate, which is what makes exact
//! metrics for randomized branching programs possible.

use std::collections::HashSet;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    Classifier, Decision, FnSelective, Label, LabeledExample, LabeledSampler, Sampler, TdsLearner, TdsOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{table} table has {got} entries, expected k = {k}")]
    Length { table: &'static str, k: usize, got: usize },
    #[error("{table} table sums to {sum}, expected 1")]
    NotNormalized { table: &'static str, sum: f64 },
    #[error("{table} table has a negative or non-finite entry")]
    BadMass { table: &'static str },
    #[error("label-flip rate {0} outside [0, 1/2)")]
    BadLambda(f64),
    #[error("domain needs at least 2 points")]
    TooSmall,
}

/// Train and test laws on `{0, …, k−1}`, a target concept and optional label noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftScenario {
    pub k: usize,
    pub train: Vec<f64>,
    pub test: Vec<f64>,
    pub concept: Vec<Label>,
    /// Independent label-flip rate on both laws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn check_table(table: &'static str, t: &[f64], k: usize) -> Result<(), ScenarioError> {
    if t.len() != k {
        return Err(ScenarioError::Length { table, k, got: t.len() });
    }
    if t.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(ScenarioError::BadMass { table });
    }
    let sum: f64 = t.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(ScenarioError::NotNormalized { table, sum });
    }
    Ok(())
}

fn uniform_on(k: usize, range: std::ops::Range<usize>) -> Vec<f64> {
    let w = 1.0 / range.len() as f64;
    (0..k).map(|x| if range.contains(&x) { w } else { 0.0 }).collect()
}

impl ShiftScenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.k < 2 {
            return Err(ScenarioError::TooSmall);
        }
        check_table("train", &self.train, self.k)?;
        check_table("test", &self.test, self.k)?;
        if self.concept.len() != self.k {
            return Err(ScenarioError::Length { table: "concept", k: self.k, got: self.concept.len() });
        }
        if let Some(l) = self.lambda {
            if !(0.0..0.5).contains(&l) {
                return Err(ScenarioError::BadLambda(l));
            }
        }
        Ok(())
    }

    /// Uniform train law on `train`, uniform test law on `test`, target `+1` on `x ≥ threshold`.
    pub fn uniform_blocks(
        k: usize,
        train: std::ops::Range<usize>,
        test: std::ops::Range<usize>,
        threshold: usize,
        lambda: Option<f64>,
    ) -> Self {
        Self {
            k,
            train: uniform_on(k, train),
            test: uniform_on(k, test),
            concept: (0..k).map(|x| Label::from_bool(x >= threshold)).collect(),
            lambda,
        }
    }

    pub fn flip_rate(&self) -> f64 {
        self.lambda.unwrap_or(0.0)
    }

    pub fn train_law(&self) -> Vec<(usize, f64)> {
        self.train.iter().copied().enumerate().collect()
    }

    pub fn test_law(&self) -> Vec<(usize, f64)> {
        self.test.iter().copied().enumerate().collect()
    }

    pub fn train_sampler(&self) -> DiscreteSampler {
        DiscreteSampler::new(&self.train, self.concept.clone(), self.flip_rate())
    }

    pub fn test_sampler(&self) -> DiscreteSampler {
        DiscreteSampler::new(&self.test, self.concept.clone(), self.flip_rate())
    }

    pub fn total_variation(&self) -> f64 {
        0.5 * self.train.iter().zip(&self.test).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Best summed train + test error over the threshold class, against noisy labels.
    pub fn benchmark_lambda(&self) -> f64 {
        let lam = self.flip_rate();
        thresholds(self.k)
            .map(|h| {
                (0..self.k)
                    .map(|x| {
                        let wrong = if h.predict(&x) == self.concept[x] { lam } else { 1.0 - lam };
                        (self.train[x] + self.test[x]) * wrong
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Draws from a probability table, labeled by a concept with independent flips.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    index: WeightedIndex<f64>,
    concept: Vec<Label>,
    flip: f64,
}

impl DiscreteSampler {
    pub fn new(table: &[f64], concept: Vec<Label>, flip: f64) -> Self {
        Self { index: WeightedIndex::new(table).expect("valid probability table"), concept, flip }
    }
}

impl Sampler<usize> for DiscreteSampler {
    fn draw(&self, rng: &mut dyn RngCore) -> usize {
        self.index.sample(rng)
    }
}

impl LabeledSampler<usize> for DiscreteSampler {
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<usize> {
        let x = self.index.sample(rng);
        let mut y = self.concept[x];
        if self.flip > 0.0 && rng.random_bool(self.flip) {
            y = y.flip();
        }
        LabeledExample::new(x, y)
    }
}

/// `s` on `x ≥ θ`, `−s` below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub theta: usize,
    pub sign: Label,
}

impl Classifier<usize> for Threshold {
    fn predict(&self, x: &usize) -> Label {
        if *x >= self.theta {
            self.sign
        } else {
            self.sign.flip()
        }
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "threshold": self.theta, "sign": self.sign.value() })
    }
}

fn thresholds(k: usize) -> impl Iterator<Item = Threshold> {
    (0..=k).flat_map(|theta| [Label::Pos, Label::Neg].map(|sign| Threshold { theta, sign }))
}

/// Empirical-risk minimizer over thresholds; ties go to the smaller `θ`, then to `s = +1`.
pub fn erm_threshold(k: usize, sample: &[LabeledExample<usize>]) -> Threshold {
    // errors of (θ, +1) as θ sweeps: points below θ predicted −1
    let mut pos_at = vec![0i64; k + 1];
    let mut neg_at = vec![0i64; k + 1];
    for ex in sample {
        let x = ex.point.min(k);
        if ex.label.is_pos() {
            pos_at[x] += 1;
        } else {
            neg_at[x] += 1;
        }
    }
    let n = sample.len() as i64;
    let total_neg: i64 = neg_at.iter().sum();
    let mut best = Threshold { theta: 0, sign: Label::Pos };
    let mut best_err = i64::MAX;
    // θ = 0: everything predicted +1, errors = all negatives
    let mut err_plus = total_neg;
    for theta in 0..=k {
        if theta > 0 {
            err_plus += pos_at[theta - 1] - neg_at[theta - 1];
        }
        for (sign, err) in [(Label::Pos, err_plus), (Label::Neg, n - err_plus)] {
            if err < best_err {
                best_err = err;
                best = Threshold { theta, sign };
            }
        }
    }
    best
}

/// Accepts iff the empirical train and test histograms are within `ε/4` in
/// total variation, then returns the ERM threshold.
#[derive(Debug, Clone)]
pub struct HistogramTds {
    pub k: usize,
    /// Overrides [`HistogramTds::sample_complexity`].
    pub samples: Option<usize>,
}

impl HistogramTds {
    pub fn new(k: usize) -> Self {
        assert!(k >= 2, "domain needs at least 2 points");
        Self { k, samples: None }
    }

    /// `⌈(4/ε)²·(√k + √(2·ln(2/δ)))²⌉` at the learner's own failure level `δ = 0.01`.
    pub fn calibrated_samples(k: usize, eps: f64, delta: f64) -> usize {
        let s = (k as f64).sqrt() + (2.0 * (2.0 / delta).ln()).sqrt();
        ((4.0 / eps).powi(2) * s * s).ceil() as usize
    }

    fn decide(&self, train: &[LabeledExample<usize>], test: &[usize], eps: f64) -> Option<Threshold> {
        let m = self.sample_complexity(eps);
        let train = &train[..train.len().min(m)];
        let test = &test[..test.len().min(m)];
        if train.is_empty() || test.is_empty() {
            return None;
        }
        let mut a = vec![0.0; self.k];
        let mut b = vec![0.0; self.k];
        for ex in train {
            a[ex.point.min(self.k - 1)] += 1.0 / train.len() as f64;
        }
        for &x in test {
            b[x.min(self.k - 1)] += 1.0 / test.len() as f64;
        }
        let tv = 0.5 * a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum::<f64>();
        (tv <= eps / 4.0).then(|| erm_threshold(self.k, train))
    }
}

impl TdsLearner<usize> for HistogramTds {
    fn sample_complexity(&self, eps: f64) -> usize {
        self.samples.unwrap_or_else(|| Self::calibrated_samples(self.k, eps, 0.01))
    }

    fn run(
        &self,
        train: &[LabeledExample<usize>],
        test: &[usize],
        eps: f64,
        _delta: f64,
        _rng: &mut dyn RngCore,
    ) -> TdsOutcome<usize> {
        match self.decide(train, test, eps) {
            Some(h) => TdsOutcome::Accept(Arc::new(h)),
            None => TdsOutcome::Reject,
        }
    }

    fn acceptance_probability(
        &self,
        train: &[LabeledExample<usize>],
        test: &[usize],
        eps: f64,
        _delta: f64,
    ) -> Option<f64> {
        Some(if self.decide(train, test, eps).is_some() { 1.0 } else { 0.0 })
    }

    fn name(&self) -> &str {
        "histogram"
    }
}

/// Rejects iff some test point lies outside the empirical train support;
/// otherwise returns the ERM threshold.
#[derive(Debug, Clone)]
pub struct SupportTds {
    pub k: usize,
    pub m: usize,
}

impl SupportTds {
    pub fn new(k: usize, m: usize) -> Self {
        assert!(k >= 2 && m >= 1);
        Self { k, m }
    }

    fn decide(&self, train: &[LabeledExample<usize>], test: &[usize]) -> Option<Threshold> {
        let train = &train[..train.len().min(self.m)];
        let test = &test[..test.len().min(self.m)];
        let support: HashSet<usize> = train.iter().map(|ex| ex.point).collect();
        test.iter().all(|x| support.contains(x)).then(|| erm_threshold(self.k, train))
    }
}

impl TdsLearner<usize> for SupportTds {
    fn sample_complexity(&self, _eps: f64) -> usize {
        self.m
    }

    fn run(
        &self,
        train: &[LabeledExample<usize>],
        test: &[usize],
        _eps: f64,
        _delta: f64,
        _rng: &mut dyn RngCore,
    ) -> TdsOutcome<usize> {
        match self.decide(train, test) {
            Some(h) => TdsOutcome::Accept(Arc::new(h)),
            None => TdsOutcome::Reject,
        }
    }

    /// On acceptance every test point was seen in training, so a threshold's
    /// disagreement with the best one is charged once to each law.
    fn accuracy_constant(&self) -> f64 {
        2.0
    }

    fn acceptance_probability(
        &self,
        train: &[LabeledExample<usize>],
        test: &[usize],
        _eps: f64,
        _delta: f64,
    ) -> Option<f64> {
        Some(if self.decide(train, test).is_some() { 1.0 } else { 0.0 })
    }

    fn name(&self) -> &str {
        "support"
    }
}

/// A selective classifier whose output law at each point can be enumerated.
pub trait ExactSelective: Send + Sync {
    /// `(decision, probability)` pairs summing to 1.
    fn outcome_distribution(&self, x: usize) -> Vec<(Decision, f64)>;

    /// Probability of ending at each leaf, indexed by node id, when the classifier has leaves.
    fn leaf_distribution(&self, _x: usize) -> Option<Vec<f64>> {
        None
    }
}

impl<H, G> ExactSelective for FnSelective<H, G>
where
    H: Fn(&usize) -> Label + Send + Sync,
    G: Fn(&usize) -> bool + Send + Sync,
{
    fn outcome_distribution(&self, x: usize) -> Vec<(Decision, f64)> {
        vec![(Decision { selected: (self.g)(&x), label: (self.h)(&x) }, 1.0)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactMetrics {
    /// `Pr_test[selected and label wrong]`, against noisy labels when the scenario has noise.
    pub selective_error: f64,
    /// `Pr_train[not selected]`
    pub rejection_rate: f64,
    /// Train mass arriving at each leaf (empty when the classifier has no leaves).
    pub train_leaf_mass: Vec<f64>,
    pub test_leaf_mass: Vec<f64>,
}

pub fn exact_metrics(scenario: &ShiftScenario, c: &dyn ExactSelective) -> ExactMetrics {
    let lam = scenario.flip_rate();
    let mut selective_error = 0.0;
    let mut rejection_rate = 0.0;
    let mut train_leaf_mass: Vec<f64> = Vec::new();
    let mut test_leaf_mass: Vec<f64> = Vec::new();
    for x in 0..scenario.k {
        let (pt, pe) = (scenario.train[x], scenario.test[x]);
        if pt == 0.0 && pe == 0.0 {
            continue;
        }
        for (d, p) in c.outcome_distribution(x) {
            if !d.selected {
                rejection_rate += pt * p;
            } else {
                let wrong = if d.label == scenario.concept[x] { lam } else { 1.0 - lam };
                selective_error += pe * p * wrong;
            }
        }
        if let Some(leaves) = c.leaf_distribution(x) {
            if train_leaf_mass.len() < leaves.len() {
                train_leaf_mass.resize(leaves.len(), 0.0);
                test_leaf_mass.resize(leaves.len(), 0.0);
            }
            for (j, q) in leaves.iter().enumerate() {
                train_leaf_mass[j] += pt * q;
                test_leaf_mass[j] += pe * q;
            }
        }
    }
    ExactMetrics { selective_error, rejection_rate, train_leaf_mass, test_leaf_mass }
}
