//! Single-sample weak distinguishers extracted from a rejecting TDS learner.
//!
//! Phase 1 looks for a frozen train set `T̄` on which the learner accepts
//! train-drawn test sets noticeably more often than test-drawn ones. Phase 2
//! walks the hybrids between an all-train and an all-test test set: at
//! position `i` the learner sees `{b₁..b_{i−1}, x, a₁..a_{m−i}}` with `b` from
//! the test law and `a` from the train law, and the first context whose
//! acceptance gap on a single inserted point clears `1/(5000m)` is returned.
//!
//! The orientation is train minus test throughout, so `evaluate = true`
//! (the learner accepts) leans towards the train law.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{LabeledExample, LabeledSampler, Sampler, TdsLearner};

/// A randomized single-sample test `X → {0,1}`.
pub trait Distinguisher<X>: Send + Sync {
    fn evaluate(&self, x: &X, rng: &mut dyn RngCore) -> bool;

    /// `Pr[evaluate(x) = 1]` over the internal coins, when computable.
    fn exact_probability(&self, _x: &X) -> Option<f64> {
        None
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Distinguisher backed by a plain function of the point.
pub struct FnDistinguisher<F>(pub F);

impl<X, F> Distinguisher<X> for FnDistinguisher<F>
where
    F: Fn(&X) -> bool + Send + Sync,
{
    fn evaluate(&self, x: &X, _rng: &mut dyn RngCore) -> bool {
        (self.0)(x)
    }

    fn exact_probability(&self, x: &X) -> Option<f64> {
        Some(if (self.0)(x) { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WdConfig {
    pub c: f64,
    pub c_prime: f64,
    /// Failure parameter handed to the learner on every run.
    pub learner_delta: f64,
    /// Cap on learner runs over both phases.
    pub budget: u64,
    /// Desk-scale cap on the Phase-2 sample count `ℓ`.
    #[serde(default)]
    pub max_phase2_samples: Option<usize>,
}

impl Default for WdConfig {
    fn default() -> Self {
        Self { c: 8.0, c_prime: 4.0, learner_delta: 0.01, budget: 1_000_000, max_phase2_samples: None }
    }
}

impl WdConfig {
    /// Phase-1 repetitions `r = ⌈C·ln(1/δ)⌉`.
    pub fn repetitions(&self, delta: f64) -> usize {
        ceil_at_least_one(self.c * (1.0 / delta).ln())
    }

    /// Candidate train sets `⌈C′·ln(1/δ)⌉`.
    pub fn train_attempts(&self, delta: f64) -> usize {
        ceil_at_least_one(self.c_prime * (1.0 / delta).ln())
    }

    /// Contexts per hybrid position `⌈C′·m·ln(1/δ)⌉`.
    pub fn context_attempts(&self, m: usize, delta: f64) -> usize {
        ceil_at_least_one(self.c_prime * m as f64 * (1.0 / delta).ln())
    }

    /// Phase-2 samples per side `ℓ = ⌈C·m²·ln(m/δ)⌉`.
    pub fn phase2_samples(&self, m: usize, delta: f64) -> usize {
        let m = m as f64;
        ceil_at_least_one(self.c * m * m * (m / delta).ln())
    }
}

fn ceil_at_least_one(v: f64) -> usize {
    (v.ceil() as usize).max(1)
}

pub const PHASE1_THRESHOLD: f64 = 0.004;

/// Phase-2 acceptance threshold `1/(5000m)`.
pub fn phase2_threshold(m: usize) -> f64 {
    1.0 / (5000.0 * m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(rename_all = "kebab-case")]
pub enum WdFailure {
    #[error("no train set with an acceptance gap")]
    NoTrainSetGap,
    #[error("no hybrid position with a single-sample gap")]
    NoHybridGap,
    #[error("learner-run budget exhausted")]
    BudgetExceeded,
}

/// Bookkeeping of one search, successful or not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WdSearchStats {
    pub learner_runs: u64,
    pub train_sets_tried: usize,
    pub contexts_tried: usize,
    pub p1_hat: f64,
    pub p2_hat: f64,
}

#[derive(Debug, Clone)]
pub struct WdError {
    pub reason: WdFailure,
    pub stats: WdSearchStats,
}

impl std::fmt::Display for WdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} learner runs", self.reason, self.stats.learner_runs)
    }
}

impl std::error::Error for WdError {}

/// The learner frozen on a train set `T̄` and a hybrid context, reading one point.
pub struct WeakDistinguisher<X> {
    learner: Arc<dyn TdsLearner<X>>,
    train_set: Vec<LabeledExample<X>>,
    before: Vec<X>,
    after: Vec<X>,
    eps: f64,
    learner_delta: f64,
    pub stats: WdSearchStats,
}

impl<X: Clone> WeakDistinguisher<X> {
    pub fn new(
        learner: Arc<dyn TdsLearner<X>>,
        train_set: Vec<LabeledExample<X>>,
        before: Vec<X>,
        after: Vec<X>,
        eps: f64,
        learner_delta: f64,
    ) -> Self {
        Self { learner, train_set, before, after, eps, learner_delta, stats: WdSearchStats::default() }
    }

    /// Hybrid position `i` (1-based).
    pub fn position(&self) -> usize {
        self.before.len() + 1
    }

    pub fn train_set(&self) -> &[LabeledExample<X>] {
        &self.train_set
    }

    fn test_set(&self, x: &X) -> Vec<X> {
        let mut t = Vec::with_capacity(self.before.len() + 1 + self.after.len());
        t.extend(self.before.iter().cloned());
        t.push(x.clone());
        t.extend(self.after.iter().cloned());
        t
    }
}

impl<X: Clone + Send + Sync> Distinguisher<X> for WeakDistinguisher<X> {
    fn evaluate(&self, x: &X, rng: &mut dyn RngCore) -> bool {
        self.learner.run(&self.train_set, &self.test_set(x), self.eps, self.learner_delta, rng).is_accept()
    }

    fn exact_probability(&self, x: &X) -> Option<f64> {
        self.learner.acceptance_probability(&self.train_set, &self.test_set(x), self.eps, self.learner_delta)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "learner": self.learner.name(),
            "position": self.position(),
            "train_set_size": self.train_set.len(),
            "p2_hat": self.stats.p2_hat,
        })
    }
}

struct Runner<'a, X> {
    learner: &'a dyn TdsLearner<X>,
    eps: f64,
    learner_delta: f64,
    runs: u64,
    budget: u64,
}

impl<X> Runner<'_, X> {
    fn accepts(&mut self, train: &[LabeledExample<X>], test: &[X], rng: &mut dyn RngCore) -> Result<bool, WdFailure> {
        if self.runs >= self.budget {
            return Err(WdFailure::BudgetExceeded);
        }
        self.runs += 1;
        Ok(self.learner.run(train, test, self.eps, self.learner_delta, rng).is_accept())
    }
}

/// Search for a weak distinguisher between `train` and `test`.
///
/// `eps` is passed through to the learner; `delta` governs the search's own
/// repetition counts.
pub fn get_weak_distinguisher<X: Clone + Send + Sync + 'static>(
    learner: Arc<dyn TdsLearner<X>>,
    train: &dyn LabeledSampler<X>,
    test: &dyn Sampler<X>,
    eps: f64,
    delta: f64,
    config: &WdConfig,
    rng: &mut dyn RngCore,
) -> Result<WeakDistinguisher<X>, WdError> {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    let m = learner.sample_complexity(eps).max(1);
    let mut stats = WdSearchStats::default();
    let mut runner = Runner { learner: learner.as_ref(), eps, learner_delta: config.learner_delta, runs: 0, budget: config.budget };
    let fail = |reason, stats: WdSearchStats, runs| Err(WdError { reason, stats: WdSearchStats { learner_runs: runs, ..stats } });

    // Phase 1
    let r = config.repetitions(delta);
    let mut frozen = None;
    for _ in 0..config.train_attempts(delta) {
        stats.train_sets_tried += 1;
        let s_train = train.draw_labeled_n(m, rng);
        let mut gap = 0i64;
        for _ in 0..r {
            let x_train: Vec<X> = (0..m).map(|_| train.draw_labeled(rng).point).collect();
            let x_test = test.draw_n(m, rng);
            let a = match runner.accepts(&s_train, &x_train, rng) {
                Ok(v) => v,
                Err(e) => return fail(e, stats, runner.runs),
            };
            let b = match runner.accepts(&s_train, &x_test, rng) {
                Ok(v) => v,
                Err(e) => return fail(e, stats, runner.runs),
            };
            gap += a as i64 - b as i64;
        }
        stats.p1_hat = gap as f64 / r as f64;
        if stats.p1_hat >= PHASE1_THRESHOLD {
            frozen = Some(s_train);
            break;
        }
    }
    let Some(t_bar) = frozen else {
        return fail(WdFailure::NoTrainSetGap, stats, runner.runs);
    };

    // Phase 2
    let l = match config.max_phase2_samples {
        Some(cap) => config.phase2_samples(m, delta).min(cap.max(1)),
        None => config.phase2_samples(m, delta),
    };
    let threshold = phase2_threshold(m);
    let attempts = config.context_attempts(m, delta);
    let mut test_set = Vec::with_capacity(m);
    for i in 1..=m {
        for _ in 0..attempts {
            stats.contexts_tried += 1;
            let after: Vec<X> = (0..m - i).map(|_| train.draw_labeled(rng).point).collect();
            let before = test.draw_n(i - 1, rng);
            let mut gap = 0i64;
            for _ in 0..l {
                for (from_train, sign) in [(true, 1i64), (false, -1i64)] {
                    let x = if from_train { train.draw_labeled(rng).point } else { test.draw(rng) };
                    test_set.clear();
                    test_set.extend(before.iter().cloned());
                    test_set.push(x);
                    test_set.extend(after.iter().cloned());
                    match runner.accepts(&t_bar, &test_set, rng) {
                        Ok(true) => gap += sign,
                        Ok(false) => {}
                        Err(e) => return fail(e, stats, runner.runs),
                    }
                }
            }
            stats.p2_hat = gap as f64 / l as f64;
            if stats.p2_hat >= threshold {
                stats.learner_runs = runner.runs;
                let mut wd = WeakDistinguisher::new(learner.clone(), t_bar, before, after, eps, config.learner_delta);
                wd.stats = stats;
                return Ok(wd);
            }
        }
    }
    fail(WdFailure::NoHybridGap, stats, runner.runs)
}

/// Empirical `Pr_D[alg = 1] − Pr_{D′}[alg = 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub estimate: f64,
    pub accept_first: f64,
    pub accept_second: f64,
    pub n_eval: usize,
    /// `+1` when the algorithm leans towards the first law, `-1` towards the second, `0` on a tie.
    pub direction: i8,
}

pub fn measure_advantage<X>(
    alg: &dyn Distinguisher<X>,
    first: &dyn Sampler<X>,
    second: &dyn Sampler<X>,
    n_eval: usize,
    rng: &mut dyn RngCore,
) -> AdvantageReport {
    assert!(n_eval >= 1, "n_eval must be positive");
    let mut a = 0usize;
    let mut b = 0usize;
    for _ in 0..n_eval {
        a += alg.evaluate(&first.draw(rng), rng) as usize;
        b += alg.evaluate(&second.draw(rng), rng) as usize;
    }
    let accept_first = a as f64 / n_eval as f64;
    let accept_second = b as f64 / n_eval as f64;
    let estimate = accept_first - accept_second;
    let direction = if estimate > 0.0 {
        1
    } else if estimate < 0.0 {
        -1
    } else {
        0
    };
    AdvantageReport { estimate, accept_first, accept_second, n_eval, direction }
}

/// `Σ_x (p(x) − p′(x))·Pr[alg(x) = 1]` over finite laws given as `(point, mass)` lists.
pub fn exact_advantage<X>(alg: &dyn Distinguisher<X>, first: &[(X, f64)], second: &[(X, f64)]) -> Option<f64> {
    let side = |law: &[(X, f64)]| -> Option<f64> {
        law.iter().map(|(x, p)| alg.exact_probability(x).map(|q| p * q)).sum()
    };
    Some(side(first)? - side(second)?)
}

/// Exact acceptance probability of `learner(T̄, ·)` on an `m`-point test set
/// whose coordinates are drawn independently, coordinate `j` from `laws[j]`.
fn exact_tuple_acceptance<X: Clone>(
    learner: &dyn TdsLearner<X>,
    t_bar: &[LabeledExample<X>],
    laws: &[&[(X, f64)]],
    eps: f64,
    learner_delta: f64,
) -> Option<f64> {
    fn go<X: Clone>(
        learner: &dyn TdsLearner<X>,
        t_bar: &[LabeledExample<X>],
        laws: &[&[(X, f64)]],
        prefix: &mut Vec<X>,
        weight: f64,
        eps: f64,
        ld: f64,
    ) -> Option<f64> {
        let j = prefix.len();
        if j == laws.len() {
            return learner.acceptance_probability(t_bar, prefix, eps, ld).map(|a| a * weight);
        }
        let mut total = 0.0;
        for (x, p) in laws[j] {
            if *p == 0.0 {
                continue;
            }
            prefix.push(x.clone());
            total += go(learner, t_bar, laws, prefix, weight * p, eps, ld)?;
            prefix.pop();
        }
        Some(total)
    }
    go(learner, t_bar, laws, &mut Vec::with_capacity(laws.len()), 1.0, eps, learner_delta)
}

/// Exact per-position hybrid advantages on finite laws and the `m`-sample
/// acceptance gap they telescope to.
///
/// Position `i` compares `{b₁..b_{i−1}, x, a₁..a_{m−i}}` with `x` from the
/// train law against `x` from the test law, averaged over the context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridAdvantages {
    pub per_position: Vec<f64>,
    /// `Pr[accept | all train] − Pr[accept | all test]`
    pub acceptance_gap: f64,
}

pub fn enumerate_hybrid_advantages<X: Clone>(
    learner: &dyn TdsLearner<X>,
    t_bar: &[LabeledExample<X>],
    train_law: &[(X, f64)],
    test_law: &[(X, f64)],
    m: usize,
    eps: f64,
    learner_delta: f64,
) -> Option<HybridAdvantages> {
    let mut per_position = Vec::with_capacity(m);
    for i in 1..=m {
        let mut laws: Vec<&[(X, f64)]> = Vec::with_capacity(m);
        laws.extend(std::iter::repeat(test_law).take(i - 1));
        laws.push(train_law);
        laws.extend(std::iter::repeat(train_law).take(m - i));
        let with_train = exact_tuple_acceptance(learner, t_bar, &laws, eps, learner_delta)?;
        laws[i - 1] = test_law;
        let with_test = exact_tuple_acceptance(learner, t_bar, &laws, eps, learner_delta)?;
        per_position.push(with_train - with_test);
    }
    let all_train = vec![train_law; m];
    let all_test = vec![test_law; m];
    let acceptance_gap = exact_tuple_acceptance(learner, t_bar, &all_train, eps, learner_delta)?
        - exact_tuple_acceptance(learner, t_bar, &all_test, eps, learner_delta)?;
    Some(HybridAdvantages { per_position, acceptance_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn repetition_counts() {
        let c = WdConfig::default();
        // ln(10) = 2.302…
        assert_eq!(c.repetitions(0.1), 19);
        assert_eq!(c.train_attempts(0.1), 10);
        assert_eq!(c.context_attempts(8, 0.1), 74);
        // 8·64·ln(80) = 2243.6…
        assert_eq!(c.phase2_samples(8, 0.1), 2244);
        assert_eq!(phase2_threshold(8), 1.0 / 40_000.0);
    }

    #[test]
    fn identical_laws_have_no_advantage() {
        let mut rng = rng_from_seed(4);
        let alg = FnDistinguisher(|x: &f64| *x < 0.5);
        let d = |r: &mut dyn RngCore| r.random::<f64>();
        let n = 20_000;
        let rep = measure_advantage(&alg, &d, &d, n, &mut rng);
        assert!(rep.estimate.abs() <= 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn support_indicator_on_disjoint_laws() {
        let mut rng = rng_from_seed(5);
        let alg = FnDistinguisher(|x: &f64| *x < 1.0);
        let d = |r: &mut dyn RngCore| r.random::<f64>();
        let e = |r: &mut dyn RngCore| 1.0 + r.random::<f64>();
        let rep = measure_advantage(&alg, &d, &e, 1000, &mut rng);
        assert_eq!(rep.estimate, 1.0);
        assert_eq!(rep.direction, 1);
        let exact = exact_advantage(&alg, &[(0.5, 1.0)], &[(1.5, 0.5), (0.2, 0.5)]).unwrap();
        assert_eq!(exact, 0.5);
    }
}
