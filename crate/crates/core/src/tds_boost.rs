//! Branching-program booster turning a TDS learner into a PQ learner.
//!
//! Node `(i, t)` sits at level `t` with `1 ≤ i ≤ t ≤ T`. Points enter at
//! `(1,1)`; an internal node runs its weak distinguisher, rebalances the bit
//! so it is a fair coin under the half-train/half-test mixture at that node,
//! and moves to `(i + bit, t + 1)`. Train points drift towards large `i`,
//! test points towards small `i`. Leaves carry the selector value: `1`
//! (predict) or `0` (abstain).
//!
//! Labels follow the train = 1 / test = 0 convention: `p¹` is the train mass
//! reaching a node and `p⁰` the test mass.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::domain::{
    Classifier, Decision, Hypothesis, Label, LabeledExample, LabeledSampler, Sampler, SelectiveClassifier,
    TdsLearner, TdsOutcome,
};
use crate::estimate::{default_cap, rejection_sample, EstimateSpec};
use crate::toy::ExactSelective;
use crate::weak_distinguisher::{get_weak_distinguisher, Distinguisher, WdConfig};

/// Probability of keeping the distinguisher's bit: `1/(1 + 2|q̂ − 1/2|)`.
pub fn balance_keep_probability(q_hat: f64) -> f64 {
    1.0 / (1.0 + 2.0 * (q_hat - 0.5).abs())
}

/// The bit nearest `q̂`, ties to 1.
fn nearest_bit(q_hat: f64) -> bool {
    q_hat >= 0.5
}

/// Rebalance `w` so that it is a fair coin when `w ~ Bernoulli(q̂)`.
pub fn balance(q_hat: f64, w: bool, rng: &mut dyn RngCore) -> bool {
    let keep = balance_keep_probability(q_hat);
    if keep >= 1.0 || rng.random_bool(keep) {
        w
    } else {
        !nearest_bit(q_hat)
    }
}

/// `Pr[balance(q̂, w) = 1]` when `Pr[w = 1] = p_w`.
pub fn balance_probability(q_hat: f64, p_w: f64) -> f64 {
    let keep = balance_keep_probability(q_hat);
    let fallback = if nearest_bit(q_hat) { 0.0 } else { 1.0 };
    keep * p_w + (1.0 - keep) * fallback
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Mode {
    Realizable,
    Agnostic { eta: f64 },
}

impl Mode {
    pub fn eta(&self) -> Option<f64> {
        match self {
            Mode::Realizable => None,
            Mode::Agnostic { eta } => Some(*eta),
        }
    }
}

/// Knobs that are not fixed by the construction itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostSettings {
    /// The "sufficiently large constant" `C`.
    pub c: f64,
    /// Upper clamp on the number of levels `T`.
    pub max_levels: usize,
    /// Failure parameter handed to the learner.
    pub learner_delta: f64,
    /// Desk-scale caps on the estimate sample counts.
    pub mass_samples: Option<usize>,
    pub accept_runs: Option<usize>,
    pub q_samples: Option<usize>,
    /// Cap on the majority-vote repetitions `r`.
    pub max_majority_runs: Option<usize>,
    pub wd: WdConfig,
}

impl Default for BoostSettings {
    fn default() -> Self {
        Self {
            c: 4.0,
            max_levels: 64,
            learner_delta: 0.01,
            mass_samples: None,
            accept_runs: None,
            q_samples: None,
            max_majority_runs: None,
            wd: WdConfig::default(),
        }
    }
}

impl BoostSettings {
    /// Caps used by the bundled experiments.
    pub fn desk_scale() -> Self {
        Self {
            max_levels: 12,
            mass_samples: Some(20_000),
            accept_runs: Some(200),
            q_samples: Some(4_000),
            max_majority_runs: Some(31),
            wd: WdConfig { budget: 1_000_000, max_phase2_samples: Some(2_000), ..WdConfig::default() },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    pub levels: usize,
    pub delta_prime: f64,
    pub r: usize,
    pub p_min: f64,
    pub a_min: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta: Option<f64>,
}

impl BoostParams {
    pub fn new(m: usize, eps: f64, delta: f64, mode: Mode, settings: &BoostSettings) -> Self {
        assert!(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0);
        let c = settings.c;
        let full = (c * (m * m) as f64 * (1.0 / eps).ln()).ceil() as usize;
        let levels = full.clamp(1, settings.max_levels.max(1));
        let tf = levels as f64;
        let delta_prime = delta / (c * tf.powi(10));
        let r = ((c * (tf / (eps * delta)).ln()).ceil() as usize).max(1);
        let pairs = 4.0 * tf * (tf + 1.0);
        let eta = mode.eta();
        if let Some(e) = eta {
            assert!(e > 0.0 && e <= 1.0, "eta must lie in (0,1]");
        }
        Self {
            m,
            eps,
            delta,
            levels,
            delta_prime,
            r,
            p_min: 3.0 * eps / pairs,
            a_min: 0.95,
            gamma1: eps * eta.unwrap_or(1.0) / pairs,
            gamma2: 1.0 / (c * m as f64),
            eta,
        }
    }
}

/// Index of node `(i, t)` in level order.
pub fn node_index(i: usize, t: usize) -> usize {
    debug_assert!(1 <= i && i <= t);
    t * (t - 1) / 2 + (i - 1)
}

pub fn node_count(levels: usize) -> usize {
    levels * (levels + 1) / 2
}

pub enum NodeKind<X> {
    /// Only present while the program is being built.
    Pending,
    Internal { wd: Arc<dyn Distinguisher<X>>, q_hat: f64 },
    /// One law rarely reaches the node; the label goes to the other one.
    LeafRare { label: bool },
    LeafAccepted { hypothesis: Hypothesis<X> },
    LeafLevelT { label: bool },
    LeafAgnostic,
}

impl<X> NodeKind<X> {
    /// Selector value at a leaf.
    pub fn label(&self) -> Option<bool> {
        match self {
            NodeKind::Pending | NodeKind::Internal { .. } => None,
            NodeKind::LeafRare { label } | NodeKind::LeafLevelT { label } => Some(*label),
            NodeKind::LeafAccepted { .. } => Some(true),
            NodeKind::LeafAgnostic => Some(false),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Pending => "pending",
            NodeKind::Internal { .. } => "internal",
            NodeKind::LeafRare { .. } => "leaf-rare",
            NodeKind::LeafAccepted { .. } => "leaf-accepted",
            NodeKind::LeafLevelT { .. } => "leaf-level-t",
            NodeKind::LeafAgnostic => "leaf-agnostic",
        }
    }
}

/// Estimates recorded while building a node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub p_train: Option<f64>,
    pub p_test: Option<f64>,
    pub a_hat: Option<f64>,
    pub exhausted: bool,
    pub note: Option<String>,
}

pub struct Node<X> {
    pub i: usize,
    pub t: usize,
    pub kind: NodeKind<X>,
    pub stats: NodeStats,
}

pub struct BranchingProgram<X> {
    levels: usize,
    nodes: Vec<Node<X>>,
}

impl<X> BranchingProgram<X> {
    /// All nodes pending.
    pub fn new(levels: usize) -> Self {
        assert!(levels >= 1);
        let mut nodes = Vec::with_capacity(node_count(levels));
        for t in 1..=levels {
            for i in 1..=t {
                nodes.push(Node { i, t, kind: NodeKind::Pending, stats: NodeStats::default() });
            }
        }
        Self { levels, nodes }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn nodes(&self) -> &[Node<X>] {
        &self.nodes
    }

    pub fn node(&self, i: usize, t: usize) -> &Node<X> {
        &self.nodes[node_index(i, t)]
    }

    pub fn set(&mut self, i: usize, t: usize, kind: NodeKind<X>) {
        assert!(
            !matches!(kind, NodeKind::Internal { .. }) || t < self.levels,
            "internal nodes exist only below the last level"
        );
        self.nodes[node_index(i, t)].kind = kind;
    }

    fn stats_mut(&mut self, i: usize, t: usize) -> &mut NodeStats {
        &mut self.nodes[node_index(i, t)].stats
    }

    /// Follow internal nodes from the root with fresh coins; returns the
    /// first non-internal node, as a `(i, t)` pair.
    pub fn route(&self, x: &X, rng: &mut dyn RngCore) -> (usize, usize) {
        let (mut i, mut t) = (1, 1);
        while let NodeKind::Internal { wd, q_hat } = &self.node(i, t).kind {
            let w = wd.evaluate(x, rng);
            if balance(*q_hat, w, rng) {
                i += 1;
            }
            t += 1;
        }
        (i, t)
    }

    /// Exact probability of ending at each node (indexed by [`node_index`]),
    /// when every distinguisher on the way exposes its exact probability.
    pub fn leaf_distribution(&self, x: &X) -> Option<Vec<f64>> {
        let mut mass = vec![0.0; self.nodes.len()];
        mass[0] = 1.0;
        let mut out = vec![0.0; self.nodes.len()];
        for t in 1..=self.levels {
            for i in 1..=t {
                let idx = node_index(i, t);
                let p = mass[idx];
                if p == 0.0 {
                    continue;
                }
                match &self.nodes[idx].kind {
                    NodeKind::Internal { wd, q_hat } => {
                        let up = balance_probability(*q_hat, wd.exact_probability(x)?);
                        mass[node_index(i + 1, t + 1)] += p * up;
                        mass[node_index(i, t + 1)] += p * (1.0 - up);
                    }
                    _ => out[idx] += p,
                }
            }
        }
        Some(out)
    }

    pub fn is_complete(&self) -> bool {
        self.nodes.iter().all(|n| !matches!(n.kind, NodeKind::Pending))
    }

    /// Node list with kinds, labels, estimates, `q̂` values and descriptions of
    /// distinguishers and leaf hypotheses. Learners are referenced by name.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .map(|n| {
                let mut v = serde_json::json!({
                    "i": n.i,
                    "t": n.t,
                    "kind": n.kind.name(),
                    "stats": n.stats,
                });
                if let Some(l) = n.kind.label() {
                    v["label"] = serde_json::json!(l as u8);
                }
                match &n.kind {
                    NodeKind::Internal { wd, q_hat } => {
                        v["q_hat"] = serde_json::json!(q_hat);
                        v["wd"] = wd.describe();
                    }
                    NodeKind::LeafAccepted { hypothesis } => v["hypothesis"] = hypothesis.describe(),
                    _ => {}
                }
                v
            })
            .collect();
        serde_json::json!({ "levels": self.levels, "nodes": nodes })
    }
}

/// Pointwise majority of hypotheses; ties go to `+1`.
#[derive(Clone)]
pub struct MajorityHypothesis<X> {
    pub members: Vec<Hypothesis<X>>,
}

impl<X> std::fmt::Debug for MajorityHypothesis<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MajorityHypothesis").field("members", &self.members).finish()
    }
}

impl<X> Classifier<X> for MajorityHypothesis<X> {
    fn predict(&self, x: &X) -> Label {
        let score: i64 = self.members.iter().map(|h| h.predict(x).value() as i64).sum();
        Label::from_bool(score >= 0)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "majority": self.members.iter().map(|h| h.describe()).collect::<Vec<_>>() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("all {runs} runs rejected")]
pub struct AllRunsRejected {
    pub runs: usize,
}

/// One learner run on fresh conditional samples.
fn run_once<X>(
    learner: &dyn TdsLearner<X>,
    train: &dyn LabeledSampler<X>,
    test: &dyn Sampler<X>,
    eps: f64,
    delta: f64,
    rng: &mut dyn RngCore,
) -> TdsOutcome<X> {
    let m = learner.sample_complexity(eps);
    let s = train.draw_labeled_n(m, rng);
    let x = test.draw_n(m, rng);
    learner.run(&s, &x, eps, delta, rng)
}

/// Run the learner `r` times and take the majority of the accepting runs' hypotheses.
pub fn majority_vote_tds<X>(
    learner: &dyn TdsLearner<X>,
    train: &dyn LabeledSampler<X>,
    test: &dyn Sampler<X>,
    eps: f64,
    delta: f64,
    r: usize,
    rng: &mut dyn RngCore,
) -> Result<MajorityHypothesis<X>, AllRunsRejected> {
    assert!(r >= 1, "r must be at least 1");
    let members: Vec<Hypothesis<X>> = (0..r)
        .filter_map(|_| match run_once(learner, train, test, eps, delta, rng) {
            TdsOutcome::Accept(h) => Some(h),
            TdsOutcome::Reject => None,
        })
        .collect();
    if members.is_empty() {
        Err(AllRunsRejected { runs: r })
    } else {
        Ok(MajorityHypothesis { members })
    }
}

/// Unlabeled sampler viewed as a labeled one (labels are never read).
struct Unlabeled<'a, X>(&'a dyn Sampler<X>);

impl<X> LabeledSampler<X> for Unlabeled<'_, X> {
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<X> {
        LabeledExample::new(self.0.draw(rng), Label::Pos)
    }
}

/// Draws from `base` conditioned on reaching node `(i, t)` of a partial
/// program. Points already routed to the node are used first, each once;
/// after that rejection sampling takes over. If rejection sampling runs out
/// of attempts the sampler flags itself exhausted and recycles pooled points.
struct Conditional<'a, X> {
    base: &'a dyn LabeledSampler<X>,
    program: &'a BranchingProgram<X>,
    target: (usize, usize),
    fresh: Mutex<Vec<LabeledExample<X>>>,
    seen: Vec<LabeledExample<X>>,
    cap: usize,
    exhausted: AtomicBool,
}

impl<'a, X: Clone + Send + Sync> Conditional<'a, X> {
    fn new(
        base: &'a dyn LabeledSampler<X>,
        program: &'a BranchingProgram<X>,
        target: (usize, usize),
        pool: Vec<LabeledExample<X>>,
        cap: usize,
    ) -> Self {
        let mut fresh = pool.clone();
        fresh.reverse();
        Self { base, program, target, fresh: Mutex::new(fresh), seen: pool, cap, exhausted: AtomicBool::new(false) }
    }

    fn is_exhausted(&self) -> bool {
        self.exhausted.load(Ordering::Relaxed)
    }

    fn next(&self, rng: &mut dyn RngCore) -> LabeledExample<X> {
        if let Some(ex) = self.fresh.lock().expect("pool lock").pop() {
            return ex;
        }
        if !self.is_exhausted() {
            let base = |r: &mut dyn RngCore| self.base.draw_labeled(r);
            let drawn = rejection_sample(&base, |ex, r| self.program.route(&ex.point, r) == self.target, self.cap, rng);
            match drawn {
                Ok(ex) => return ex,
                Err(_) => self.exhausted.store(true, Ordering::Relaxed),
            }
        }
        if self.seen.is_empty() {
            self.base.draw_labeled(rng)
        } else {
            self.seen[rng.random_range(0..self.seen.len())].clone()
        }
    }
}

impl<X: Clone + Send + Sync> LabeledSampler<X> for Conditional<'_, X> {
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<X> {
        self.next(rng)
    }
}

impl<X: Clone + Send + Sync> Sampler<X> for Conditional<'_, X> {
    fn draw(&self, rng: &mut dyn RngCore) -> X {
        self.next(rng).point
    }
}

/// Route a batch from `base` and bucket the arrivals at level `t`.
fn routed_batch<X: Clone>(
    program: &BranchingProgram<X>,
    base: &dyn LabeledSampler<X>,
    t: usize,
    n: usize,
    rng: &mut dyn RngCore,
) -> Vec<Vec<LabeledExample<X>>> {
    let mut pools = vec![Vec::new(); t];
    for _ in 0..n {
        let ex = base.draw_labeled(rng);
        let (i, tt) = program.route(&ex.point, rng);
        if tt == t {
            pools[i - 1].push(ex);
        }
    }
    pools
}

/// Build the program level by level.
pub fn build_program<X: Clone + Send + Sync + 'static>(
    learner: Arc<dyn TdsLearner<X>>,
    train: &dyn LabeledSampler<X>,
    test: &dyn Sampler<X>,
    params: &BoostParams,
    settings: &BoostSettings,
    rng: &mut dyn RngCore,
) -> BranchingProgram<X> {
    let levels = params.levels;
    let mut program = BranchingProgram::new(levels);
    let test_labeled = Unlabeled(test);
    let mass_spec = capped(EstimateSpec::new(params.gamma1, params.delta_prime), settings.mass_samples);
    let accept_spec = capped(EstimateSpec::new(0.01, params.delta_prime), settings.accept_runs);
    let q_spec = capped(EstimateSpec::new(params.gamma2.min(0.5), params.delta_prime), settings.q_samples);
    let r = settings.max_majority_runs.map_or(params.r, |c| params.r.min(c.max(1)));
    let cap = default_cap(params.p_min);
    let (eps, ld) = (params.eps, settings.learner_delta);

    for t in 1..=levels {
        if t == levels {
            for i in 1..=t {
                program.set(i, t, NodeKind::LeafLevelT { label: 2 * i >= levels });
            }
            break;
        }
        let n = mass_spec.sample_count();
        let train_pools = routed_batch(&program, train, t, n, rng);
        let test_pools = routed_batch(&program, &test_labeled, t, n, rng);
        let mut decided: Vec<(usize, NodeKind<X>, NodeStats)> = Vec::with_capacity(t);
        for (i, (train_pool, test_pool)) in (1..=t).zip(train_pools.into_iter().zip(test_pools)) {
            let mut stats = NodeStats {
                p_train: Some(train_pool.len() as f64 / n as f64),
                p_test: Some(test_pool.len() as f64 / n as f64),
                ..NodeStats::default()
            };
            let (p1, p0) = (stats.p_train.unwrap_or(0.0), stats.p_test.unwrap_or(0.0));
            if p1 < params.p_min {
                decided.push((i, NodeKind::LeafRare { label: false }, stats));
                continue;
            }
            if p0 < params.p_min {
                decided.push((i, NodeKind::LeafRare { label: true }, stats));
                continue;
            }
            if let Some(eta) = params.eta {
                if p1 <= eta * p0 {
                    decided.push((i, NodeKind::LeafAgnostic, stats));
                    continue;
                }
            }
            let g1 = Conditional::new(train, &program, (i, t), train_pool, cap);
            let g0 = Conditional::new(&test_labeled, &program, (i, t), test_pool, cap);
            let kind = decide_node(learner.clone(), &g1, &g0, &accept_spec, &q_spec, r, eps, ld, params, settings, &mut stats, rng);
            let kind = if g1.is_exhausted() {
                stats.exhausted = true;
                NodeKind::LeafRare { label: false }
            } else if g0.is_exhausted() {
                stats.exhausted = true;
                NodeKind::LeafRare { label: true }
            } else {
                kind
            };
            decided.push((i, kind, stats));
        }
        for (i, kind, stats) in decided {
            program.set(i, t, kind);
            *program.stats_mut(i, t) = stats;
        }
    }
    debug_assert!(program.is_complete());
    program
}

fn capped(spec: EstimateSpec, cap: Option<usize>) -> EstimateSpec {
    match cap {
        Some(c) => spec.capped(c),
        None => spec,
    }
}

#[allow(clippy::too_many_arguments)]
fn decide_node<X: Clone + Send + Sync + 'static>(
    learner: Arc<dyn TdsLearner<X>>,
    g1: &Conditional<'_, X>,
    g0: &Conditional<'_, X>,
    accept_spec: &EstimateSpec,
    q_spec: &EstimateSpec,
    r: usize,
    eps: f64,
    ld: f64,
    params: &BoostParams,
    settings: &BoostSettings,
    stats: &mut NodeStats,
    rng: &mut dyn RngCore,
) -> NodeKind<X> {
    let runs = accept_spec.sample_count();
    let accepted = (0..runs).filter(|_| run_once(learner.as_ref(), g1, g0, eps, ld, rng).is_accept()).count();
    let a_hat = accepted as f64 / runs as f64;
    stats.a_hat = Some(a_hat);
    if a_hat >= params.a_min {
        match majority_vote_tds(learner.as_ref(), g1, g0, eps, ld, r, rng) {
            Ok(h) => return NodeKind::LeafAccepted { hypothesis: Arc::new(h) },
            Err(e) => {
                log::warn!("node accepted at a = {a_hat} but {e}; building a distinguisher instead");
                stats.note = Some(format!("majority vote: {e}"));
            }
        }
    }
    match get_weak_distinguisher(learner, g1, g0, eps, params.delta_prime, &settings.wd, rng) {
        Ok(wd) => {
            let wd: Arc<dyn Distinguisher<X>> = Arc::new(wd);
            let n = q_spec.sample_count();
            let ones = (0..n)
                .filter(|_| {
                    let x = if rng.random_bool(0.5) { g1.draw(rng) } else { g0.draw(rng) };
                    wd.evaluate(&x, rng)
                })
                .count();
            NodeKind::Internal { wd, q_hat: ones as f64 / n as f64 }
        }
        Err(e) => {
            log::warn!("weak distinguisher search failed ({e}); abstaining at this node");
            stats.note = Some(format!("weak distinguisher: {e}"));
            NodeKind::LeafRare { label: false }
        }
    }
}

/// Selective classifier read off a finished program: `g` is the leaf label,
/// `h` the leaf hypothesis at accepted leaves and `+1` elsewhere.
pub struct BoostedSelectiveClassifier<X> {
    pub program: Arc<BranchingProgram<X>>,
    pub params: BoostParams,
}

impl<X> BoostedSelectiveClassifier<X> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "params": self.params, "program": self.program.to_json() })
    }
}

fn leaf_decision<X>(kind: &NodeKind<X>, x: &X) -> Decision {
    let label = match kind {
        NodeKind::LeafAccepted { hypothesis } => hypothesis.predict(x),
        _ => Label::Pos,
    };
    Decision { selected: kind.label().unwrap_or(false), label }
}

impl<X: Send + Sync> SelectiveClassifier<X> for BoostedSelectiveClassifier<X> {
    fn classify(&self, x: &X, rng: &mut dyn RngCore) -> Decision {
        let (i, t) = self.program.route(x, rng);
        leaf_decision(&self.program.node(i, t).kind, x)
    }
}

impl ExactSelective for BoostedSelectiveClassifier<usize> {
    fn outcome_distribution(&self, x: usize) -> Vec<(Decision, f64)> {
        let leaves = self.leaf_distribution(x).expect("every distinguisher in the program has an exact probability");
        leaves
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(idx, p)| (leaf_decision(&self.program.nodes()[idx].kind, &x), *p))
            .collect()
    }

    fn leaf_distribution(&self, x: usize) -> Option<Vec<f64>> {
        self.program.leaf_distribution(&x)
    }
}

/// Build the program for `learner` on `(train, test)` and wrap it as a selective classifier.
pub fn boost<X: Clone + Send + Sync + 'static>(
    learner: Arc<dyn TdsLearner<X>>,
    train: &dyn LabeledSampler<X>,
    test: &dyn Sampler<X>,
    eps: f64,
    delta: f64,
    mode: Mode,
    settings: &BoostSettings,
    rng: &mut dyn RngCore,
) -> BoostedSelectiveClassifier<X> {
    let m = learner.sample_complexity(eps);
    let params = BoostParams::new(m, eps, delta, mode, settings);
    let program = build_program(learner, train, test, &params, settings, rng);
    BoostedSelectiveClassifier { program: Arc::new(program), params }
}
