//! Membership-query PQ learner for halfspaces.
//!
//! Each round puts the residual train points in (approximate) radial
//! isotropic position inside some subspace `V`, learns the target there with
//! the margin learner through the pulled-back oracle `f ∘ P_Vᵀ A⁻¹`, and
//! removes the points that stage selects. The stages form a decision list:
//! the first stage that accepts a point labels it. Every selected point is
//! labeled correctly whenever each stage's margin guarantee holds.
//!
//! Non-homogeneous targets `sign(w·x − θ)` are handled through the lift
//! `x ↦ (1, x)`; the lifting coordinate is the first one.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Decision, Label, MembershipOracle, OracleError, Point, SelectiveClassifier};
use crate::forster::{forster_decompose, ForsterError, ForsterStage};
use crate::linalg;
use crate::margin::{learn_high_margin_halfspace, learn_with_samples, MarginClassifier};
use crate::scalar::Real;

/// `Φ(x) = (1, x)`
pub fn homogenize<T: Real>(x: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(T::one());
    out.extend_from_slice(x);
    out
}

/// `f(x/c)·sign(c)` for `p = (c, x)`; `c = 0` is the degenerate slice.
pub fn lifted_query<T: Real>(f: &dyn MembershipOracle<[T]>, p: &[T]) -> Result<Label, OracleError> {
    let (&c, x) = p.split_first().ok_or(OracleError::DimensionMismatch { expected: 1, got: 0 })?;
    if c == T::zero() {
        return Err(OracleError::DegenerateQuery);
    }
    let scaled: Vec<T> = x.iter().map(|&v| v / c).collect();
    let y = f.query(&scaled)?;
    Ok(if c > T::zero() { y } else { y.flip() })
}

/// Homogeneous oracle on `R^{n+1}` answering through a general-halfspace oracle on `R^n`.
pub struct LiftedOracle<'a, T> {
    inner: &'a dyn MembershipOracle<[T]>,
    queries: AtomicU64,
    degenerate: AtomicU64,
}

impl<'a, T: Real> LiftedOracle<'a, T> {
    pub fn new(inner: &'a dyn MembershipOracle<[T]>) -> Self {
        Self { inner, queries: AtomicU64::new(0), degenerate: AtomicU64::new(0) }
    }

    pub fn degenerate_count(&self) -> u64 {
        self.degenerate.load(Ordering::Relaxed)
    }
}

impl<T: Real> MembershipOracle<[T]> for LiftedOracle<'_, T> {
    fn query(&self, p: &[T]) -> Result<Label, OracleError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let r = lifted_query(self.inner, p);
        if r == Err(OracleError::DegenerateQuery) {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
        }
        r
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Oracle on the stage coordinates: `z ↦ f(P_Vᵀ A⁻¹ z)`.
struct StageOracle<'a, T> {
    f: &'a dyn MembershipOracle<[T]>,
    stage: &'a ForsterStage<T>,
    queries: AtomicU64,
}

impl<T: Real> MembershipOracle<[T]> for StageOracle<'_, T> {
    fn query(&self, z: &[T]) -> Result<Label, OracleError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.f.query(&self.stage.pullback(z))
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct StageClassifier<T> {
    pub stage: ForsterStage<T>,
    pub mc: MarginClassifier<T>,
}

impl<T: Real> StageClassifier<T> {
    /// The stage's label if it selects `x`.
    pub fn accepts(&self, x: &[T]) -> Option<Label> {
        if !self.stage.contains(x) {
            return None;
        }
        let img = self.stage.normalized_image(x)?;
        self.mc.g(&img).then(|| self.mc.h(&img))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct HalfspacePqClassifier<T> {
    /// Input dimension (before lifting).
    pub dim: usize,
    /// Whether inputs are lifted by [`homogenize`] before the stages see them.
    pub lifted: bool,
    pub stages: Vec<StageClassifier<T>>,
}

impl<T: Real> HalfspacePqClassifier<T> {
    pub fn empty(dim: usize) -> Self {
        Self { dim, lifted: false, stages: Vec::new() }
    }

    pub fn evaluate_selective(&self, x: &[T]) -> Result<Decision, OracleError> {
        if x.len() != self.dim {
            return Err(OracleError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let lifted;
        let x = if self.lifted {
            lifted = homogenize(x);
            &lifted[..]
        } else {
            x
        };
        Ok(self
            .stages
            .iter()
            .find_map(|s| s.accepts(x))
            .map(Decision::predict)
            .unwrap_or(Decision::ABSTAIN))
    }

    /// Serialized form: one `{basis, A, w_hat, gamma}` object per stage.
    pub fn to_json(&self) -> serde_json::Value {
        let stages: Vec<_> = self
            .stages
            .iter()
            .map(|s| {
                serde_json::json!({
                    "basis": s.stage.basis(),
                    "A": s.stage.matrix(),
                    "w_hat": s.mc.w_hat,
                    "gamma": s.mc.gamma,
                })
            })
            .collect();
        serde_json::json!({ "dim": self.dim, "lifted": self.lifted, "stages": stages })
    }
}

impl<T: Real> SelectiveClassifier<Point<T>> for HalfspacePqClassifier<T> {
    fn classify(&self, x: &Point<T>, _rng: &mut dyn RngCore) -> Decision {
        self.evaluate_selective(x).unwrap_or(Decision::ABSTAIN)
    }
}

#[derive(Debug, Error)]
pub enum PqError {
    #[error("empty training set")]
    EmptyTrain,
    #[error("training point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error(transparent)]
    Forster(#[from] ForsterError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitReason {
    /// `|R|/|S| < ε/2`
    MassCondition,
    RoundCap,
    /// The residual set has no point in the stage subspace.
    EmptyIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqConfig {
    pub eps: f64,
    pub delta: f64,
    /// Overrides the margin learner's query count per round.
    #[serde(default)]
    pub margin_samples: Option<usize>,
    /// Approximation level of each Forster stage.
    #[serde(default = "PqConfig::default_forster_eps")]
    pub forster_eps: f64,
}

impl PqConfig {
    pub fn new(eps: f64, delta: f64) -> Self {
        Self { eps, delta, margin_samples: None, forster_eps: 0.5 }
    }

    fn default_forster_eps() -> f64 {
        0.5
    }

    /// `⌈4n·ln(2/ε)⌉`
    pub fn round_cap(&self, n: usize) -> usize {
        (4.0 * n as f64 * (2.0 / self.eps).ln()).ceil() as usize
    }

    /// `δ / (24n·ln(2/ε))`
    pub fn round_delta(&self, n: usize) -> f64 {
        self.delta / (24.0 * n as f64 * (2.0 / self.eps).ln())
    }

    /// `1/(2√n)`
    pub fn gamma(&self, n: usize) -> f64 {
        1.0 / (2.0 * (n as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqReport {
    pub rounds: usize,
    pub exit: ExitReason,
    /// `|R|` at exit.
    pub residual: usize,
    pub train_size: usize,
    pub queries: u64,
    pub degenerate_queries: u64,
    pub stage_dims: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PqOutcome<T> {
    pub classifier: HalfspacePqClassifier<T>,
    pub report: PqReport,
}

/// Learner for a homogeneous target `sign(w·x)` on `R^n`.
pub fn learn_halfspace<T: Real>(
    train: &[Point<T>],
    config: &PqConfig,
    f: &dyn MembershipOracle<[T]>,
    rng: &mut dyn RngCore,
) -> Result<PqOutcome<T>, PqError> {
    let n = check_train(train)?;
    let unit: Vec<Point<T>> = train.iter().filter_map(|p| p.normalized()).collect();
    let before = f.query_count();
    let (stages, mut report) = learn_stages(&unit, n, config, f, rng)?;
    report.train_size = train.len();
    report.queries = f.query_count() - before;
    Ok(PqOutcome { classifier: HalfspacePqClassifier { dim: n, lifted: false, stages }, report })
}

/// Learner for an arbitrary target `sign(w·x − θ)`: lift, learn in `R^{n+1}`, compose with the lift.
pub fn learn_general_halfspace<T: Real>(
    train: &[Point<T>],
    config: &PqConfig,
    f: &dyn MembershipOracle<[T]>,
    rng: &mut dyn RngCore,
) -> Result<PqOutcome<T>, PqError> {
    let n = check_train(train)?;
    let lifted: Vec<Point<T>> = train
        .iter()
        .map(|p| Point(linalg::normalize(&homogenize(p)).expect("lifted points have norm ≥ 1")))
        .collect();
    let oracle = LiftedOracle::new(f);
    let (stages, mut report) = learn_stages(&lifted, n + 1, config, &oracle, rng)?;
    report.train_size = train.len();
    report.queries = oracle.query_count();
    report.degenerate_queries = oracle.degenerate_count();
    Ok(PqOutcome { classifier: HalfspacePqClassifier { dim: n, lifted: true, stages }, report })
}

fn check_train<T: Real>(train: &[Point<T>]) -> Result<usize, PqError> {
    let n = train.first().ok_or(PqError::EmptyTrain)?.dim();
    for (index, p) in train.iter().enumerate() {
        if p.dim() != n {
            return Err(PqError::DimensionMismatch { index, expected: n, got: p.dim() });
        }
    }
    Ok(n)
}

fn learn_stages<T: Real>(
    train: &[Point<T>],
    n: usize,
    config: &PqConfig,
    f: &dyn MembershipOracle<[T]>,
    rng: &mut dyn RngCore,
) -> Result<(Vec<StageClassifier<T>>, PqReport), PqError> {
    assert!(config.eps > 0.0 && config.eps < 1.0, "eps must lie in (0,1)");
    assert!(config.delta > 0.0 && config.delta < 1.0, "delta must lie in (0,1)");
    let cap = config.round_cap(n);
    let round_delta = config.round_delta(n);
    let gamma = T::of(config.gamma(n));
    let total = train.len();
    let mut residual: Vec<Point<T>> = train.iter().filter(|p| p.norm() > T::tiny_norm()).cloned().collect();
    let mut stages = Vec::new();
    let mut dims = Vec::new();
    let mut exit = ExitReason::RoundCap;
    for _ in 0..cap {
        if (residual.len() as f64) < config.eps / 2.0 * total as f64 {
            exit = ExitReason::MassCondition;
            break;
        }
        let stage = forster_decompose(&residual, round_delta, T::of(config.forster_eps), rng)?;
        if !residual.iter().any(|x| stage.contains(x)) {
            exit = ExitReason::EmptyIntersection;
            break;
        }
        let d = stage.dim();
        let oracle = StageOracle { f, stage: &stage, queries: AtomicU64::new(0) };
        let mc = match config.margin_samples {
            Some(l) => learn_with_samples(&oracle, d, gamma, l, rng)?,
            None => learn_high_margin_halfspace(&oracle, d, gamma, round_delta, rng)?,
        };
        let sc = StageClassifier { stage, mc };
        residual.retain(|x| sc.accepts(x).is_none());
        dims.push(d);
        stages.push(sc);
    }
    if exit == ExitReason::RoundCap && (residual.len() as f64) < config.eps / 2.0 * total as f64 {
        exit = ExitReason::MassCondition;
    }
    let report = PqReport {
        rounds: stages.len(),
        exit,
        residual: residual.len(),
        train_size: total,
        queries: 0,
        degenerate_queries: 0,
        stage_dims: dims,
    };
    Ok((stages, report))
}
