//! Shared domain types: points, labels, samplers, oracles and the learner
//! interfaces every other module is written against.

use std::fmt::{self, Debug};
use std::ops::{Deref, DerefMut};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// A binary label in `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `sign(v)` with the convention `sign(0) = +1`.
    #[inline]
    pub fn from_sign<T: Real>(v: T) -> Self {
        if v >= T::zero() {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    #[inline]
    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }
}

impl std::ops::Mul for Label {
    type Output = Label;
    fn mul(self, rhs: Label) -> Label {
        Label::from_bool(self == rhs)
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.value()
    }
}

impl TryFrom<i8> for Label {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// A point in `R^n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Point<T>(pub Vec<T>);

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> T {
        crate::linalg::norm(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// The point scaled to unit length, or `None` if its norm is below [`Real::tiny_norm`].
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n < T::tiny_norm() {
            None
        } else {
            Some(Point(self.0.iter().map(|&v| v / n).collect()))
        }
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for Point<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Point<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample<X> {
    pub point: X,
    pub label: Label,
}

impl<X> LabeledExample<X> {
    pub fn new(point: X, label: Label) -> Self {
        Self { point, label }
    }
}

/// Sample access to an (unlabeled) distribution.
pub trait Sampler<X>: Send + Sync {
    fn draw(&self, rng: &mut dyn RngCore) -> X;

    fn draw_n(&self, n: usize, rng: &mut dyn RngCore) -> Vec<X> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

impl<X, F> Sampler<X> for F
where
    F: Fn(&mut dyn RngCore) -> X + Send + Sync,
{
    fn draw(&self, rng: &mut dyn RngCore) -> X {
        self(rng)
    }
}

/// Sample access to a labeled distribution.
pub trait LabeledSampler<X>: Send + Sync {
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<X>;

    fn draw_labeled_n(&self, n: usize, rng: &mut dyn RngCore) -> Vec<LabeledExample<X>> {
        (0..n).map(|_| self.draw_labeled(rng)).collect()
    }
}

/// Marginal of a labeled sampler.
pub struct Marginal<'a, X>(pub &'a dyn LabeledSampler<X>);

impl<X> Sampler<X> for Marginal<'_, X> {
    fn draw(&self, rng: &mut dyn RngCore) -> X {
        self.0.draw_labeled(rng).point
    }
}

/// Realizable labeled distribution: a marginal sampler paired with a concept.
pub struct ConceptSampler<S, F> {
    pub base: S,
    pub concept: F,
}

impl<X, S, F> LabeledSampler<X> for ConceptSampler<S, F>
where
    S: Sampler<X>,
    F: Fn(&X) -> Label + Send + Sync,
{
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<X> {
        let point = self.base.draw(rng);
        let label = (self.concept)(&point);
        LabeledExample { point, label }
    }
}

/// Joint labeled distribution whose labels are a concept flipped independently
/// with probability `flip_rate`.
pub struct NoisyConceptSampler<S, F> {
    pub base: S,
    pub concept: F,
    pub flip_rate: f64,
}

impl<X, S, F> LabeledSampler<X> for NoisyConceptSampler<S, F>
where
    S: Sampler<X>,
    F: Fn(&X) -> Label + Send + Sync,
{
    fn draw_labeled(&self, rng: &mut dyn RngCore) -> LabeledExample<X> {
        use rand::Rng;
        let point = self.base.draw(rng);
        let mut label = (self.concept)(&point);
        if self.flip_rate > 0.0 && rng.random_bool(self.flip_rate) {
            label = label.flip();
        }
        LabeledExample { point, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    /// A lifted query landed on the slice whose lifting coordinate is zero.
    #[error("membership query on the degenerate slice c = 0")]
    DegenerateQuery,
    #[error("query has dimension {got}, oracle expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Membership-query access to a concept.
pub trait MembershipOracle<X: ?Sized>: Send + Sync {
    fn query(&self, x: &X) -> Result<Label, OracleError>;
    /// Number of calls to [`MembershipOracle::query`] so far.
    fn query_count(&self) -> u64;
}

/// Oracle backed by a plain function, counting its calls.
pub struct FnOracle<F> {
    f: F,
    count: AtomicU64,
}

impl<F> FnOracle<F> {
    pub fn new(f: F) -> Self {
        Self { f, count: AtomicU64::new(0) }
    }
}

impl<X: ?Sized, F> MembershipOracle<X> for FnOracle<F>
where
    F: Fn(&X) -> Label + Send + Sync,
{
    fn query(&self, x: &X) -> Result<Label, OracleError> {
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok((self.f)(x))
    }

    fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Membership oracle for the halfspace `sign(w·x − θ)`.
#[derive(Debug)]
pub struct HalfspaceOracle<T> {
    pub normal: Vec<T>,
    pub offset: T,
    count: AtomicU64,
}

impl<T: Real> HalfspaceOracle<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Self {
        Self { normal, offset, count: AtomicU64::new(0) }
    }

    pub fn homogeneous(normal: Vec<T>) -> Self {
        Self::new(normal, T::zero())
    }

    /// Label without touching the query counter.
    pub fn label(&self, x: &[T]) -> Label {
        Label::from_sign(crate::linalg::dot(&self.normal, x) - self.offset)
    }
}

impl<T: Real> MembershipOracle<[T]> for HalfspaceOracle<T> {
    fn query(&self, x: &[T]) -> Result<Label, OracleError> {
        self.count.fetch_add(1, Ordering::Relaxed);
        if x.len() != self.normal.len() {
            return Err(OracleError::DimensionMismatch { expected: self.normal.len(), got: x.len() });
        }
        Ok(self.label(x))
    }

    fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// A deterministic hypothesis `X → {±1}`.
pub trait Classifier<X>: Send + Sync + Debug {
    fn predict(&self, x: &X) -> Label;

    /// Human/JSON readable description used when serializing programs.
    fn describe(&self) -> serde_json::Value {
        serde_json::Value::String(format!("{self:?}"))
    }
}

pub type Hypothesis<X> = Arc<dyn Classifier<X>>;

/// The constant hypothesis.
#[derive(Debug, Clone, Copy)]
pub struct ConstantHypothesis(pub Label);

impl<X> Classifier<X> for ConstantHypothesis {
    fn predict(&self, _x: &X) -> Label {
        self.0
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "constant": self.0.value() })
    }
}

/// Result of one run of a TDS learner.
#[derive(Debug, Clone)]
pub enum TdsOutcome<X> {
    Accept(Hypothesis<X>),
    Reject,
}

impl<X> TdsOutcome<X> {
    pub fn is_accept(&self) -> bool {
        matches!(self, TdsOutcome::Accept(_))
    }
}

/// Black-box testable-distribution-shift learner.
///
/// A run receives labeled train examples and unlabeled test points and
/// either rejects the test set or accepts it together with a hypothesis.
/// Implementations read at most `sample_complexity(eps)` points from each
/// list.
pub trait TdsLearner<X>: Send + Sync {
    fn sample_complexity(&self, eps: f64) -> usize;

    fn run(
        &self,
        train: &[LabeledExample<X>],
        test: &[X],
        eps: f64,
        delta: f64,
        rng: &mut dyn RngCore,
    ) -> TdsOutcome<X>;

    /// Constant `A` in the agnostic guarantee `A·λ + ε`. Reported, never assumed.
    fn accuracy_constant(&self) -> f64 {
        1.0
    }

    /// Exact acceptance probability on fixed inputs, when the learner can compute it.
    fn acceptance_probability(
        &self,
        _train: &[LabeledExample<X>],
        _test: &[X],
        _eps: f64,
        _delta: f64,
    ) -> Option<f64> {
        None
    }

    fn name(&self) -> &str {
        "tds-learner"
    }
}

/// Output of a selective classifier on one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub selected: bool,
    pub label: Label,
}

impl Decision {
    pub const ABSTAIN: Decision = Decision { selected: false, label: Label::Pos };

    pub fn predict(label: Label) -> Self {
        Decision { selected: true, label }
    }
}

/// Hypothesis `h` paired with selector `g`, possibly randomized.
///
/// `classify` evaluates both with a shared draw of the internal coins, so the
/// label belongs to the same randomized path as the selection bit.
pub trait SelectiveClassifier<X>: Send + Sync {
    fn classify(&self, x: &X, rng: &mut dyn RngCore) -> Decision;

    fn hypothesis(&self, x: &X, rng: &mut dyn RngCore) -> Label {
        self.classify(x, rng).label
    }

    fn selector(&self, x: &X, rng: &mut dyn RngCore) -> bool {
        self.classify(x, rng).selected
    }
}

/// Selective classifier built from two deterministic closures.
pub struct FnSelective<H, G> {
    pub h: H,
    pub g: G,
}

impl<X, H, G> SelectiveClassifier<X> for FnSelective<H, G>
where
    H: Fn(&X) -> Label + Send + Sync,
    G: Fn(&X) -> bool + Send + Sync,
{
    fn classify(&self, x: &X, _rng: &mut dyn RngCore) -> Decision {
        Decision { selected: (self.g)(x), label: (self.h)(x) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_sign_convention() {
        assert_eq!(Label::from_sign(0.0_f64), Label::Pos);
        assert_eq!(Label::from_sign(-1e-300_f64), Label::Neg);
        assert_eq!(Label::Pos * Label::Neg, Label::Neg);
        assert_eq!(Label::Neg * Label::Neg, Label::Pos);
    }

    #[test]
    fn label_serde_is_signed_integer() {
        assert_eq!(serde_json::to_string(&Label::Neg).unwrap(), "-1");
        let l: Label = serde_json::from_str("1").unwrap();
        assert_eq!(l, Label::Pos);
        assert!(serde_json::from_str::<Label>("0").is_err());
    }

    #[test]
    fn oracle_counts_every_call_and_is_consistent() {
        let oracle = HalfspaceOracle::homogeneous(vec![1.0_f64, -2.0]);
        let x = [0.3, 0.1];
        let first = oracle.query(&x[..]).unwrap();
        for _ in 0..9 {
            assert_eq!(oracle.query(&x[..]).unwrap(), first);
        }
        assert_eq!(oracle.query_count(), 10);
        assert!(oracle.query(&[1.0][..]).is_err());
        assert_eq!(oracle.query_count(), 11);
    }

    #[test]
    fn normalized_rejects_zero() {
        assert!(Point(vec![0.0_f64, 0.0]).normalized().is_none());
        let u = Point(vec![3.0_f64, 4.0]).normalized().unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
    }
}
