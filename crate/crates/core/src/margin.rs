//! High-margin halfspace recovery from Gaussian membership queries.
//!
//! For a unit target `w` and `x ~ N(0, (π/2) I)`, `E[sign(w·x) x] = w`, so the
//! empirical mean of `f(x)·x` over `ℓ = ⌈(2000 d/γ²) ln(d/δ)⌉` queries lands
//! within `γ/3` of `w` with probability `1 − δ`. Given that, the selector
//! `|ŵ·x| ≥ 2γ/3` keeps every unit point of margin `γ` and never keeps a point
//! that `sign(ŵ·x)` gets wrong.

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{Decision, Label, MembershipOracle, OracleError};
use crate::linalg::{dot, norm};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct MarginClassifier<T> {
    pub w_hat: Vec<T>,
    pub gamma: T,
}

impl<T: Real> MarginClassifier<T> {
    pub fn new(w_hat: Vec<T>, gamma: T) -> Self {
        Self { w_hat, gamma }
    }

    pub fn dim(&self) -> usize {
        self.w_hat.len()
    }

    /// `sign(ŵ·x)`
    pub fn h(&self, x: &[T]) -> Label {
        Label::from_sign(dot(&self.w_hat, x))
    }

    /// `1{|ŵ·x| ≥ 2γ/3}`
    pub fn g(&self, x: &[T]) -> bool {
        dot(&self.w_hat, x).abs() >= self.threshold()
    }

    pub fn threshold(&self) -> T {
        T::of(2.0) * self.gamma / T::of(3.0)
    }

    pub fn classify(&self, x: &[T]) -> Decision {
        Decision { selected: self.g(x), label: self.h(x) }
    }

    pub fn norm(&self) -> T {
        norm(&self.w_hat)
    }
}

/// `ℓ = ⌈(2000·d/γ²)·ln(d/δ)⌉`, at least 1.
pub fn margin_sample_count(d: usize, gamma: f64, delta: f64) -> usize {
    let d = d as f64;
    let l = (2000.0 * d / (gamma * gamma) * (d / delta).ln()).ceil();
    (l.max(1.0)) as usize
}

pub fn learn_high_margin_halfspace<T: Real>(
    f: &dyn MembershipOracle<[T]>,
    d: usize,
    gamma: T,
    delta: f64,
    rng: &mut dyn RngCore,
) -> Result<MarginClassifier<T>, OracleError> {
    assert!(gamma > T::zero() && gamma < T::one(), "gamma must lie in (0,1)");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    let l = margin_sample_count(d, gamma.as_f64(), delta);
    learn_with_samples(f, d, gamma, l, rng)
}

/// The estimator with an explicit number of queries `ℓ`.
pub fn learn_with_samples<T: Real>(
    f: &dyn MembershipOracle<[T]>,
    d: usize,
    gamma: T,
    l: usize,
    rng: &mut dyn RngCore,
) -> Result<MarginClassifier<T>, OracleError> {
    assert!(d >= 1 && l >= 1);
    let gauss = Normal::new(0.0, std::f64::consts::FRAC_PI_2.sqrt()).expect("positive std-dev");
    let mut acc: Vec<CompensatedSum<T>> = vec![CompensatedSum::new(); d];
    let mut x = vec![T::zero(); d];
    for _ in 0..l {
        for xi in x.iter_mut() {
            *xi = T::of(gauss.sample(rng));
        }
        let y = f.query(&x)?;
        for (a, &xi) in acc.iter_mut().zip(&x) {
            a.add(if y.is_pos() { xi } else { -xi });
        }
    }
    let inv = T::one() / T::of_usize(l);
    let w_hat = acc.iter().map(|a| a.value() * inv).collect();
    Ok(MarginClassifier { w_hat, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FnOracle, HalfspaceOracle};
    use crate::rng::rng_from_seed;

    #[test]
    fn sample_count_formula() {
        // 2000·2/0.09·ln(20) = 133 143.65…
        assert_eq!(margin_sample_count(2, 0.3, 0.1), 133_144);
        assert_eq!(margin_sample_count(1, 0.5, 0.5), (8000.0f64 * 2f64.ln()).ceil() as usize);
    }

    #[test]
    fn one_dimensional_mean_is_one() {
        // E|z| = sqrt(2/π)·sqrt(π/2) = 1
        let f = FnOracle::new(|x: &[f64]| Label::from_sign(x[0]));
        let mut rng = rng_from_seed(3);
        let mc = learn_with_samples(&f, 1, 0.5, 400_000, &mut rng).unwrap();
        // sd of |z| is sqrt(π/2 − 1) ≈ 0.755, so 4σ ≈ 0.0048
        assert!((mc.w_hat[0] - 1.0).abs() < 0.005, "{}", mc.w_hat[0]);
        assert_eq!(f.query_count(), 400_000);
    }

    #[test]
    fn planar_recovery_rate() {
        let f = HalfspaceOracle::homogeneous(vec![1.0, 0.0]);
        let mut good = 0;
        for seed in 0..20 {
            let mut rng = rng_from_seed(100 + seed);
            let mc = learn_high_margin_halfspace(&f, 2, 0.3, 0.1, &mut rng).unwrap();
            if norm(&[mc.w_hat[0] - 1.0, mc.w_hat[1]]) <= 0.1 {
                good += 1;
            }
        }
        assert!(good >= 18, "{good}/20");
    }

    #[test]
    fn selector_and_hypothesis() {
        let mc = MarginClassifier::new(vec![0.9, 0.0], 0.3);
        assert!(mc.g(&[0.5, 0.8]));
        assert!(!mc.g(&[0.1, 1.0]));
        assert_eq!(mc.h(&[-0.5, 0.8]), Label::Neg);
        assert_eq!(mc.classify(&[0.0, 1.0]).selected, false);
    }
}
