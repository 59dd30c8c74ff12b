//! Probability estimation and rejection sampling.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Sampler;

/// An `(γ, δ)`-estimate request.
///
/// The sample count is the two-sided Hoeffding bound `⌈ln(2/δ) / (2γ²)⌉`.
/// An optional cap bounds the count for desk-scale runs; the guarantee then
/// degrades to [`EstimateSpec::effective_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSpec {
    pub gamma: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<usize>,
}

impl EstimateSpec {
    pub fn new(gamma: f64, delta: f64) -> Self {
        assert!(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1), got {gamma}");
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1), got {delta}");
        Self { gamma, delta, max_samples: None }
    }

    pub fn capped(mut self, max_samples: usize) -> Self {
        self.max_samples = Some(max_samples.max(1));
        self
    }

    pub fn hoeffding_count(&self) -> usize {
        let n = ((2.0 / self.delta).ln() / (2.0 * self.gamma * self.gamma)).ceil();
        (n as usize).max(1)
    }

    pub fn sample_count(&self) -> usize {
        match self.max_samples {
            Some(cap) => self.hoeffding_count().min(cap),
            None => self.hoeffding_count(),
        }
    }

    /// Accuracy actually delivered at confidence `1 − δ` by `sample_count` draws.
    pub fn effective_gamma(&self) -> f64 {
        ((2.0 / self.delta).ln() / (2.0 * self.sample_count() as f64)).sqrt()
    }
}

/// Empirical mean of `spec.sample_count()` draws of a `{0,1}` event.
pub fn estimate_probability<F>(mut event: F, spec: &EstimateSpec, rng: &mut dyn RngCore) -> f64
where
    F: FnMut(&mut dyn RngCore) -> bool,
{
    let n = spec.sample_count();
    let hits = (0..n).filter(|_| event(rng)).count();
    hits as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("rejection sampling exhausted after {attempts} attempts")]
pub struct Exhausted {
    pub attempts: usize,
}

/// Default attempt cap `⌈50 / p⌉` for a conditional whose mass is believed to be at least `p`.
pub fn default_cap(p_working: f64) -> usize {
    assert!(p_working > 0.0, "mass lower bound must be positive");
    (50.0 / p_working).ceil() as usize
}

/// First draw from `base` accepted by `keep`; `keep` gets fresh randomness per draw.
pub fn rejection_sample<X, K>(
    base: &dyn Sampler<X>,
    mut keep: K,
    cap: usize,
    rng: &mut dyn RngCore,
) -> Result<X, Exhausted>
where
    K: FnMut(&X, &mut dyn RngCore) -> bool,
{
    assert!(cap >= 1, "rejection cap must be at least 1");
    for _ in 0..cap {
        let x = base.draw(rng);
        if keep(&x, rng) {
            return Ok(x);
        }
    }
    Err(Exhausted { attempts: cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn hoeffding_count_matches_closed_form() {
        assert_eq!(EstimateSpec::new(0.05, 0.01).sample_count(), 1060);
        assert_eq!(EstimateSpec::new(0.1, 0.01).sample_count(), 265);
        assert_eq!(EstimateSpec::new(0.05, 0.01).capped(100).sample_count(), 100);
    }

    #[test]
    fn constant_event_is_exact() {
        let mut rng = rng_from_seed(1);
        let p = estimate_probability(|_| true, &EstimateSpec::new(0.1, 0.01), &mut rng);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn keep_true_returns_first_draw() {
        let mut rng = rng_from_seed(2);
        let mut counter = 0u32;
        let base = |r: &mut dyn RngCore| r.next_u32();
        let mut probe = rng_from_seed(2);
        let expected = probe.next_u32();
        let got = rejection_sample(&base, |_, _| {
            counter += 1;
            true
        }, 5, &mut rng)
        .unwrap();
        assert_eq!(got, expected);
        assert_eq!(counter, 1);
    }

    #[test]
    fn keep_false_exhausts() {
        let mut rng = rng_from_seed(3);
        let base = |r: &mut dyn RngCore| r.random::<f64>();
        let err = rejection_sample(&base, |_, _| false, 100, &mut rng).unwrap_err();
        assert_eq!(err.attempts, 100);
    }

    #[test]
    fn default_cap_scales_inversely() {
        assert_eq!(default_cap(0.5), 100);
        assert_eq!(default_cap(0.01), 5000);
    }
}
