//! Monte-Carlo PQ metrics: selective error on the test law and rejection
//! rate on the train law.

use rand::RngCore;

use crate::domain::{LabeledExample, LabeledSampler, Sampler, SelectiveClassifier};

/// Frequency of `{label ≠ h(x) and g(x) = 1}` over `n_eval` fresh test draws.
pub fn selective_error<X>(
    c: &dyn SelectiveClassifier<X>,
    test: &dyn LabeledSampler<X>,
    n_eval: usize,
    rng: &mut dyn RngCore,
) -> f64 {
    assert!(n_eval >= 1, "n_eval must be positive");
    let mut errors = 0usize;
    for _ in 0..n_eval {
        let ex = test.draw_labeled(rng);
        let d = c.classify(&ex.point, rng);
        if d.selected && d.label != ex.label {
            errors += 1;
        }
    }
    errors as f64 / n_eval as f64
}

/// Frequency of `{g(x) = 0}` over `n_eval` fresh train draws.
pub fn rejection_rate<X>(
    c: &dyn SelectiveClassifier<X>,
    train: &dyn Sampler<X>,
    n_eval: usize,
    rng: &mut dyn RngCore,
) -> f64 {
    assert!(n_eval >= 1, "n_eval must be positive");
    let rejected = (0..n_eval)
        .filter(|_| {
            let x = train.draw(rng);
            !c.classify(&x, rng).selected
        })
        .count();
    rejected as f64 / n_eval as f64
}

/// Selective error over a fixed list of labeled points.
pub fn selective_error_on<X>(
    c: &dyn SelectiveClassifier<X>,
    examples: &[LabeledExample<X>],
    rng: &mut dyn RngCore,
) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let errors = examples
        .iter()
        .filter(|ex| {
            let d = c.classify(&ex.point, rng);
            d.selected && d.label != ex.label
        })
        .count();
    errors as f64 / examples.len() as f64
}

/// Rejection rate over a fixed list of points.
pub fn rejection_rate_on<X>(c: &dyn SelectiveClassifier<X>, points: &[X], rng: &mut dyn RngCore) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let rejected = points.iter().filter(|x| !c.classify(x, rng).selected).count();
    rejected as f64 / points.len() as f64
}
