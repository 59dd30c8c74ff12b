use rand::{Rng, RngCore};
use shiftlab_core::estimate::{estimate_probability, rejection_sample, EstimateSpec};
use shiftlab_core::rng::stream;

#[test]
fn fair_coin_estimates_stay_within_gamma() {
    let spec = EstimateSpec::new(0.05, 0.01);
    let mut misses = 0;
    for run in 0..1000 {
        let mut rng = stream(1, run);
        let p = estimate_probability(|r: &mut dyn RngCore| r.random_bool(0.5), &spec, &mut rng);
        if (p - 0.5).abs() > 0.05 {
            misses += 1;
        }
    }
    // expected failures ≤ δ·1000 = 10; Hoeffding is loose so far fewer occur
    assert!(misses <= 10, "{misses} misses");
}

#[test]
fn rare_event_resolved_at_fine_gamma() {
    let spec = EstimateSpec::new(0.001, 0.01);
    let mut rng = stream(2, 0);
    let p = estimate_probability(|r: &mut dyn RngCore| r.random_bool(0.004), &spec, &mut rng);
    assert!((p - 0.004).abs() <= 0.001, "{p}");
}

#[test]
fn rejection_sampling_reproduces_the_conditional_law() {
    // base law on 6 buckets; condition on {1, 2, 4, 5}
    let base_w = [0.1, 0.2, 0.3, 0.1, 0.15, 0.15];
    let keep = [false, true, true, false, true, true];
    let base = |r: &mut dyn RngCore| {
        let u: f64 = r.random();
        let mut acc = 0.0;
        for (i, w) in base_w.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        base_w.len() - 1
    };
    let mass: f64 = (0..6).filter(|i| keep[*i]).map(|i| base_w[i]).sum();
    let n = 100_000;
    let mut counts = [0usize; 6];
    let mut rng = stream(3, 0);
    for _ in 0..n {
        let x = rejection_sample(&base, |x: &usize, _r: &mut dyn RngCore| keep[*x], 10_000, &mut rng).unwrap();
        counts[x] += 1;
    }
    let tv: f64 = 0.5
        * (0..6)
            .map(|i| {
                let target = if keep[i] { base_w[i] / mass } else { 0.0 };
                (counts[i] as f64 / n as f64 - target).abs()
            })
            .sum::<f64>();
    assert!(tv <= 0.02, "tv {tv}");
    assert_eq!(counts[0] + counts[3], 0);
}
