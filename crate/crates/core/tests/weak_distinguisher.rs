use std::sync::Arc;

use shiftlab_core::domain::{Label, LabeledExample, Marginal, TdsLearner};
use shiftlab_core::rng::stream;
use shiftlab_core::toy::*;
use shiftlab_core::weak_distinguisher::*;

fn disjoint() -> ShiftScenario {
    ShiftScenario::uniform_blocks(8, 0..4, 4..8, 6, None)
}

#[test]
fn disjoint_supports_yield_a_distinguisher() {
    let sc = disjoint();
    let learner: Arc<dyn TdsLearner<usize>> = Arc::new(SupportTds::new(8, 8));
    let (train, test) = (sc.train_sampler(), sc.test_sampler());
    let mut ok = 0;
    for run in 0..10 {
        let mut rng = stream(21, run);
        let found = get_weak_distinguisher(learner.clone(), &train, &Marginal(&test), 0.1, 0.1, &WdConfig::default(), &mut rng);
        if let Ok(wd) = found {
            let adv = exact_advantage(&wd, &sc.train_law(), &sc.test_law()).unwrap();
            assert!(adv >= 1.0 / (5000.0 * 8.0), "advantage {adv}");
            // Monte-Carlo agrees with enumeration
            let rep = measure_advantage(&wd, &Marginal(&train), &Marginal(&test), 20_000, &mut rng);
            assert!((rep.estimate - adv).abs() <= 0.02, "{} vs {adv}", rep.estimate);
            ok += 1;
        }
    }
    assert!(ok >= 9, "{ok}/10");
}

#[test]
fn identical_laws_usually_fail() {
    // two-point law: a sample of 8 covers it with probability 1 − 2⁻⁷
    let sc = ShiftScenario::uniform_blocks(8, 0..2, 0..2, 1, None);
    let learner: Arc<dyn TdsLearner<usize>> = Arc::new(SupportTds::new(8, 8));
    let (train, test) = (sc.train_sampler(), sc.test_sampler());
    let mut failed = 0;
    for run in 0..20 {
        let mut rng = stream(22, run);
        if get_weak_distinguisher(learner.clone(), &train, &Marginal(&test), 0.1, 0.1, &WdConfig::default(), &mut rng)
            .is_err()
        {
            failed += 1;
        }
    }
    assert!(failed >= 18, "{failed}/20");
}

#[test]
fn hybrid_advantages_telescope() {
    let law_a = vec![(0usize, 0.4), (1, 0.3), (2, 0.2), (3, 0.1)];
    let law_b = vec![(0usize, 0.1), (1, 0.2), (2, 0.3), (3, 0.4)];
    let t_bar = vec![
        LabeledExample::new(0, Label::Neg),
        LabeledExample::new(1, Label::Neg),
        LabeledExample::new(2, Label::Pos),
    ];
    let learner = SupportTds::new(4, 3);
    let h = enumerate_hybrid_advantages(&learner, &t_bar, &law_a, &law_b, 3, 0.1, 0.01).unwrap();
    let sum: f64 = h.per_position.iter().sum();
    assert!((sum - h.acceptance_gap).abs() <= 1e-12, "{sum} vs {}", h.acceptance_gap);
    // the support {0,1,2} has mass 0.9 under A and 0.6 under B
    assert!((h.acceptance_gap - (0.9f64.powi(3) - 0.6f64.powi(3))).abs() <= 1e-12);
}

#[test]
fn budget_is_enforced() {
    let sc = ShiftScenario::uniform_blocks(8, 0..2, 0..2, 1, None);
    let learner: Arc<dyn TdsLearner<usize>> = Arc::new(SupportTds::new(8, 8));
    let cfg = WdConfig { budget: 10, ..WdConfig::default() };
    let mut rng = stream(23, 0);
    let (train, test) = (sc.train_sampler(), sc.test_sampler());
    let Err(err) = get_weak_distinguisher(learner, &train, &Marginal(&test), 0.1, 0.1, &cfg, &mut rng) else {
        panic!("search should run out of budget");
    };
    assert_eq!(err.reason, WdFailure::BudgetExceeded);
    assert_eq!(err.stats.learner_runs, 10);
}
