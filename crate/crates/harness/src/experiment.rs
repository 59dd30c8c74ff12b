//! Pipelines and the trial runner.
//!
//! Trial `i` draws all of its randomness from `stream(seed, i)`, so the
//! records do not depend on the worker count or on scheduling.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use shiftlab_core::domain::{Label, LabeledSampler, Marginal, MembershipOracle, Point, TdsLearner, HalfspaceOracle};
use shiftlab_core::forster::{
    certifies_subspace, certifies_transform, count_in_subspace, default_max_iters, forster_transform, second_moment,
    ForsterError, ForsterOutcome,
};
use shiftlab_core::linalg::{self, dot, Matrix};
use shiftlab_core::margin::{learn_with_samples, margin_sample_count};
use shiftlab_core::metrics;
use shiftlab_core::pq_halfspace::{learn_general_halfspace, learn_halfspace, ExitReason, HalfspacePqClassifier, PqConfig};
use shiftlab_core::rng::{derive_seed, rng_from_seed};
use shiftlab_core::tds_boost::{self, balance, boost, BranchingProgram, NodeKind};
use shiftlab_core::toy::{exact_metrics, DiscreteSampler, HistogramTds, ShiftScenario, SupportTds};
use shiftlab_core::weak_distinguisher::{
    enumerate_hybrid_advantages, exact_advantage, get_weak_distinguisher, measure_advantage, Distinguisher, WdFailure,
};

use crate::budget::{run_with_budget, BudgetRng, Budgeted};
use crate::config::{
    BalanceParams, BoostConfig, ConfigError, ExperimentConfig, ForsterParams, HybridParams, LearnerSpec, MarginParams,
    MartingaleParams, Pipeline, PqParams, WeakdistParams,
};
use crate::report::{Metrics, Report, TrialRecord, TrialStatus};
use crate::scenario::{continuous_law, random_unit, unit_with_projection, ContinuousLaw, ContinuousParams, ScenarioSpec};

type TrialResult = Result<Metrics, String>;

/// Run every trial of `config` on a pool of `workers` threads.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Report, ConfigError> {
    let pipeline = config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError::Invalid(format!("cannot start workers: {e}")))?;
    let budget = config.budget_secs.map(Duration::from_secs_f64);
    let trials = pool.install(|| {
        (0..config.trials).into_par_iter().map(|i| run_trial(&pipeline, config, i, budget)).collect()
    });
    Ok(Report { config: config.clone(), trials })
}

fn run_trial(pipeline: &Pipeline, config: &ExperimentConfig, trial: usize, budget: Option<Duration>) -> TrialRecord {
    let seed = derive_seed(config.seed, trial as u64);
    let start = Instant::now();
    let out = run_with_budget(|| {
        let mut rng = BudgetRng::new(rng_from_seed(seed), budget);
        run_pipeline(pipeline, config, &mut rng)
    });
    let (status, metrics, message) = match out {
        Budgeted::Done(Ok(m)) => (TrialStatus::Ok, m, None),
        Budgeted::Done(Err(e)) => (TrialStatus::Error, Metrics::default(), Some(e)),
        Budgeted::OutOfTime => (TrialStatus::Budget, Metrics::default(), Some("wall-time budget exhausted".to_owned())),
        Budgeted::Panicked(msg) => (TrialStatus::Error, Metrics::default(), Some(format!("panic: {msg}"))),
    };
    if let Some(msg) = &message {
        log::warn!("{} trial {trial}: {msg}", config.mode);
    }
    TrialRecord { trial, seed, status, metrics, message, wall_secs: start.elapsed().as_secs_f64() }
}

fn run_pipeline(pipeline: &Pipeline, config: &ExperimentConfig, rng: &mut dyn RngCore) -> TrialResult {
    match pipeline {
        Pipeline::PqHalfspace { scenario, kind, params } => pq_trial(config, scenario, kind, params, rng),
        Pipeline::Tdsboost { scenario, params } => boost_trial(config, scenario, params, rng),
        Pipeline::ForsterCheck { scenario, kind, params } => forster_trial(config, scenario, kind, params, rng),
        Pipeline::Weakdist { scenario, params } => weakdist_trial(config, scenario, params, rng),
        Pipeline::Margin(p) => margin_trial(config, p, rng),
        Pipeline::Balance(p) => Ok(balance_trial(p, rng)),
        Pipeline::Hybrid(p) => hybrid_trial(config, p, rng),
        Pipeline::Martingale(p) => Ok(martingale_trial(p, rng)),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn make_learner(spec: &LearnerSpec, k: usize) -> Arc<dyn TdsLearner<usize>> {
    match spec {
        LearnerSpec::Support { m } => Arc::new(SupportTds::new(k, *m)),
        LearnerSpec::Histogram { samples } => Arc::new(HistogramTds { samples: *samples, ..HistogramTds::new(k) }),
    }
}

// ---------------------------------------------------------------- pq-halfspace

fn exit_code(e: ExitReason) -> f64 {
    match e {
        ExitReason::MassCondition => 0.0,
        ExitReason::RoundCap => 1.0,
        ExitReason::EmptyIntersection => 2.0,
    }
}

/// Point of `R^n` whose lift is parallel to `z ∈ R^{n+1}`, if `z` leans to the positive lifting side.
fn unlift(z: &[f64]) -> Option<Vec<f64>> {
    (z[0] > 0.0).then(|| z[1..].iter().map(|v| v / z[0]).collect())
}

/// Test points that sit on the two decision boundaries a wrong answer would hide behind:
/// the target's hyperplane and each stage's selector threshold.
fn adversarial_points(
    law: &ContinuousLaw,
    offset: f64,
    clf: &HalfspacePqClassifier<f64>,
    count: usize,
    rng: &mut dyn RngCore,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let tiny = 10f64.powi(-rng.random_range(1..=12));
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if clf.stages.is_empty() || rng.random_bool(0.5) {
            let s = (offset + sign * tiny).clamp(-1.0, 1.0);
            out.push(unit_with_projection(&law.target, s, rng));
            continue;
        }
        let stage = &clf.stages[rng.random_range(0..clf.stages.len())];
        let Some(w_hat) = linalg::normalize(&stage.mc.w_hat) else { continue };
        let side = if rng.random_bool(0.5) { 1.0 + tiny } else { 1.0 - tiny };
        let c = sign * stage.mc.threshold() * side / stage.mc.norm();
        if c.abs() > 1.0 {
            continue;
        }
        let z = unit_with_projection(&w_hat, c, rng);
        let x = stage.stage.pullback(&z);
        let x = if clf.lifted { unlift(&x) } else { linalg::normalize(&x) };
        if let Some(x) = x {
            out.push(x);
        }
    }
    out
}

fn pq_trial(
    config: &ExperimentConfig,
    scenario: &ContinuousParams,
    kind: &ScenarioSpec,
    params: &PqParams,
    rng: &mut dyn RngCore,
) -> TrialResult {
    let law = continuous_law(kind, rng).map_err(|e| e.to_string())?;
    let n_train = scenario.train_size.sample(rng);
    let train = law.draw_train_n(n_train, rng);
    let offset = if params.general { params.offset } else { 0.0 };
    let oracle = HalfspaceOracle::new(law.target.clone(), offset);
    let pq = PqConfig {
        eps: config.eps,
        delta: config.delta,
        margin_samples: params.margin_samples,
        forster_eps: params.forster_eps,
    };
    let out = if params.general {
        learn_general_halfspace(&train, &pq, &oracle, rng)
    } else {
        learn_halfspace(&train, &pq, &oracle, rng)
    }
    .map_err(|e| e.to_string())?;
    let clf = &out.classifier;
    let rejected = |pts: &[Point<f64>]| -> Result<f64, String> {
        let mut r = 0usize;
        for p in pts {
            r += !clf.evaluate_selective(p).map_err(|e| e.to_string())?.selected as usize;
        }
        Ok(r as f64 / pts.len().max(1) as f64)
    };

    let mut m = Metrics::default();
    m.push("dim", law.dim as f64);
    m.push("law", law.kind.code());
    m.push("train_size", n_train as f64);
    m.push("rounds", out.report.rounds as f64);
    m.push("exit", exit_code(out.report.exit));
    m.push("residual", out.report.residual as f64);
    m.push("stages", clf.stages.len() as f64);
    m.push("queries", out.report.queries as f64);
    m.push("degenerate_queries", out.report.degenerate_queries as f64);
    m.push("train_rejection", rejected(&train)?);
    if params.holdout > 0 {
        m.push("rejection_rate", rejected(&law.draw_train_n(params.holdout, rng))?);
    }

    let mut test: Vec<Vec<f64>> = law.draw_test_n(scenario.test_size, rng).into_iter().map(Point::into_inner).collect();
    test.extend(adversarial_points(&law, offset, clf, params.adversarial, rng));
    let mut selected = 0usize;
    let mut errors = 0usize;
    for x in &test {
        let d = clf.evaluate_selective(x).map_err(|e| e.to_string())?;
        if d.selected {
            selected += 1;
            if d.label != oracle.label(x) {
                errors += 1;
            }
        }
    }
    m.push("test_points", test.len() as f64);
    m.push("test_selected", selected as f64);
    m.push("selective_errors", errors as f64);
    m.push("selective_error", errors as f64 / test.len().max(1) as f64);
    Ok(m)
}

// ---------------------------------------------------------------- tdsboost

fn boost_trial(config: &ExperimentConfig, sc: &ShiftScenario, params: &BoostConfig, rng: &mut dyn RngCore) -> TrialResult {
    let train = sc.train_sampler();
    let test = sc.test_sampler();
    let mode = match config.eta {
        Some(eta) => tds_boost::Mode::Agnostic { eta },
        None => tds_boost::Mode::Realizable,
    };
    let learner = make_learner(&params.learner, sc.k);
    let a = learner.accuracy_constant();
    let clf = boost(learner, &train, &Marginal(&test), config.eps, config.delta, mode, &params.settings, rng);
    let exact = exact_metrics(sc, &clf);

    let mut m = Metrics::default();
    let p = &clf.params;
    m.push("levels", p.levels as f64);
    m.push("m", p.m as f64);
    let nodes = clf.program.nodes();
    let kind_mass = |pred: &dyn Fn(&NodeKind<usize>) -> bool| -> f64 {
        nodes.iter().zip(&exact.train_leaf_mass).filter(|(n, _)| pred(&n.kind)).map(|(_, w)| w).sum()
    };
    // leaves count only when some train or test mass reaches them
    let count = |name: &str| {
        nodes
            .iter()
            .enumerate()
            .filter(|(idx, n)| {
                n.kind.name() == name
                    && (name == "internal" || exact.train_leaf_mass.get(*idx).unwrap_or(&0.0) + exact.test_leaf_mass.get(*idx).unwrap_or(&0.0) > 0.0)
            })
            .count() as f64
    };
    m.push("internal_nodes", count("internal"));
    m.push("accepted_leaves", count("leaf-accepted"));
    m.push("rare_leaves", count("leaf-rare"));
    m.push("agnostic_leaves", count("leaf-agnostic"));
    m.push("root_accepted", flag(nodes[0].kind.name() == "leaf-accepted"));
    m.push("rare_reject_mass", kind_mass(&|k| matches!(k, NodeKind::LeafRare { label: false })));
    m.push("agnostic_mass", kind_mass(&|k| matches!(k, NodeKind::LeafAgnostic)));
    m.push("rejection_rate", exact.rejection_rate);
    m.push("selective_error", exact.selective_error);
    m.push("accuracy_constant", a);
    m.push("lambda", sc.benchmark_lambda());
    if params.mc_eval > 0 {
        m.push("mc_selective_error", metrics::selective_error(&clf, &test, params.mc_eval, rng));
        m.push("mc_rejection_rate", metrics::rejection_rate(&clf, &Marginal(&train), params.mc_eval, rng));
    }
    Ok(m)
}

// ---------------------------------------------------------------- forster-check

/// One-line verdict on a set of unit vectors.
pub fn forster_verdict(points: &[Point<f64>], eps: f64, max_iters: Option<usize>) -> Result<String, ForsterError> {
    let moment = second_moment(points)?;
    if moment.is_isotropic(eps) {
        return Ok(format!("isotropic, eps={}", moment.isotropy_gap()));
    }
    let iters = max_iters.unwrap_or_else(|| default_max_iters(moment.dim()));
    Ok(match forster_transform(points, eps, iters)? {
        ForsterOutcome::Transform { a } => {
            let gap = second_moment(&transformed(&a, points))?.isotropy_gap();
            format!("transform, eps={gap}")
        }
        ForsterOutcome::Subspace { basis } => format!(
            "subspace, dim={}, points={}/{}",
            basis.cols(),
            count_in_subspace(&basis, points),
            points.len()
        ),
    })
}

fn transformed(a: &Matrix<f64>, points: &[Point<f64>]) -> Vec<Point<f64>> {
    points.iter().filter_map(|p| linalg::normalize(&a.apply(p))).map(Point).collect()
}

fn forster_trial(
    config: &ExperimentConfig,
    scenario: &ContinuousParams,
    kind: &ScenarioSpec,
    params: &ForsterParams,
    rng: &mut dyn RngCore,
) -> TrialResult {
    let law = continuous_law(kind, rng).map_err(|e| e.to_string())?;
    let size = scenario.train_size.sample(rng);
    let points = law.draw_train_n(size, rng);
    let n = law.dim;
    let eps = config.eps;
    let iters = params.max_iters.unwrap_or_else(|| default_max_iters(n));
    let mut m = Metrics::default();
    m.push("dim", n as f64);
    m.push("size", size as f64);
    m.push("law", law.kind.code());
    match forster_transform(&points, eps, iters).map_err(|e| e.to_string())? {
        ForsterOutcome::Transform { a } => {
            let imgs = transformed(&a, &points);
            let moment = second_moment(&imgs).map_err(|e| e.to_string())?;
            let ev = moment.eigenvalues();
            m.push("outcome", 0.0);
            m.push("certified", flag(imgs.len() == points.len() && certifies_transform(&a, &points, eps)));
            m.push("eig_min_scaled", ev[0] * n as f64);
            m.push("eig_max_scaled", ev[ev.len() - 1] * n as f64);
            m.push("gap", moment.isotropy_gap());
            // every certified set is anticoncentrated: |w·x| ≥ 1/(2√n) on a 1/(4n) share
            let cut = 1.0 / (2.0 * (n as f64).sqrt());
            let floor = 1.0 / (4.0 * n as f64);
            let mut failures = 0usize;
            let mut min_share = f64::INFINITY;
            for _ in 0..params.directions {
                let w = random_unit(n, rng);
                let hits = imgs.iter().filter(|y| dot(&w, y).abs() >= cut).count();
                let share = hits as f64 / imgs.len() as f64;
                min_share = min_share.min(share);
                failures += (share < floor) as usize;
            }
            m.push("anticoncentration_failures", failures as f64);
            if params.directions > 0 {
                m.push("anticoncentration_min_share", min_share);
            }
        }
        ForsterOutcome::Subspace { basis } => {
            m.push("outcome", 1.0);
            m.push("certified", flag(certifies_subspace(&basis, &points)));
            m.push("subspace_dim", basis.cols() as f64);
            m.push("subspace_points", count_in_subspace(&basis, &points) as f64);
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------- weakdist

fn failure_code(f: WdFailure) -> f64 {
    match f {
        WdFailure::NoTrainSetGap => 1.0,
        WdFailure::NoHybridGap => 2.0,
        WdFailure::BudgetExceeded => 3.0,
    }
}

fn weakdist_trial(
    config: &ExperimentConfig,
    sc: &ShiftScenario,
    params: &WeakdistParams,
    rng: &mut dyn RngCore,
) -> TrialResult {
    let train = sc.train_sampler();
    let test = sc.test_sampler();
    let learner = make_learner(&params.learner, sc.k);
    let sample_size = learner.sample_complexity(config.eps);
    let mut m = Metrics::default();
    m.push("m", sample_size as f64);
    m.push("advantage_floor", 1.0 / (5000.0 * sample_size as f64));
    match get_weak_distinguisher(learner, &train, &Marginal(&test), config.eps, config.delta, &params.wd, rng) {
        Ok(wd) => {
            let adv = exact_advantage(&wd, &sc.train_law(), &sc.test_law())
                .ok_or("the learner exposes no exact acceptance probability")?;
            m.push("success", 1.0);
            m.push("exact_advantage", adv);
            m.push("position", wd.position() as f64);
            m.push("learner_runs", wd.stats.learner_runs as f64);
            m.push("p1_hat", wd.stats.p1_hat);
            m.push("p2_hat", wd.stats.p2_hat);
            if params.n_eval > 0 {
                let rep = measure_advantage(&wd, &Marginal(&train), &Marginal(&test), params.n_eval, rng);
                m.push("measured_advantage", rep.estimate);
            }
        }
        Err(err) => {
            m.push("success", 0.0);
            m.push("failure", failure_code(err.reason));
            m.push("learner_runs", err.stats.learner_runs as f64);
            m.push("p1_hat", err.stats.p1_hat);
            m.push("p2_hat", err.stats.p2_hat);
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------- margin

fn margin_trial(config: &ExperimentConfig, p: &MarginParams, rng: &mut dyn RngCore) -> TrialResult {
    let w = random_unit(p.dim, rng);
    let oracle = HalfspaceOracle::homogeneous(w.clone());
    let l = p.samples.unwrap_or_else(|| margin_sample_count(p.dim, p.gamma, config.delta));
    let mc = learn_with_samples(&oracle, p.dim, p.gamma, l, rng).map_err(|e| e.to_string())?;
    let distance = linalg::norm(&linalg::sub(&mc.w_hat, &w));
    let mut viol_i = 0usize;
    let mut viol_ii = 0usize;
    for j in 0..p.probes {
        // half uniform, half packed just past the margin
        let x = if j % 2 == 0 {
            random_unit(p.dim, rng)
        } else {
            let s = rng.random_range(p.gamma..=(p.gamma + 0.05).min(1.0));
            unit_with_projection(&w, if rng.random_bool(0.5) { s } else { -s }, rng)
        };
        let truth = Label::from_sign(dot(&w, &x));
        if dot(&w, &x).abs() >= p.gamma && !mc.g(&x) {
            viol_i += 1;
        }
        if mc.g(&x) && mc.h(&x) != truth {
            viol_ii += 1;
        }
    }
    let mut m = Metrics::default();
    m.push("samples", l as f64);
    m.push("queries", oracle.query_count() as f64);
    m.push("distance", distance);
    m.push("close", flag(distance <= p.gamma / 3.0));
    m.push("norm", mc.norm());
    m.push("margin_violations", viol_i as f64);
    m.push("label_violations", viol_ii as f64);
    Ok(m)
}

// ---------------------------------------------------------------- balance

fn balance_trial(p: &BalanceParams, rng: &mut dyn RngCore) -> Metrics {
    let mut m = Metrics::default();
    let mut worst: f64 = 0.0;
    for &q in &p.q {
        let ones = (0..p.draws).filter(|_| {
            let w = rng.random_bool(q);
            balance(q, w, rng)
        });
        let freq = ones.count() as f64 / p.draws as f64;
        worst = worst.max((freq - 0.5).abs());
        m.push(format!("freq_q{q}"), freq);
    }
    m.push("max_deviation", worst);
    m
}

// ---------------------------------------------------------------- hybrid

fn random_table(k: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn hybrid_trial(config: &ExperimentConfig, p: &HybridParams, rng: &mut dyn RngCore) -> TrialResult {
    let a = random_table(p.k, rng);
    let b = random_table(p.k, rng);
    let concept: Vec<Label> = (0..p.k).map(|_| Label::from_bool(rng.random_bool(0.5))).collect();
    let t_bar = DiscreteSampler::new(&a, concept, 0.0).draw_labeled_n(p.m, rng);
    let law = |t: &[f64]| -> Vec<(usize, f64)> { t.iter().copied().enumerate().collect() };
    let learner = SupportTds::new(p.k, p.m);
    let h = enumerate_hybrid_advantages(&learner, &t_bar, &law(&a), &law(&b), p.m, config.eps, 0.01)
        .ok_or("the learner exposes no exact acceptance probability")?;
    let sum: f64 = h.per_position.iter().sum();
    let mut m = Metrics::default();
    m.push("sum", sum);
    m.push("gap", h.acceptance_gap);
    m.push("abs_diff", (sum - h.acceptance_gap).abs());
    Ok(m)
}

// ---------------------------------------------------------------- martingale

/// Distinguisher on a finite domain given by its table of `Pr[output 1]`.
struct TableDistinguisher(Vec<f64>);

impl Distinguisher<usize> for TableDistinguisher {
    fn evaluate(&self, x: &usize, rng: &mut dyn RngCore) -> bool {
        rng.random_bool(self.0[*x])
    }

    fn exact_probability(&self, x: &usize) -> Option<f64> {
        Some(self.0[*x])
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "table": self.0 })
    }
}

/// Hoeffding–Azuma bound on the mislabeled level-T mass when every step
/// moves each law by at least `drift` away from a fair coin, over `T` levels.
pub fn martingale_bound(drift: f64, levels: usize) -> f64 {
    let s = (levels - 1) as f64;
    let tail = |d: f64| if d <= 0.0 { 1.0 } else { (-2.0 * d * d / s).exp() };
    0.5 * (tail(drift * s + 0.5) + tail(drift * s - 0.5))
}

/// Program on the two-point domain (1 = train, 0 = test). Conditioned on any
/// node the two laws are still the point masses, so each internal node gets a
/// table `[p₀, p₁]` with advantage exactly `γ`, the exact `q = (p₀ + p₁)/2`,
/// and routes through the balance step. Returns the program and the smallest
/// per-step drift `keep·γ/2` it uses.
pub fn martingale_program(gamma: f64, levels: usize, rng: &mut dyn RngCore) -> (BranchingProgram<usize>, f64) {
    let mut program = BranchingProgram::new(levels);
    let mut drift = f64::INFINITY;
    for t in 1..levels {
        for i in 1..=t {
            let p0 = rng.random_range(0.0..=1.0 - gamma);
            let p1 = p0 + gamma;
            let q = 0.5 * (p0 + p1);
            drift = drift.min(tds_boost::balance_keep_probability(q) * gamma / 2.0);
            program.set(i, t, NodeKind::Internal { wd: Arc::new(TableDistinguisher(vec![p0, p1])), q_hat: q });
        }
    }
    for i in 1..=levels {
        program.set(i, levels, NodeKind::LeafLevelT { label: 2 * i >= levels });
    }
    (program, if drift.is_finite() { drift } else { 0.0 })
}

fn martingale_trial(p: &MartingaleParams, rng: &mut dyn RngCore) -> Metrics {
    let gamma = rng.random_range(p.gamma[0]..=p.gamma[1]);
    let levels = rng.random_range(p.levels[0]..=p.levels[1]);
    let (program, drift) = martingale_program(gamma, levels, rng);
    let on_train = program.leaf_distribution(&1).expect("tables are exact");
    let on_test = program.leaf_distribution(&0).expect("tables are exact");
    let mut mislabeled = 0.0;
    for n in program.nodes() {
        if let NodeKind::LeafLevelT { label } = n.kind {
            let idx = tds_boost::node_index(n.i, n.t);
            mislabeled += 0.5 * if label { on_test[idx] } else { on_train[idx] };
        }
    }
    let mut m = Metrics::default();
    m.push("gamma", gamma);
    m.push("levels", levels as f64);
    m.push("drift", drift);
    m.push("mislabeled_mass", mislabeled);
    m.push("bound", martingale_bound(drift, levels));
    m
}
