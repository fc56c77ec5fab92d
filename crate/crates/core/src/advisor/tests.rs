use super::*;
use crate::acquisition::ei;
use crate::space::{Condition, Parameter, Value};
use proptest::prelude::*;

fn space_1d() -> SearchSpace {
    SearchSpace::new(vec![Parameter::float("x", 0.0, 1.0)], vec![]).unwrap()
}

fn x_of(v: f64) -> Configuration {
    Configuration::new().with("x", v)
}

fn forrester(x: f64) -> f64 {
    (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin()
}

fn history_1d(points: &[f64], f: fn(f64) -> f64) -> History {
    let mut h = History::new("t");
    for &x in points {
        h.push_result(x_of(x), f(x)).unwrap();
    }
    h
}

fn grid(n: usize) -> Vec<Configuration> {
    (0..n).map(|i| x_of(i as f64 / (n - 1) as f64)).collect()
}

fn floats(n: usize) -> SearchSpace {
    SearchSpace::new(
        (0..n).map(|i| Parameter::float(&format!("x{i}"), 0.0, 1.0)).collect(),
        vec![],
    )
    .unwrap()
}

#[test]
fn selection_examples() {
    let spec = TaskSpec::new(floats(3));
    let plan = select_algorithm(&spec, 100);
    assert_eq!(
        plan,
        AlgorithmPlan {
            surrogate: SurrogateKind::Gp,
            acquisition: AcquisitionKind::Ei,
            constraint_handling: ConstraintHandling::None,
            acq_optimizer: OptimizerStrategy::Continuous,
        }
    );
    assert_eq!(select_algorithm(&TaskSpec::new(floats(60)), 10).surrogate, SurrogateKind::Prf);
    let mo = TaskSpec::new(floats(3)).with_objectives(2, 0);
    assert_eq!(select_algorithm(&mo, 10).acquisition, AcquisitionKind::Ehvi);
    let mo5 = TaskSpec::new(floats(3)).with_objectives(5, 1);
    let plan = select_algorithm(&mo5, 10);
    assert_eq!(plan.acquisition, AcquisitionKind::EhviMc);
    assert_eq!(plan.constraint_handling, ConstraintHandling::Pof);
    let cat = SearchSpace::new(
        vec![Parameter::categorical("c", vec!["a".into(), "b".into()]), Parameter::float("x", 0.0, 1.0)],
        vec![],
    )
    .unwrap();
    assert_eq!(select_algorithm(&TaskSpec::new(cat), 1).acq_optimizer, OptimizerStrategy::Mixed);
}

#[test]
fn selection_boundary_table() {
    for params in [50, 51] {
        for trials in [500, 501] {
            for conditioned in [false, true] {
                let mut ps: Vec<Parameter> = (0..params - 1)
                    .map(|i| Parameter::float(&format!("x{i}"), 0.0, 1.0))
                    .collect();
                ps.push(Parameter::categorical("gate", vec!["on".into(), "off".into()]));
                let conds = if conditioned {
                    vec![Condition::equal("gate", "x0", "on")]
                } else {
                    vec![]
                };
                let spec = TaskSpec::new(SearchSpace::new(ps, conds).unwrap());
                let expect_prf = params > 50 || trials > 500 || conditioned;
                let got = select_algorithm(&spec, trials).surrogate;
                assert_eq!(got == SurrogateKind::Prf, expect_prf, "{params} {trials} {conditioned}");
            }
        }
    }
}

#[test]
fn imputation_examples() {
    let obs = |ys: &[f64]| Observation::completed(Configuration::new(), ys.to_vec(), vec![]);
    let pending = vec![x_of(0.5)];
    let d: Vec<Observation> = [1.0, 2.0, 5.0].iter().map(|&y| obs(&[y])).collect();
    let aug = impute_pending(&d, &pending).unwrap();
    assert_eq!(aug.len(), 4);
    assert_eq!(aug[3].objectives, vec![2.0]);
    assert_eq!(aug[3].trial_state, TrialState::Running);
    let d: Vec<Observation> = [1.0, 2.0, 3.0, 4.0].iter().map(|&y| obs(&[y])).collect();
    assert_eq!(impute_pending(&d, &pending).unwrap()[4].objectives, vec![2.5]);
    let d = vec![obs(&[1.0, 4.0]), obs(&[2.0, 5.0]), obs(&[3.0, 6.0])];
    assert_eq!(impute_pending(&d, &pending).unwrap()[3].objectives, vec![2.0, 5.0]);
    let d = vec![
        Observation::completed(Configuration::new(), vec![1.0], vec![-1.0]),
        Observation::completed(Configuration::new(), vec![1.0], vec![3.0]),
    ];
    assert_eq!(impute_pending(&d, &pending).unwrap()[2].constraints, vec![1.0]);
    let err = impute_pending(&[], &pending).unwrap_err();
    assert_eq!(err.to_string(), "need observations before imputation");
}

#[test]
fn cold_start_and_statelessness() {
    let spec = TaskSpec::new(floats(3));
    let empty = History::new("t");
    let c = suggest(&spec, &empty, 7).unwrap();
    assert!(spec.space.is_valid(&c));
    assert_eq!(c, spec.space.default_configuration());

    let mut h = History::new("t");
    for (i, c) in spec.space.sample_random(3, 8).into_iter().enumerate() {
        h.push_result(c, i as f64 * 0.37 % 1.0).unwrap();
    }
    let a = serde_json::to_string(&suggest(&spec, &h, 11).unwrap()).unwrap();
    let b = serde_json::to_string(&suggest(&spec, &h, 11).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn initial_design_is_stratified_and_valid() {
    let space = floats(4);
    let design = initial_design(&space, 9, 3);
    assert_eq!(design.len(), 9);
    assert_eq!(design[0], space.default_configuration());
    for j in 0..4 {
        let mut cells: Vec<usize> = design[1..]
            .iter()
            .map(|c| (c.get(&format!("x{j}")).unwrap().as_f64().unwrap() * 8.0) as usize)
            .collect();
        cells.sort();
        assert_eq!(cells, (0..8).collect::<Vec<_>>());
    }
}

#[test]
fn suggestion_maximizes_ei_on_forrester() {
    let pts = [0.0, 0.11, 0.22, 0.33, 0.44, 0.55, 0.66, 0.77, 0.88, 1.0];
    let h = history_1d(&pts, forrester);
    let advisor = Advisor::new(TaskSpec::new(space_1d()));
    let s = advisor.suggest(&h, 5).unwrap();
    let ctx = advisor.context(&h, 5).unwrap();
    let best_grid = grid(1001).iter().map(|c| ctx.acquisition(c)).fold(0.0, f64::max);
    // Independent EI evaluation from the fitted model.
    let Predictor::Single(model) = &ctx.objective_models()[0] else {
        panic!("plain model expected")
    };
    let eta = h.best_objective().unwrap();
    let x = s.get("x").unwrap().as_f64().unwrap();
    let ei_s = ei(&model.predict(&[x]), eta);
    assert!((ei_s - ctx.acquisition(&s)).abs() < 1e-15);
    assert!(ei_s >= best_grid - 1e-6, "{ei_s} < {best_grid}");
}

#[test]
fn pending_points_are_penalized() {
    let f = |x: f64| (x - 0.3).powi(2);
    let h0 = history_1d(&[0.05, 0.2, 0.45, 0.6, 0.8, 0.95], f);
    for pending in [vec![0.33], vec![0.25, 0.7], vec![0.1, 0.5, 0.9]] {
        let mut h = h0.clone();
        for &p in &pending {
            h.add_pending(x_of(p));
        }
        let advisor = Advisor::new(TaskSpec::new(space_1d()));
        let ctx = advisor.context(&h, 2).unwrap();
        let max_grid = grid(1001).iter().map(|c| ctx.acquisition(c)).fold(0.0, f64::max);
        assert!(max_grid > 0.0);
        for &p in &pending {
            let v = ctx.acquisition(&x_of(p));
            assert!(v <= 1e-6 * max_grid, "EI at pending {p} = {v}, max {max_grid}");
        }
    }
}

#[test]
fn batch_examples() {
    let spec = TaskSpec::new(space_1d());
    let h = history_1d(&[0.1, 0.4, 0.7, 0.9], |x| (x - 0.55).powi(2));
    let one = suggest_batch(&spec, &h, 1, 3).unwrap();
    assert_eq!(one, vec![suggest(&spec, &h, 3).unwrap()]);
    let three = suggest_batch(&spec, &h, 3, 3).unwrap();
    let xs: Vec<f64> = three.iter().map(|c| c.get("x").unwrap().as_f64().unwrap()).collect();
    for i in 0..3 {
        for j in 0..i {
            assert!((xs[i] - xs[j]).abs() > 1e-3, "{xs:?}");
        }
    }
    let cold = suggest_batch(&spec, &History::new("t"), 3, 3).unwrap();
    assert!(cold[0] != cold[1] && cold[1] != cold[2] && cold[0] != cold[2]);
    assert_eq!(suggest_batch(&spec, &h, 0, 3), Err(AdvisorError::EmptyBatch));
}

#[test]
fn constrained_and_multi_objective_suggestions_are_valid() {
    let space = floats(2);
    let soc = TaskSpec::new(space.clone()).with_objectives(1, 1);
    let mut h = History::new("t");
    for c in space.sample_random(1, 6) {
        let x0 = c.get("x0").unwrap().as_f64().unwrap();
        let x1 = c.get("x1").unwrap().as_f64().unwrap();
        h.push(Observation::completed(c, vec![x0 + x1], vec![0.5 - x0])).unwrap();
    }
    assert!(space.is_valid(&suggest(&soc, &h, 1).unwrap()));

    for p in [2, 3, 5] {
        let mo = TaskSpec::new(space.clone()).with_objectives(p, 0);
        let mut h = History::new("t");
        for c in space.sample_random(2, 6) {
            let x0 = c.get("x0").unwrap().as_f64().unwrap();
            let ys = (0..p).map(|k| (x0 - k as f64 / p as f64).powi(2)).collect();
            h.push(Observation::completed(c, ys, vec![])).unwrap();
        }
        let advisor = Advisor::with_config(
            mo,
            AdvisorConfig {
                optimizer: OptimizerConfig {
                    random_probes: 200,
                    ..OptimizerConfig::default()
                },
                ehvi_mc_draws: 128,
                ..AdvisorConfig::default()
            },
        );
        let c = advisor.suggest(&h, 4).unwrap();
        assert!(space.is_valid(&c));
        assert!(!h.completed().iter().any(|o| o.config == c));
    }
}

#[test]
fn conditioned_space_uses_forest() {
    let space = SearchSpace::new(
        vec![
            Parameter::categorical("kind", vec!["a".into(), "b".into()]),
            Parameter::float("x", 0.0, 1.0),
            Parameter::integer("n", 1, 5),
        ],
        vec![Condition::equal("kind", "x", "b")],
    )
    .unwrap();
    let spec = TaskSpec::new(space.clone());
    let mut h = History::new("t");
    for (i, c) in space.sample_random(9, 10).into_iter().enumerate() {
        h.push_result(c, (i as f64 * 0.71) % 1.0).unwrap();
    }
    let advisor = Advisor::new(spec);
    assert_eq!(advisor.plan(&h).surrogate, SurrogateKind::Prf);
    let c = advisor.suggest(&h, 0).unwrap();
    assert!(space.is_valid(&c));
}

#[test]
fn history_rejects_bad_observations() {
    let mut h = History::new("t");
    assert!(h.push_result(x_of(0.1), f64::NAN).is_err());
    let mut running = Observation::completed(x_of(0.1), vec![1.0], vec![]);
    running.trial_state = TrialState::Running;
    assert!(h.push(running).is_err());
    h.add_pending(x_of(0.2));
    h.push_result(x_of(0.2), 1.0).unwrap();
    assert!(h.pending().is_empty());
    assert!(h.push(Observation::completed(x_of(0.3), vec![1.0, 2.0], vec![])).is_err());
}

#[test]
fn ranking_loss_examples() {
    let y = [1.0, 2.0, 3.0];
    assert_eq!(ranking_loss(&[1.1, 2.2, 3.3], &y), 0);
    assert_eq!(ranking_loss(&[3.0, 2.0, 1.0], &y), 6);
    // Brute-force oracle on random permutations: inverse order counts every
    // unordered pair twice.
    for n in 2..8 {
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let inv: Vec<f64> = y.iter().rev().copied().collect();
        assert_eq!(ranking_loss(&inv, &y), n * (n - 1));
    }
}

fn gp_on(x: &[f64], y: &[f64]) -> Surrogate {
    let kinds = [FeatureKind::Continuous];
    let xs: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
    Surrogate::Gp(crate::surrogate::fit_gp(&kinds, &xs, y, 0).unwrap())
}

#[test]
fn rgpe_prefers_correctly_ordering_source() {
    let xs: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
    let good = gp_on(&xs, &xs.iter().map(|x| 2.0 * x).collect::<Vec<_>>());
    let bad = gp_on(&xs, &xs.iter().map(|x| -x).collect::<Vec<_>>());
    let xt = [0.05, 0.3, 0.5, 0.72, 0.95];
    let yt: Vec<f64> = xt.iter().map(|x| x + 0.1).collect();
    let target = gp_on(&xt, &yt);
    let xtv: Vec<Vec<f64>> = xt.iter().map(|v| vec![*v]).collect();
    let w = rgpe_weights(&[&good, &bad], &target, &xtv, &yt, 100, 1);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(w[0] >= 0.9 * (w[0] + w[1]), "{w:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn rgpe_weights_on_simplex(
        ys in proptest::collection::vec(-5.0f64..5.0, 4..9),
        k in 0usize..4,
        seed in 0u64..1000,
    ) {
        let n = ys.len();
        let xt: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let target = gp_on(&xt, &ys);
        let bases: Vec<Surrogate> = (0..k)
            .map(|b| gp_on(&[0.0, 0.5, 1.0], &[b as f64, -(b as f64), 0.3]))
            .collect();
        let refs: Vec<&Surrogate> = bases.iter().collect();
        let xtv: Vec<Vec<f64>> = xt.iter().map(|v| vec![*v]).collect();
        let w = rgpe_weights(&refs, &target, &xtv, &ys, 20, seed);
        prop_assert_eq!(w.len(), k + 1);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn suggestion_never_pending(seed in 0u64..500, npend in 1usize..4) {
        let space = SearchSpace::new(vec![Parameter::integer("k", 0, 6)], vec![]).unwrap();
        let spec = TaskSpec::new(space.clone());
        let mut h = History::new("t");
        for k in [0i64, 3, 6] {
            h.push_result(Configuration::new().with("k", k), ((k - 2) * (k - 2)) as f64).unwrap();
        }
        for k in 1..=npend as i64 {
            h.add_pending(Configuration::new().with("k", k));
        }
        let advisor = Advisor::with_config(spec, AdvisorConfig {
            optimizer: OptimizerConfig { random_probes: 100, restarts: 2, ..OptimizerConfig::default() },
            ..AdvisorConfig::default()
        });
        let c = advisor.suggest(&h, seed).unwrap();
        let u = space.to_unit_vector(&c);
        for p in h.pending() {
            let v = space.to_unit_vector(p);
            prop_assert!(u.iter().zip(&v).any(|(a, b)| (a - b).abs() > 1e-12));
        }
    }
}

#[test]
fn combination_examples() {
    let g = GaussianPrediction::new;
    let p = combine_predictions(&[g(0.3, 0.7), g(5.0, 2.0), g(-1.0, 0.1)], &[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(p, g(0.3, 0.7));
    let p = combine_predictions(&[g(0.0, 1.0), g(2.0, 1.0)], &[0.5, 0.5]).unwrap();
    assert_eq!((p.mean, p.variance), (1.0, 1.0));
    // Direct evaluation of the precision-weighted formulas.
    let (w, m, v): ([f64; 3], [f64; 3], [f64; 3]) = ([0.2, 0.5, 0.3], [1.0, -2.0, 0.5], [0.5, 2.0, 1e-12]);
    let prec: f64 = (0..3).map(|i| w[i] / v[i].max(1e-8)).sum();
    let mean: f64 = (0..3).map(|i| w[i] * m[i] / v[i].max(1e-8)).sum::<f64>() / prec;
    let p = combine_predictions(&[g(m[0], v[0]), g(m[1], v[1]), g(m[2], v[2])], &w).unwrap();
    assert!((p.mean - mean).abs() < 1e-12 && (p.variance - 1.0 / prec).abs() < 1e-20);
    assert_eq!(combine_predictions(&[g(0.0, 1.0)], &[0.0]), Err(AdvisorError::ZeroWeights));
}

#[test]
fn target_only_weights_reproduce_target() {
    let base = Arc::new(gp_on(&[0.0, 0.5, 1.0], &[10.0, 30.0, 20.0]));
    let target = gp_on(&[0.1, 0.4, 0.9], &[1.0, 0.5, 0.7]);
    let ens = TransferEnsemble::new(vec![base], target.clone(), vec![0.0, 1.0]);
    for x in [0.0, 0.33, 0.8] {
        assert_eq!(combined_predict(&ens, &[x]).unwrap(), target.predict(&[x]));
    }
}

#[test]
fn transfer_without_sources_matches_plain() {
    let spec = TaskSpec::new(space_1d());
    let h = history_1d(&[0.1, 0.4, 0.7, 0.9], forrester);
    let t = build_transfer_advisor(&[], &spec).unwrap();
    assert_eq!(t.source_count(), 0);
    assert_eq!(t.suggest(&h, 8).unwrap(), suggest(&spec, &h, 8).unwrap());
}

#[test]
fn incompatible_source_is_reported() {
    let spec = TaskSpec::new(space_1d());
    let mut src = History::new("src");
    src.push_result(Configuration::new().with("x", 3.0), 1.0).unwrap();
    src.push_result(Configuration::new().with("x", 0.5).with("y", Value::from(1.0)), 1.0).unwrap();
    match build_transfer_advisor(&[src], &spec) {
        Err(AdvisorError::IncompatibleSource { mismatched }) => {
            assert_eq!(mismatched, vec!["x".to_string(), "y".to_string()])
        }
        other => panic!("unexpected {other:?}"),
    }
}
