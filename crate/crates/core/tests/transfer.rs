use std::time::Instant;

use gbbo_core::advisor::build_transfer_advisor;
use gbbo_core::rng::derive_seed;
use gbbo_core::stats::median;
use gbbo_core::{Advisor, Configuration, History, Parameter, SearchSpace, TaskSpec};

fn quadratic(x: f64) -> f64 {
    (x - 0.37).powi(2)
}

fn space() -> SearchSpace {
    SearchSpace::new(vec![Parameter::float("x", 0.0, 1.0)], vec![]).unwrap()
}

fn x_of(c: &Configuration) -> f64 {
    c.get("x").unwrap().as_f64().unwrap()
}

fn source(n: usize, seed: u64) -> History {
    let mut h = History::new(format!("source-{seed}"));
    for c in space().sample_random(seed, n) {
        let y = quadratic(x_of(&c));
        h.push_result(c, y).unwrap();
    }
    h
}

fn run(advisor: &Advisor, trials: usize, seed: u64) -> f64 {
    let mut h = History::new("target");
    for _ in 0..trials {
        let c = advisor.suggest(&h, seed).unwrap();
        let y = quadratic(x_of(&c));
        h.push_result(c, y).unwrap();
    }
    h.best_objective().unwrap()
}

#[test]
fn transfer_from_identical_source_is_no_worse() {
    let spec = TaskSpec::new(space());
    let plain = Advisor::new(spec.clone());
    let mut with = Vec::new();
    let mut without = Vec::new();
    for seed in 0..10 {
        let tl = build_transfer_advisor(&[source(50, 100 + seed)], &spec).unwrap();
        with.push(run(&tl, 20, derive_seed(seed, &[1])));
        without.push(run(&plain, 20, derive_seed(seed, &[1])));
    }
    let (a, b) = (median(&with).unwrap(), median(&without).unwrap());
    assert!(a <= b, "transfer median {a} vs plain {b}");
}

#[test]
fn ensemble_cost_grows_linearly_in_sources() {
    let spec = TaskSpec::new(space());
    let sources: Vec<History> = (0..8).map(|s| source(50, 200 + s)).collect();
    let mut target = History::new("target");
    for c in space().sample_random(9, 10) {
        let y = quadratic(x_of(&c));
        target.push_result(c, y).unwrap();
    }
    // Build the base models and one weighted step; best of three timings.
    let time = |k: usize| {
        (0..3)
            .map(|_| {
                let t0 = Instant::now();
                let adv = build_transfer_advisor(&sources[..k], &spec).unwrap();
                adv.context(&target, 0).unwrap();
                t0.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let times: Vec<f64> = [1, 2, 4, 8].iter().map(|&k| time(k)).collect();
    for w in times.windows(2) {
        assert!(w[1] / w[0] < 2.5, "{times:?}");
    }
}
