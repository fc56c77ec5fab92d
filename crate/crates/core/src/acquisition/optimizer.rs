//! Acquisition maximization over a search space.
//!
//! `Continuous` (all parameters FLOAT/INTEGER): random probes, then
//! projected finite-difference ascent in unit space from the best probes,
//! then a ±1 polish of integer parameters.
//!
//! `Mixed`: one-exchange local search from the best probes, interleaved
//! with fresh random probes. Numeric parameters take Gaussian steps in unit
//! space whose width halves on failure; discrete ones are redrawn.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::space::{Configuration, ParameterDomain, SearchSpace, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerStrategy {
    Continuous,
    Mixed,
}

impl OptimizerStrategy {
    pub fn for_space(space: &SearchSpace) -> Self {
        if space.all_numeric() {
            OptimizerStrategy::Continuous
        } else {
            OptimizerStrategy::Mixed
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            OptimizerStrategy::Continuous => "continuous",
            OptimizerStrategy::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub random_probes: usize,
    /// Local searches started besides the best probe.
    pub restarts: usize,
    pub max_iters: usize,
    pub fd_step: f64,
    /// Initial Gaussian step (unit range) for mixed local search.
    pub local_sigma: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            random_probes: 1000,
            restarts: 10,
            max_iters: 50,
            fd_step: 1e-4,
            local_sigma: 0.1,
        }
    }
}

/// Returns the best configuration found, deterministic in `seed`.
pub fn optimize_acq(
    space: &SearchSpace,
    score: &dyn Fn(&Configuration) -> f64,
    strategy: OptimizerStrategy,
    seed: u64,
) -> Configuration {
    optimize_acq_with(space, score, strategy, &OptimizerConfig::default(), seed).0
}

/// As [`optimize_acq`], also returning the best score. NaN scores count as
/// `-∞`.
pub fn optimize_acq_with(
    space: &SearchSpace,
    score: &dyn Fn(&Configuration) -> f64,
    strategy: OptimizerStrategy,
    cfg: &OptimizerConfig,
    seed: u64,
) -> (Configuration, f64) {
    let f = |c: &Configuration| {
        let v = score(c);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut rng = rng_from_seed(derive_seed(seed, &[0x6f70]));
    let probes: Vec<Configuration> = (0..cfg.random_probes.max(1))
        .map(|_| space.sample_with(&mut rng))
        .collect();
    let mut scored: Vec<(f64, usize)> = probes.iter().enumerate().map(|(i, c)| (f(c), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = (probes[scored[0].1].clone(), scored[0].0);
    let starts: Vec<usize> = scored
        .iter()
        .take(cfg.restarts + 1)
        .filter(|s| s.0 > f64::NEG_INFINITY)
        .map(|s| s.1)
        .collect();
    for &i in &starts {
        let (c, v) = match strategy {
            OptimizerStrategy::Continuous => gradient_ascent(space, &f, &probes[i], scored_of(&scored, i), cfg),
            OptimizerStrategy::Mixed => local_search(space, &f, &probes[i], scored_of(&scored, i), cfg, &mut rng, &mut best),
        };
        if v > best.1 {
            best = (c, v);
        }
    }
    best
}

fn scored_of(scored: &[(f64, usize)], i: usize) -> f64 {
    scored.iter().find(|s| s.1 == i).map_or(f64::NEG_INFINITY, |s| s.0)
}

fn gradient_ascent(
    space: &SearchSpace,
    f: &dyn Fn(&Configuration) -> f64,
    start: &Configuration,
    start_score: f64,
    cfg: &OptimizerConfig,
) -> (Configuration, f64) {
    let decode = |u: &[f64]| space.from_unit_vector(u).expect("unit vector has space dimension");
    let g = |u: &[f64]| f(&decode(u));
    let mut u = space.to_unit_vector(start);
    let mut cur = start_score;
    let dim = u.len();
    let h = cfg.fd_step;
    let mut eta = 0.05;
    for _ in 0..cfg.max_iters {
        let mut grad = vec![0.0; dim];
        for d in 0..dim {
            let (lo, hi) = ((u[d] - h).max(0.0), (u[d] + h).min(1.0));
            let mut up = u.clone();
            up[d] = hi;
            let mut dn = u.clone();
            dn[d] = lo;
            let fu = g(&up);
            let fd = g(&dn);
            if fu.is_finite() && fd.is_finite() && hi > lo {
                grad[d] = (fu - fd) / (hi - lo);
            }
        }
        let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            break;
        }
        let cand: Vec<f64> = u
            .iter()
            .zip(&grad)
            .map(|(x, gd)| (x + eta * gd / norm).clamp(0.0, 1.0))
            .collect();
        let fc = g(&cand);
        if fc > cur {
            u = cand;
            cur = fc;
            eta = (eta * 1.5).min(0.25);
        } else {
            eta *= 0.5;
            if eta < 1e-6 {
                break;
            }
        }
    }
    let mut best = (decode(&u), cur);
    integer_polish(space, f, &mut best);
    best
}

fn integer_polish(space: &SearchSpace, f: &dyn Fn(&Configuration) -> f64, best: &mut (Configuration, f64)) {
    for _ in 0..3 {
        let mut improved = false;
        for p in space.parameters() {
            let ParameterDomain::Integer { low, high } = p.domain else {
                continue;
            };
            let Some(v) = best.0.get(&p.name).and_then(Value::as_i64) else {
                continue;
            };
            for w in [v - 1, v + 1] {
                if w < low || w > high {
                    continue;
                }
                let cand = space.deactivate(&best.0.clone().with(&p.name, w));
                if !space.is_valid(&cand) {
                    continue;
                }
                let s = f(&cand);
                if s > best.1 {
                    *best = (cand, s);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

fn local_search(
    space: &SearchSpace,
    f: &dyn Fn(&Configuration) -> f64,
    start: &Configuration,
    start_score: f64,
    cfg: &OptimizerConfig,
    rng: &mut Rng,
    global: &mut (Configuration, f64),
) -> (Configuration, f64) {
    let n = space.len();
    let mut sigma = vec![cfg.local_sigma; n];
    let mut cur = (start.clone(), start_score);
    let fail_limit = 2 * n + 10;
    let mut fails = 0;
    for step in 0..cfg.max_iters * n.max(1) {
        let active: Vec<usize> = (0..n)
            .filter(|&i| cur.0.get(&space.parameters()[i].name).is_some())
            .collect();
        if active.is_empty() {
            break;
        }
        let j = active[rng.random_range(0..active.len())];
        let p = &space.parameters()[j];
        let mut cand = cur.0.clone();
        match &p.domain {
            ParameterDomain::Float { .. } | ParameterDomain::Integer { .. } => {
                let u = space.param_to_unit(j, cur.0.get(&p.name).expect("active"));
                let step = Normal::new(0.0, sigma[j]).expect("positive sigma").sample(rng);
                cand.insert(&p.name, space.param_from_unit(j, (u + step).clamp(0.0, 1.0)));
            }
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                if choices.len() < 2 {
                    continue;
                }
                let now = p.domain.choice_index(cur.0.get(&p.name).expect("active")).unwrap_or(0);
                let mut k = rng.random_range(0..choices.len() - 1);
                if k >= now {
                    k += 1;
                }
                cand.insert(&p.name, choices[k].clone());
            }
        }
        let cand = space.repair(&cand, rng);
        let s = f(&cand);
        if s > cur.1 {
            cur = (cand, s);
            fails = 0;
        } else {
            fails += 1;
            if p.domain.is_numeric() {
                sigma[j] = (sigma[j] * 0.5).max(1e-4);
            }
        }
        // Interleaved random probe.
        if step % 2 == 1 {
            let probe = space.sample_with(rng);
            let ps = f(&probe);
            if ps > global.1 {
                *global = (probe, ps);
            }
        }
        if fails >= fail_limit {
            break;
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Condition, Parameter};
    use proptest::prelude::*;

    fn unit_square() -> SearchSpace {
        SearchSpace::new(
            vec![Parameter::float("a", 0.0, 1.0), Parameter::float("b", 0.0, 1.0)],
            vec![],
        )
        .unwrap()
    }

    fn get(c: &Configuration, n: &str) -> f64 {
        c.get(n).and_then(Value::as_f64).unwrap()
    }

    #[test]
    fn concave_quadratic() {
        let s = unit_square();
        let score = |c: &Configuration| -((get(c, "a") - 0.5).powi(2) + (get(c, "b") - 0.5).powi(2));
        let best = optimize_acq(&s, &score, OptimizerStrategy::Continuous, 3);
        assert!((get(&best, "a") - 0.5).abs() < 1e-3 && (get(&best, "b") - 0.5).abs() < 1e-3, "{best:?}");
    }

    #[test]
    fn constant_score_returns_valid_config() {
        let s = crate::space::tests::example_space();
        let c = optimize_acq(&s, &|_| 1.0, OptimizerStrategy::Mixed, 0);
        assert!(s.is_valid(&c));
        let c = optimize_acq(&unit_square(), &|_| 1.0, OptimizerStrategy::Continuous, 0);
        assert!(unit_square().is_valid(&c));
    }

    /// Enumerating the three choices shows "a2" is the unique maximizer.
    #[test]
    fn mixed_space_finds_rewarded_category() {
        let s = crate::space::tests::example_space();
        let score = |c: &Configuration| {
            let bonus = if c.get("x3") == Some(&Value::from("a2")) { 1.0 } else { 0.0 };
            bonus - 0.01 * c.get("x2").and_then(Value::as_f64).unwrap_or(0.0)
        };
        let oracle = ["a1", "a2", "a3"]
            .iter()
            .max_by(|a, b| {
                let sa = score(&Configuration::new().with("x3", **a).with("x2", 0i64));
                let sb = score(&Configuration::new().with("x3", **b).with("x2", 0i64));
                sa.total_cmp(&sb)
            })
            .unwrap();
        let hits = (0..20)
            .filter(|&seed| {
                let cfg = OptimizerConfig {
                    random_probes: 50,
                    ..OptimizerConfig::default()
                };
                let (c, _) = optimize_acq_with(&s, &score, OptimizerStrategy::Mixed, &cfg, seed);
                c.get("x3") == Some(&Value::from(*oracle))
            })
            .count();
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn integer_polish_reaches_optimum() {
        let s = SearchSpace::new(
            vec![Parameter::integer("k", 0, 100), Parameter::float("x", 0.0, 1.0)],
            vec![],
        )
        .unwrap();
        let score = |c: &Configuration| -((get(c, "k") - 37.0).abs()) - (get(c, "x") - 0.2).powi(2);
        let best = optimize_acq(&s, &score, OptimizerStrategy::Continuous, 1);
        assert_eq!(best.get("k"), Some(&Value::Int(37)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn outputs_are_always_valid(seed in 0u64..1000, w in -3.0f64..3.0) {
            let s = SearchSpace::new(
                vec![
                    Parameter::categorical("m", vec!["p".into(), "q".into()]),
                    Parameter::float("x", -2.0, 2.0),
                    Parameter::integer("k", 1, 4),
                    Parameter::ordinal("o", vec![1i64.into(), 5i64.into(), 9i64.into()]),
                ],
                vec![Condition::equal("m", "x", "q"), Condition::equal("k", "o", 2i64)],
            ).unwrap();
            let score = |c: &Configuration| {
                c.get("x").and_then(Value::as_f64).unwrap_or(0.0) * w
                    + c.get("o").and_then(Value::as_f64).unwrap_or(0.0)
            };
            let cfg = OptimizerConfig { random_probes: 30, restarts: 2, max_iters: 5, ..OptimizerConfig::default() };
            let (c, _) = optimize_acq_with(&s, &score, OptimizerStrategy::Mixed, &cfg, seed);
            prop_assert!(s.is_valid(&c), "{:?}", c);
            let num = SearchSpace::new(
                vec![Parameter::integer("k", 1, 4), Parameter::float("x", -2.0, 2.0)],
                vec![Condition::equal("k", "x", 3i64)],
            ).unwrap();
            let (c, _) = optimize_acq_with(&num, &score, OptimizerStrategy::Continuous, &cfg, seed);
            prop_assert!(num.is_valid(&c), "{:?}", c);
        }
    }
}
