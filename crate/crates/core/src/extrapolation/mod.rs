//! Performance-versus-trial extrapolation and resource advice.
//!
//! The best-so-far curve `z_1..z_n` is modelled as a weighted mixture of
//! decreasing saturating families plus Gaussian noise,
//! `z_t = Σ_k w_k g_k(t | θ_k) + ε`, with weights on the simplex. The
//! posterior over all parameters is sampled by random-walk Metropolis on
//! range-normalized data.

mod early_stop;

pub use early_stop::{should_stop_early, EarlyStopConfig, EarlyStopRule};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{rng_from_seed, Rng};
use crate::stats::norm_cdf;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtrapolationError {
    #[error("need at least {needed} curve points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("horizon {horizon} must exceed the observed length {n}")]
    BadHorizon { horizon: usize, n: usize },
    #[error("curve values must be finite and non-increasing")]
    BadCurve,
    #[error("every Metropolis proposal was rejected")]
    AllRejected,
}

/// Minimum curve length accepted by [`fit_curve_posterior`].
pub const MIN_CURVE_LEN: usize = 5;

/// Best-so-far performance after each trial, with per-trial costs.
#[derive(Clone, Debug, PartialEq)]
pub struct PerfCurve {
    z: Vec<f64>,
    costs: Vec<f64>,
}

impl PerfCurve {
    /// `z` must be finite and non-increasing.
    pub fn new(z: Vec<f64>, costs: Vec<f64>) -> Result<Self, ExtrapolationError> {
        if z.iter().any(|v| !v.is_finite()) || z.windows(2).any(|w| w[1] > w[0]) {
            return Err(ExtrapolationError::BadCurve);
        }
        Ok(Self { z, costs })
    }

    /// Builds the running minimum of raw per-trial results.
    pub fn from_results(results: &[f64], costs: Vec<f64>) -> Self {
        let mut best = f64::INFINITY;
        let z = results
            .iter()
            .filter(|v| v.is_finite())
            .map(|&v| {
                best = best.min(v);
                best
            })
            .collect();
        Self { z, costs }
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Arithmetic mean of the recorded per-trial costs (0 if none).
    pub fn mean_cost(&self) -> f64 {
        crate::stats::mean(&self.costs).unwrap_or(0.0)
    }

    /// Default meaningful-improvement threshold: 0.1% of the observed range,
    /// with a scale-aware floor for flat curves.
    pub fn default_delta(&self) -> f64 {
        let hi = self.z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.z.iter().copied().fold(f64::INFINITY, f64::min);
        let range = hi - lo;
        if range > 0.0 {
            1e-3 * range
        } else {
            1e-3 * lo.abs().max(1e-9)
        }
    }
}

/// A decreasing saturating curve family. All saturate to `c` as `t → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveFamily {
    /// `c + a · t^(-α)`.
    Pow3,
    /// `c + a · exp(-b t)`.
    Exponential,
    /// `c + a / (1 + (t / b)^α)`.
    LogPower,
}

pub const FAMILIES: [CurveFamily; 3] = [CurveFamily::Pow3, CurveFamily::Exponential, CurveFamily::LogPower];

impl CurveFamily {
    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::Pow3 => "pow3",
            CurveFamily::Exponential => "exp",
            CurveFamily::LogPower => "log_power",
        }
    }

    /// Parameter count `θ_k`.
    pub fn n_params(self) -> usize {
        match self {
            CurveFamily::Pow3 | CurveFamily::Exponential => 3,
            CurveFamily::LogPower => 4,
        }
    }

    /// Evaluates `g_k(t | θ)` with `θ = (c, a, rate/shape...)`, all but `c`
    /// positive.
    pub fn eval(self, t: f64, theta: &[f64]) -> f64 {
        let (c, a) = (theta[0], theta[1]);
        match self {
            CurveFamily::Pow3 => c + a * t.powf(-theta[2]),
            CurveFamily::Exponential => c + a * (-theta[2] * t).exp(),
            CurveFamily::LogPower => c + a / (1.0 + (t / theta[2]).powf(theta[3])),
        }
    }
}

/// One posterior draw in original units.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub weights: [f64; 3],
    pub thetas: [Vec<f64>; 3],
    pub sigma2: f64,
}

impl CurveSample {
    pub fn g_comb(&self, t: f64) -> f64 {
        FAMILIES
            .iter()
            .enumerate()
            .map(|(k, f)| self.weights[k] * f.eval(t, &self.thetas[k]))
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub thin: usize,
    pub step: f64,
    /// Prior draws screened when the least-squares start is infeasible.
    pub init_draws: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 500,
            samples: 100,
            thin: 5,
            step: 0.05,
            init_draws: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurvePosterior {
    pub samples: Vec<CurveSample>,
    pub acceptance_rate: f64,
    /// Observed curve length.
    pub n: usize,
    pub horizon: usize,
    /// Last observed value `z_n`.
    pub z_n: f64,
}

impl CurvePosterior {
    /// Posterior mean of `g_comb(t)`.
    pub fn mean_prediction(&self, t: f64) -> f64 {
        self.samples.iter().map(|s| s.g_comb(t)).sum::<f64>() / self.samples.len() as f64
    }

    /// Posterior mean of the family weights.
    pub fn mean_weights(&self) -> [f64; 3] {
        let mut w = [0.0; 3];
        for s in &self.samples {
            for k in 0..3 {
                w[k] += s.weights[k];
            }
        }
        w.map(|v| v / self.samples.len() as f64)
    }
}

// Layout of the sampler state in normalized units:
// [0..3) log-weights, [3..6) pow3 (c, ln a, ln α), [6..9) exp (c, ln a, ln b),
// [9..13) log-power (c, ln a, ln b, ln α), [13] ln σ. Flat priors on the
// box; the log-power midpoint `b` is at least one trial.
const DIM: usize = 14;

fn state_bounds(horizon: usize) -> [(f64, f64); DIM] {
    let la = (1e-6f64.ln(), 20f64.ln());
    let c = (-1.0, 1.5);
    [
        (-6.0, 6.0),
        (-6.0, 6.0),
        (-6.0, 6.0),
        c,
        la,
        (0.05f64.ln(), 5f64.ln()),
        c,
        la,
        (1e-3f64.ln(), 3f64.ln()),
        c,
        la,
        (0.0, (5.0 * horizon as f64).ln()),
        (0.1f64.ln(), 10f64.ln()),
        (1e-4f64.ln(), 1f64.ln()),
    ]
}

/// Offset of each family's parameter block in the state vector.
const BLOCK: [usize; 3] = [3, 6, 9];

fn softmax3(s: &[f64]) -> [f64; 3] {
    let m = s[0].max(s[1]).max(s[2]);
    let e = [(s[0] - m).exp(), (s[1] - m).exp(), (s[2] - m).exp()];
    let z = e[0] + e[1] + e[2];
    e.map(|v| v / z)
}

fn thetas_of(s: &[f64]) -> [Vec<f64>; 3] {
    [
        vec![s[3], s[4].exp(), s[5].exp()],
        vec![s[6], s[7].exp(), s[8].exp()],
        vec![s[9], s[10].exp(), s[11].exp(), s[12].exp()],
    ]
}

fn g_comb(w: &[f64; 3], th: &[Vec<f64>; 3], t: f64) -> f64 {
    FAMILIES
        .iter()
        .enumerate()
        .map(|(k, f)| w[k] * f.eval(t, &th[k]))
        .sum()
}

struct Target<'a> {
    z: &'a [f64],
    horizon: f64,
    bounds: [(f64, f64); DIM],
}

impl Target<'_> {
    fn log_post(&self, s: &[f64]) -> f64 {
        if s.iter().zip(&self.bounds).any(|(v, (lo, hi))| v < lo || v > hi) {
            return f64::NEG_INFINITY;
        }
        let w = softmax3(&s[0..3]);
        let th = thetas_of(s);
        if !(g_comb(&w, &th, 1.0) > g_comb(&w, &th, self.horizon)) {
            return f64::NEG_INFINITY;
        }
        let sigma = s[13].exp();
        let inv = 1.0 / (sigma * sigma);
        let mut sse = 0.0;
        for (i, z) in self.z.iter().enumerate() {
            let r = z - g_comb(&w, &th, (i + 1) as f64);
            sse += r * r;
        }
        let v = -0.5 * sse * inv - self.z.len() as f64 * sigma.ln();
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Least-squares fit of one family: grid over the shape parameters with
/// `(c, a)` solved in closed form. Returns the state block and its SSE.
fn least_squares(family: CurveFamily, z: &[f64], bounds: &[(f64, f64); DIM]) -> Option<(Vec<f64>, f64)> {
    let off = BLOCK[family as usize];
    let grid = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let shapes: Vec<Vec<f64>> = match family {
        CurveFamily::Pow3 | CurveFamily::Exponential => grid(bounds[off + 2], 80).into_iter().map(|v| vec![v]).collect(),
        CurveFamily::LogPower => {
            let bs = grid(bounds[off + 2], 40);
            let al = grid(bounds[off + 3], 30);
            bs.iter().flat_map(|b| al.iter().map(move |a| vec![*b, *a])).collect()
        }
    };
    let n = z.len() as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for shape in shapes {
        let mut theta = vec![0.0, 1.0];
        theta.extend(shape.iter().map(|v| v.exp()));
        // Basis u_t = g(t | c=0, a=1).
        let u: Vec<f64> = (1..=z.len()).map(|t| family.eval(t as f64, &theta)).collect();
        let (su, sz) = (u.iter().sum::<f64>(), z.iter().sum::<f64>());
        let suu = u.iter().map(|v| v * v).sum::<f64>();
        let suz = u.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        let det = n * suu - su * su;
        if det.abs() < 1e-14 {
            continue;
        }
        let a = ((n * suz - su * sz) / det).clamp(bounds[off + 1].0.exp(), bounds[off + 1].1.exp());
        let c = ((sz - a * su) / n).clamp(bounds[off].0, bounds[off].1);
        let sse: f64 = u.iter().zip(z).map(|(ui, zi)| (zi - c - a * ui).powi(2)).sum();
        if best.as_ref().is_none_or(|(_, e)| sse < *e) {
            let mut block = vec![c, a.ln()];
            block.extend(shape);
            best = Some((block, sse));
        }
    }
    best
}

/// Chain start: every family at its own least-squares fit, the best-fitting
/// family carrying most of the weight.
fn initial_state(target: &Target<'_>) -> Option<Vec<f64>> {
    let mut s = vec![0.0; DIM];
    let mut best = (0usize, f64::INFINITY);
    for (k, fam) in FAMILIES.iter().enumerate() {
        let (block, sse) = least_squares(*fam, target.z, &target.bounds)?;
        s[BLOCK[k]..BLOCK[k] + block.len()].copy_from_slice(&block);
        if sse < best.1 {
            best = (k, sse);
        }
    }
    s[best.0] = 2.0;
    let w = softmax3(&s[0..3]);
    let th = thetas_of(&s);
    let sse: f64 = target
        .z
        .iter()
        .enumerate()
        .map(|(i, z)| (z - g_comb(&w, &th, (i + 1) as f64)).powi(2))
        .sum();
    let (lo, hi) = target.bounds[13];
    s[13] = (0.5 * (sse / target.z.len() as f64).ln()).clamp(lo, hi);
    Some(s)
}

/// One sweep of component-wise random-walk Metropolis. Returns the number
/// of accepted moves per coordinate.
fn sweep(
    target: &Target<'_>,
    cur: &mut [f64],
    cur_lp: &mut f64,
    steps: &[f64],
    accepted: &mut [usize],
    rng: &mut Rng,
) {
    for d in 0..DIM {
        let old = cur[d];
        let z: f64 = StandardNormal.sample(rng);
        cur[d] = old + steps[d] * z;
        let lp = target.log_post(cur);
        if lp - *cur_lp > rng.random::<f64>().ln() {
            *cur_lp = lp;
            accepted[d] += 1;
        } else {
            cur[d] = old;
        }
    }
}

/// Samples the curve posterior; deterministic in `seed`.
///
/// The chain starts from per-family least-squares fits and updates one
/// coordinate at a time. During burn-in each coordinate's step is doubled
/// or halved to keep its acceptance within 20-50%.
pub fn fit_curve_posterior(
    curve: &PerfCurve,
    horizon: usize,
    cfg: &McmcConfig,
    seed: u64,
) -> Result<CurvePosterior, ExtrapolationError> {
    let n = curve.len();
    if n < MIN_CURVE_LEN {
        return Err(ExtrapolationError::TooShort {
            needed: MIN_CURVE_LEN,
            got: n,
        });
    }
    if horizon <= n {
        return Err(ExtrapolationError::BadHorizon { horizon, n });
    }
    let raw = curve.values();
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    let z: Vec<f64> = raw.iter().map(|v| (v - lo) / scale).collect();
    let target = Target {
        z: &z,
        horizon: horizon as f64,
        bounds: state_bounds(horizon),
    };
    let mut rng = rng_from_seed(seed);

    let mut cur = initial_state(&target).ok_or(ExtrapolationError::AllRejected)?;
    let mut cur_lp = target.log_post(&cur);
    if !cur_lp.is_finite() {
        // Fall back to the best of a batch of prior draws.
        for _ in 0..cfg.init_draws.max(1) {
            let s: Vec<f64> = target.bounds.iter().map(|(a, b)| rng.random_range(*a..*b)).collect();
            let lp = target.log_post(&s);
            if lp > cur_lp {
                cur = s;
                cur_lp = lp;
            }
        }
        if !cur_lp.is_finite() {
            return Err(ExtrapolationError::AllRejected);
        }
    }

    let mut steps = vec![cfg.step; DIM];
    let window = 20;
    let mut acc = vec![0usize; DIM];
    for it in 0..cfg.burn_in {
        sweep(&target, &mut cur, &mut cur_lp, &steps, &mut acc, &mut rng);
        if (it + 1) % window == 0 {
            for d in 0..DIM {
                let rate = acc[d] as f64 / window as f64;
                if rate < 0.2 {
                    steps[d] = (steps[d] * 0.5).max(1e-8);
                } else if rate > 0.5 {
                    steps[d] = (steps[d] * 2.0).min(2.0);
                }
            }
            acc.iter_mut().for_each(|a| *a = 0);
        }
    }

    let mut samples = Vec::with_capacity(cfg.samples);
    let mut acc = vec![0usize; DIM];
    let mut sweeps = 0usize;
    while samples.len() < cfg.samples.max(1) {
        for _ in 0..cfg.thin.max(1) {
            sweep(&target, &mut cur, &mut cur_lp, &steps, &mut acc, &mut rng);
            sweeps += 1;
        }
        samples.push(to_sample(&cur, lo, scale));
    }
    let accepted: usize = acc.iter().sum();
    Ok(CurvePosterior {
        samples,
        acceptance_rate: accepted as f64 / (sweeps * DIM).max(1) as f64,
        n,
        horizon,
        z_n: raw[n - 1],
    })
}

/// Maps a normalized state to original units: `c → lo + scale·c`,
/// `a → scale·a`, `σ → scale·σ`.
fn to_sample(s: &[f64], lo: f64, scale: f64) -> CurveSample {
    let weights = softmax3(&s[0..3]);
    let mut thetas = thetas_of(s);
    for th in thetas.iter_mut() {
        th[0] = lo + scale * th[0];
        th[1] *= scale;
    }
    let sigma = s[13].exp() * scale;
    CurveSample {
        weights,
        thetas,
        sigma2: sigma * sigma,
    }
}

/// `P(z_t < z_n - δ)`, averaged over posterior samples.
pub fn prob_improvement(post: &CurvePosterior, t: usize, delta: f64) -> f64 {
    let p = post
        .samples
        .iter()
        .map(|s| {
            let sd = s.sigma2.sqrt();
            let gap = post.z_n - delta - s.g_comb(t as f64);
            if sd > 0.0 {
                norm_cdf(gap / sd)
            } else if gap > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / post.samples.len() as f64;
    p.clamp(0.0, 1.0)
}

/// Fraction of posterior samples whose noise-free curve still drops by more
/// than `delta` between `t` and the horizon.
pub fn remaining_improvement(post: &CurvePosterior, t: usize, delta: f64) -> f64 {
    let h = post.horizon as f64;
    post.samples
        .iter()
        .filter(|s| s.g_comb(t as f64) - s.g_comb(h) > delta)
        .count() as f64
        / post.samples.len() as f64
}

/// Smallest `t` in `(n, T]` after which a further meaningful improvement
/// has probability below `p_stop`; `T` if none.
pub fn saturation_trial(post: &CurvePosterior, delta: f64, p_stop: f64) -> usize {
    (post.n + 1..=post.horizon)
        .find(|&t| remaining_improvement(post, t, delta) < p_stop)
        .unwrap_or(post.horizon)
}

pub const DEFAULT_P_STOP: f64 = 0.05;

/// Case 1 advice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetAdvice {
    pub t_star: usize,
    pub b_min: f64,
}

/// `⌈(t* - n) / N⌉ · mean_cost`.
pub fn min_budget(t_star: usize, n: usize, workers: usize, mean_cost: f64) -> f64 {
    let remaining = t_star.saturating_sub(n);
    remaining.div_ceil(workers.max(1)) as f64 * mean_cost
}

/// `max(1, ⌈(t* - n) · mean_cost / B⌉)`.
pub fn min_workers(t_star: usize, n: usize, mean_cost: f64, budget: f64) -> usize {
    let work = t_star.saturating_sub(n) as f64 * mean_cost;
    if !(budget > 0.0) {
        return usize::MAX;
    }
    ((work / budget - 1e-12).ceil().max(1.0)) as usize
}

pub fn advise_min_budget(
    post: &CurvePosterior,
    workers: usize,
    mean_cost: f64,
    delta: f64,
    p_stop: f64,
) -> BudgetAdvice {
    let t_star = saturation_trial(post, delta, p_stop);
    BudgetAdvice {
        t_star,
        b_min: min_budget(t_star, post.n, workers, mean_cost),
    }
}

pub fn advise_min_workers(
    post: &CurvePosterior,
    budget: f64,
    mean_cost: f64,
    delta: f64,
    p_stop: f64,
) -> usize {
    let t_star = saturation_trial(post, delta, p_stop);
    min_workers(t_star, post.n, mean_cost, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy_curve(f: impl Fn(f64) -> f64, n: usize, noise: f64, seed: u64) -> PerfCurve {
        let mut rng = rng_from_seed(seed);
        let raw: Vec<f64> = (1..=n)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                f(t as f64) + noise * e
            })
            .collect();
        PerfCurve::from_results(&raw, vec![1.0; n])
    }

    fn pow3(t: f64) -> f64 {
        0.1 + 1.0 / t
    }

    #[test]
    fn pow3_extrapolation() {
        let curve = noisy_curve(pow3, 30, 0.005, 1);
        let post = fit_curve_posterior(&curve, 150, &McmcConfig::default(), 2).unwrap();
        let m = post.mean_prediction(100.0);
        assert!((m - 0.11).abs() <= 0.02, "g(100) = {m}");
        let p = prob_improvement(&post, 100, 0.01);
        assert!(p > 0.5, "p = {p}");
    }

    #[test]
    fn flat_curve() {
        let curve = PerfCurve::new(vec![0.5; 20], vec![2.0; 20]).unwrap();
        let post = fit_curve_posterior(&curve, 100, &McmcConfig::default(), 0).unwrap();
        assert!((post.mean_prediction(100.0) - 0.5).abs() <= 0.01);
        assert!(prob_improvement(&post, 100, 0.05) < 0.1);
        let advice = advise_min_budget(&post, 4, 2.0, curve.default_delta(), DEFAULT_P_STOP);
        assert_eq!(advice.t_star, 21);
        assert_eq!(advice.b_min, 2.0);
        assert_eq!(
            advise_min_workers(&post, 10.0, 2.0, curve.default_delta(), DEFAULT_P_STOP),
            1
        );
    }

    #[test]
    fn samples_respect_prior_support() {
        let curve = noisy_curve(|t| 2.0 * (-0.2 * t).exp() + 1.0, 25, 0.01, 4);
        let post = fit_curve_posterior(&curve, 125, &McmcConfig::default(), 5).unwrap();
        for s in &post.samples {
            assert!(s.weights.iter().all(|w| *w > 0.0));
            assert!(s.g_comb(1.0) > s.g_comb(125.0));
            assert!(s.sigma2 > 0.0);
        }
    }

    #[test]
    fn probability_monotonicity() {
        let curve = noisy_curve(pow3, 30, 0.005, 8);
        let post = fit_curve_posterior(&curve, 150, &McmcConfig::default(), 9).unwrap();
        let mut prev = 1.0;
        for i in 0..20 {
            let p = prob_improvement(&post, 60, 0.002 * i as f64);
            assert!(p <= prev + 1e-12);
            prev = p;
        }
        let mut prev = 0.0;
        for t in 31..=150 {
            let p = prob_improvement(&post, t, 0.005);
            assert!(p >= prev - 1e-12);
            prev = p;
        }
        assert!(prob_improvement(&post, 100, 1e9) < 1e-12);
    }

    #[test]
    fn advice_arithmetic() {
        assert_eq!(min_budget(140, 100, 4, 10.0), 100.0);
        assert_eq!(min_budget(140, 100, 8, 10.0), 50.0);
        assert_eq!(min_workers(140, 100, 10.0, 100.0), 4);
        assert_eq!(min_workers(140, 100, 10.0, 1e6), 1);
        assert_eq!(min_workers(101, 100, 10.0, 100.0), 1);
    }

    #[test]
    fn recovers_generating_family() {
        let truths: [(CurveFamily, fn(f64) -> f64); 3] = [
            (CurveFamily::Pow3, |t| 0.2 + 2.0 * t.powf(-0.7)),
            (CurveFamily::Exponential, |t| 0.2 + (-0.15 * t).exp()),
            (CurveFamily::LogPower, |t| 0.2 + 1.0 / (1.0 + (t / 8.0).powf(2.5))),
        ];
        for (family, f) in truths {
            let k = family as usize;
            let hits = (0..10)
                .filter(|&seed| {
                    let curve = noisy_curve(f, 30, 0.005, seed);
                    let post = fit_curve_posterior(&curve, 150, &McmcConfig::default(), seed + 7).unwrap();
                    let w = post.mean_weights();
                    (0..3).all(|j| j == k || w[k] > w[j])
                })
                .count();
            assert!(hits >= 9, "{}: {hits}/10", family.name());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let curve = noisy_curve(pow3, 20, 0.01, 3);
        let a = fit_curve_posterior(&curve, 100, &McmcConfig::default(), 11).unwrap();
        let b = fit_curve_posterior(&curve, 100, &McmcConfig::default(), 11).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn rejects_short_curves() {
        let c = PerfCurve::new(vec![3.0, 2.0, 1.0], vec![]).unwrap();
        assert!(matches!(
            fit_curve_posterior(&c, 10, &McmcConfig::default(), 0),
            Err(ExtrapolationError::TooShort { .. })
        ));
        assert_eq!(PerfCurve::new(vec![1.0, 2.0], vec![]), Err(ExtrapolationError::BadCurve));
    }
}
