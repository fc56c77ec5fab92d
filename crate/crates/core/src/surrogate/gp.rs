//! Gaussian process regression with type-II maximum likelihood.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use super::kernel::{Kernel, KernelParams, PairCache};
use super::{check_training_data, GaussianPrediction, SurrogateError};
use crate::rng::{derive_seed, rng_from_seed};
use crate::space::FeatureKind;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
pub const MIN_NOISE: f64 = 1e-8;

/// Hyperparameter search settings.
#[derive(Clone, Debug)]
pub struct GpConfig {
    /// Starting points probed (the default start plus random ones).
    pub restarts: usize,
    /// Best probed starts refined by gradient ascent.
    pub refine: usize,
    pub max_iters: usize,
    /// Hyperparameters are fit on a random subset of at most this many
    /// points; the final model always uses every point.
    pub max_fit_points: usize,
    pub standardize: bool,
    /// Lower bound on the noise variance in standardized units.
    pub min_noise: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            refine: 3,
            max_iters: 100,
            max_fit_points: 100,
            standardize: true,
            min_noise: 1e-6,
        }
    }
}

/// Log-space box for `[s², ℓ.., λ.., noise]`.
fn log_bounds(kernel: &Kernel, min_noise: f64) -> Vec<(f64, f64)> {
    let mut b = vec![(0.05f64.ln(), 20f64.ln())];
    b.extend(std::iter::repeat_n((0.01f64.ln(), 10f64.ln()), kernel.cont.len()));
    b.extend(std::iter::repeat_n((1e-3f64.ln(), 10f64.ln()), kernel.cat.len()));
    b.push((min_noise.max(MIN_NOISE).ln(), 1f64.ln()));
    b
}

#[derive(Clone, Debug)]
pub struct GpModel {
    kernel: Kernel,
    params: KernelParams,
    x: Vec<Vec<f64>>,
    /// Standardized targets.
    y: Vec<f64>,
    /// Lower Cholesky factor, row-major.
    l: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    degenerate: bool,
    lml: f64,
}

/// Fits hyperparameters by multi-start maximization of the evidence.
pub fn fit_gp(
    kinds: &[FeatureKind],
    x: &[Vec<f64>],
    y: &[f64],
    seed: u64,
) -> Result<GpModel, SurrogateError> {
    fit_gp_with(kinds, x, y, &GpConfig::default(), seed)
}

pub fn fit_gp_with(
    kinds: &[FeatureKind],
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &GpConfig,
    seed: u64,
) -> Result<GpModel, SurrogateError> {
    check_training_data(x, y, kinds.len(), 1)?;
    let kernel = Kernel::new(kinds);
    let (y_mean, y_std, degenerate) = standardization(y, cfg.standardize);
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
    let bounds = log_bounds(&kernel, cfg.min_noise);
    let default = default_theta(&kernel, cfg.min_noise);

    let theta = if degenerate || x.len() < 2 {
        let mut t = default;
        *t.last_mut().unwrap() = bounds.last().unwrap().0;
        t
    } else {
        let mut rng = rng_from_seed(derive_seed(seed, &[0x6770]));
        let idx = subsample(x.len(), cfg.max_fit_points, &mut rng);
        let xs: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
        let yf: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        let cache = PairCache::new(&kernel, &xs);
        let objective = |t: &[f64]| lml_and_grad(&kernel, &cache, &yf, t, true);

        let mut starts = vec![default];
        while starts.len() < cfg.restarts.max(1) {
            starts.push(random_theta(&kernel, &bounds, &mut rng));
        }
        let mut scored: Vec<(f64, Vec<f64>)> = starts
            .into_iter()
            .map(|t| (objective(&t).map_or(f64::NEG_INFINITY, |r| r.0), t))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best = scored[0].clone();
        for (_, start) in scored.into_iter().take(cfg.refine.max(1)) {
            let (v, t) = rprop_ascent(&objective, start, &bounds, cfg.max_iters);
            if v > best.0 {
                best = (v, t);
            }
        }
        best.1
    };
    let params = KernelParams::from_log(&kernel, &theta);
    GpModel::build(kernel, params, x.to_vec(), ys, y_mean, y_std, degenerate)
}

fn standardization(y: &[f64], enabled: bool) -> (f64, f64, bool) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let degenerate = !(std > 1e-12 * mean.abs().max(1.0));
    match (enabled, degenerate) {
        (true, false) => (mean, std, false),
        (true, true) => (mean, 1.0, true),
        (false, _) => (0.0, 1.0, degenerate),
    }
}

fn default_theta(kernel: &Kernel, min_noise: f64) -> Vec<f64> {
    let p = KernelParams {
        signal_var: 1.0,
        lengthscales: vec![0.5; kernel.cont.len()],
        cat_weights: vec![1.0; kernel.cat.len()],
        noise: 1e-3f64.max(min_noise),
    };
    p.to_log()
}

fn random_theta(kernel: &Kernel, bounds: &[(f64, f64)], rng: &mut crate::rng::Rng) -> Vec<f64> {
    let mut t = Vec::with_capacity(bounds.len());
    t.push(rng.random_range(0.3f64.ln()..3f64.ln()));
    for _ in 0..kernel.cont.len() {
        t.push(rng.random_range(0.05f64.ln()..2f64.ln()));
    }
    for _ in 0..kernel.cat.len() {
        t.push(rng.random_range(0.05f64.ln()..3f64.ln()));
    }
    let lo = bounds.last().unwrap().0;
    t.push(rng.random_range(lo..1e-2f64.ln().max(lo + 1e-9)));
    t
}

fn subsample(n: usize, max: usize, rng: &mut crate::rng::Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    if n > max {
        // Partial Fisher-Yates.
        for i in 0..max {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        idx.truncate(max);
        idx.sort_unstable();
    }
    idx
}

/// Evidence and (optionally) its gradient in log-parameter space.
fn lml_and_grad(
    kernel: &Kernel,
    cache: &PairCache,
    y: &[f64],
    theta: &[f64],
    with_grad: bool,
) -> Option<(f64, Vec<f64>)> {
    let n = y.len();
    let p = KernelParams::from_log(kernel, theta);
    let k = DMatrix::from_vec(n, n, cache.matrix(&p));
    let chol = k.cholesky()?;
    let yv = DVector::from_column_slice(y);
    let alpha = chol.solve(&yv);
    let l = chol.l_dirty();
    let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let lml = -0.5 * yv.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;
    if !lml.is_finite() {
        return None;
    }
    if !with_grad {
        return Some((lml, Vec::new()));
    }
    let kinv = chol.inverse();
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            w[j * n + i] = alpha[i] * alpha[j] - kinv[(i, j)];
        }
    }
    Some((lml, cache.grad_contraction(&p, &w)))
}

/// Projected resilient-propagation ascent; returns the best point seen.
fn rprop_ascent(
    f: &dyn Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
    start: Vec<f64>,
    bounds: &[(f64, f64)],
    max_iters: usize,
) -> (f64, Vec<f64>) {
    let m = start.len();
    let mut theta = start;
    let mut steps = vec![0.2f64; m];
    let mut prev = vec![0.0; m];
    let Some((mut cur_v, mut cur_g)) = f(&theta) else {
        return (f64::NEG_INFINITY, theta);
    };
    let mut best = (cur_v, theta.clone());
    for _ in 0..max_iters {
        let mut next = theta.clone();
        for d in 0..m {
            let s = cur_g[d] * prev[d];
            if s > 0.0 {
                steps[d] = (steps[d] * 1.2).min(1.0);
            } else if s < 0.0 {
                steps[d] *= 0.5;
                cur_g[d] = 0.0;
            }
            if cur_g[d] != 0.0 {
                next[d] = (theta[d] + steps[d] * cur_g[d].signum()).clamp(bounds[d].0, bounds[d].1);
            }
        }
        prev = cur_g.clone();
        match f(&next) {
            Some((v, g)) => {
                theta = next;
                cur_v = v;
                cur_g = g;
                if cur_v > best.0 {
                    best = (cur_v, theta.clone());
                }
            }
            None => {
                steps.iter_mut().for_each(|s| *s *= 0.5);
                prev = vec![0.0; m];
            }
        }
        if steps.iter().all(|s| *s < 1e-3) {
            break;
        }
    }
    best
}

impl GpModel {
    /// Builds a model with fixed hyperparameters. `noise` is in
    /// standardized units when `standardize` is set.
    pub fn with_params(
        kinds: &[FeatureKind],
        x: &[Vec<f64>],
        y: &[f64],
        params: KernelParams,
        standardize: bool,
    ) -> Result<Self, SurrogateError> {
        check_training_data(x, y, kinds.len(), 1)?;
        let kernel = Kernel::new(kinds);
        let (y_mean, y_std, degenerate) = standardization(y, standardize);
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
        Self::build(kernel, params, x.to_vec(), ys, y_mean, y_std, degenerate)
    }

    fn build(
        kernel: Kernel,
        mut params: KernelParams,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        y_mean: f64,
        y_std: f64,
        degenerate: bool,
    ) -> Result<Self, SurrogateError> {
        params.noise = params.noise.max(MIN_NOISE);
        let cache = PairCache::new(&kernel, &x);
        let n = x.len();
        let mut attempt = 0;
        let chol = loop {
            let k = DMatrix::from_vec(n, n, cache.matrix(&params));
            if let Some(c) = k.cholesky() {
                break c;
            }
            attempt += 1;
            if attempt > 8 {
                return Err(SurrogateError::NotPositiveDefinite);
            }
            params.noise = (params.noise * 10.0).max(1e-10 * params.signal_var);
        };
        let yv = DVector::from_column_slice(&y);
        let alpha = chol.solve(&yv);
        let lm = chol.l_dirty();
        let mut l = vec![0.0; n * n];
        let mut log_det = 0.0;
        for i in 0..n {
            for j in 0..=i {
                l[i * n + j] = lm[(i, j)];
            }
            log_det += 2.0 * lm[(i, i)].ln();
        }
        let lml = -0.5 * yv.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;
        Ok(Self {
            kernel,
            params,
            x,
            y,
            l,
            alpha: alpha.as_slice().to_vec(),
            y_mean,
            y_std,
            degenerate,
            lml,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// True when all targets were identical.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Noise variance in original target units.
    pub fn nugget(&self) -> f64 {
        self.params.noise * self.y_std * self.y_std
    }

    /// Prior signal variance in original target units.
    pub fn prior_variance(&self) -> f64 {
        self.params.signal_var * self.y_std * self.y_std
    }

    pub fn target_scale(&self) -> (f64, f64) {
        (self.y_mean, self.y_std)
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Latent predictive distribution at `x` in original units.
    pub fn predict(&self, x: &[f64]) -> GaussianPrediction {
        assert_eq!(x.len(), self.dim(), "input dimension");
        let n = self.x.len();
        let mut v: Vec<f64> = self
            .x
            .iter()
            .map(|xi| self.kernel.eval(&self.params, x, xi))
            .collect();
        let mean_s: f64 = v.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        // Forward substitution L v = k, in place.
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&v[..i]).map(|(a, b)| a * b).sum();
            v[i] = (v[i] - s) / self.l[i * n + i];
        }
        let var_s = (self.params.signal_var - v.iter().map(|t| t * t).sum::<f64>()).max(0.0);
        GaussianPrediction::new(
            mean_s * self.y_std + self.y_mean,
            var_s * self.y_std * self.y_std,
        )
    }

    /// Posterior mean only; cheaper than [`GpModel::predict`].
    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        let m: f64 = self
            .x
            .iter()
            .zip(&self.alpha)
            .map(|(xi, a)| self.kernel.eval(&self.params, x, xi) * a)
            .sum();
        m * self.y_std + self.y_mean
    }

    /// Closed-form leave-one-out predictions of the noisy targets under the
    /// fitted hyperparameters.
    pub fn loo_predictions(&self) -> Vec<GaussianPrediction> {
        let n = self.x.len();
        if n < 2 {
            return vec![GaussianPrediction::new(self.y_mean, self.prior_variance()); n];
        }
        let mut lm = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                lm[(i, j)] = self.l[i * n + j];
            }
        }
        let linv = lm
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("cholesky factor has positive diagonal");
        (0..n)
            .map(|i| {
                // diag(K⁻¹)_i = Σ_k (L⁻¹)_{ki}².
                let d: f64 = (i..n).map(|k| linv[(k, i)].powi(2)).sum();
                let mu = self.y[i] - self.alpha[i] / d;
                GaussianPrediction::new(
                    mu * self.y_std + self.y_mean,
                    self.y_std * self.y_std / d,
                )
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) fn lml_gradient_for_test(
    kinds: &[FeatureKind],
    x: &[Vec<f64>],
    y: &[f64],
    theta: &[f64],
) -> (f64, Vec<f64>) {
    let kernel = Kernel::new(kinds);
    let cache = PairCache::new(&kernel, x);
    lml_and_grad(&kernel, &cache, y, theta, true).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::kernel::matern52;
    use proptest::prelude::*;

    const C: FeatureKind = FeatureKind::Continuous;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn interpolates_three_points() {
        let m = fit_gp(&[C], &pts(&[0.0, 0.5, 1.0]), &[0.0, 1.0, 0.0], 1).unwrap();
        let p = m.predict(&[0.5]);
        assert!((p.mean - 1.0).abs() <= 3.0 * m.nugget().sqrt(), "{p:?} nugget {}", m.nugget());
        assert!(p.variance <= 10.0 * m.nugget());
    }

    #[test]
    fn constant_targets() {
        let x = pts(&[0.1, 0.4, 0.8, 0.9]);
        let m = fit_gp(&[C], &x, &[5.0; 4], 0).unwrap();
        assert!(m.is_degenerate());
        for q in [0.0, 0.33, 0.5, 1.0, 7.0] {
            assert!((m.predict(&[q]).mean - 5.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn duplicate_points_do_not_break_cholesky() {
        let x = pts(&[0.2, 0.2, 0.2, 0.7]);
        let m = fit_gp(&[C], &x, &[1.0, 1.0, 1.1, 0.0], 3).unwrap();
        assert!(m.predict(&[0.2]).mean.is_finite());
        let tight = KernelParams {
            signal_var: 1.0,
            lengthscales: vec![5.0],
            cat_weights: vec![],
            noise: MIN_NOISE,
        };
        assert!(GpModel::with_params(&[C], &x, &[1.0, 1.0, 1.1, 0.0], tight, true).is_ok());
    }

    #[test]
    fn sine_holdout_rmse() {
        let mut rng = rng_from_seed(42);
        let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
        let train: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = train.iter().map(|&x| f(x)).collect();
        let m = fit_gp(&[C], &pts(&train), &y, 7).unwrap();
        let test: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let mse = test
            .iter()
            .map(|&x| (m.predict(&[x]).mean - f(x)).powi(2))
            .sum::<f64>()
            / 50.0;
        assert!(mse.sqrt() <= 0.05, "rmse {}", mse.sqrt());
    }

    #[test]
    fn training_point_collapse_and_prior_reversion() {
        let mut rng = rng_from_seed(5);
        let x: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.random(), rng.random()]).collect();
        let y: Vec<f64> = x.iter().map(|v| (3.0 * v[0]).sin() + v[1] * v[1]).collect();
        let m = fit_gp(&[C, C], &x, &y, 2).unwrap();
        let at = m.predict(&x[3]);
        assert!(at.variance <= 10.0 * m.nugget(), "{} vs {}", at.variance, m.nugget());
        let far = m.predict(&[1e3, -1e3]);
        let prior = m.prior_variance();
        assert!((far.variance - prior).abs() <= 0.05 * prior);
    }

    /// Two points with unit hyperparameters, evaluated by hand.
    #[test]
    fn two_point_evidence() {
        let x = pts(&[0.0, 0.7]);
        let y = [0.3, -1.2];
        let noise = 0.01;
        let params = KernelParams {
            signal_var: 1.0,
            lengthscales: vec![1.0],
            cat_weights: vec![],
            noise,
        };
        let m = GpModel::with_params(&[C], &x, &y, params, false).unwrap();
        let k = matern52(0.7);
        let a = 1.0 + noise;
        let det = a * a - k * k;
        let quad = (a * (y[0] * y[0] + y[1] * y[1]) - 2.0 * k * y[0] * y[1]) / det;
        let expected = -0.5 * quad - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln();
        assert!((m.log_marginal_likelihood() - expected).abs() <= 1e-9);
    }

    #[test]
    fn evidence_has_interior_noise_optimum() {
        let mut rng = rng_from_seed(9);
        let x: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| (6.0 * v).sin() + 0.3 * (rng.random::<f64>() - 0.5))
            .collect();
        let ys = {
            let (mu, sd, _) = standardization(&y, true);
            y.iter().map(|v| (v - mu) / sd).collect::<Vec<_>>()
        };
        let scan: Vec<f64> = (0..40)
            .map(|i| {
                let noise = 10f64.powf(-6.0 + i as f64 * 0.15);
                let p = KernelParams {
                    signal_var: 1.0,
                    lengthscales: vec![0.3],
                    cat_weights: vec![],
                    noise,
                };
                GpModel::with_params(&[C], &pts(&x), &ys, p, false)
                    .unwrap()
                    .log_marginal_likelihood()
            })
            .collect();
        let peak = scan
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(peak > 0 && peak < scan.len() - 1, "peak at {peak}");
        assert!(scan[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(scan[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let kinds = [C, FeatureKind::Categorical(3), C];
        let mut rng = rng_from_seed(11);
        let x: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![rng.random(), rng.random_range(0..3) as f64, rng.random()])
            .collect();
        let y: Vec<f64> = x.iter().map(|v| v[0] - v[2] * v[1]).collect();
        let theta = vec![0.2, -1.0, 0.3, -0.5, -4.0];
        let (_, g) = lml_gradient_for_test(&kinds, &x, &y, &theta);
        for d in 0..theta.len() {
            let h = 1e-5;
            let mut tp = theta.clone();
            tp[d] += h;
            let mut tm = theta.clone();
            tm[d] -= h;
            let fd = (lml_gradient_for_test(&kinds, &x, &y, &tp).0
                - lml_gradient_for_test(&kinds, &x, &y, &tm).0)
                / (2.0 * h);
            assert!((fd - g[d]).abs() <= 1e-4 * (1.0 + fd.abs()), "d={d}: {fd} vs {}", g[d]);
        }
    }

    /// Direct GP equations with an LU solve of the full kernel matrix.
    fn dense_oracle(m: &GpModel, x: &[Vec<f64>], y: &[f64], q: &[f64]) -> (f64, f64) {
        let p = m.params();
        let (mu, sd) = m.target_scale();
        let kern = |a: &[f64], b: &[f64]| {
            let r = a
                .iter()
                .zip(b)
                .zip(&p.lengthscales)
                .map(|((u, v), l)| ((u - v) / l).powi(2))
                .sum::<f64>()
                .sqrt();
            let s = 5f64.sqrt() * r;
            p.signal_var * (1.0 + s + s * s / 3.0) * (-s).exp()
        };
        let n = x.len();
        let k = DMatrix::from_fn(n, n, |i, j| {
            kern(&x[i], &x[j]) + if i == j { p.noise } else { 0.0 }
        });
        let ks = DVector::from_fn(n, |i, _| kern(q, &x[i]));
        let ys = DVector::from_fn(n, |i, _| (y[i] - mu) / sd);
        let lu = k.lu();
        let a = lu.solve(&ys).unwrap();
        let b = lu.solve(&ks).unwrap();
        let mean = ks.dot(&a) * sd + mu;
        let var = (p.signal_var - ks.dot(&b)) * sd * sd;
        (mean, var)
    }

    #[test]
    fn matches_dense_oracle() {
        for seed in 0..5u64 {
            let mut rng = rng_from_seed(100 + seed);
            let x: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).collect();
            let y: Vec<f64> = x.iter().map(|v| (4.0 * v[0]).cos() * v[1] + v[0]).collect();
            let m = fit_gp(&[C, C], &x, &y, seed).unwrap();
            for _ in 0..10 {
                let q = [rng.random::<f64>(), rng.random::<f64>()];
                let got = m.predict(&q);
                let (mean, var) = dense_oracle(&m, &x, &y, &q);
                assert!((got.mean - mean).abs() <= 1e-8 * mean.abs().max(1.0));
                assert!((got.variance - var.max(0.0)).abs() <= 1e-8 * var.abs().max(1.0));
            }
        }
    }

    #[test]
    fn loo_matches_refit() {
        let x = pts(&[0.0, 0.2, 0.45, 0.6, 0.9]);
        let y = [0.1, 0.5, -0.3, 0.2, 1.0];
        let params = KernelParams {
            signal_var: 1.2,
            lengthscales: vec![0.3],
            cat_weights: vec![],
            noise: 0.05,
        };
        let m = GpModel::with_params(&[C], &x, &y, params.clone(), false).unwrap();
        let loo = m.loo_predictions();
        for i in 0..5 {
            let xr: Vec<_> = (0..5).filter(|&j| j != i).map(|j| x[j].clone()).collect();
            let yr: Vec<_> = (0..5).filter(|&j| j != i).map(|j| y[j]).collect();
            let r = GpModel::with_params(&[C], &xr, &yr, params.clone(), false).unwrap();
            let p = r.predict(&x[i]);
            assert!((loo[i].mean - p.mean).abs() < 1e-9);
            assert!((loo[i].variance - (p.variance + 0.05)).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let x = pts(&[0.1, 0.3, 0.5, 0.9]);
        let y = [1.0, 0.2, 0.3, 0.8];
        let a = fit_gp(&[C], &x, &y, 4).unwrap();
        let b = fit_gp(&[C], &x, &y, 4).unwrap();
        assert_eq!(a.params(), b.params());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn kernel_matrix_factorizes(
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 3), 2..25),
            ls in proptest::collection::vec(0.01f64..10.0, 3),
            sv in 0.05f64..20.0,
        ) {
            let y: Vec<f64> = pts.iter().map(|p| p[0]).collect();
            let params = KernelParams { signal_var: sv, lengthscales: ls, cat_weights: vec![], noise: MIN_NOISE };
            let m = GpModel::with_params(&[C, C, C], &pts, &y, params, true);
            prop_assert!(m.is_ok());
            let m = m.unwrap();
            prop_assert!(m.params().noise >= MIN_NOISE);
            let p = m.predict(&pts[0]);
            prop_assert!(p.mean.is_finite() && p.variance >= 0.0);
        }
    }
}
