//! Expected hypervolume improvement.
//!
//! For two objectives the expectation is exact: with the front sorted by
//! the first objective, `c_0 = -∞`, `c_i = y_i1`, `c_{k+1} = r_1`,
//! `h_0 = r_2`, `h_i = y_i2` and `m(c; μ, σ) = E[(c - Y)+]`,
//!
//! `EHVI = Σ_{i=0..k} [m(c_{i+1}; μ1, σ1) - m(c_i; μ1, σ1)] · m(h_i; μ2, σ2)`.
//!
//! For three or more objectives it is estimated by Monte Carlo over a box
//! decomposition of the dominated region.

use super::pareto::{BoxDecomposition, ParetoFront};
use crate::rng::rng_from_seed;
use crate::stats::{lhs_normals, norm_cdf, norm_pdf};
use crate::surrogate::GaussianPrediction;

/// Default Monte Carlo sample count.
pub const MC_DRAWS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EhviEstimate {
    pub value: f64,
    /// Zero for the exact two-objective computation.
    pub std_error: f64,
}

/// `E[(c - Y)+]` for `Y ~ N(μ, σ²)`.
fn partial_expectation(c: f64, mu: f64, sigma: f64) -> f64 {
    if c == f64::NEG_INFINITY {
        return 0.0;
    }
    if sigma <= 0.0 {
        return (c - mu).max(0.0);
    }
    let z = (c - mu) / sigma;
    ((c - mu) * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}

/// Exact EHVI for two objectives.
pub fn ehvi_2d(preds: &[GaussianPrediction], front: &ParetoFront) -> f64 {
    assert_eq!(preds.len(), 2, "two objectives");
    let r = front.reference();
    let mut pts: Vec<&Vec<f64>> = front.points().iter().collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let (m1, s1) = (preds[0].mean, preds[0].std());
    let (m2, s2) = (preds[1].mean, preds[1].std());
    let k = pts.len();
    let c = |i: usize| -> f64 {
        match i {
            0 => f64::NEG_INFINITY,
            i if i <= k => pts[i - 1][0],
            _ => r[0],
        }
    };
    let h = |i: usize| -> f64 {
        if i == 0 {
            r[1]
        } else {
            pts[i - 1][1]
        }
    };
    let mut total = 0.0;
    for i in 0..=k {
        let w = partial_expectation(c(i + 1), m1, s1) - partial_expectation(c(i), m1, s1);
        if w > 0.0 {
            total += w * partial_expectation(h(i), m2, s2);
        }
    }
    total.max(0.0)
}

/// Hypervolume improvement of a deterministic point.
pub fn hvi_of_point(y: &[f64], boxes: &BoxDecomposition) -> f64 {
    boxes.improvement(y)
}

/// Monte Carlo EHVI with Latin-hypercube normal draws.
pub fn ehvi_mc(
    preds: &[GaussianPrediction],
    boxes: &BoxDecomposition,
    draws: usize,
    seed: u64,
) -> EhviEstimate {
    let mut rng = rng_from_seed(seed);
    let z = lhs_normals(draws.max(2), preds.len(), &mut rng);
    mc_with_draws(preds, boxes, &z)
}

pub(crate) fn mc_with_draws(
    preds: &[GaussianPrediction],
    boxes: &BoxDecomposition,
    z: &[Vec<f64>],
) -> EhviEstimate {
    let n = z.len() as f64;
    let (mut s, mut sq) = (0.0, 0.0);
    let mut y = vec![0.0; preds.len()];
    for row in z {
        for (d, p) in preds.iter().enumerate() {
            y[d] = p.mean + p.std() * row[d];
        }
        let v = boxes.improvement(&y);
        s += v;
        sq += v * v;
    }
    let mean = s / n;
    let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    EhviEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

/// EHVI: exact for two objectives, Monte Carlo with [`MC_DRAWS`] samples
/// otherwise.
pub fn ehvi(preds: &[GaussianPrediction], front: &ParetoFront, seed: u64) -> EhviEstimate {
    assert_eq!(preds.len(), front.dim(), "objective count");
    if preds.len() == 2 {
        EhviEstimate {
            value: ehvi_2d(preds, front),
            std_error: 0.0,
        }
    } else {
        ehvi_mc(preds, &front.boxes(), MC_DRAWS, seed)
    }
}

/// Reusable Monte Carlo EHVI with fixed common random numbers, so repeated
/// evaluation inside an optimizer is a deterministic function of the
/// predictions.
#[derive(Clone, Debug)]
pub struct EhviMcEvaluator {
    boxes: BoxDecomposition,
    draws: Vec<Vec<f64>>,
}

impl EhviMcEvaluator {
    pub fn new(front: &ParetoFront, draws: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        Self {
            boxes: front.boxes(),
            draws: lhs_normals(draws.max(2), front.dim(), &mut rng),
        }
    }

    pub fn eval(&self, preds: &[GaussianPrediction]) -> f64 {
        mc_with_draws(preds, &self.boxes, &self.draws).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn g(m: f64, s: f64) -> GaussianPrediction {
        GaussianPrediction::new(m, s * s)
    }

    fn example_front() -> ParetoFront {
        ParetoFront::try_new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![3.0, 3.0]).unwrap()
    }

    #[test]
    fn deterministic_cases() {
        let f = example_front();
        assert!(ehvi_2d(&[g(1.0, 0.0), g(2.0, 0.0)], &f).abs() < 1e-15);
        assert!(ehvi_2d(&[g(1.0, 1e-12), g(2.0, 1e-12)], &f) < 1e-9);
        let empty = ParetoFront::new(vec![3.0, 3.0]);
        assert_eq!(ehvi_2d(&[g(1.0, 0.0), g(1.0, 0.0)], &empty), 4.0);
        // Deterministic point: equals the hypervolume improvement.
        let gain = ehvi_2d(&[g(0.5, 0.0), g(0.5, 0.0)], &f);
        assert!((gain - f.boxes().improvement(&[0.5, 0.5])).abs() < 1e-12);
    }

    /// Plain iid Monte Carlo as an independent oracle.
    fn iid_mc(preds: &[GaussianPrediction], f: &ParetoFront, n: usize, seed: u64) -> (f64, f64) {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rng_from_seed(seed);
        let boxes = f.boxes();
        let (mut s, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let y: Vec<f64> = preds
                .iter()
                .map(|p| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p.mean + p.std() * z
                })
                .collect();
            let v = boxes.improvement(&y);
            s += v;
            sq += v * v;
        }
        let m = s / n as f64;
        (m, ((sq / n as f64 - m * m).max(0.0) / n as f64).sqrt())
    }

    #[test]
    fn example_against_monte_carlo() {
        let f = example_front();
        let preds = [g(1.5, 0.1), g(1.5, 0.1)];
        let exact = ehvi_2d(&preds, &f);
        let (mc, se) = iid_mc(&preds, &f, 100_000, 5);
        assert!((exact - mc).abs() <= 3.0 * se, "{exact} vs {mc} ± {se}");
    }

    #[test]
    fn analytic_matches_monte_carlo_on_random_cases() {
        let mut rng = rng_from_seed(31);
        for case in 0..50 {
            let pts: Vec<Vec<f64>> = (0..6)
                .map(|_| vec![rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0])
                .collect();
            let f = ParetoFront::from_points(pts, vec![2.5, 2.5]);
            let preds = [
                g(rng.random::<f64>() * 2.0, rng.random_range(0.05..0.8)),
                g(rng.random::<f64>() * 2.0, rng.random_range(0.05..0.8)),
            ];
            let exact = ehvi_2d(&preds, &f);
            let est = ehvi_mc(&preds, &f.boxes(), 40_000, case);
            // Absolute floor: improvements deep in the tails are invisible to the draws.
            assert!(
                (exact - est.value).abs() <= 3.0 * est.std_error + 1e-6,
                "case {case}: {exact} vs {} ± {}",
                est.value,
                est.std_error
            );
        }
    }

    #[test]
    fn three_objectives_monte_carlo_consistency() {
        let f = ParetoFront::from_points(
            vec![vec![0.2, 0.6, 0.5], vec![0.6, 0.2, 0.4], vec![0.4, 0.4, 0.1]],
            vec![1.0, 1.0, 1.0],
        );
        let preds = [g(0.3, 0.2), g(0.3, 0.2), g(0.3, 0.2)];
        let est = ehvi(&preds, &f, 9);
        let (mc, se) = iid_mc(&preds, &f, 100_000, 10);
        let tol = 3.0 * (se * se + est.std_error * est.std_error).sqrt();
        assert!((est.value - mc).abs() <= tol);
        let eval = EhviMcEvaluator::new(&f, 256, 1);
        assert_eq!(eval.eval(&preds), eval.eval(&preds));
    }
}
