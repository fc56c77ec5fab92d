//! Probabilistic random forest.
//!
//! Regression trees store the mean and unbiased variance of the targets in
//! each leaf. The forest prediction combines the trees by the law of total
//! variance: the average within-leaf variance plus the spread of the leaf
//! means across trees.

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;

use super::{check_training_data, GaussianPrediction, SurrogateError};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::space::FeatureKind;
use crate::stats::sample_variance;

#[derive(Clone, Debug, PartialEq)]
pub struct PrfParams {
    pub trees: usize,
    /// Nodes with fewer samples become leaves.
    pub min_split: usize,
    /// Fraction of features considered at each split.
    pub feature_frac: f64,
    pub bootstrap: bool,
    pub max_depth: usize,
}

impl Default for PrfParams {
    fn default() -> Self {
        Self {
            trees: 10,
            min_split: 3,
            feature_frac: 5.0 / 6.0,
            bootstrap: true,
            max_depth: 40,
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        mean: f64,
        var: f64,
    },
    Split {
        feature: usize,
        test: Test,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Copy, Debug)]
enum Test {
    /// Goes left when `x <= t`.
    Le(f64),
    /// Goes left when `x == c`.
    Eq(f64),
}

#[derive(Clone, Debug)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> (f64, f64) {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { mean, var } => return (*mean, *var),
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    let v = x[*feature];
                    let go_left = match test {
                        Test::Le(t) => v <= *t,
                        Test::Eq(c) => v == *c,
                    };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrfModel {
    kinds: Vec<FeatureKind>,
    params: PrfParams,
    trees: Vec<Tree>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    seed: u64,
}

pub fn fit_prf(
    kinds: &[FeatureKind],
    x: &[Vec<f64>],
    y: &[f64],
    params: &PrfParams,
    seed: u64,
) -> Result<PrfModel, SurrogateError> {
    check_training_data(x, y, kinds.len(), 1)?;
    let trees = (0..params.trees.max(1))
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, &[0x7072, t as u64]));
            let n = x.len();
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut b = Builder {
                kinds,
                x,
                y,
                params,
                rng,
                nodes: Vec::new(),
            };
            b.grow(idx, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(PrfModel {
        kinds: kinds.to_vec(),
        params: params.clone(),
        trees,
        x: x.to_vec(),
        y: y.to_vec(),
        seed,
    })
}

struct Builder<'a> {
    kinds: &'a [FeatureKind],
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a PrfParams,
    rng: Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let ys: Vec<f64> = idx.iter().map(|&i| self.y[i]).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = sample_variance(&ys);
        self.nodes.push(Node::Leaf { mean, var });
        if idx.len() < self.params.min_split || depth >= self.params.max_depth || var == 0.0 {
            return id;
        }
        let Some((feature, test)) = self.best_split(&idx) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| {
            let v = self.x[i][feature];
            match test {
                Test::Le(t) => v <= t,
                Test::Eq(c) => v == c,
            }
        });
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            test,
            left,
            right,
        };
        id
    }

    /// Split minimizing the summed squared error of the two children.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, Test)> {
        let d = self.kinds.len();
        let k = ((self.params.feature_frac * d as f64).ceil() as usize).clamp(1, d);
        let mut features: Vec<usize> = sample_indices(&mut self.rng, d, k).into_vec();
        features.sort_unstable();
        let mut best: Option<(f64, usize, Test)> = None;
        let mut consider = |sse: f64, f: usize, t: Test| {
            if best.as_ref().is_none_or(|b| sse < b.0 - 1e-12) {
                best = Some((sse, f, t));
            }
        };
        for f in features {
            let mut pairs: Vec<(f64, f64)> =
                idx.iter().map(|&i| (self.x[i][f], self.y[i])).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            match self.kinds[f] {
                FeatureKind::Continuous => {
                    let n = pairs.len();
                    let total: f64 = pairs.iter().map(|p| p.1).sum();
                    let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
                    let (mut s, mut sq) = (0.0, 0.0);
                    for i in 0..n - 1 {
                        s += pairs[i].1;
                        sq += pairs[i].1 * pairs[i].1;
                        if pairs[i].0 == pairs[i + 1].0 {
                            continue;
                        }
                        let nl = (i + 1) as f64;
                        let nr = (n - i - 1) as f64;
                        let sse = (sq - s * s / nl) + (total_sq - sq - (total - s).powi(2) / nr);
                        consider(sse, f, Test::Le(0.5 * (pairs[i].0 + pairs[i + 1].0)));
                    }
                }
                FeatureKind::Categorical(_) => {
                    let mut groups: Vec<(f64, f64, f64, usize)> = Vec::new();
                    for (v, y) in &pairs {
                        match groups.last_mut() {
                            Some(g) if g.0 == *v => {
                                g.1 += y;
                                g.2 += y * y;
                                g.3 += 1;
                            }
                            _ => groups.push((*v, *y, y * y, 1)),
                        }
                    }
                    if groups.len() < 2 {
                        continue;
                    }
                    let n = pairs.len() as f64;
                    let total: f64 = groups.iter().map(|g| g.1).sum();
                    let total_sq: f64 = groups.iter().map(|g| g.2).sum();
                    for g in &groups {
                        let nl = g.3 as f64;
                        let nr = n - nl;
                        let sse = (g.2 - g.1 * g.1 / nl)
                            + (total_sq - g.2 - (total - g.1).powi(2) / nr);
                        consider(sse, f, Test::Eq(g.0));
                    }
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl PrfModel {
    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    pub fn predict(&self, x: &[f64]) -> GaussianPrediction {
        assert_eq!(x.len(), self.dim(), "input dimension");
        let leaves: Vec<(f64, f64)> = self.trees.iter().map(|t| t.leaf(x)).collect();
        let means: Vec<f64> = leaves.iter().map(|l| l.0).collect();
        let b = leaves.len() as f64;
        let mean = means.iter().sum::<f64>() / b;
        let within = leaves.iter().map(|l| l.1).sum::<f64>() / b;
        GaussianPrediction::new(mean, within + sample_variance(&means))
    }

    pub fn loo_predictions(&self) -> Vec<GaussianPrediction> {
        let n = self.x.len();
        (0..n)
            .map(|i| {
                if n < 2 {
                    return self.predict(&self.x[i]);
                }
                let xr: Vec<Vec<f64>> = (0..n).filter(|&j| j != i).map(|j| self.x[j].clone()).collect();
                let yr: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| self.y[j]).collect();
                fit_prf(&self.kinds, &xr, &yr, &self.params, self.seed)
                    .map(|m| m.predict(&self.x[i]))
                    .unwrap_or_else(|_| self.predict(&self.x[i]))
            })
            .collect()
    }

    pub fn target_scale(&self) -> (f64, f64) {
        let n = self.y.len() as f64;
        let mean = self.y.iter().sum::<f64>() / n;
        let sd = (self.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        (mean, if sd > 0.0 { sd } else { 1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: FeatureKind = FeatureKind::Continuous;

    #[test]
    fn constant_targets() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let m = fit_prf(&[C], &x, &[3.0; 20], &PrfParams::default(), 0).unwrap();
        let p = m.predict(&[0.37]);
        assert_eq!(p.mean, 3.0);
        assert_eq!(p.variance, 0.0);
    }

    /// On noiseless data a single unbootstrapped tree is an exact oracle
    /// for the step away from the discontinuity.
    #[test]
    fn step_function() {
        let mut rng = rng_from_seed(1);
        let step = |x: f64| if x < 0.5 { 0.0 } else { 1.0 };
        let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>()]).collect();
        let y: Vec<f64> = x.iter().map(|v| step(v[0])).collect();
        let m = fit_prf(&[C], &x, &y, &PrfParams::default(), 4).unwrap();
        let single = PrfParams {
            trees: 1,
            bootstrap: false,
            feature_frac: 1.0,
            ..PrfParams::default()
        };
        let oracle = fit_prf(&[C], &x, &y, &single, 4).unwrap();
        for i in 0..=100 {
            let q = i as f64 / 100.0;
            if (q - 0.5).abs() < 0.05 {
                continue;
            }
            assert!((m.predict(&[q]).mean - step(q)).abs() <= 0.1, "at {q}");
            assert_eq!(oracle.predict(&[q]).mean, step(q));
        }
    }

    #[test]
    fn categorical_only_space() {
        let kinds = [FeatureKind::Categorical(3), FeatureKind::Categorical(4)];
        let x: Vec<Vec<f64>> = (0..24).map(|i| vec![(i % 3) as f64, (i % 4) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|v| v[0] * 2.0 - v[1]).collect();
        let m = fit_prf(&kinds, &x, &y, &PrfParams::default(), 0).unwrap();
        let p = m.predict(&[2.0, 0.0]);
        assert!(p.mean.is_finite() && p.variance >= 0.0);
    }

    #[test]
    fn identical_trees_on_pure_leaf_have_zero_variance() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 29.0]).collect();
        let y: Vec<f64> = x.iter().map(|v| if v[0] < 0.3 { -1.0 } else { 2.0 }).collect();
        let p = PrfParams {
            bootstrap: false,
            feature_frac: 1.0,
            ..PrfParams::default()
        };
        let m = fit_prf(&[C], &x, &y, &p, 9).unwrap();
        let pred = m.predict(&[0.1]);
        assert_eq!(pred.mean, -1.0);
        assert_eq!(pred.variance, 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            fit_prf(&[C], &[vec![0.0], vec![1.0]], &[0.0, f64::NAN], &PrfParams::default(), 0)
                .unwrap_err(),
            SurrogateError::NonFinite
        );
    }
}
