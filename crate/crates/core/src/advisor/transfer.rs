//! Ranking-weighted ensemble of source-task surrogates.
//!
//! Each source task contributes a base surrogate fitted once. At every step
//! the target surrogate is refitted and each model is weighted by how often
//! it has the fewest misranked pairs on the target observations, judged over
//! draws from its predictive distribution (leave-one-out for the target).
//! Predictions are combined as a weighted product of Gaussians.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::{Advisor, AdvisorError, History, TransferSources};
use crate::rng::{derive_seed, rng_from_seed};
use crate::space::{SearchSpace, TaskSpec};
use crate::surrogate::{GaussianPrediction, Surrogate};

/// Lower bound on component variances in [`combined_predict`].
pub const MIN_COMPONENT_VARIANCE: f64 = 1e-8;

/// Number of ordered pairs `(j, k)` on which `pred` and `y` disagree about
/// which is smaller.
pub fn ranking_loss(pred: &[f64], y: &[f64]) -> usize {
    assert_eq!(pred.len(), y.len());
    let n = y.len();
    let mut loss = 0;
    for j in 0..n {
        for k in 0..n {
            if (pred[j] < pred[k]) != (y[j] < y[k]) {
                loss += 1;
            }
        }
    }
    loss
}

/// Ensemble weights `(w_1..w_K, w_target)` on the simplex.
///
/// For each of `samples` draws, every base model's predictions at the target
/// inputs are sampled independently from its marginal predictive
/// distributions, the target model's from its leave-one-out predictions.
/// The model(s) with the lowest [`ranking_loss`] share that draw's unit of
/// weight.
pub fn rgpe_weights(
    bases: &[&Surrogate],
    target: &Surrogate,
    x_t: &[Vec<f64>],
    y_t: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<f64> {
    let k = bases.len();
    let mut w = vec![0.0; k + 1];
    if y_t.len() < 2 || samples == 0 {
        w[k] = 1.0;
        return w;
    }
    let mut preds: Vec<Vec<GaussianPrediction>> = bases
        .iter()
        .map(|m| x_t.iter().map(|x| m.predict(x)).collect())
        .collect();
    preds.push(target.loo_predictions());
    let mut rng = rng_from_seed(derive_seed(seed, &[0x5a]));
    let mut draw = vec![0.0; y_t.len()];
    let mut losses = vec![0usize; k + 1];
    for _ in 0..samples {
        for (i, model) in preds.iter().enumerate() {
            for (d, p) in draw.iter_mut().zip(model) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *d = p.mean + p.std() * z;
            }
            losses[i] = ranking_loss(&draw, y_t);
        }
        let best = *losses.iter().min().unwrap();
        let ties = losses.iter().filter(|&&l| l == best).count() as f64;
        for (wi, &l) in w.iter_mut().zip(&losses) {
            if l == best {
                *wi += 1.0 / ties;
            }
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Base surrogates, the target surrogate and their weights (target last).
#[derive(Clone, Debug)]
pub struct TransferEnsemble {
    pub bases: Vec<Arc<Surrogate>>,
    pub target: Surrogate,
    pub weights: Vec<f64>,
}

impl TransferEnsemble {
    pub fn new(bases: Vec<Arc<Surrogate>>, target: Surrogate, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), bases.len() + 1, "one weight per model");
        Self {
            bases,
            target,
            weights,
        }
    }

    /// [`combined_predict`], or the target's own prediction if every weight
    /// is zero.
    pub fn predict(&self, x: &[f64]) -> GaussianPrediction {
        combined_predict(self, x).unwrap_or_else(|_| self.target.predict(x))
    }
}

/// A base prediction re-expressed in the target's units: standardized with
/// the base model's target scale, then unstandardized with the target's.
fn to_target_scale(p: GaussianPrediction, from: (f64, f64), to: (f64, f64)) -> GaussianPrediction {
    let sf = if from.1 > 0.0 { from.1 } else { 1.0 };
    let st = if to.1 > 0.0 { to.1 } else { 1.0 };
    let r = st / sf;
    GaussianPrediction::new(to.0 + (p.mean - from.0) * r, p.variance * r * r)
}

/// `σ²_TL = (Σ w_i / σ_i²)⁻¹`, `μ_TL = σ²_TL Σ w_i μ_i / σ_i²` over
/// components with positive weight, with `σ_i²` floored at
/// [`MIN_COMPONENT_VARIANCE`]. A single positive weight returns that
/// component unchanged.
pub fn combine_predictions(
    preds: &[GaussianPrediction],
    weights: &[f64],
) -> Result<GaussianPrediction, AdvisorError> {
    assert_eq!(preds.len(), weights.len());
    let active: Vec<usize> = (0..preds.len()).filter(|&i| weights[i] > 0.0).collect();
    match active.as_slice() {
        [] => Err(AdvisorError::ZeroWeights),
        [i] => Ok(preds[*i]),
        _ => {
            let (mut prec, mut num) = (0.0, 0.0);
            for &i in &active {
                let var = preds[i].variance.max(MIN_COMPONENT_VARIANCE);
                prec += weights[i] / var;
                num += weights[i] * preds[i].mean / var;
            }
            let var = 1.0 / prec;
            Ok(GaussianPrediction::new(num * var, var))
        }
    }
}

/// Ensemble prediction at `x`; base predictions are first mapped into the
/// target's units. Zero-weight models are not evaluated.
pub fn combined_predict(ens: &TransferEnsemble, x: &[f64]) -> Result<GaussianPrediction, AdvisorError> {
    let to = ens.target.target_scale();
    let k = ens.bases.len();
    let preds: Vec<GaussianPrediction> = (0..=k)
        .map(|i| {
            if ens.weights[i] <= 0.0 {
                GaussianPrediction::new(0.0, 1.0)
            } else if i == k {
                ens.target.predict(x)
            } else {
                to_target_scale(ens.bases[i].predict(x), ens.bases[i].target_scale(), to)
            }
        })
        .collect();
    combine_predictions(&preds, &ens.weights)
}

/// Builds the ensemble for objective `j` at the current step. Weights are
/// ranked with `real`, fitted on completed trials only.
pub(super) fn ensemble_for(
    advisor: &Advisor,
    bases: &[Arc<Surrogate>],
    real: &Surrogate,
    target: Surrogate,
    history: &History,
    j: usize,
    seed: u64,
) -> TransferEnsemble {
    let space = &advisor.spec.space;
    let x_t: Vec<Vec<f64>> = history.completed().iter().map(|o| space.to_features(&o.config)).collect();
    let y_t: Vec<f64> = history.completed().iter().map(|o| o.objectives[j]).collect();
    let refs: Vec<&Surrogate> = bases.iter().map(Arc::as_ref).collect();
    let weights = rgpe_weights(&refs, real, &x_t, &y_t, advisor.config.rgpe_samples, seed);
    TransferEnsemble::new(bases.to_vec(), target, weights)
}

fn check_source(space: &SearchSpace, source: &History, mismatched: &mut BTreeSet<String>) {
    use crate::space::Violation;
    for o in source.completed() {
        if let Err(vs) = space.validate_config(&o.config) {
            for v in vs {
                let name = match v {
                    Violation::Missing(n)
                    | Violation::Inactive(n)
                    | Violation::OutOfBounds(n, _)
                    | Violation::Unknown(n) => n,
                };
                mismatched.insert(name);
            }
        }
    }
}

impl Advisor {
    /// Fits one base surrogate per source task and objective. Sources with
    /// fewer than two completed trials are skipped.
    pub fn with_sources(mut self, sources: &[History]) -> Result<Self, AdvisorError> {
        let space = &self.spec.space;
        let mut mismatched = BTreeSet::new();
        for s in sources {
            check_source(space, s, &mut mismatched);
        }
        if !mismatched.is_empty() {
            return Err(AdvisorError::IncompatibleSource {
                mismatched: mismatched.into_iter().collect(),
            });
        }
        let p = self.spec.num_objectives.max(1);
        let kinds = space.feature_kinds();
        let mut bases = vec![Vec::new(); p];
        for (si, s) in sources.iter().enumerate() {
            if s.len() < 2 {
                continue;
            }
            if s.completed()[0].objectives.len() != p {
                return Err(AdvisorError::InvalidObservation(format!(
                    "source {} has {} objectives, task has {p}",
                    s.task_id,
                    s.completed()[0].objectives.len()
                )));
            }
            let x: Vec<Vec<f64>> = s.completed().iter().map(|o| space.to_features(&o.config)).collect();
            let kind = super::select_algorithm(&self.spec, s.len()).surrogate;
            for (j, slot) in bases.iter_mut().enumerate() {
                let y: Vec<f64> = s.completed().iter().map(|o| o.objectives[j]).collect();
                let seed = derive_seed(crate::rng::hash_str(&s.task_id), &[si as u64, j as u64]);
                slot.push(Arc::new(self.fit_surrogate(kind, &kinds, &x, &y, seed)?));
            }
        }
        self.transfer = Some(TransferSources { bases });
        Ok(self)
    }
}

/// An advisor whose objective models are ensembles over `sources`.
pub fn build_transfer_advisor(sources: &[History], spec: &TaskSpec) -> Result<Advisor, AdvisorError> {
    Advisor::new(spec.clone()).with_sources(sources)
}
