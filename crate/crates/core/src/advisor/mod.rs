//! Suggestion logic.
//!
//! [`suggest`] is a pure function of `(spec, history, seed)`: an initial
//! design while fewer than `max(3, d + 1)` trials have completed, then
//! Bayesian optimization with running configurations imputed at the median
//! of the observed results. [`suggest_batch`] repeats it, marking each
//! returned configuration as running before the next call.

mod transfer;

pub use transfer::{
    build_transfer_advisor, combine_predictions, combined_predict, ranking_loss, rgpe_weights, TransferEnsemble,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acquisition::{
    constrained_acq, ehvi_2d, ei, optimize_acq_with, pof, AcquisitionKind, EhviMcEvaluator,
    OptimizerConfig, OptimizerStrategy, ParetoFront,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::space::{Configuration, ParameterDomain, SearchSpace, TaskSpec};
use crate::space::{AdvisorType, FeatureKind};
use crate::stats::median;
use crate::surrogate::{
    fit_gp_with, fit_prf, GaussianPrediction, GpConfig, GpModel, PrfParams, Surrogate, SurrogateError,
    SurrogateKind,
};

use rand::seq::SliceRandom;
use rand::Rng as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialState {
    Completed,
    Running,
    Ready,
}

/// One trial with its measured objectives `y` and constraints `c`
/// (feasible when every `c_j <= 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub config: Configuration,
    pub objectives: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<f64>,
    pub trial_state: TrialState,
    /// Evaluation time in seconds.
    #[serde(default)]
    pub elapsed: f64,
    /// Seconds since the Unix epoch.
    #[serde(default)]
    pub timestamp: f64,
}

impl Observation {
    pub fn completed(config: Configuration, objectives: Vec<f64>, constraints: Vec<f64>) -> Self {
        Self {
            config,
            objectives,
            constraints,
            trial_state: TrialState::Completed,
            elapsed: 0.0,
            timestamp: 0.0,
        }
    }

    pub fn with_elapsed(mut self, elapsed: f64) -> Self {
        self.elapsed = elapsed;
        self
    }

    pub fn is_feasible(&self) -> bool {
        self.constraints.iter().all(|c| *c <= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdvisorError {
    #[error("need observations before imputation")]
    EmptyHistory,
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("surrogate fit failed: {0}")]
    Surrogate(#[from] SurrogateError),
    #[error("source history does not match the search space: {}", .mismatched.join(", "))]
    IncompatibleSource { mismatched: Vec<String> },
    #[error("no configuration left to suggest")]
    Exhausted,
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("all ensemble weights are zero")]
    ZeroWeights,
}

/// Completed observations `D` and running configurations `C_eval`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub task_id: String,
    completed: Vec<Observation>,
    pending: Vec<Configuration>,
}

impl History {
    pub fn new(task_id: impl Into<String>) -> Self {
        Self {
            task_id: task_id.into(),
            ..Self::default()
        }
    }

    /// Appends a completed observation with finite results.
    pub fn push(&mut self, obs: Observation) -> Result<(), AdvisorError> {
        if obs.trial_state != TrialState::Completed {
            return Err(AdvisorError::InvalidObservation(
                "only completed observations enter the history".into(),
            ));
        }
        if obs.objectives.is_empty()
            || obs.objectives.iter().chain(&obs.constraints).any(|v| !v.is_finite())
        {
            return Err(AdvisorError::InvalidObservation(
                "objectives and constraints must be finite".into(),
            ));
        }
        if let Some(first) = self.completed.first() {
            if first.objectives.len() != obs.objectives.len()
                || first.constraints.len() != obs.constraints.len()
            {
                return Err(AdvisorError::InvalidObservation(
                    "objective or constraint count changed".into(),
                ));
            }
        }
        self.remove_pending(&obs.config);
        self.completed.push(obs);
        Ok(())
    }

    /// Convenience for single-objective unconstrained tasks.
    pub fn push_result(&mut self, config: Configuration, y: f64) -> Result<(), AdvisorError> {
        self.push(Observation::completed(config, vec![y], vec![]))
    }

    pub fn add_pending(&mut self, config: Configuration) {
        self.pending.push(config);
    }

    /// Removes one pending entry equal to `config`; true if found.
    pub fn remove_pending(&mut self, config: &Configuration) -> bool {
        match self.pending.iter().position(|c| c == config) {
            Some(i) => {
                self.pending.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn completed(&self) -> &[Observation] {
        &self.completed
    }

    pub fn pending(&self) -> &[Configuration] {
        &self.pending
    }

    pub fn len(&self) -> usize {
        self.completed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.completed.is_empty()
    }

    /// Best first objective over feasible completed trials.
    pub fn best_objective(&self) -> Option<f64> {
        self.completed
            .iter()
            .filter(|o| o.is_feasible())
            .map(|o| o.objectives[0])
            .min_by(f64::total_cmp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintHandling {
    None,
    Pof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgorithmPlan {
    pub surrogate: SurrogateKind,
    pub acquisition: AcquisitionKind,
    pub constraint_handling: ConstraintHandling,
    pub acq_optimizer: OptimizerStrategy,
}

/// Parameter count above which the forest replaces the GP.
pub const GP_MAX_PARAMS: usize = 50;
/// Completed-trial count above which the forest replaces the GP.
pub const GP_MAX_TRIALS: usize = 500;

pub fn select_algorithm(spec: &TaskSpec, history_len: usize) -> AlgorithmPlan {
    let space = &spec.space;
    let surrogate = if space.has_conditions() || space.len() > GP_MAX_PARAMS || history_len > GP_MAX_TRIALS {
        SurrogateKind::Prf
    } else {
        SurrogateKind::Gp
    };
    let acquisition = match (spec.advisor_type, spec.num_objectives) {
        (AdvisorType::Random, _) => AcquisitionKind::Random,
        (_, 0 | 1) => AcquisitionKind::Ei,
        (_, 2..=4) => AcquisitionKind::Ehvi,
        _ => AcquisitionKind::EhviMc,
    };
    AlgorithmPlan {
        surrogate,
        acquisition,
        constraint_handling: if spec.num_constraints > 0 {
            ConstraintHandling::Pof
        } else {
            ConstraintHandling::None
        },
        acq_optimizer: OptimizerStrategy::for_space(space),
    }
}

/// Augments `completed` with each pending configuration at the
/// per-dimension median of the observed objectives and constraints.
pub fn impute_pending(
    completed: &[Observation],
    pending: &[Configuration],
) -> Result<Vec<Observation>, AdvisorError> {
    let first = completed.first().ok_or(AdvisorError::EmptyHistory)?;
    let column_medians = |get: &dyn Fn(&Observation) -> &[f64], dims: usize| -> Vec<f64> {
        (0..dims)
            .map(|j| {
                let col: Vec<f64> = completed.iter().map(|o| get(o)[j]).collect();
                median(&col).unwrap_or(0.0)
            })
            .collect()
    };
    let y_hat = column_medians(&|o| &o.objectives, first.objectives.len());
    let c_hat = column_medians(&|o| &o.constraints, first.constraints.len());
    let mut out = completed.to_vec();
    out.extend(pending.iter().map(|x| Observation {
        config: x.clone(),
        objectives: y_hat.clone(),
        constraints: c_hat.clone(),
        trial_state: TrialState::Running,
        elapsed: 0.0,
        timestamp: 0.0,
    }));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AdvisorConfig {
    pub optimizer: OptimizerConfig,
    pub gp: GpConfig,
    pub prf: PrfParams,
    /// Common random numbers used for Monte Carlo EHVI inside the optimizer.
    pub ehvi_mc_draws: usize,
    /// Overrides `max(3, d + 1)`.
    pub n_init: Option<usize>,
    /// Posterior samples for ensemble weights.
    pub rgpe_samples: usize,
}

impl Default for AdvisorConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            gp: GpConfig::default(),
            prf: PrfParams::default(),
            ehvi_mc_draws: 512,
            n_init: None,
            rgpe_samples: 100,
        }
    }
}

/// Initial design size `max(3, d + 1)`.
pub fn initial_design_size(space: &SearchSpace) -> usize {
    (space.len() + 1).max(3)
}

/// The space defaults followed by `n - 1` stratified random points: each
/// parameter's `[0, 1)` range is cut into `n - 1` strata, one per point,
/// matched across parameters by independent permutations.
pub fn initial_design(space: &SearchSpace, n: usize, seed: u64) -> Vec<Configuration> {
    let mut out = vec![space.default_configuration()];
    let m = n.saturating_sub(1);
    if m == 0 {
        out.truncate(n);
        return out;
    }
    let mut rng = rng_from_seed(derive_seed(seed, &[0x1d]));
    let mut columns = Vec::with_capacity(space.len());
    for _ in space.parameters() {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut rng);
        columns.push(
            perm.into_iter()
                .map(|s| (s as f64 + rng.random::<f64>()) / m as f64)
                .collect::<Vec<f64>>(),
        );
    }
    for i in 0..m {
        let mut c = Configuration::new();
        for (j, p) in space.parameters().iter().enumerate() {
            let u = columns[j][i];
            let v = match &p.domain {
                ParameterDomain::Categorical { choices } => {
                    choices[((u * choices.len() as f64) as usize).min(choices.len() - 1)].clone()
                }
                _ => space.param_from_unit(j, u),
            };
            c.insert(&p.name, v);
        }
        out.push(space.repair(&space.deactivate(&c), &mut rng));
    }
    out
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// A predictive model for one objective.
#[derive(Clone, Debug)]
pub enum Predictor {
    Single(Surrogate),
    Ensemble(TransferEnsemble),
}

impl Predictor {
    pub fn predict(&self, x: &[f64]) -> GaussianPrediction {
        match self {
            Predictor::Single(m) => m.predict(x),
            Predictor::Ensemble(e) => e.predict(x),
        }
    }
}

enum Scorer {
    Ei { eta: Option<f64> },
    Ehvi2 { front: ParetoFront },
    EhviMc { eval: EhviMcEvaluator },
}

/// The acquisition surface of one suggestion step: fitted models plus the
/// excluded (pending and completed) points.
pub struct AcquisitionContext<'a> {
    space: &'a SearchSpace,
    objectives: Vec<Predictor>,
    constraints: Vec<Surrogate>,
    scorer: Scorer,
    excluded: Vec<Vec<f64>>,
    pub plan: AlgorithmPlan,
}

impl AcquisitionContext<'_> {
    /// The acquisition value, ignoring exclusions.
    pub fn acquisition(&self, config: &Configuration) -> f64 {
        let x = self.space.to_features(config);
        let preds: Vec<GaussianPrediction> = self.objectives.iter().map(|m| m.predict(&x)).collect();
        let feas = if self.constraints.is_empty() {
            1.0
        } else {
            let c: Vec<GaussianPrediction> = self.constraints.iter().map(|m| m.predict(&x)).collect();
            pof(&c)
        };
        let base = match &self.scorer {
            Scorer::Ei { eta: Some(eta) } => ei(&preds[0], *eta),
            // No feasible incumbent yet: search for feasibility alone.
            Scorer::Ei { eta: None } => 1.0,
            Scorer::Ehvi2 { front } => ehvi_2d(&preds, front),
            Scorer::EhviMc { eval } => eval.eval(&preds),
        };
        constrained_acq(base, feas)
    }

    /// True if `config` encodes to a pending or completed point.
    pub fn is_excluded(&self, config: &Configuration) -> bool {
        let u = self.space.to_unit_vector(config);
        self.excluded.iter().any(|e| same_point(e, &u))
    }

    /// The score handed to the optimizer: `-∞` at excluded points.
    pub fn score(&self, config: &Configuration) -> f64 {
        if self.is_excluded(config) {
            f64::NEG_INFINITY
        } else {
            self.acquisition(config)
        }
    }

    pub fn objective_models(&self) -> &[Predictor] {
        &self.objectives
    }
}

/// Default reference point: per-objective worst observation plus 10% of the
/// observed range (or of its magnitude when the range is zero).
pub fn default_ref_point(ys: &[Vec<f64>], p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| {
            let hi = ys.iter().map(|y| y[j]).fold(f64::NEG_INFINITY, f64::max);
            let lo = ys.iter().map(|y| y[j]).fold(f64::INFINITY, f64::min);
            let range = hi - lo;
            let pad = if range > 0.0 { 0.1 * range } else { 0.1 * hi.abs().max(1.0) };
            hi + pad
        })
        .collect()
}

/// Transfer sources: base surrogates per objective dimension, fitted once.
#[derive(Clone, Debug, Default)]
pub(crate) struct TransferSources {
    pub(crate) bases: Vec<Vec<Arc<Surrogate>>>,
}

/// Suggestion engine for one task.
#[derive(Clone, Debug)]
pub struct Advisor {
    spec: TaskSpec,
    config: AdvisorConfig,
    transfer: Option<TransferSources>,
}

impl Advisor {
    pub fn new(spec: TaskSpec) -> Self {
        Self::with_config(spec, AdvisorConfig::default())
    }

    pub fn with_config(spec: TaskSpec, config: AdvisorConfig) -> Self {
        Self {
            spec,
            config,
            transfer: None,
        }
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    pub fn config(&self) -> &AdvisorConfig {
        &self.config
    }

    /// Number of source tasks feeding the transfer ensemble.
    pub fn source_count(&self) -> usize {
        self.transfer.as_ref().map_or(0, |t| t.bases.first().map_or(0, Vec::len))
    }

    pub fn plan(&self, history: &History) -> AlgorithmPlan {
        select_algorithm(&self.spec, history.len())
    }

    pub fn n_init(&self) -> usize {
        self.config.n_init.unwrap_or_else(|| initial_design_size(&self.spec.space))
    }

    pub(crate) fn fit_surrogate(
        &self,
        kind: SurrogateKind,
        kinds: &[FeatureKind],
        x: &[Vec<f64>],
        y: &[f64],
        seed: u64,
    ) -> Result<Surrogate, SurrogateError> {
        match kind {
            SurrogateKind::Gp => fit_gp_with(kinds, x, y, &self.config.gp, seed).map(Surrogate::Gp),
            SurrogateKind::Prf => fit_prf(kinds, x, y, &self.config.prf, seed).map(Surrogate::Prf),
        }
    }

    /// Fits on the first `n_real` rows (the completed trials). When imputed
    /// rows follow, also returns a model conditioned on all rows: the GP keeps
    /// the hyperparameters learned from real data, the forest is refitted.
    fn fit_step_model(
        &self,
        kind: SurrogateKind,
        kinds: &[FeatureKind],
        x: &[Vec<f64>],
        y: &[f64],
        n_real: usize,
        seed: u64,
    ) -> Result<(Surrogate, Option<Surrogate>), SurrogateError> {
        let real = self.fit_surrogate(kind, kinds, &x[..n_real], &y[..n_real], seed)?;
        if n_real == x.len() {
            return Ok((real, None));
        }
        let aug = match &real {
            Surrogate::Gp(m) => Surrogate::Gp(GpModel::with_params(kinds, x, y, m.params().clone(), self.config.gp.standardize)?),
            Surrogate::Prf(_) => self.fit_surrogate(kind, kinds, x, y, seed)?,
        };
        Ok((real, Some(aug)))
    }

    fn check_dims(&self, history: &History) -> Result<(), AdvisorError> {
        let (p, q) = (self.spec.num_objectives.max(1), self.spec.num_constraints);
        match history.completed().first() {
            Some(o) if o.objectives.len() != p || o.constraints.len() != q => {
                Err(AdvisorError::InvalidObservation(format!(
                    "expected {p} objectives and {q} constraints, got {} and {}",
                    o.objectives.len(),
                    o.constraints.len()
                )))
            }
            _ => Ok(()),
        }
    }

    fn excluded_points(&self, history: &History) -> Vec<Vec<f64>> {
        let space = &self.spec.space;
        history
            .pending()
            .iter()
            .chain(history.completed().iter().map(|o| &o.config))
            .map(|c| space.to_unit_vector(c))
            .collect()
    }

    /// Per-call random stream, a pure function of the inputs.
    fn step_seed(history: &History, seed: u64) -> u64 {
        derive_seed(seed, &[history.len() as u64, history.pending().len() as u64])
    }

    /// Fits the models of one suggestion step.
    pub fn context(&self, history: &History, seed: u64) -> Result<AcquisitionContext<'_>, AdvisorError> {
        self.check_dims(history)?;
        let space = &self.spec.space;
        let plan = self.plan(history);
        let seed = Self::step_seed(history, seed);
        let aug = impute_pending(history.completed(), history.pending())?;
        let kinds = space.feature_kinds();
        let x: Vec<Vec<f64>> = aug.iter().map(|o| space.to_features(&o.config)).collect();
        let p = aug[0].objectives.len();
        let q = aug[0].constraints.len();

        let n_real = history.len();
        let fit = |y: &[f64], tag: u64| self.fit_step_model(plan.surrogate, &kinds, &x, y, n_real, tag);
        let mut objectives = Vec::with_capacity(p);
        for j in 0..p {
            let y: Vec<f64> = aug.iter().map(|o| o.objectives[j]).collect();
            let model_seed = derive_seed(seed, &[0x0b, j as u64]);
            let (real, target) = fit(&y, model_seed)?;
            let predictor = match &self.transfer {
                Some(t) if !t.bases[j].is_empty() => Predictor::Ensemble(transfer::ensemble_for(
                    self,
                    &t.bases[j],
                    &real,
                    target.unwrap_or_else(|| real.clone()),
                    history,
                    j,
                    model_seed,
                )),
                _ => Predictor::Single(target.unwrap_or(real)),
            };
            objectives.push(predictor);
        }
        let mut constraints = Vec::with_capacity(q);
        for j in 0..q {
            let y: Vec<f64> = aug.iter().map(|o| o.constraints[j]).collect();
            let (real, target) = fit(&y, derive_seed(seed, &[0x0c, j as u64]))?;
            constraints.push(target.unwrap_or(real));
        }

        let feasible: Vec<Vec<f64>> = history
            .completed()
            .iter()
            .filter(|o| o.is_feasible())
            .map(|o| o.objectives.clone())
            .collect();
        let scorer = if p == 1 {
            Scorer::Ei {
                eta: feasible.iter().map(|y| y[0]).min_by(f64::total_cmp),
            }
        } else {
            let all: Vec<Vec<f64>> = history.completed().iter().map(|o| o.objectives.clone()).collect();
            let r = self
                .spec
                .ref_point
                .clone()
                .unwrap_or_else(|| default_ref_point(&all, p));
            let front = ParetoFront::from_points(feasible, r);
            if p == 2 {
                Scorer::Ehvi2 { front }
            } else {
                Scorer::EhviMc {
                    eval: EhviMcEvaluator::new(&front, self.config.ehvi_mc_draws, derive_seed(seed, &[0xe4])),
                }
            }
        };
        Ok(AcquisitionContext {
            space,
            objectives,
            constraints,
            scorer,
            excluded: self.excluded_points(history),
            plan,
        })
    }

    /// A random configuration that is neither pending nor completed, if one
    /// is found within a bounded number of draws.
    pub fn random_suggestion(&self, history: &History, seed: u64) -> Result<Configuration, AdvisorError> {
        let space = &self.spec.space;
        let excluded = self.excluded_points(history);
        let pending: Vec<Vec<f64>> = history.pending().iter().map(|c| space.to_unit_vector(c)).collect();
        let mut rng = rng_from_seed(derive_seed(Self::step_seed(history, seed), &[0x7a]));
        let mut fallback = None;
        for _ in 0..1000 {
            let c = space.sample_with(&mut rng);
            let u = space.to_unit_vector(&c);
            if !excluded.iter().any(|e| same_point(e, &u)) {
                return Ok(c);
            }
            if fallback.is_none() && !pending.iter().any(|e| same_point(e, &u)) {
                fallback = Some(c);
            }
        }
        fallback.ok_or(AdvisorError::Exhausted)
    }

    /// Next configuration to evaluate.
    pub fn suggest(&self, history: &History, seed: u64) -> Result<Configuration, AdvisorError> {
        self.check_dims(history)?;
        if self.spec.advisor_type == AdvisorType::Random {
            return self.random_suggestion(history, seed);
        }
        let space = &self.spec.space;
        let n_init = self.n_init();
        if history.len() < n_init {
            let excluded = self.excluded_points(history);
            let design = initial_design(space, n_init, seed);
            return match design
                .into_iter()
                .find(|c| !excluded.iter().any(|e| same_point(e, &space.to_unit_vector(c))))
            {
                Some(c) => Ok(c),
                None => self.random_suggestion(history, seed),
            };
        }
        let ctx = self.context(history, seed)?;
        let (best, value) = optimize_acq_with(
            space,
            &|c| ctx.score(c),
            ctx.plan.acq_optimizer,
            &self.config.optimizer,
            derive_seed(Self::step_seed(history, seed), &[0x0a]),
        );
        if value == f64::NEG_INFINITY || ctx.is_excluded(&best) {
            return self.random_suggestion(history, seed);
        }
        Ok(best)
    }

    /// [`Advisor::suggest`], degrading to a random configuration when model
    /// fitting fails. The error, if any, is returned alongside.
    pub fn suggest_or_random(
        &self,
        history: &History,
        seed: u64,
    ) -> Result<(Configuration, Option<AdvisorError>), AdvisorError> {
        match self.suggest(history, seed) {
            Ok(c) => Ok((c, None)),
            Err(e @ (AdvisorError::Surrogate(_) | AdvisorError::ZeroWeights)) => {
                tracing::warn!(error = %e, "model fit failed, suggesting at random");
                self.random_suggestion(history, seed).map(|c| (c, Some(e)))
            }
            Err(e) => Err(e),
        }
    }

    /// `m` mutually distinct suggestions, each added to the pending set
    /// before the next is computed.
    pub fn suggest_batch(
        &self,
        history: &History,
        m: usize,
        seed: u64,
    ) -> Result<Vec<Configuration>, AdvisorError> {
        if m == 0 {
            return Err(AdvisorError::EmptyBatch);
        }
        let mut h = history.clone();
        let mut out = Vec::with_capacity(m);
        for _ in 0..m {
            let c = self.suggest(&h, seed)?;
            h.add_pending(c.clone());
            out.push(c);
        }
        Ok(out)
    }
}

pub fn suggest(spec: &TaskSpec, history: &History, seed: u64) -> Result<Configuration, AdvisorError> {
    Advisor::new(spec.clone()).suggest(history, seed)
}

pub fn suggest_batch(
    spec: &TaskSpec,
    history: &History,
    m: usize,
    seed: u64,
) -> Result<Vec<Configuration>, AdvisorError> {
    Advisor::new(spec.clone()).suggest_batch(history, m, seed)
}

#[cfg(test)]
mod tests;
