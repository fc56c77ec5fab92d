//! Core library for generalized black-box optimization.
//!
//! The crate is organised around the pieces a suggestion server needs:
//!
//! * [`space`]: typed search spaces, the JSON task description format,
//!   numeric encodings and the anonymization codec.
//! * [`surrogate`]: Gaussian process and probabilistic random forest
//!   regressors producing Gaussian predictive distributions.
//! * [`acquisition`]: EI/PI/UCB, probability of feasibility, Pareto fronts,
//!   hypervolume, EHVI and the acquisition optimizers.
//! * [`advisor`]: algorithm selection, the stateless `suggest` entry point,
//!   median-imputation batch suggestions and the ranking-weighted transfer
//!   ensemble.
//! * [`extrapolation`]: saturating-curve posterior over the best-so-far
//!   trajectory, resource advice and median/mean early stopping.
//!
//! Everything minimizes. Maximization problems must be negated by the caller.

pub mod acquisition;
pub mod advisor;
pub mod extrapolation;
pub mod rng;
pub mod space;
pub mod stats;
pub mod surrogate;

pub use advisor::{
    select_algorithm, suggest, suggest_batch, Advisor, AdvisorConfig, AdvisorError, AlgorithmPlan,
    History, Observation, TrialState,
};
pub use space::{
    parse_tdl, Configuration, Parameter, ParameterDomain, SearchSpace, TaskSpec, TdlError, Value,
};
pub use surrogate::GaussianPrediction;
