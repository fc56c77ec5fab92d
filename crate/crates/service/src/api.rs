//! Wire types and the operations shared by the in-process service and
//! the HTTP client.

use gbbo_core::Configuration;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::master::MasterSnapshot;
use crate::storage::LogLine;
use crate::task::TaskStatus;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreatedTask {
    pub task_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub worker_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub trial_id: u64,
    pub config: Configuration,
    /// Set when the advisor failed and the configuration is random.
    #[serde(default)]
    pub fallback: bool,
}

/// Objective values, or the literal string `"failed"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Objectives {
    Values(Vec<Option<f64>>),
    Failed(FailedTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedTag {
    Failed,
}

impl Objectives {
    pub fn values(v: Vec<f64>) -> Self {
        Objectives::Values(v.into_iter().map(Some).collect())
    }

    pub fn failed() -> Self {
        Objectives::Failed(FailedTag::Failed)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialInfo {
    #[serde(default)]
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateRequest {
    pub trial_id: u64,
    pub objectives: Objectives,
    #[serde(default)]
    pub constraints: Vec<Option<f64>>,
    #[serde(default)]
    pub trial_info: TrialInfo,
}

impl UpdateRequest {
    pub fn new(trial_id: u64, objectives: Vec<f64>, constraints: Vec<f64>, elapsed_s: f64) -> Self {
        Self {
            trial_id,
            objectives: Objectives::values(objectives),
            constraints: constraints.into_iter().map(Some).collect(),
            trial_info: TrialInfo { elapsed_s },
        }
    }

    pub fn failed(trial_id: u64, elapsed_s: f64) -> Self {
        Self {
            trial_id,
            objectives: Objectives::failed(),
            constraints: Vec::new(),
            trial_info: TrialInfo { elapsed_s },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopAnswer {
    pub stop: bool,
}

/// Resource advice from the fitted curve posterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advice {
    /// Trials observed so far.
    pub n: usize,
    /// Extrapolation horizon.
    pub horizon: usize,
    pub t_star: usize,
    /// Minimum time budget with the task's worker count.
    pub b_min: f64,
    /// Minimum worker count for `budget`.
    pub n_min: usize,
    pub budget: f64,
    pub mean_cost: f64,
    /// `(t, P(improvement by more than δ at t))`.
    pub prob_curve: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskHistory {
    pub task_id: String,
    pub status: TaskStatus,
    pub workers: Vec<String>,
    /// Raw log in append order.
    pub log: Vec<LogLine>,
}

impl TaskHistory {
    pub fn running(&self) -> usize {
        let started = self.log.iter().filter(|l| l.state == crate::storage::LogState::Running).count();
        started - self.ended()
    }

    pub fn ended(&self) -> usize {
        self.log
            .iter()
            .filter(|l| l.state != crate::storage::LogState::Running)
            .count()
    }

    pub fn completed(&self) -> usize {
        self.log
            .iter()
            .filter(|l| l.state == crate::storage::LogState::Completed)
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub ok: bool,
    pub master: MasterSnapshot,
}

/// The worker-facing protocol.
pub trait OptimizerApi: Send + Sync {
    fn create_task(&self, tdl: &str) -> Result<String, ServiceError>;
    fn register(&self, task_id: &str, worker_id: &str) -> Result<(), ServiceError>;
    fn suggest(&self, task_id: &str, worker_id: &str) -> Result<Suggestion, ServiceError>;
    fn update(&self, task_id: &str, req: &UpdateRequest) -> Result<(), ServiceError>;
    fn early_stop(&self, task_id: &str, trial_id: u64, best: f64) -> Result<bool, ServiceError>;
    fn extrapolate(&self, task_id: &str) -> Result<Advice, ServiceError>;
    fn history(&self, task_id: &str) -> Result<TaskHistory, ServiceError>;
    fn health(&self) -> Result<Health, ServiceError>;
}

impl<T: OptimizerApi + ?Sized> OptimizerApi for std::sync::Arc<T> {
    fn create_task(&self, tdl: &str) -> Result<String, ServiceError> {
        (**self).create_task(tdl)
    }
    fn register(&self, task_id: &str, worker_id: &str) -> Result<(), ServiceError> {
        (**self).register(task_id, worker_id)
    }
    fn suggest(&self, task_id: &str, worker_id: &str) -> Result<Suggestion, ServiceError> {
        (**self).suggest(task_id, worker_id)
    }
    fn update(&self, task_id: &str, req: &UpdateRequest) -> Result<(), ServiceError> {
        (**self).update(task_id, req)
    }
    fn early_stop(&self, task_id: &str, trial_id: u64, best: f64) -> Result<bool, ServiceError> {
        (**self).early_stop(task_id, trial_id, best)
    }
    fn extrapolate(&self, task_id: &str) -> Result<Advice, ServiceError> {
        (**self).extrapolate(task_id)
    }
    fn history(&self, task_id: &str) -> Result<TaskHistory, ServiceError> {
        (**self).history(task_id)
    }
    fn health(&self) -> Result<Health, ServiceError> {
        (**self).health()
    }
}
