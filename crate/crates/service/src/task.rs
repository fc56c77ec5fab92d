//! Task state reconstructed from the persistent log.

use std::collections::BTreeMap;

use gbbo_core::acquisition::ParetoFront;
use gbbo_core::advisor::default_ref_point;
use gbbo_core::{parse_tdl, Configuration, History, Observation, TaskSpec, TrialState};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::storage::{LogLine, LogState, TaskMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Active,
    Finished,
}

/// One trial folded from its log lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub trial_id: u64,
    pub config: Configuration,
    pub started: f64,
    /// The terminal line, if the trial has ended.
    pub outcome: Option<LogLine>,
}

impl Trial {
    pub fn is_running(&self) -> bool {
        self.outcome.is_none()
    }
}

/// Parsed metadata plus the folded log of one task.
#[derive(Clone, Debug)]
pub struct TaskView {
    pub meta: TaskMeta,
    pub spec: TaskSpec,
    pub trials: BTreeMap<u64, Trial>,
}

pub fn spec_of(meta: &TaskMeta) -> Result<TaskSpec, ServiceError> {
    let text = serde_json::to_string(&meta.tdl).map_err(|e| ServiceError::Storage(e.to_string()))?;
    parse_tdl(&text).map_err(|e| ServiceError::Storage(format!("stored task description: {e}")))
}

impl TaskView {
    pub fn new(meta: TaskMeta, log: &[LogLine]) -> Result<Self, ServiceError> {
        let spec = spec_of(&meta)?;
        let mut trials = BTreeMap::new();
        for line in log {
            match line.state {
                LogState::Running => {
                    trials.insert(
                        line.trial_id,
                        Trial {
                            trial_id: line.trial_id,
                            config: line.config.clone(),
                            started: line.ts,
                            outcome: None,
                        },
                    );
                }
                LogState::Completed | LogState::Failed => {
                    if let Some(t) = trials.get_mut(&line.trial_id) {
                        if t.outcome.is_none() {
                            t.outcome = Some(line.clone());
                        }
                    }
                }
            }
        }
        Ok(Self { meta, spec, trials })
    }

    pub fn issued(&self) -> usize {
        self.trials.len()
    }

    pub fn ended(&self) -> usize {
        self.trials.values().filter(|t| !t.is_running()).count()
    }

    pub fn running(&self) -> impl Iterator<Item = &Trial> {
        self.trials.values().filter(|t| t.is_running())
    }

    pub fn next_trial_id(&self) -> u64 {
        self.trials.keys().next_back().map_or(0, |k| k + 1)
    }

    fn out_of_time(&self, now: f64) -> bool {
        self.spec
            .time_budget
            .is_some_and(|b| now - self.meta.created_at >= b)
    }

    /// Finished once enough trials have ended or the time budget is spent,
    /// whichever comes first.
    pub fn status(&self, now: f64) -> TaskStatus {
        if self.ended() >= self.spec.number_of_trials || self.out_of_time(now) {
            TaskStatus::Finished
        } else {
            TaskStatus::Active
        }
    }

    /// True when no further trial may be issued.
    pub fn exhausted(&self, now: f64) -> bool {
        self.issued() >= self.spec.number_of_trials || self.status(now) == TaskStatus::Finished
    }

    /// Ended trials with all-finite results, in trial order.
    pub fn successes(&self) -> impl Iterator<Item = (&Trial, Vec<f64>, Vec<f64>)> {
        self.trials.values().filter_map(|t| {
            let o = t.outcome.as_ref()?;
            if o.state != LogState::Completed {
                return None;
            }
            let ys: Option<Vec<f64>> = o.objectives.iter().map(|v| v.filter(|x| x.is_finite())).collect();
            let cs: Option<Vec<f64>> = o.constraints.iter().map(|v| v.filter(|x| x.is_finite())).collect();
            Some((t, ys?, cs?))
        })
    }

    /// The advisor's view of the task.
    ///
    /// Failed trials are recorded with the worst value seen so far in each
    /// objective and the worst constraint value plus one; they are left out
    /// while no successful trial exists. Running trials are pending.
    pub fn history(&self) -> History {
        let p = self.spec.num_objectives;
        let q = self.spec.num_constraints;
        let mut worst_y = vec![f64::NEG_INFINITY; p];
        let mut worst_c = vec![f64::NEG_INFINITY; q];
        for (_, ys, cs) in self.successes() {
            for (w, v) in worst_y.iter_mut().zip(&ys) {
                *w = w.max(*v);
            }
            for (w, v) in worst_c.iter_mut().zip(&cs) {
                *w = w.max(*v);
            }
        }
        let have_worst = worst_y.iter().all(|v| v.is_finite());
        let mut h = History::new(self.meta.task_id.clone());
        for t in self.trials.values() {
            let Some(o) = &t.outcome else {
                h.add_pending(t.config.clone());
                continue;
            };
            let clean = o.state == LogState::Completed
                && o.objectives.len() == p
                && o.constraints.len() == q
                && o.objectives.iter().chain(&o.constraints).all(|v| v.is_some_and(f64::is_finite));
            let (objectives, constraints) = if clean {
                (
                    o.objectives.iter().flatten().copied().collect(),
                    o.constraints.iter().flatten().copied().collect(),
                )
            } else if have_worst {
                let cs = worst_c.iter().map(|w| if w.is_finite() { w + 1.0 } else { 1.0 }).collect();
                (worst_y.clone(), cs)
            } else {
                continue;
            };
            let obs = Observation {
                config: o.config.clone(),
                objectives,
                constraints,
                trial_state: TrialState::Completed,
                elapsed: o.elapsed_s,
                timestamp: o.ts,
            };
            if let Err(e) = h.push(obs) {
                tracing::warn!(trial = t.trial_id, error = %e, "dropping observation");
            }
        }
        h
    }

    /// Best-so-far performance per successful trial: the first objective
    /// for single-objective tasks, negated hypervolume otherwise. Returns
    /// the series and the matching evaluation costs.
    pub fn performance_series(&self) -> (Vec<f64>, Vec<f64>) {
        let rows: Vec<(f64, Vec<f64>, Vec<f64>)> = self
            .successes()
            .map(|(t, ys, cs)| (t.outcome.as_ref().map_or(0.0, |o| o.elapsed_s), ys, cs))
            .collect();
        let costs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let feasible = |cs: &[f64]| cs.iter().all(|c| *c <= 0.0);
        if self.spec.num_objectives == 1 {
            let vals = rows
                .iter()
                .map(|(_, ys, cs)| if feasible(cs) { ys[0] } else { f64::INFINITY })
                .collect::<Vec<_>>();
            // Infeasible prefixes have no best yet; use the worst observed.
            let worst = rows.iter().map(|r| r.1[0]).fold(f64::NEG_INFINITY, f64::max);
            return (vals.into_iter().map(|v| if v.is_finite() { v } else { worst }).collect(), costs);
        }
        let all: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
        let r = self
            .spec
            .ref_point
            .clone()
            .unwrap_or_else(|| default_ref_point(&all, self.spec.num_objectives));
        let mut front = ParetoFront::new(r);
        let vals = rows
            .iter()
            .map(|(_, ys, cs)| {
                if feasible(cs) {
                    let _ = front.insert(ys.clone());
                }
                -front.hypervolume()
            })
            .collect();
        (vals, costs)
    }
}
