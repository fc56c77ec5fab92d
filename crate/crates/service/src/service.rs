//! In-process deployment: one master plus any number of suggestion servers
//! sharing a task database.
//!
//! Suggestion servers keep nothing but a cache of advisors; every request
//! rebuilds the task's history from the log, so a task can move between
//! servers at any time. Requests on one task are serialized by that task's
//! mutex; sync-mode callers wait on its condition variable.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::Duration;

use gbbo_core::extrapolation::{
    advise_min_budget, fit_curve_posterior, min_workers, prob_improvement, should_stop_early,
    McmcConfig, PerfCurve, DEFAULT_P_STOP, MIN_CURVE_LEN,
};
use gbbo_core::rng::hash_str;
use gbbo_core::space::ParallelStrategy;
use gbbo_core::stats::median;
use gbbo_core::{parse_tdl, Advisor, AdvisorConfig, AdvisorError, Configuration, History};

use crate::api::{
    Advice, Health, Objectives, OptimizerApi, Suggestion, TaskHistory, UpdateRequest,
};
use crate::clock::{Clock, SystemClock};
use crate::error::ServiceError;
use crate::master::{FailoverReport, Master, MasterSnapshot, HEARTBEAT_TIMEOUT_S};
use crate::storage::{LogLine, LogState, TaskDb, TaskMeta};
use crate::task::{spec_of, TaskStatus, TaskView};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub heartbeat_timeout: f64,
    /// Sync-mode trials running longer than this multiple of the median
    /// completed cost are failed.
    pub straggler_factor: f64,
    /// How often blocked sync-mode callers re-check for stragglers.
    pub sync_poll: Duration,
    pub advisor: AdvisorConfig,
    pub mcmc: McmcConfig,
    /// Extrapolation horizon as a multiple of the observed trial count.
    pub horizon_factor: usize,
    pub p_stop: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            heartbeat_timeout: HEARTBEAT_TIMEOUT_S,
            straggler_factor: 10.0,
            sync_poll: Duration::from_millis(50),
            advisor: AdvisorConfig::default(),
            mcmc: McmcConfig::default(),
            horizon_factor: 5,
            p_stop: DEFAULT_P_STOP,
        }
    }
}

#[derive(Debug, Default)]
struct ServerState {
    up: bool,
    advisors: BTreeMap<String, Arc<Advisor>>,
}

#[derive(Debug, Default)]
struct Runtime {
    /// Sync mode: the undispatched remainder of the current batch.
    ready: VecDeque<Configuration>,
}

#[derive(Debug, Default)]
struct TaskHandle {
    rt: Mutex<Runtime>,
    cv: Condvar,
}

pub struct Service {
    db: TaskDb,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
    master: Mutex<Master>,
    servers: Mutex<BTreeMap<String, ServerState>>,
    tasks: Mutex<BTreeMap<String, Arc<TaskHandle>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn server_id(i: usize) -> String {
    format!("server-{i}")
}

impl Service {
    /// Opens (or recovers) a deployment with servers `server-1..=server-n`.
    pub fn open(
        db_dir: impl AsRef<Path>,
        n_servers: usize,
        clock: Arc<dyn Clock>,
        config: ServiceConfig,
    ) -> Result<Self, ServiceError> {
        let db = TaskDb::open(db_dir.as_ref())?;
        let master = Master::recover(db.clone())?.with_timeout(config.heartbeat_timeout);
        let svc = Self {
            db,
            clock,
            config,
            master: Mutex::new(master),
            servers: Mutex::new(BTreeMap::new()),
            tasks: Mutex::new(BTreeMap::new()),
        };
        for i in 1..=n_servers {
            svc.add_server(&server_id(i))?;
        }
        Ok(svc)
    }

    /// A single-server deployment on the system clock.
    pub fn single(db_dir: impl AsRef<Path>) -> Result<Self, ServiceError> {
        Self::open(db_dir, 1, Arc::new(SystemClock), ServiceConfig::default())
    }

    pub fn db(&self) -> &TaskDb {
        &self.db
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    /// Starts a suggestion server (or restarts a known one) and announces it.
    pub fn add_server(&self, id: &str) -> Result<(), ServiceError> {
        let now = self.now();
        lock(&self.servers).insert(id.to_owned(), ServerState { up: true, ..Default::default() });
        let mut m = lock(&self.master);
        if m.snapshot().servers.contains_key(id) {
            m.heartbeat(id, now)
        } else {
            m.register_server(id, &format!("inproc://{id}"), now)
        }
    }

    /// Simulates a crash: the server stops answering and loses its caches.
    pub fn kill_server(&self, id: &str) {
        if let Some(s) = lock(&self.servers).get_mut(id) {
            s.up = false;
            s.advisors.clear();
        }
    }

    pub fn revive_server(&self, id: &str) -> Result<(), ServiceError> {
        self.add_server(id)
    }

    /// One heartbeat round followed by the master's liveness check.
    pub fn tick(&self) -> Result<FailoverReport, ServiceError> {
        let now = self.now();
        let up: Vec<String> = lock(&self.servers)
            .iter()
            .filter(|(_, s)| s.up)
            .map(|(id, _)| id.clone())
            .collect();
        let mut m = lock(&self.master);
        for id in &up {
            m.heartbeat(id, now)?;
        }
        m.check_liveness(now)
    }

    /// Replaces the master with one recovered from its snapshot.
    pub fn restart_master(&self) -> Result<(), ServiceError> {
        let fresh = Master::recover(self.db.clone())?.with_timeout(self.config.heartbeat_timeout);
        *lock(&self.master) = fresh;
        Ok(())
    }

    pub fn master_snapshot(&self) -> MasterSnapshot {
        lock(&self.master).snapshot().clone()
    }

    fn handle(&self, task_id: &str) -> Result<Arc<TaskHandle>, ServiceError> {
        if let Some(h) = lock(&self.tasks).get(task_id) {
            return Ok(h.clone());
        }
        self.db.read_meta(task_id)?;
        Ok(lock(&self.tasks).entry(task_id.to_owned()).or_default().clone())
    }

    fn view(&self, task_id: &str) -> Result<TaskView, ServiceError> {
        let meta = self.db.read_meta(task_id)?;
        let log = self.db.read_log(task_id)?;
        TaskView::new(meta, &log)
    }

    /// The server that answers for `task_id`. Finished tasks are no longer
    /// placed, so any live server may serve their read-only requests.
    fn serving(&self, task_id: &str) -> Result<String, ServiceError> {
        let id = {
            let m = lock(&self.master);
            let snap = m.snapshot();
            if snap.assignments.contains_key(task_id) || snap.parked.contains(task_id) {
                m.route(task_id)?.id.clone()
            } else {
                snap.servers
                    .values()
                    .find(|e| e.alive)
                    .map(|e| e.id.clone())
                    .ok_or_else(|| ServiceError::Unavailable("no live suggestion server".into()))?
            }
        };
        match lock(&self.servers).get(&id) {
            Some(s) if s.up => Ok(id),
            _ => Err(ServiceError::Unavailable(format!("server '{id}' is not responding"))),
        }
    }

    fn advisor(&self, server: &str, view: &TaskView) -> Arc<Advisor> {
        let task_id = &view.meta.task_id;
        if let Some(a) = lock(&self.servers).get(server).and_then(|s| s.advisors.get(task_id)) {
            return a.clone();
        }
        let a = Arc::new(Advisor::with_config(view.spec.clone(), self.config.advisor.clone()));
        if let Some(s) = lock(&self.servers).get_mut(server) {
            s.advisors.insert(task_id.clone(), a.clone());
        }
        a
    }

    fn issue(&self, view: &TaskView, config: Configuration, fallback: bool) -> Result<Suggestion, ServiceError> {
        let trial_id = view.next_trial_id();
        self.db.append(
            &view.meta.task_id,
            &LogLine {
                trial_id,
                config: config.clone(),
                objectives: Vec::new(),
                constraints: Vec::new(),
                state: LogState::Running,
                elapsed_s: 0.0,
                ts: self.now(),
            },
        )?;
        Ok(Suggestion {
            trial_id,
            config,
            fallback,
        })
    }

    fn finish_if_done(&self, view: &TaskView) -> Result<(), ServiceError> {
        if view.status(self.now()) == TaskStatus::Finished {
            lock(&self.master).release(&view.meta.task_id)?;
        }
        Ok(())
    }

    fn batch(&self, advisor: &Advisor, history: &History, m: usize, seed: u64) -> Result<Vec<Configuration>, ServiceError> {
        match advisor.suggest_batch(history, m, seed) {
            Ok(b) => Ok(b),
            Err(e @ (AdvisorError::Surrogate(_) | AdvisorError::ZeroWeights)) => {
                tracing::warn!(error = %e, "batch suggestion failed, filling at random");
                let mut h = history.clone();
                let mut out = Vec::with_capacity(m);
                for _ in 0..m {
                    let c = advisor.random_suggestion(&h, seed).map_err(internal)?;
                    h.add_pending(c.clone());
                    out.push(c);
                }
                Ok(out)
            }
            Err(e) => Err(internal(e)),
        }
    }

    /// Fails sync-mode trials that have run far longer than is typical.
    /// Returns true if any trial was failed.
    fn reap_stragglers(&self, view: &TaskView) -> Result<bool, ServiceError> {
        let costs: Vec<f64> = view
            .successes()
            .filter_map(|(t, _, _)| t.outcome.as_ref().map(|o| o.elapsed_s))
            .collect();
        let Some(med) = median(&costs).filter(|m| *m > 0.0) else {
            return Ok(false);
        };
        let now = self.now();
        let limit = self.config.straggler_factor * med;
        let mut reaped = false;
        for t in view.running() {
            if now - t.started > limit {
                tracing::warn!(task = %view.meta.task_id, trial = t.trial_id, "straggler timed out");
                self.db.append(
                    &view.meta.task_id,
                    &LogLine {
                        trial_id: t.trial_id,
                        config: t.config.clone(),
                        objectives: Vec::new(),
                        constraints: Vec::new(),
                        state: LogState::Failed,
                        elapsed_s: now - t.started,
                        ts: now,
                    },
                )?;
                reaped = true;
            }
        }
        Ok(reaped)
    }

    fn suggest_locked(
        &self,
        handle: &TaskHandle,
        mut rt: MutexGuard<'_, Runtime>,
        task_id: &str,
        worker_id: &str,
    ) -> Result<Suggestion, ServiceError> {
        loop {
            let view = self.view(task_id)?;
            if !view.meta.workers.contains(worker_id) {
                return Err(ServiceError::NotRegistered(worker_id.to_owned()));
            }
            if view.exhausted(self.now()) {
                self.finish_if_done(&view)?;
                rt.ready.clear();
                return Err(ServiceError::Finished);
            }
            let server = self.serving(task_id)?;
            let advisor = self.advisor(&server, &view);
            let seed = view.meta.seed;
            if view.spec.parallel_strategy == ParallelStrategy::Async {
                let history = view.history();
                let (config, err) = advisor.suggest_or_random(&history, seed).map_err(internal)?;
                return self.issue(&view, config, err.is_some());
            }
            if let Some(c) = rt.ready.pop_front() {
                return self.issue(&view, c, false);
            }
            if view.running().next().is_some() {
                if self.reap_stragglers(&view)? {
                    handle.cv.notify_all();
                    continue;
                }
                rt = handle
                    .cv
                    .wait_timeout(rt, self.config.sync_poll)
                    .unwrap_or_else(|e| e.into_inner())
                    .0;
                continue;
            }
            let m = view.spec.worker_num.min(view.spec.number_of_trials - view.issued());
            rt.ready = self.batch(&advisor, &view.history(), m, seed)?.into();
        }
    }
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

impl OptimizerApi for Service {
    fn create_task(&self, tdl: &str) -> Result<String, ServiceError> {
        let spec = parse_tdl(tdl)?;
        if !lock(&self.master).has_live_server() {
            return Err(ServiceError::Unavailable("no live suggestion server".into()));
        }
        let task_id = uuid::Uuid::new_v4().simple().to_string();
        let meta = TaskMeta {
            seed: spec.random_seed.unwrap_or_else(|| hash_str(&task_id)),
            tdl: spec.to_tdl(),
            created_at: self.now(),
            workers: Default::default(),
            task_id: task_id.clone(),
        };
        self.db.create_task(&meta)?;
        lock(&self.master).assign(&task_id)?;
        tracing::info!(task = %task_id, "task created");
        Ok(task_id)
    }

    fn register(&self, task_id: &str, worker_id: &str) -> Result<(), ServiceError> {
        if worker_id.is_empty() {
            return Err(ServiceError::BadRequest("empty worker id".into()));
        }
        let handle = self.handle(task_id)?;
        let _rt = lock(&handle.rt);
        let mut meta = self.db.read_meta(task_id)?;
        if meta.workers.insert(worker_id.to_owned()) {
            self.db.write_meta(&meta)?;
        }
        Ok(())
    }

    fn suggest(&self, task_id: &str, worker_id: &str) -> Result<Suggestion, ServiceError> {
        let handle = self.handle(task_id)?;
        let rt = lock(&handle.rt);
        self.suggest_locked(&handle, rt, task_id, worker_id)
    }

    fn update(&self, task_id: &str, req: &UpdateRequest) -> Result<(), ServiceError> {
        let handle = self.handle(task_id)?;
        let _rt = lock(&handle.rt);
        let view = self.view(task_id)?;
        let trial = view
            .trials
            .get(&req.trial_id)
            .ok_or_else(|| ServiceError::Conflict(format!("unknown trial {}", req.trial_id)))?;
        if !trial.is_running() {
            return Err(ServiceError::Conflict(format!("trial {} already updated", req.trial_id)));
        }
        self.serving(task_id)?;
        let (p, q) = (view.spec.num_objectives, view.spec.num_constraints);
        let finite = |v: &[Option<f64>]| v.iter().map(|x| x.filter(|x| x.is_finite())).collect::<Vec<_>>();
        let (objectives, constraints, state) = match &req.objectives {
            Objectives::Failed(_) => (Vec::new(), finite(&req.constraints), LogState::Failed),
            Objectives::Values(ys) => {
                if ys.len() != p {
                    return Err(ServiceError::BadRequest(format!("expected {p} objectives, got {}", ys.len())));
                }
                if req.constraints.len() != q {
                    return Err(ServiceError::BadRequest(format!(
                        "expected {q} constraints, got {}",
                        req.constraints.len()
                    )));
                }
                let (ys, cs) = (finite(ys), finite(&req.constraints));
                let ok = ys.iter().chain(&cs).all(Option::is_some);
                (ys, cs, if ok { LogState::Completed } else { LogState::Failed })
            }
        };
        self.db.append(
            task_id,
            &LogLine {
                trial_id: req.trial_id,
                config: trial.config.clone(),
                objectives,
                constraints,
                state,
                elapsed_s: req.trial_info.elapsed_s,
                ts: self.now(),
            },
        )?;
        handle.cv.notify_all();
        self.finish_if_done(&self.view(task_id)?)
    }

    fn early_stop(&self, task_id: &str, trial_id: u64, best: f64) -> Result<bool, ServiceError> {
        let view = self.view(task_id)?;
        if !view.trials.get(&trial_id).is_some_and(|t| t.is_running()) {
            return Err(ServiceError::UnknownTrial(trial_id));
        }
        let results: Vec<f64> = view.successes().map(|(_, ys, _)| ys[0]).collect();
        let es = view.spec.early_stop;
        Ok(should_stop_early(best, &results, es.rule, es.min_history))
    }

    fn extrapolate(&self, task_id: &str) -> Result<Advice, ServiceError> {
        self.extrapolate_with_budget(task_id, None)
    }

    fn history(&self, task_id: &str) -> Result<TaskHistory, ServiceError> {
        let meta = self.db.read_meta(task_id)?;
        let log = self.db.read_log(task_id)?;
        let status = TaskView::new(meta.clone(), &log)?.status(self.now());
        Ok(TaskHistory {
            task_id: task_id.to_owned(),
            status,
            workers: meta.workers.into_iter().collect(),
            log,
        })
    }

    fn health(&self) -> Result<Health, ServiceError> {
        let m = lock(&self.master);
        Ok(Health {
            ok: m.has_live_server() && m.snapshot().parked.is_empty(),
            master: m.snapshot().clone(),
        })
    }
}

impl Service {
    /// Resource advice. `budget` is the wall-clock budget for the worker
    /// count advice; by default the remaining time budget, or else the
    /// minimum budget at the task's worker count.
    pub fn extrapolate_with_budget(&self, task_id: &str, budget: Option<f64>) -> Result<Advice, ServiceError> {
        let view = self.view(task_id)?;
        let (series, costs) = view.performance_series();
        let n = series.len();
        if n < MIN_CURVE_LEN {
            return Err(ServiceError::TooEarly(format!(
                "{n} completed trials, need {MIN_CURVE_LEN}"
            )));
        }
        self.serving(task_id)?;
        let curve = PerfCurve::from_results(&series, costs);
        let horizon = (self.config.horizon_factor * n).max(n + 1);
        let post = fit_curve_posterior(&curve, horizon, &self.config.mcmc, view.meta.seed).map_err(internal)?;
        let delta = curve.default_delta();
        let mean_cost = curve.mean_cost();
        let workers = view.spec.worker_num;
        let advice = advise_min_budget(&post, workers, mean_cost, delta, self.config.p_stop);
        let remaining = view
            .spec
            .time_budget
            .map(|b| b - (self.now() - view.meta.created_at));
        let budget = budget.or(remaining).unwrap_or(advice.b_min);
        let work = advice.t_star.saturating_sub(n) as f64 * mean_cost;
        let n_min = if work > 0.0 {
            min_workers(advice.t_star, n, mean_cost, budget)
        } else {
            1
        };
        let step = ((horizon - n) / 50).max(1);
        let prob_curve = (n + 1..=horizon)
            .step_by(step)
            .map(|t| (t, prob_improvement(&post, t, delta)))
            .collect();
        Ok(Advice {
            n,
            horizon,
            t_star: advice.t_star,
            b_min: advice.b_min,
            n_min,
            budget,
            mean_cost,
            prob_curve,
        })
    }

    /// The parsed specification of a stored task.
    pub fn spec(&self, task_id: &str) -> Result<gbbo_core::TaskSpec, ServiceError> {
        spec_of(&self.db.read_meta(task_id)?)
    }
}
