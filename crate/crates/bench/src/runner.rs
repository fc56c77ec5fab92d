//! Experiment runner: drives a problem through the service's worker API.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use gbbo_core::space::{AdvisorType, ParallelStrategy};
use gbbo_core::{Configuration, TaskSpec};
use gbbo_service::storage::LogState;
use gbbo_service::{OptimizerApi, Service, ServiceConfig, ServiceError, SystemClock, UpdateRequest};
use serde::{Deserialize, Serialize};

use crate::metrics::{gap_series, hv_difference_series};
use crate::problems::{problem, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "auto")]
    Auto,
    #[serde(rename = "random")]
    Random,
    /// Random search with twice the trial budget, reported per pair.
    #[serde(rename = "2xrandom")]
    DoubleRandom,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Auto => "auto",
            Algo::Random => "random",
            Algo::DoubleRandom => "2xrandom",
        })
    }
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Algo::Auto),
            "random" => Ok(Algo::Random),
            "2xrandom" | "2×random" | "2-random" => Ok(Algo::DoubleRandom),
            _ => Err(format!("unknown algorithm '{s}' (auto, random, 2xrandom)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Sequential,
    Sync(usize),
    Async(usize),
}

impl Mode {
    pub fn workers(self) -> usize {
        match self {
            Mode::Sequential => 1,
            Mode::Sync(n) | Mode::Async(n) => n,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Sequential => f.write_str("sequential"),
            Mode::Sync(n) => write!(f, "sync-{n}"),
            Mode::Async(n) => write!(f, "async-{n}"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "sequential" {
            return Ok(Mode::Sequential);
        }
        let parse = |n: &str| n.parse::<usize>().ok().filter(|n| *n > 0);
        if let Some(n) = s.strip_prefix("sync-").and_then(parse) {
            return Ok(Mode::Sync(n));
        }
        if let Some(n) = s.strip_prefix("async-").and_then(parse) {
            return Ok(Mode::Async(n));
        }
        Err(format!("unknown mode '{s}' (sequential, sync-N, async-N)"))
    }
}

impl Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Seconds of simulated evaluation cost for a trial id.
pub type CostFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct RunConfig {
    pub problem: String,
    pub algo: Algo,
    pub n_trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Sleep this long per evaluation.
    pub cost: Option<CostFn>,
    /// Stop issuing and reporting trials after this much wall time.
    pub wall_limit: Option<Duration>,
    pub service: ServiceConfig,
}

impl RunConfig {
    pub fn new(problem: &str, algo: Algo, n_trials: usize, seed: u64, mode: Mode) -> Self {
        Self {
            problem: problem.to_owned(),
            algo,
            n_trials,
            seed,
            mode,
            cost: None,
            wall_limit: None,
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based position in completion order.
    pub trial: usize,
    pub trial_id: u64,
    pub config: Configuration,
    pub objectives: Vec<f64>,
    pub constraints: Vec<f64>,
    pub failed: bool,
    /// Wall-clock seconds; not reproducible across runs.
    pub elapsed: f64,
    /// Optimality gap or hypervolume difference after this trial.
    pub metric: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub problem: String,
    pub algo: Algo,
    pub mode: Mode,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

#[derive(Serialize, Deserialize)]
struct Line {
    problem: String,
    algo: Algo,
    mode: Mode,
    seed: u64,
    #[serde(flatten)]
    record: TrialRecord,
}

impl RunResult {
    /// Metric per reported trial. For [`Algo::DoubleRandom`] the k-th
    /// reported trial covers raw trials `2k - 1` and `2k`.
    pub fn metric_series(&self) -> Vec<Option<f64>> {
        let all = self.records.iter().map(|r| r.metric);
        match self.algo {
            Algo::DoubleRandom => all.skip(1).step_by(2).collect(),
            _ => all.collect(),
        }
    }

    pub fn final_metric(&self) -> Option<f64> {
        self.metric_series().last().copied().flatten()
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_{}_seed{}.jsonl", self.problem, self.algo, self.mode, self.seed)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = Line {
                problem: self.problem.clone(),
                algo: self.algo,
                mode: self.mode,
                seed: self.seed,
                record: r.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> anyhow::Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).enumerate().map(|(i, l)| {
            serde_json::from_str::<Line>(l).with_context(|| format!("line {}", i + 1))
        });
        let first = match lines.next() {
            Some(l) => l?,
            None => bail!("empty result file"),
        };
        let mut res = RunResult {
            problem: first.problem,
            algo: first.algo,
            mode: first.mode,
            seed: first.seed,
            records: vec![first.record],
        };
        for l in lines {
            let l = l?;
            if (l.problem.as_str(), l.algo, l.mode, l.seed) != (res.problem.as_str(), res.algo, res.mode, res.seed) {
                bail!("mixed runs in one result file");
            }
            res.records.push(l.record);
        }
        Ok(res)
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn task_spec(p: &Problem, algo: Algo, n_trials: usize, seed: u64, mode: Mode) -> TaskSpec {
    let budget = match algo {
        Algo::DoubleRandom => 2 * n_trials,
        _ => n_trials,
    };
    let mut spec = TaskSpec::new(p.space())
        .with_objectives(p.num_objectives, p.num_constraints)
        .with_trials(budget);
    spec.advisor_type = match algo {
        Algo::Auto => AdvisorType::Auto,
        Algo::Random | Algo::DoubleRandom => AdvisorType::Random,
    };
    spec.random_seed = Some(seed);
    spec.parallel_strategy = match mode {
        Mode::Sync(_) => ParallelStrategy::Sync,
        _ => ParallelStrategy::Async,
    };
    spec.worker_num = mode.workers();
    spec.ref_point = p.ref_point.clone();
    spec
}

fn worker_loop(
    api: &dyn OptimizerApi,
    p: &Problem,
    task: &str,
    me: &str,
    cost: Option<&CostFn>,
    deadline: Option<Instant>,
) -> anyhow::Result<()> {
    api.register(task, me)?;
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    loop {
        if expired() {
            return Ok(());
        }
        let s = match api.suggest(task, me) {
            Ok(s) => s,
            Err(ServiceError::Finished) => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        if expired() {
            return Ok(());
        }
        let t0 = Instant::now();
        let (ys, cs) = p.evaluate(&s.config)?;
        if let Some(c) = cost {
            std::thread::sleep(Duration::from_secs_f64(c(s.trial_id)));
        }
        if expired() {
            return Ok(());
        }
        let req = UpdateRequest::new(s.trial_id, ys, cs, t0.elapsed().as_secs_f64());
        match api.update(task, &req) {
            Ok(()) => {}
            // The service already gave up on this trial.
            Err(ServiceError::Conflict(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
}

/// Runs one seed against a fresh in-process service.
pub fn run_experiment(cfg: &RunConfig) -> anyhow::Result<RunResult> {
    let p = problem(&cfg.problem)?;
    let db = tempfile::tempdir()?;
    let svc = Arc::new(Service::open(db.path(), 1, Arc::new(SystemClock), cfg.service.clone())?);
    let spec = task_spec(&p, cfg.algo, cfg.n_trials, cfg.seed, cfg.mode);
    let task = svc.create_task(&spec.to_tdl().to_string())?;
    let deadline = cfg.wall_limit.map(|d| Instant::now() + d);
    let cutoff = cfg.wall_limit.map(|d| svc.now() + d.as_secs_f64());
    let workers = cfg.mode.workers();
    if workers == 1 {
        worker_loop(svc.as_ref(), &p, &task, "worker-0", cfg.cost.as_ref(), deadline)?;
    } else {
        std::thread::scope(|scope| -> anyhow::Result<()> {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (svc, p, task) = (&svc, &p, &task);
                    let cost = cfg.cost.as_ref();
                    scope.spawn(move || worker_loop(svc.as_ref(), p, task, &format!("worker-{w}"), cost, deadline))
                })
                .collect();
            for h in handles {
                h.join().map_err(|_| anyhow::anyhow!("worker panicked"))??;
            }
            Ok(())
        })?;
    }
    let log = svc.history(&task)?.log;
    Ok(RunResult {
        problem: p.name.clone(),
        algo: cfg.algo,
        mode: cfg.mode,
        seed: cfg.seed,
        records: records_from_log(&p, &log, cutoff),
    })
}

/// Ended trials in completion order; with a `cutoff`, only those that ended
/// before it.
fn records_from_log(p: &Problem, log: &[gbbo_service::storage::LogLine], cutoff: Option<f64>) -> Vec<TrialRecord> {
    let ended: Vec<_> = log
        .iter()
        .filter(|l| l.state != LogState::Running && cutoff.is_none_or(|c| l.ts <= c))
        .collect();
    let mut records: Vec<TrialRecord> = ended
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let failed = l.state == LogState::Failed;
            TrialRecord {
                trial: i + 1,
                trial_id: l.trial_id,
                config: l.config.clone(),
                objectives: l.objectives.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
                constraints: l.constraints.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
                failed,
                elapsed: l.elapsed_s,
                metric: None,
            }
        })
        .collect();
    let feasible = |r: &TrialRecord| !r.failed && r.constraints.iter().all(|c| *c <= 0.0);
    let metric: Vec<Option<f64>> = if p.num_objectives == 1 {
        let vals: Vec<(f64, bool)> = records
            .iter()
            .map(|r| (r.objectives.first().copied().unwrap_or(f64::NAN), feasible(r)))
            .collect();
        gap_series(&vals, p.f_star.unwrap_or(f64::NAN))
    } else {
        let r = p.ref_point.clone().expect("multi-objective problems carry a reference point");
        let ideal = p.ideal_hypervolume().expect("multi-objective problems carry an ideal front");
        let vals: Vec<(Vec<f64>, bool)> = records.iter().map(|t| (t.objectives.clone(), feasible(t))).collect();
        hv_difference_series(&vals, ideal, &r).into_iter().map(Some).collect()
    };
    for (rec, m) in records.iter_mut().zip(metric) {
        rec.metric = m;
    }
    records
}

/// Runs seeds `0..seeds`, writing one result file per seed and the
/// aggregate curve.
pub fn run_seeds(base: &RunConfig, seeds: u64, out: &Path) -> anyhow::Result<Vec<RunResult>> {
    let mut results = Vec::new();
    for seed in 0..seeds {
        let cfg = RunConfig { seed, ..base.clone() };
        let t0 = Instant::now();
        let r = run_experiment(&cfg)?;
        r.write(out)?;
        tracing::info!(
            problem = %r.problem, algo = %r.algo, seed, final_metric = ?r.final_metric(),
            secs = t0.elapsed().as_secs_f64(), "seed finished"
        );
        results.push(r);
    }
    let rows = aggregate(&results);
    let name = format!("{}_{}_{}.csv", base.problem, base.algo, base.mode);
    write_csv(&rows, File::create(out.join(name))?)?;
    Ok(results)
}

/// One row of the plot-ready curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub problem: String,
    pub algo: String,
    pub mode: String,
    pub trial: usize,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

/// Mean and sample standard deviation of the metric across runs, per
/// reported trial. Runs are grouped by problem, algorithm and mode.
pub fn aggregate(results: &[RunResult]) -> Vec<CurveRow> {
    let mut groups: BTreeMap<(String, Algo, Mode), Vec<Vec<Option<f64>>>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.problem.clone(), r.algo, r.mode))
            .or_default()
            .push(r.metric_series());
    }
    let mut rows = Vec::new();
    for ((problem, algo, mode), series) in groups {
        let len = series.iter().map(Vec::len).max().unwrap_or(0);
        for t in 0..len {
            let vals: Vec<f64> = series.iter().filter_map(|s| s.get(t).copied().flatten()).collect();
            if vals.is_empty() {
                continue;
            }
            let mean = gbbo_core::stats::mean(&vals).unwrap_or(f64::NAN);
            let std = if vals.len() > 1 {
                gbbo_core::stats::sample_variance(&vals).sqrt()
            } else {
                0.0
            };
            rows.push(CurveRow {
                problem: problem.clone(),
                algo: algo.to_string(),
                mode: mode.to_string(),
                trial: t + 1,
                mean,
                std,
                n_seeds: vals.len(),
            });
        }
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[CurveRow], w: W) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Surfaces the underlying I/O error so callers can inspect its kind.
fn csv_error(e: csv::Error) -> anyhow::Error {
    if !e.is_io_error() {
        return e.into();
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => anyhow::anyhow!("{other:?}"),
    }
}

/// Loads every `*.jsonl` result file in `dir`.
pub fn load_results(dir: &Path) -> anyhow::Result<Vec<RunResult>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunResult::read(p)).collect()
}

/// Streams a result file without holding it in memory; used by `report`
/// for large directories.
pub fn count_records(path: &Path) -> anyhow::Result<usize> {
    let f = BufReader::new(File::open(path)?);
    Ok(f.lines().filter(|l| l.as_ref().is_ok_and(|l| !l.trim().is_empty())).count())
}

pub fn write_json<W: Write>(rows: &[CurveRow], w: W) -> anyhow::Result<()> {
    let mut w = BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)?;
    Ok(())
}
