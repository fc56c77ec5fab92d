#![allow(dead_code)]

use std::sync::Arc;

use gbbo_core::Configuration;
use gbbo_service::{ManualClock, Service, ServiceConfig};

pub const EXAMPLE_TDL: &str = r#"task_config = {
  "parameter": {
    "x1": { "type": "float", "default": 0,
      "bound": [-5, 10]},
    "x2": {"type": "int", "bound": [0, 15]},
    "x3": {"type": "cat", "default": "a1",
      "choice": ["a1", "a2", "a3"]},
    "x4": {"type": "ord", "default": 1,
      "choice": [1, 2, 3]}},
  "condition": {
      "cdn1": {"type": "equal", "parent": "x3",
        "child": "x1", "value": "a3"}},
  "number_of_trials": 200,
  "time_budget": 10800,
  "task_type": "soc",
  "parallel_strategy": "async",
  "worker_num": 10,
  "use_history": True
  }"#;

/// A two-dimensional task over `[0, 1]²`.
pub fn quad_tdl(trials: usize, strategy: &str, workers: usize, seed: u64) -> String {
    format!(
        r#"{{"parameter": {{"a": {{"type": "float", "bound": [0, 1]}},
                          "b": {{"type": "float", "bound": [0, 1]}}}},
            "number_of_trials": {trials}, "parallel_strategy": "{strategy}",
            "worker_num": {workers}, "random_seed": {seed}}}"#
    )
}

pub fn quad(c: &Configuration) -> f64 {
    let a = c.get("a").unwrap().as_f64().unwrap();
    let b = c.get("b").unwrap().as_f64().unwrap();
    (a - 0.3).powi(2) + (b - 0.7).powi(2)
}

pub fn manual(dir: &std::path::Path, servers: usize) -> (Service, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(1_000.0));
    let svc = Service::open(dir, servers, clock.clone(), ServiceConfig::default()).unwrap();
    (svc, clock)
}
