//! Benchmark problems, metrics and the experiment runner.

pub mod metrics;
pub mod problems;
pub mod runner;

pub use problems::{problem, Problem, NAMES};
pub use runner::{run_experiment, run_seeds, Algo, Mode, RunConfig, RunResult};
