//! Acquisition functions, Pareto fronts and acquisition optimizers.
//!
//! All objectives and constraints are minimized; a constraint is satisfied
//! when `c(x) <= 0`. Every acquisition is a score to maximize.

mod ehvi;
mod optimizer;
mod pareto;

pub use ehvi::{ehvi, ehvi_2d, ehvi_mc, hvi_of_point, EhviEstimate, EhviMcEvaluator, MC_DRAWS};
pub use optimizer::{optimize_acq, optimize_acq_with, OptimizerConfig, OptimizerStrategy};
pub use pareto::{dominates, hypervolume, non_dominated, BoxDecomposition, FrontError, ParetoFront};

use crate::stats::{norm_cdf, norm_pdf};
use crate::surrogate::GaussianPrediction;

/// Default exploration weight for [`ucb`].
pub const UCB_BETA: f64 = 2.0;

/// Expected improvement below the incumbent `eta`.
pub fn ei(pred: &GaussianPrediction, eta: f64) -> f64 {
    let sigma = pred.std();
    let gap = eta - pred.mean;
    if sigma <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}

/// Probability of improving on `eta`.
pub fn pi(pred: &GaussianPrediction, eta: f64) -> f64 {
    let sigma = pred.std();
    if sigma <= 0.0 {
        return if pred.mean < eta { 1.0 } else { 0.0 };
    }
    norm_cdf((eta - pred.mean) / sigma)
}

/// Lower-confidence-bound score for minimization, `-μ + βσ`.
pub fn ucb(pred: &GaussianPrediction, beta: f64) -> f64 {
    -pred.mean + beta * pred.std()
}

/// Probability that every constraint `c_j(x) <= 0` holds, assuming
/// independent Gaussian predictions.
pub fn pof(constraints: &[GaussianPrediction]) -> f64 {
    constraints
        .iter()
        .map(|c| {
            let sigma = c.std();
            if sigma <= 0.0 {
                if c.mean <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                norm_cdf(-c.mean / sigma)
            }
        })
        .product()
}

/// Constrained acquisition: base score weighted by feasibility probability.
pub fn constrained_acq(base: f64, pof: f64) -> f64 {
    base * pof
}

/// Which acquisition a plan uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcquisitionKind {
    Ei,
    Ehvi,
    EhviMc,
    Random,
}

impl AcquisitionKind {
    pub fn tag(self) -> &'static str {
        match self {
            AcquisitionKind::Ei => "ei",
            AcquisitionKind::Ehvi => "ehvi",
            AcquisitionKind::EhviMc => "ehvi-mc",
            AcquisitionKind::Random => "random",
        }
    }
}
