//! Probabilistic regression surrogates.
//!
//! Both models consume the per-parameter feature encoding produced by
//! [`SearchSpace::to_features`](crate::space::SearchSpace::to_features):
//! continuous coordinates in `[0, 1]` and raw choice indices for categorical
//! parameters.

mod gp;
pub mod kernel;
mod prf;

pub use gp::{fit_gp, fit_gp_with, GpConfig, GpModel};
pub use kernel::{Kernel, KernelParams};
pub use prf::{fit_prf, PrfModel, PrfParams};

use crate::space::FeatureKind;

/// Gaussian predictive distribution at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPrediction {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianPrediction {
    pub fn new(mean: f64, variance: f64) -> Self {
        Self {
            mean,
            variance: variance.max(0.0),
        }
    }

    pub fn std(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurrogateKind {
    Gp,
    Prf,
}

impl SurrogateKind {
    pub fn tag(self) -> &'static str {
        match self {
            SurrogateKind::Gp => "gp",
            SurrogateKind::Prf => "prf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("need at least {needed} training points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("non-finite training data")]
    NonFinite,
    #[error("input has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("kernel matrix is not positive definite")]
    NotPositiveDefinite,
}

pub(crate) fn check_training_data(
    x: &[Vec<f64>],
    y: &[f64],
    dim: usize,
    min_points: usize,
) -> Result<(), SurrogateError> {
    if x.len() != y.len() || x.len() < min_points {
        return Err(SurrogateError::TooFewPoints {
            needed: min_points,
            got: x.len().min(y.len()),
        });
    }
    for row in x {
        if row.len() != dim {
            return Err(SurrogateError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SurrogateError::NonFinite);
    }
    Ok(())
}

/// A fitted surrogate of either kind.
#[derive(Clone, Debug)]
pub enum Surrogate {
    Gp(GpModel),
    Prf(PrfModel),
}

impl Surrogate {
    pub fn fit(
        kind: SurrogateKind,
        kinds: &[FeatureKind],
        x: &[Vec<f64>],
        y: &[f64],
        seed: u64,
    ) -> Result<Self, SurrogateError> {
        match kind {
            SurrogateKind::Gp => fit_gp(kinds, x, y, seed).map(Surrogate::Gp),
            SurrogateKind::Prf => {
                fit_prf(kinds, x, y, &PrfParams::default(), seed).map(Surrogate::Prf)
            }
        }
    }

    pub fn kind(&self) -> SurrogateKind {
        match self {
            Surrogate::Gp(_) => SurrogateKind::Gp,
            Surrogate::Prf(_) => SurrogateKind::Prf,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Surrogate::Gp(m) => m.dim(),
            Surrogate::Prf(m) => m.dim(),
        }
    }

    /// Panics if `x` has the wrong dimension; see [`Surrogate::try_predict`].
    pub fn predict(&self, x: &[f64]) -> GaussianPrediction {
        match self {
            Surrogate::Gp(m) => m.predict(x),
            Surrogate::Prf(m) => m.predict(x),
        }
    }

    pub fn try_predict(&self, x: &[f64]) -> Result<GaussianPrediction, SurrogateError> {
        if x.len() != self.dim() {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.predict(x))
    }

    /// Leave-one-out predictive distributions at the training points.
    ///
    /// Closed form for the GP (fixed hyperparameters); the forest is refit
    /// without each point in turn.
    pub fn loo_predictions(&self) -> Vec<GaussianPrediction> {
        match self {
            Surrogate::Gp(m) => m.loo_predictions(),
            Surrogate::Prf(m) => m.loo_predictions(),
        }
    }

    /// Target standardization `(mean, std)` used by the model.
    pub fn target_scale(&self) -> (f64, f64) {
        match self {
            Surrogate::Gp(m) => m.target_scale(),
            Surrogate::Prf(m) => m.target_scale(),
        }
    }
}
