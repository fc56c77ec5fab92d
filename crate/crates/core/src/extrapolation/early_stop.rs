//! Median and mean termination rules for running trials.

use crate::stats::{mean, median};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EarlyStopRule {
    #[default]
    Median,
    Mean,
}

impl EarlyStopRule {
    pub fn tag(self) -> &'static str {
        match self {
            EarlyStopRule::Median => "median",
            EarlyStopRule::Mean => "mean",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EarlyStopConfig {
    pub rule: EarlyStopRule,
    /// Completed trials required before the rule may fire.
    pub min_history: usize,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        Self {
            rule: EarlyStopRule::Median,
            min_history: 5,
        }
    }
}

/// True when the running trial's best intermediate value is strictly worse
/// than the median (or mean) of the completed trials' results.
pub fn should_stop_early(
    trial_best_so_far: f64,
    completed_results: &[f64],
    rule: EarlyStopRule,
    min_history: usize,
) -> bool {
    let finite: Vec<f64> = completed_results.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < min_history.max(1) {
        return false;
    }
    let center = match rule {
        EarlyStopRule::Median => median(&finite),
        EarlyStopRule::Mean => mean(&finite),
    };
    center.is_some_and(|c| trial_best_so_far > c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!(should_stop_early(5.0, &[1.0, 2.0, 3.0], EarlyStopRule::Median, 3));
        assert!(!should_stop_early(1.5, &[1.0, 2.0, 3.0], EarlyStopRule::Median, 3));
        assert!(!should_stop_early(100.0, &[1.0, 2.0], EarlyStopRule::Median, 5));
        // Mean of {1, 2, 9} is 4; median is 2.
        assert!(!should_stop_early(3.0, &[1.0, 2.0, 9.0], EarlyStopRule::Mean, 3));
        assert!(should_stop_early(3.0, &[1.0, 2.0, 9.0], EarlyStopRule::Median, 3));
    }

    proptest! {
        #[test]
        fn never_fires_during_warm_up(
            best in -1e6f64..1e6,
            done in proptest::collection::vec(-1e6f64..1e6, 0..10),
            extra in 1usize..5,
        ) {
            let min_history = done.len() + extra;
            prop_assert!(!should_stop_early(best, &done, EarlyStopRule::Median, min_history));
            prop_assert!(!should_stop_early(best, &done, EarlyStopRule::Mean, min_history));
        }
    }
}
