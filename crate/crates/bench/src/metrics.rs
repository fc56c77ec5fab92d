//! Optimality gap and hypervolume difference.

use gbbo_core::acquisition::ParetoFront;

/// `|f(x̂) - f*|`.
pub fn optimality_gap(best_found: f64, f_star: f64) -> f64 {
    (best_found - f_star).abs()
}

/// Gap of the best feasible value after each trial; `None` until the
/// first feasible trial.
pub fn gap_series(values: &[(f64, bool)], f_star: f64) -> Vec<Option<f64>> {
    let mut best: Option<f64> = None;
    values
        .iter()
        .map(|&(y, feasible)| {
            if feasible && y.is_finite() {
                best = Some(best.map_or(y, |b| b.min(y)));
            }
            best.map(|b| optimality_gap(b, f_star))
        })
        .collect()
}

/// Hypervolume of the points' non-dominated subset below `r`.
pub fn front_hypervolume(points: &[Vec<f64>], r: &[f64]) -> f64 {
    ParetoFront::from_points(points.iter().cloned(), r.to_vec()).hypervolume()
}

/// `HV(P*, r) - HV(P, r)`, given `HV(P*, r)`.
pub fn hv_difference(front: &[Vec<f64>], ideal_hv: f64, r: &[f64]) -> f64 {
    ideal_hv - front_hypervolume(front, r)
}

/// Hypervolume difference after each trial, using feasible trials only.
pub fn hv_difference_series(values: &[(Vec<f64>, bool)], ideal_hv: f64, r: &[f64]) -> Vec<f64> {
    let mut front = ParetoFront::new(r.to_vec());
    values
        .iter()
        .map(|(y, feasible)| {
            if *feasible {
                // Dominated or out-of-box points leave the front unchanged.
                let _ = front.insert(y.clone());
            }
            ideal_hv - front.hypervolume()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{zdt2_front, ZDT2_REF};
    use gbbo_core::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn gap_examples() {
        assert_eq!(optimality_gap(1.0, 1.0), 0.0);
        assert_eq!(optimality_gap(1.5, 1.0), 0.5);
        let s = gap_series(&[(3.0, false), (2.0, true), (5.0, true), (1.5, true)], 1.0);
        assert_eq!(s, vec![None, Some(1.0), Some(1.0), Some(0.5)]);
    }

    #[test]
    fn empty_front_leaves_the_whole_ideal_volume() {
        assert_eq!(hv_difference(&[], 7.5, &[1.0, 1.0]), 7.5);
        let s = hv_difference_series(&[(vec![5.0, 5.0], true)], 2.0, &[1.0, 1.0]);
        assert_eq!(s, vec![2.0]);
    }

    #[test]
    fn self_difference_is_within_sampling_error() {
        // The staircase misses at most Σ Δf1 · Δf2 ≤ 1e-4 of the region.
        let r = ZDT2_REF;
        let fine = front_hypervolume(&zdt2_front(10_000), &r);
        // Above the front for f1 ≤ 1, plus the full-height strip f1 ∈ [1, 1.1].
        let exact = 10.0 + 1.0 / 3.0 + 0.1 * 11.0;
        assert!((exact - fine).abs() < 2e-4, "{exact} vs {fine}");
        let sample: Vec<Vec<f64>> = zdt2_front(10_000).into_iter().step_by(7).collect();
        let d = hv_difference(&sample, fine, &r);
        assert!((0.0..2e-3).contains(&d), "{d}");
    }

    #[test]
    fn zdt2_front_volume_matches_hit_counting() {
        // r = (11, 11): every point of [0, 11]² with f2 ≥ 1 - f1² (f1 ≤ 1)
        // or f1 > 1 is dominated.
        let r = [11.0, 11.0];
        let hv = front_hypervolume(&zdt2_front(10_000), &r);
        let mut rng = rng_from_seed(20);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let a: f64 = rng.random::<f64>() * 11.0;
                let b: f64 = rng.random::<f64>() * 11.0;
                a >= 1.0 || b >= 1.0 - a * a
            })
            .count();
        let p = hits as f64 / n as f64;
        let mc = 121.0 * p;
        let se = 121.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((hv - mc).abs() <= 3.0 * se, "hv {hv}, mc {mc} ± {se}");
        // Closed form: 121 - ∫₀¹ (1 - x²) dx.
        assert!((hv - (121.0 - 2.0 / 3.0)).abs() < 2e-3);
    }
}
