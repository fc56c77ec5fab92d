//! Pareto fronts, hypervolume and a disjoint box decomposition of the
//! dominated region.

/// `a` dominates `b` under minimization: no worse everywhere, better
/// somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated points; of several equal points only the
/// first is kept.
pub fn non_dominated(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, q)| {
                dominates(q, &points[i]) || (j < i && q.as_slice() == points[i].as_slice())
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontError {
    #[error("point is dominated by (or equal to) a front member")]
    Dominated,
    #[error("point does not strictly dominate the reference point")]
    NotBelowReference,
    #[error("point has dimension {got}, front has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate")]
    NonFinite,
}

/// Mutually non-dominated points, each strictly below the reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoFront {
    points: Vec<Vec<f64>>,
    reference: Vec<f64>,
}

impl ParetoFront {
    pub fn new(reference: Vec<f64>) -> Self {
        Self {
            points: Vec::new(),
            reference,
        }
    }

    /// Strict constructor: every point must satisfy the invariants.
    pub fn try_new(points: Vec<Vec<f64>>, reference: Vec<f64>) -> Result<Self, FrontError> {
        let mut f = Self::new(reference);
        for p in points {
            f.insert(p)?;
        }
        Ok(f)
    }

    /// Keeps the non-dominated subset of the points strictly below the
    /// reference point.
    pub fn from_points<I: IntoIterator<Item = Vec<f64>>>(points: I, reference: Vec<f64>) -> Self {
        let below: Vec<Vec<f64>> = points
            .into_iter()
            .filter(|p| {
                p.len() == reference.len()
                    && p.iter().all(|v| v.is_finite())
                    && p.iter().zip(&reference).all(|(a, r)| a < r)
            })
            .collect();
        let keep = non_dominated(&below);
        Self {
            points: keep.into_iter().map(|i| below[i].clone()).collect(),
            reference,
        }
    }

    /// Inserts a new non-dominated point, dropping members it dominates.
    pub fn insert(&mut self, p: Vec<f64>) -> Result<(), FrontError> {
        if p.len() != self.reference.len() {
            return Err(FrontError::DimensionMismatch {
                expected: self.reference.len(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(FrontError::NonFinite);
        }
        if !p.iter().zip(&self.reference).all(|(a, r)| a < r) {
            return Err(FrontError::NotBelowReference);
        }
        if self
            .points
            .iter()
            .any(|q| dominates(q, &p) || q.as_slice() == p.as_slice())
        {
            return Err(FrontError::Dominated);
        }
        self.points.retain(|q| !dominates(&p, q));
        self.points.push(p);
        Ok(())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.reference.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn hypervolume(&self) -> f64 {
        hypervolume(self)
    }

    pub fn boxes(&self) -> BoxDecomposition {
        BoxDecomposition::new(&self.points, &self.reference)
    }
}

/// Lebesgue measure of the region dominated by the front and bounded by
/// its reference point.
pub fn hypervolume(front: &ParetoFront) -> f64 {
    let pts: Vec<&[f64]> = front.points.iter().map(Vec::as_slice).collect();
    union_volume(pts, &front.reference)
}

/// Volume of `∪ [p, r]` over points strictly below `r`; dominance among
/// the points is not required.
pub(crate) fn union_volume(mut pts: Vec<&[f64]>, r: &[f64]) -> f64 {
    pts.retain(|p| p.iter().zip(r).all(|(a, b)| a < b));
    if pts.is_empty() {
        return 0.0;
    }
    volume_rec(pts, r, r.len())
}

/// Recursive slicing along the last of the first `dim` coordinates.
fn volume_rec(mut pts: Vec<&[f64]>, r: &[f64], dim: usize) -> f64 {
    match dim {
        1 => {
            let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            r[0] - lo
        }
        2 => {
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut area = 0.0;
            let mut min_y = r[1];
            for (i, p) in pts.iter().enumerate() {
                min_y = min_y.min(p[1]);
                let next = pts.get(i + 1).map_or(r[0], |q| q[0]);
                area += (next - p[0]) * (r[1] - min_y);
            }
            area
        }
        _ => {
            let last = dim - 1;
            pts.sort_by(|a, b| a[last].total_cmp(&b[last]));
            let mut vol = 0.0;
            let mut active: Vec<&[f64]> = Vec::new();
            for i in 0..pts.len() {
                let p = pts[i];
                // Keep the active slice non-dominated in the lower dims.
                if !active.iter().any(|q| weakly_dominates(q, p, last)) {
                    active.retain(|q| !weakly_dominates(p, q, last));
                    active.push(p);
                }
                let next = pts.get(i + 1).map_or(r[last], |q| q[last]);
                let h = next - p[last];
                if h > 0.0 {
                    vol += h * volume_rec(active.clone(), r, last);
                }
            }
            vol
        }
    }
}

fn weakly_dominates(a: &[f64], b: &[f64], dims: usize) -> bool {
    (0..dims).all(|d| a[d] <= b[d])
}

/// Disjoint axis-aligned boxes whose union is the dominated region.
#[derive(Clone, Debug)]
pub struct BoxDecomposition {
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
    reference: Vec<f64>,
}

impl BoxDecomposition {
    pub fn new(points: &[Vec<f64>], reference: &[f64]) -> Self {
        let pts: Vec<&[f64]> = points
            .iter()
            .map(Vec::as_slice)
            .filter(|p| p.iter().zip(reference).all(|(a, b)| a < b))
            .collect();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        if !pts.is_empty() {
            let mut lo = vec![0.0; reference.len()];
            let mut hi = vec![0.0; reference.len()];
            boxes_rec(pts, reference, reference.len(), &mut lo, &mut hi, &mut lower, &mut upper);
        }
        Self {
            lower,
            upper,
            reference: reference.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// Total dominated volume.
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.iter().zip(u).map(|(a, b)| b - a).product::<f64>())
            .sum()
    }

    /// Hypervolume improvement of adding `y`:
    /// `vol([y, r]) - Σ vol(box ∩ [y, r])`.
    pub fn improvement(&self, y: &[f64]) -> f64 {
        let own: f64 = y
            .iter()
            .zip(&self.reference)
            .map(|(a, r)| (r - a).max(0.0))
            .product();
        if own <= 0.0 {
            return 0.0;
        }
        let mut covered = 0.0;
        'boxes: for (l, u) in self.lower.iter().zip(&self.upper) {
            let mut v = 1.0;
            for d in 0..y.len() {
                let w = u[d] - l[d].max(y[d]);
                if w <= 0.0 {
                    continue 'boxes;
                }
                v *= w;
            }
            covered += v;
        }
        (own - covered).max(0.0)
    }
}

fn boxes_rec(
    mut pts: Vec<&[f64]>,
    r: &[f64],
    dim: usize,
    lo: &mut Vec<f64>,
    hi: &mut Vec<f64>,
    lower: &mut Vec<Vec<f64>>,
    upper: &mut Vec<Vec<f64>>,
) {
    if dim == 1 {
        lo[0] = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        hi[0] = r[0];
        lower.push(lo.clone());
        upper.push(hi.clone());
        return;
    }
    let last = dim - 1;
    pts.sort_by(|a, b| a[last].total_cmp(&b[last]));
    let mut active: Vec<&[f64]> = Vec::new();
    for i in 0..pts.len() {
        let p = pts[i];
        if !active.iter().any(|q| weakly_dominates(q, p, last)) {
            active.retain(|q| !weakly_dominates(p, q, last));
            active.push(p);
        }
        let next = pts.get(i + 1).map_or(r[last], |q| q[last]);
        if next > p[last] {
            lo[last] = p[last];
            hi[last] = next;
            boxes_rec(active.clone(), r, last, lo, hi, lower, upper);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    #[test]
    fn two_d_examples() {
        let f = ParetoFront::try_new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![3.0, 3.0]).unwrap();
        assert_eq!(f.hypervolume(), 3.0);
        let f = ParetoFront::try_new(vec![vec![1.0, 1.0]], vec![3.0, 3.0]).unwrap();
        assert_eq!(f.hypervolume(), 4.0);
        assert_eq!(ParetoFront::new(vec![3.0, 3.0]).hypervolume(), 0.0);
    }

    #[test]
    fn two_d_rectangle_union_oracle() {
        // Inclusion-exclusion for two boxes [p, r] and [q, r].
        let (p, q, r): ([f64; 2], [f64; 2], [f64; 2]) = ([0.5, 2.2], [1.7, 0.4], [3.0, 2.5]);
        let area = |a: [f64; 2]| (r[0] - a[0]) * (r[1] - a[1]);
        let inter = [p[0].max(q[0]), p[1].max(q[1])];
        let f = ParetoFront::try_new(vec![p.to_vec(), q.to_vec()], r.to_vec()).unwrap();
        assert!((area(p) + area(q) - area(inter) - f.hypervolume()).abs() < 1e-12);
    }

    #[test]
    fn rejects_dominated_and_outside_points() {
        let mut f = ParetoFront::try_new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![3.0, 3.0]).unwrap();
        assert_eq!(f.insert(vec![2.0, 2.5]), Err(FrontError::Dominated));
        assert_eq!(f.insert(vec![1.0, 2.0]), Err(FrontError::Dominated));
        assert_eq!(f.insert(vec![0.5, 3.0]), Err(FrontError::NotBelowReference));
        let hv = f.hypervolume();
        // Force-insert then re-filter: unchanged.
        let mut raw = f.points().to_vec();
        raw.push(vec![2.0, 2.5]);
        assert_eq!(ParetoFront::from_points(raw, vec![3.0, 3.0]).hypervolume(), hv);
        f.insert(vec![0.5, 0.5]).unwrap();
        assert_eq!(f.len(), 1);
    }

    fn random_front(rng: &mut crate::rng::Rng, p: usize, n: usize) -> ParetoFront {
        // Points near the simplex give mostly non-dominated sets.
        let pts = (0..n).map(|_| {
            let raw: Vec<f64> = (0..p).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s + 0.1 * rng.random::<f64>()).collect()
        });
        ParetoFront::from_points(pts, vec![1.2; p])
    }

    /// Hit counting with stratified uniforms against the exact volume.
    #[test]
    fn hypervolume_matches_monte_carlo() {
        let mut rng = rng_from_seed(77);
        for p in 2..=4 {
            for _ in 0..5 {
                let f = random_front(&mut rng, p, 12);
                let exact = f.hypervolume();
                let n = 200_000;
                let mut hits = 0usize;
                for i in 0..n {
                    let u: Vec<f64> = (0..p)
                        .map(|d| {
                            let strat = if d == 0 { (i as f64 + rng.random::<f64>()) / n as f64 } else { rng.random() };
                            strat * 1.2
                        })
                        .collect();
                    if f.points().iter().any(|q| q.iter().zip(&u).all(|(a, b)| a <= b)) {
                        hits += 1;
                    }
                }
                let vol = 1.2f64.powi(p as i32);
                let frac = hits as f64 / n as f64;
                let est = frac * vol;
                let se = (frac * (1.0 - frac) / n as f64).sqrt() * vol;
                assert!((est - exact).abs() <= 3.0 * se, "p={p}: {est} vs {exact} ± {se}");
                // The box decomposition covers the same volume.
                assert!((f.boxes().volume() - exact).abs() <= 1e-12 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn box_improvement_matches_hypervolume_difference() {
        let mut rng = rng_from_seed(3);
        for p in 2..=4 {
            let f = random_front(&mut rng, p, 10);
            let boxes = f.boxes();
            for _ in 0..50 {
                let y: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 1.3).collect();
                let mut pts = f.points().to_vec();
                pts.push(y.clone());
                let after = ParetoFront::from_points(pts, f.reference().to_vec()).hypervolume();
                let diff = after - f.hypervolume();
                assert!((boxes.improvement(&y) - diff).abs() <= 1e-10, "p={p}");
            }
        }
    }
}
