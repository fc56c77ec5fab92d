//! Matérn-5/2 ARD kernel on continuous features times an exponentiated
//! Hamming kernel on categorical features.
//!
//! `k(x, x') = s² · m(r) · exp(-Σ_d λ_d · 1[x_d ≠ x'_d])` where
//! `r² = Σ_d ((x_d - x'_d) / ℓ_d)²` over continuous coordinates and
//! `m(r) = (1 + √5 r + 5r²/3) · exp(-√5 r)`.

use crate::space::FeatureKind;

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    pub signal_var: f64,
    /// One per continuous coordinate.
    pub lengthscales: Vec<f64>,
    /// One per categorical coordinate.
    pub cat_weights: Vec<f64>,
    /// Diagonal noise in standardized target units.
    pub noise: f64,
}

impl KernelParams {
    pub fn unit(kernel: &Kernel) -> Self {
        Self {
            signal_var: 1.0,
            lengthscales: vec![1.0; kernel.cont.len()],
            cat_weights: vec![1.0; kernel.cat.len()],
            noise: 1e-8,
        }
    }

    /// Log-space vector `[log s², log ℓ.., log λ.., log noise]`.
    pub fn to_log(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + self.lengthscales.len() + self.cat_weights.len());
        v.push(self.signal_var.ln());
        v.extend(self.lengthscales.iter().map(|l| l.ln()));
        v.extend(self.cat_weights.iter().map(|l| l.ln()));
        v.push(self.noise.ln());
        v
    }

    pub fn from_log(kernel: &Kernel, theta: &[f64]) -> Self {
        let c = kernel.cont.len();
        let k = kernel.cat.len();
        Self {
            signal_var: theta[0].exp(),
            lengthscales: theta[1..1 + c].iter().map(|t| t.exp()).collect(),
            cat_weights: theta[1 + c..1 + c + k].iter().map(|t| t.exp()).collect(),
            noise: theta[1 + c + k].exp(),
        }
    }
}

/// Which coordinates are continuous and which categorical.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub(crate) dim: usize,
    pub(crate) cont: Vec<usize>,
    pub(crate) cat: Vec<usize>,
}

/// Matérn-5/2 shape as a function of scaled distance.
#[inline]
pub fn matern52(r: f64) -> f64 {
    let s = SQRT5 * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

impl Kernel {
    pub fn new(kinds: &[FeatureKind]) -> Self {
        let mut cont = Vec::new();
        let mut cat = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            match k {
                FeatureKind::Continuous => cont.push(i),
                FeatureKind::Categorical(_) => cat.push(i),
            }
        }
        Self {
            dim: kinds.len(),
            cont,
            cat,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        2 + self.cont.len() + self.cat.len()
    }

    /// Kernel value without the noise term.
    pub fn eval(&self, p: &KernelParams, a: &[f64], b: &[f64]) -> f64 {
        let mut r2 = 0.0;
        for (j, &d) in self.cont.iter().enumerate() {
            let t = (a[d] - b[d]) / p.lengthscales[j];
            r2 += t * t;
        }
        let mut h = 0.0;
        for (j, &d) in self.cat.iter().enumerate() {
            if a[d] != b[d] {
                h += p.cat_weights[j];
            }
        }
        p.signal_var * matern52(r2.sqrt()) * (-h).exp()
    }
}

/// Pairwise quantities cached for repeated evaluation of the training
/// kernel matrix and its hyperparameter gradient.
pub(crate) struct PairCache {
    n: usize,
    /// Per pair `i < j` (row-major upper triangle): squared continuous
    /// differences followed by categorical mismatch flags.
    data: Vec<f64>,
    stride: usize,
    n_cont: usize,
}

impl PairCache {
    pub(crate) fn new(kernel: &Kernel, x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let n_cont = kernel.cont.len();
        let stride = n_cont + kernel.cat.len();
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2 * stride);
        for i in 0..n {
            for j in i + 1..n {
                for &d in &kernel.cont {
                    let t = x[i][d] - x[j][d];
                    data.push(t * t);
                }
                for &d in &kernel.cat {
                    data.push(if x[i][d] != x[j][d] { 1.0 } else { 0.0 });
                }
            }
        }
        Self {
            n,
            data,
            stride,
            n_cont,
        }
    }

    /// Dense kernel matrix including noise on the diagonal, column-major.
    pub(crate) fn matrix(&self, p: &KernelParams) -> Vec<f64> {
        let n = self.n;
        let mut k = vec![0.0; n * n];
        let inv_l2: Vec<f64> = p.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        let mut at = 0;
        for i in 0..n {
            k[i * n + i] = p.signal_var + p.noise;
            for j in i + 1..n {
                let row = &self.data[at..at + self.stride];
                at += self.stride;
                let (v, _) = pair_value(p, &inv_l2, row, self.n_cont);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }

    /// Gradient of `½ Σ_ij W_ij K_ij` with respect to the log parameters,
    /// for symmetric `W` (column-major).
    pub(crate) fn grad_contraction(&self, p: &KernelParams, w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let nc = self.n_cont;
        let nk = self.stride - nc;
        let mut g = vec![0.0; 2 + self.stride];
        let inv_l2: Vec<f64> = p.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        // Diagonal: K_ii = s² + noise.
        let trace_w: f64 = (0..n).map(|i| w[i * n + i]).sum();
        g[0] += 0.5 * trace_w * p.signal_var;
        g[1 + self.stride] += 0.5 * trace_w * p.noise;
        let mut at = 0;
        for i in 0..n {
            for j in i + 1..n {
                let row = &self.data[at..at + self.stride];
                at += self.stride;
                // Off-diagonal pairs appear twice in the symmetric sum.
                let wij = w[i * n + j];
                let (v, shape) = pair_value(p, &inv_l2, row, nc);
                g[0] += wij * v;
                for d in 0..nc {
                    g[1 + d] += wij * shape * row[d] * inv_l2[d];
                }
                for d in 0..nk {
                    if row[nc + d] != 0.0 {
                        g[1 + nc + d] -= wij * v * p.cat_weights[d];
                    }
                }
            }
        }
        g
    }
}

/// Returns the kernel value for a cached pair and the common factor of its
/// length-scale derivatives, `s² · H · (5/3)(1 + √5 r) e^{-√5 r}`.
#[inline]
fn pair_value(p: &KernelParams, inv_l2: &[f64], row: &[f64], n_cont: usize) -> (f64, f64) {
    let mut r2 = 0.0;
    for d in 0..n_cont {
        r2 += row[d] * inv_l2[d];
    }
    let mut h = 0.0;
    for (d, w) in p.cat_weights.iter().enumerate() {
        h += row[n_cont + d] * w;
    }
    let s = SQRT5 * r2.sqrt();
    let e = (-s).exp();
    let hs = p.signal_var * (-h).exp();
    let v = hs * (1.0 + s + s * s / 3.0) * e;
    let shape = hs * (5.0 / 3.0) * (1.0 + s) * e;
    (v, shape)
}
