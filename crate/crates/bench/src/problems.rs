//! Benchmark problem registry.
//!
//! All problems minimize; constraints are feasible when `c(x) <= 0`.
//! Definitions follow the usual test-suite formulations:
//!
//! | name | dim | domain | notes |
//! |---|---|---|---|
//! | `branin` | 2 | `x1 ∈ [-5, 10]`, `x2 ∈ [0, 15]` | `f* = 0.397887` |
//! | `beale` | 2 | `[-4.5, 4.5]²` | `f* = 0` at `(3, 0.5)` |
//! | `ackley-d` | d ∈ {2,4,8,16,32} | `[-5, 10]^d` | `a = 20, b = 0.2, c = 2π`; `f* = 0` at the origin |
//! | `hartmann6` | 6 | `[0, 1]⁶` | `f* = -3.32237` |
//! | `townsend` | 2 | `x ∈ [-2.25, 2.5]`, `y ∈ [-2.5, 1.75]` | modified Townsend, one constraint, `f* = -2.0239884` |
//! | `mishra` | 2 | `x ∈ [-10, 0]`, `y ∈ [-6.5, 0]` | Mishra's bird, `(x+5)² + (y+5)² < 25`, `f* = -106.7645367` |
//! | `ackley-4c` | 4 | `[-5, 10]⁴` | Ackley with `Σx ≤ 0` and `‖x‖ ≤ 5`; `f* = 0` |
//! | `keane-10` | 10 | `[0, 10]¹⁰` | Keane's bump, `0.75 - Πx < 0`, `Σx - 75 < 0`; best known `-0.747310` |
//! | `zdt2` | 3 | `[0, 1]³` | 2 objectives, front `f2 = 1 - f1²` |
//! | `dtlz1` | 6 | `[0, 1]⁶` | 5 objectives, front `Σ f = 0.5` |
//! | `constr` | 2 | `x1 ∈ [0.1, 1]`, `x2 ∈ [0, 5]` | 2 objectives, 2 constraints |
//! | `srn` | 2 | `[-20, 20]²` | 2 objectives, 2 constraints |
//!
//! Reference points for hypervolume are the componentwise worst objective
//! value over a dense feasible sample plus 10% of the sampled range,
//! rounded outward; `tests` recompute them.

use std::f64::consts::PI;

use gbbo_core::{Configuration, Parameter, SearchSpace};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem '{0}'")]
    Unknown(String),
    #[error("parameter '{0}' missing or not numeric")]
    BadConfig(String),
}

type EvalFn = fn(&[f64]) -> (Vec<f64>, Vec<f64>);

/// Describes the ideal Pareto front for hypervolume differences.
#[derive(Clone, Copy, Debug)]
pub enum IdealFront {
    /// Sampled front with `n` points.
    Sampled(fn(usize) -> Vec<Vec<f64>>),
    /// Closed-form hypervolume of the ideal front given the reference point.
    Exact(fn(&[f64]) -> f64),
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub bounds: Vec<(f64, f64)>,
    pub num_objectives: usize,
    pub num_constraints: usize,
    eval: EvalFn,
    /// Known (or best known) optimum for single-objective problems.
    pub f_star: Option<f64>,
    /// A point attaining `f_star`, when known in closed form.
    pub x_star: Option<Vec<f64>>,
    pub ref_point: Option<Vec<f64>>,
    pub ideal_front: Option<IdealFront>,
    pub default_trials: usize,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn space(&self) -> SearchSpace {
        let params = self
            .bounds
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| Parameter::float(&format!("x{}", i + 1), lo, hi))
            .collect();
        SearchSpace::new(params, vec![]).expect("registry spaces are valid")
    }

    pub fn eval_vec(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.eval)(x)
    }

    pub fn to_vec(&self, config: &Configuration) -> Result<Vec<f64>, ProblemError> {
        (1..=self.dim())
            .map(|i| {
                let name = format!("x{i}");
                config
                    .get(&name)
                    .and_then(|v| v.as_f64())
                    .ok_or(ProblemError::BadConfig(name))
            })
            .collect()
    }

    /// Objectives and constraints at `config`.
    pub fn evaluate(&self, config: &Configuration) -> Result<(Vec<f64>, Vec<f64>), ProblemError> {
        Ok(self.eval_vec(&self.to_vec(config)?))
    }

    /// Hypervolume of the ideal front w.r.t. the problem's reference point.
    pub fn ideal_hypervolume(&self) -> Option<f64> {
        let r = self.ref_point.as_ref()?;
        match self.ideal_front? {
            IdealFront::Exact(f) => Some(f(r)),
            IdealFront::Sampled(f) => Some(crate::metrics::front_hypervolume(&f(10_000), r)),
        }
    }
}

pub const NAMES: &[&str] = &[
    "branin", "beale", "ackley-2", "ackley-4", "ackley-8", "ackley-16", "ackley-32", "hartmann6", "townsend",
    "mishra", "ackley-4c", "keane-10", "zdt2", "dtlz1", "constr", "srn",
];

fn so(name: &str, bounds: Vec<(f64, f64)>, eval: EvalFn, f_star: f64, x_star: Option<Vec<f64>>, trials: usize) -> Problem {
    Problem {
        name: name.to_owned(),
        bounds,
        num_objectives: 1,
        num_constraints: 0,
        eval,
        f_star: Some(f_star),
        x_star,
        ref_point: None,
        ideal_front: None,
        default_trials: trials,
    }
}

pub fn problem(name: &str) -> Result<Problem, ProblemError> {
    let p = match name {
        "branin" => so("branin", vec![(-5.0, 10.0), (0.0, 15.0)], branin, BRANIN_MIN, Some(vec![PI, 2.275]), 200),
        "beale" => so("beale", vec![(-4.5, 4.5); 2], beale, 0.0, Some(vec![3.0, 0.5]), 200),
        "hartmann6" => so("hartmann6", vec![(0.0, 1.0); 6], hartmann6, HARTMANN6_MIN, Some(HARTMANN6_XSTAR.to_vec()), 200),
        "townsend" => Problem {
            num_constraints: 1,
            ..so("townsend", vec![(-2.25, 2.5), (-2.5, 1.75)], townsend, TOWNSEND_MIN, Some(TOWNSEND_XSTAR.to_vec()), 100)
        },
        "mishra" => Problem {
            num_constraints: 1,
            ..so("mishra", vec![(-10.0, 0.0), (-6.5, 0.0)], mishra, MISHRA_MIN, Some(MISHRA_XSTAR.to_vec()), 100)
        },
        "ackley-4c" => Problem {
            num_constraints: 2,
            ..so("ackley-4c", vec![(-5.0, 10.0); 4], ackley_constrained, 0.0, Some(vec![0.0; 4]), 200)
        },
        "keane-10" => Problem {
            num_constraints: 2,
            ..so("keane-10", vec![(0.0, 10.0); 10], keane, KEANE10_BEST, None, 300)
        },
        "zdt2" => Problem {
            name: "zdt2".into(),
            bounds: vec![(0.0, 1.0); 3],
            num_objectives: 2,
            num_constraints: 0,
            eval: zdt2,
            f_star: None,
            x_star: None,
            ref_point: Some(ZDT2_REF.to_vec()),
            ideal_front: Some(IdealFront::Sampled(zdt2_front)),
            default_trials: 80,
        },
        "dtlz1" => Problem {
            name: "dtlz1".into(),
            bounds: vec![(0.0, 1.0); 6],
            num_objectives: 5,
            num_constraints: 0,
            eval: dtlz1,
            f_star: None,
            x_star: None,
            ref_point: Some(vec![DTLZ1_REF; 5]),
            ideal_front: Some(IdealFront::Exact(dtlz1_ideal_hv)),
            default_trials: 100,
        },
        "constr" => Problem {
            name: "constr".into(),
            bounds: vec![(0.1, 1.0), (0.0, 5.0)],
            num_objectives: 2,
            num_constraints: 2,
            eval: constr,
            f_star: None,
            x_star: None,
            ref_point: Some(CONSTR_REF.to_vec()),
            ideal_front: Some(IdealFront::Sampled(constr_front)),
            default_trials: 100,
        },
        "srn" => Problem {
            name: "srn".into(),
            bounds: vec![(-20.0, 20.0); 2],
            num_objectives: 2,
            num_constraints: 2,
            eval: srn,
            f_star: None,
            x_star: None,
            ref_point: Some(SRN_REF.to_vec()),
            ideal_front: Some(IdealFront::Sampled(srn_front)),
            default_trials: 100,
        },
        other => match other.strip_prefix("ackley-").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if [2, 4, 8, 16, 32].contains(&d) => {
                let trials = if d <= 4 { 200 } else { 500 };
                so(other, vec![(-5.0, 10.0); d], ackley, 0.0, Some(vec![0.0; d]), trials)
            }
            _ => return Err(ProblemError::Unknown(other.to_owned())),
        },
    };
    Ok(p)
}

pub const BRANIN_MIN: f64 = 0.397_887_357_729_738;

pub fn branin(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let f = (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0;
    (vec![f], vec![])
}

pub fn beale(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (x[0], x[1]);
    let f = (1.5 - a + a * b).powi(2) + (2.25 - a + a * b * b).powi(2) + (2.625 - a + a * b.powi(3)).powi(2);
    (vec![f], vec![])
}

pub fn ackley_value(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    // Clamp the rounding residue at the origin.
    (-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E).max(0.0)
}

pub fn ackley(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (vec![ackley_value(x)], vec![])
}

pub fn ackley_constrained(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sum: f64 = x.iter().sum();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (vec![ackley_value(x)], vec![sum, norm - 5.0])
}

const HARTMANN6_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
pub const HARTMANN6_MIN: f64 = -3.322_368_011_415_515;
pub const HARTMANN6_XSTAR: [f64; 6] = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];

pub fn hartmann6(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let f = -(0..4)
        .map(|i| {
            let inner: f64 = (0..6)
                .map(|j| HARTMANN6_A[i][j] * (x[j] - HARTMANN6_P[i][j]).powi(2))
                .sum();
            HARTMANN6_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>();
    (vec![f], vec![])
}

pub const TOWNSEND_MIN: f64 = -2.023_988_4;
pub const TOWNSEND_XSTAR: [f64; 2] = [2.005_293_8, 1.194_450_9];

pub fn townsend(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (x, y) = (v[0], v[1]);
    let f = -((x - 0.1) * y).cos().powi(2) - x * (3.0 * x + y).sin();
    let t = x.atan2(y);
    let r = 2.0 * t.cos() - 0.5 * (2.0 * t).cos() - 0.25 * (3.0 * t).cos() - 0.125 * (4.0 * t).cos();
    let c = x * x + y * y - (r * r + (2.0 * t.sin()).powi(2));
    (vec![f], vec![c])
}

pub const MISHRA_MIN: f64 = -106.764_536_7;
pub const MISHRA_XSTAR: [f64; 2] = [-3.130_246_8, -1.582_142_2];

pub fn mishra(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (x, y) = (v[0], v[1]);
    let f = y.sin() * (1.0 - x.cos()).powi(2).exp() + x.cos() * (1.0 - y.sin()).powi(2).exp() + (x - y).powi(2);
    let c = (x + 5.0).powi(2) + (y + 5.0).powi(2) - 25.0;
    (vec![f], vec![c])
}

pub const KEANE10_BEST: f64 = -0.747_310;

pub fn keane(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = x.len() as f64;
    let s4: f64 = x.iter().map(|v| v.cos().powi(4)).sum();
    let p2: f64 = x.iter().map(|v| v.cos().powi(2)).product();
    let denom: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum::<f64>().sqrt();
    let f = if denom > 0.0 { -((s4 - 2.0 * p2).abs() / denom) } else { 0.0 };
    let prod: f64 = x.iter().product();
    let sum: f64 = x.iter().sum();
    (vec![f], vec![0.75 - prod, sum - 7.5 * d])
}

pub const ZDT2_REF: [f64; 2] = [1.1, 11.0];

pub fn zdt2(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let f1 = x[0];
    let g = 1.0 + 9.0 / (n - 1.0) * x[1..].iter().sum::<f64>();
    (vec![f1, g * (1.0 - (f1 / g).powi(2))], vec![])
}

pub fn zdt2_front(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let f1 = i as f64 / (n - 1) as f64;
            vec![f1, 1.0 - f1 * f1]
        })
        .collect()
}

pub const DTLZ1_REF: f64 = 242.9;

pub fn dtlz1(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = 5;
    let k = x.len() - m + 1;
    let tail = &x[m - 1..];
    debug_assert_eq!(tail.len(), k);
    let g = 100.0
        * (k as f64
            + tail
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>());
    let f = (0..m)
        .map(|i| {
            let mut v = 0.5 * (1.0 + g);
            for xj in &x[..m - 1 - i] {
                v *= xj;
            }
            if i > 0 {
                v *= 1.0 - x[m - 1 - i];
            }
            v
        })
        .collect();
    (f, vec![])
}

/// The front `{f ≥ 0, Σ f = 1/2}` dominates exactly the part of the
/// reference box outside the simplex `Σ f < 1/2`.
pub fn dtlz1_ideal_hv(r: &[f64]) -> f64 {
    let m = r.len() as i32;
    let fact: f64 = (1..=m).map(f64::from).product();
    r.iter().product::<f64>() - 0.5f64.powi(m) / fact
}

pub const CONSTR_REF: [f64; 2] = [1.07, 9.8];

pub fn constr(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (x1, x2) = (x[0], x[1]);
    (vec![x1, (1.0 + x2) / x1], vec![6.0 - (x2 + 9.0 * x1), 1.0 + x2 - 9.0 * x1])
}

/// `x2 = 6 - 9 x1` on `[7/18, 2/3]`, then `x2 = 0` on `[2/3, 1]`.
pub fn constr_front(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let x1 = 7.0 / 18.0 + (1.0 - 7.0 / 18.0) * i as f64 / (n - 1) as f64;
            let x2 = (6.0 - 9.0 * x1).max(0.0);
            constr(&[x1, x2]).0
        })
        .collect()
}

pub const SRN_REF: [f64; 2] = [323.3, 101.0];

pub fn srn(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (x1, x2) = (x[0], x[1]);
    let f1 = 2.0 + (x1 - 2.0).powi(2) + (x2 - 1.0).powi(2);
    let f2 = 9.0 * x1 - (x2 - 1.0).powi(2);
    (vec![f1, f2], vec![x1 * x1 + x2 * x2 - 225.0, x1 - 3.0 * x2 + 10.0])
}

/// The front has three pieces: the linear constraint boundary
/// `x2 = (x1 + 10) / 3` for `x1 ∈ [-2.5, 1.1]` (1.1 minimizes `f1` on that
/// line), the segment `x1 = -2.5`, `x2 ∈ [2.5, √218.75]`, and the arc of the
/// circle `‖x‖ = 15` from there to the feasible minimizer of `f2`.
pub fn srn_front(n: usize) -> Vec<Vec<f64>> {
    let a = n / 3;
    let b = n / 3;
    let c = n - a - b;
    let frac = |i: usize, m: usize| i as f64 / (m.max(2) - 1) as f64;
    let line = (0..a).map(|i| {
        let x1 = 1.1 - 3.6 * frac(i, a);
        srn(&[x1, (x1 + 10.0) / 3.0]).0
    });
    let hi = (225.0f64 - 6.25).sqrt();
    let seg = (0..b).map(|i| srn(&[-2.5, 2.5 + (hi - 2.5) * frac(i, b)]).0);
    // On the circle f2 = x1² + 9 x1 + 2 x2 - 226; its angular derivative
    // is positive at the segment end and changes sign once.
    let t0 = (-2.5f64 / 15.0).acos();
    let df2 = |t: f64| -15.0 * t.sin() * (9.0 + 30.0 * t.cos()) + 30.0 * t.cos();
    let (mut lo, mut up) = (t0, std::f64::consts::PI);
    for _ in 0..100 {
        let mid = 0.5 * (lo + up);
        if df2(mid) < 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    let arc = (0..c).map(|i| {
        let t = t0 + (lo - t0) * frac(i, c);
        srn(&[15.0 * t.cos(), 15.0 * t.sin()]).0
    });
    line.chain(seg).chain(arc).collect()
}
