//! Brute-force optimality oracle for the dual solver, reimplemented from
//! scratch so it shares no code path with the library: its own kernel
//! arithmetic, objective, gradient, projection, and active-set enumeration.
//!
//! Two certificates back each check. Exact enumeration solves the small
//! stationarity system of every active-set pattern (each variable at 0,
//! free, or at the box), recovering every KKT point — for a convex dual the
//! smallest of those objectives is the global optimum. Projected-gradient
//! refinement started from the solver's own answer certifies local
//! optimality even when an indefinite kernel makes the dual non-convex.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

pub const BOUND_SLACK: f64 = 1e-9;
pub const GRADIENT_SLACK: f64 = 1e-7;
pub const OBJECTIVE_TOL: f64 = 1e-6;
pub const KKT_TOL: f64 = 1e-3;

#[derive(Clone, Copy)]
pub enum OracleKernel {
    Trig(f64),
    Gaussian(f64),
}

impl OracleKernel {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
        match self {
            OracleKernel::Trig(s) => (std::f64::consts::PI / (2.0 + s * r2)).sin(),
            OracleKernel::Gaussian(s) => (-r2 / (2.0 * s * s)).exp(),
        }
    }

    pub fn convex(self) -> bool {
        // A gaussian Gram on distinct points is positive definite; the trig
        // profile carries no such guarantee.
        matches!(self, OracleKernel::Gaussian(_))
    }
}

/// Pairwise kernel matrix with `lambda` added to the diagonal (matching any
/// ridge the solver recorded on its model).
pub fn base_gram(x: &Array2<f64>, kernel: OracleKernel, lambda: f64) -> Vec<Vec<f64>> {
    let n = x.nrows();
    let row = |i: usize| x.row(i).to_slice().unwrap().to_vec();
    let pts: Vec<Vec<f64>> = (0..n).map(row).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| kernel.eval(&pts[i], &pts[j]) + if i == j { lambda } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Quadratic objective 0.5 uᵀQu + pᵀu.
pub fn objective(q: &[Vec<f64>], p: &[f64], u: &[f64]) -> f64 {
    let n = p.len();
    let mut quad = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += q[i][j] * u[j];
        }
        quad += u[i] * row;
    }
    0.5 * quad + p.iter().zip(u).map(|(pi, ui)| pi * ui).sum::<f64>()
}

fn gradient(q: &[Vec<f64>], p: &[f64], u: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|i| q[i].iter().zip(u).map(|(qij, uj)| qij * uj).sum::<f64>() + p[i])
        .collect()
}

/// Euclidean projection of `z` onto {0 ≤ u ≤ c, Σ y_i u_i = 0} by bisection
/// on the constraint multiplier: u_i(ν) = clip(z_i − ν·y_i) makes
/// Σ y_i u_i(ν) non-increasing in ν.
fn project(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let clip = |v: f64| v.clamp(0.0, c);
    let balance = |nu: f64| -> f64 {
        z.iter()
            .zip(y)
            .map(|(&zi, &yi)| yi * clip(zi - nu * yi))
            .sum()
    };
    let bound = z.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    z.iter()
        .zip(y)
        .map(|(&zi, &yi)| clip(zi - nu * yi))
        .collect()
}

/// Projected-gradient descent from `start`; returns the refined point's
/// objective. The step backtracks whenever a move fails to descend, so the
/// objective is monotone and the routine is safe on indefinite problems.
fn pg_refine(q: &[Vec<f64>], p: &[f64], y: &[f64], c: f64, start: &[f64]) -> f64 {
    let lipschitz = 1.0
        + q.iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let mut u = start.to_vec();
    let mut best = objective(q, p, &u);
    let mut step = 1.0 / lipschitz;
    for _ in 0..20_000 {
        let g = gradient(q, p, &u);
        let z: Vec<f64> = u.iter().zip(&g).map(|(ui, gi)| ui - step * gi).collect();
        let cand = project(&z, y, c);
        let cobj = objective(q, p, &cand);
        if cobj < best {
            u = cand;
            best = cobj;
        } else {
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
    }
    best
}

/// Objectives of every KKT point of min 0.5 uᵀQu + pᵀu over
/// {0 ≤ u ≤ c, Σ y_i u_i = 0}, by exhaustive active-set enumeration.
/// Stationarity at a KKT point: g_i + b·y_i = 0 on free coordinates,
/// ≥ 0 at u_i = 0, ≤ 0 at u_i = c, for some scalar b.
fn enumerate_kkt_objectives(q: &[Vec<f64>], p: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let n = p.len();
    let mut objectives = Vec::new();
    for pattern in 0..3usize.pow(n as u32) {
        let mut code = pattern;
        let mut kind = vec![0u8; n];
        for k in kind.iter_mut() {
            *k = (code % 3) as u8;
            code /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| kind[i] == 1).collect();
        let mut u = vec![0.0; n];
        for i in 0..n {
            if kind[i] == 2 {
                u[i] = c;
            }
        }

        if free.is_empty() {
            // Fully clamped: u is fixed; a KKT point exists iff the equality
            // constraint holds and some b satisfies every sign condition.
            let residual: f64 = y.iter().zip(&u).map(|(yi, ui)| yi * ui).sum();
            if residual.abs() > 1e-8 {
                continue;
            }
            let g = gradient(q, p, &u);
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for i in 0..n {
                // Condition g_i + b·y_i ≥ 0 (at zero) or ≤ 0 (at the box).
                let limit = -g[i] / y[i];
                let wants_ge = (kind[i] == 0) == (y[i] > 0.0);
                if wants_ge {
                    lo = lo.max(limit);
                } else {
                    hi = hi.min(limit);
                }
            }
            if lo <= hi + GRADIENT_SLACK {
                objectives.push(objective(q, p, &u));
            }
            continue;
        }

        // Unknowns: the free block and b. Rows: stationarity on each free
        // coordinate, then the equality constraint.
        let m = free.len();
        let a = DMatrix::<f64>::from_fn(m + 1, m + 1, |r, col| {
            if r < m && col < m {
                q[free[r]][free[col]]
            } else if r < m {
                y[free[r]]
            } else if col < m {
                y[free[col]]
            } else {
                0.0
            }
        });
        let rhs = DVector::<f64>::from_fn(m + 1, |r, _| {
            if r < m {
                let i = free[r];
                -p[i]
                    - (0..n)
                        .filter(|&j| kind[j] == 2)
                        .map(|j| q[i][j] * c)
                        .sum::<f64>()
            } else {
                -(0..n)
                    .filter(|&j| kind[j] == 2)
                    .map(|j| y[j] * c)
                    .sum::<f64>()
            }
        });
        let Some(solution) = a.clone().lu().solve(&rhs) else {
            continue;
        };
        if (&a * &solution - &rhs).amax() > 1e-8 {
            continue;
        }
        let b = solution[m];
        let mut feasible = true;
        for (k, &i) in free.iter().enumerate() {
            let v = solution[k];
            if !(-BOUND_SLACK..=c + BOUND_SLACK).contains(&v) {
                feasible = false;
                break;
            }
            u[i] = v.clamp(0.0, c);
        }
        if !feasible {
            continue;
        }
        let g = gradient(q, p, &u);
        for i in 0..n {
            let s = g[i] + b * y[i];
            let ok = match kind[i] {
                0 => s >= -GRADIENT_SLACK,
                2 => s <= GRADIENT_SLACK,
                _ => s.abs() <= GRADIENT_SLACK,
            };
            if !ok {
                feasible = false;
                break;
            }
        }
        if feasible {
            objectives.push(objective(q, p, &u));
        }
    }
    objectives
}

/// Maximal-violating-pair score computed from scratch: max over pair
/// violations m − M, floored at zero.
fn kkt_score(q: &[Vec<f64>], p: &[f64], y: &[f64], c: f64, u: &[f64]) -> f64 {
    let g = gradient(q, p, u);
    let mut m = f64::NEG_INFINITY;
    let mut big_m = f64::INFINITY;
    for i in 0..p.len() {
        let v = -y[i] * g[i];
        let up = (y[i] > 0.0 && u[i] < c - 1e-12) || (y[i] < 0.0 && u[i] > 1e-12);
        let low = (y[i] < 0.0 && u[i] < c - 1e-12) || (y[i] > 0.0 && u[i] > 1e-12);
        if up {
            m = m.max(v);
        }
        if low {
            big_m = big_m.min(v);
        }
    }
    if m.is_finite() && big_m.is_finite() {
        (m - big_m).max(0.0)
    } else {
        0.0
    }
}

/// Assert that the solver's answer `u` is KKT-feasible, locally optimal
/// under projected-gradient refinement, and lands on an enumerated KKT
/// objective — the global optimum when `convex`.
pub fn check_against_oracles(
    label: &str,
    q: &[Vec<f64>],
    p: &[f64],
    y: &[f64],
    c: f64,
    u: &[f64],
    convex: bool,
) {
    let solver_obj = objective(q, p, u);

    let violation = kkt_score(q, p, y, c, u);
    assert!(violation <= KKT_TOL, "{label}: kkt violation {violation}");

    let refined = pg_refine(q, p, y, c, u);
    assert!(
        solver_obj - refined <= OBJECTIVE_TOL,
        "{label}: projected gradient improved the objective by {}",
        solver_obj - refined
    );

    let kkt_objs = enumerate_kkt_objectives(q, p, y, c);
    assert!(
        !kkt_objs.is_empty(),
        "{label}: enumeration found no KKT point"
    );
    let nearest = kkt_objs
        .iter()
        .map(|o| (o - solver_obj).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(
        nearest <= OBJECTIVE_TOL,
        "{label}: solver objective {solver_obj} is not near any enumerated KKT point (gap {nearest})"
    );
    if convex {
        let best = kkt_objs.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            (solver_obj - best).abs() <= OBJECTIVE_TOL,
            "{label}: solver objective {solver_obj} vs convex optimum {best}"
        );
    }
}
