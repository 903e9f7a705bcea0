//! Sequential minimal optimization core shared by classification and
//! regression.
//!
//! Solves `min  0.5 t'Qt + p't` subject to `y't = 0`, `0 <= t_i <= C`,
//! where `Q[i][j] = y_i y_j K(k(i), k(j))` and `k` maps variable indices to
//! kernel indices (identity for C-SVC, index mod n for the doubled
//! epsilon-SVR problem). Working pairs are chosen by maximal violation
//! with ties going to the lowest index, the update step is
//! `theta = ((-y_i g_i) - (-y_j g_j)) / eta` with
//! `eta = K_ii + K_jj - 2 K_ij`, and a non-positive eta falls back to the
//! objective-minimizing box endpoint (always the far endpoint, since the
//! directional derivative at a violating pair is negative).

use std::cell::RefCell;
use std::collections::HashMap;
use std::collections::VecDeque;
use std::rc::Rc;

use ndarray::Array2;

use crate::kernel::KernelSpec;

/// Minimum accepted step; smaller updates stop the solver as stalled.
pub(crate) const MIN_STEP: f64 = 1e-12;

/// Kernel rows for the solver: dense for n <= 10,000, bounded FIFO row
/// cache above that.
pub(crate) enum GramSource {
    Dense(Array2<f64>),
    Lazy {
        x: Array2<f64>,
        spec: KernelSpec,
        cache: RefCell<LazyCache>,
        cap: usize,
    },
}

pub(crate) struct LazyCache {
    rows: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
}

pub(crate) enum RowRef<'a> {
    Slice(&'a [f64]),
    Shared(Rc<Vec<f64>>),
}

impl RowRef<'_> {
    #[inline]
    pub(crate) fn as_slice(&self) -> &[f64] {
        match self {
            RowRef::Slice(s) => s,
            RowRef::Shared(r) => r.as_slice(),
        }
    }
}

impl GramSource {
    pub(crate) fn dense(values: Array2<f64>) -> Self {
        GramSource::Dense(values)
    }

    pub(crate) fn lazy(x: Array2<f64>, spec: KernelSpec, cap: usize) -> Self {
        GramSource::Lazy {
            x,
            spec,
            cache: RefCell::new(LazyCache {
                rows: HashMap::new(),
                order: VecDeque::new(),
            }),
            cap: cap.max(2),
        }
    }

    pub(crate) fn n(&self) -> usize {
        match self {
            GramSource::Dense(v) => v.nrows(),
            GramSource::Lazy { x, .. } => x.nrows(),
        }
    }

    pub(crate) fn row(&self, k: usize) -> RowRef<'_> {
        match self {
            GramSource::Dense(v) => RowRef::Slice(v.row(k).to_slice().expect("standard layout")),
            GramSource::Lazy {
                x,
                spec,
                cache,
                cap,
            } => {
                let mut guard = cache.borrow_mut();
                if let Some(row) = guard.rows.get(&k) {
                    return RowRef::Shared(Rc::clone(row));
                }
                let computed: Vec<f64> = (0..x.nrows())
                    .map(|j| spec.eval_view(x.row(k), x.row(j)))
                    .collect();
                let rc = Rc::new(computed);
                if guard.order.len() >= *cap {
                    if let Some(evicted) = guard.order.pop_front() {
                        guard.rows.remove(&evicted);
                    }
                }
                guard.order.push_back(k);
                guard.rows.insert(k, Rc::clone(&rc));
                RowRef::Shared(rc)
            }
        }
    }
}

pub(crate) struct SmoProblem<'a> {
    pub source: &'a GramSource,
    /// Variable index -> kernel index is `i % n_kernel` when set (the
    /// doubled regression problem); identity otherwise.
    pub mirrored: bool,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub c: f64,
    pub kkt_tol: f64,
    pub max_iter: usize,
}

pub(crate) struct SmoOutcome {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    pub violation: f64,
}

pub(crate) fn default_max_iter(n_var: usize) -> usize {
    10 * n_var * n_var.max(1000)
}

pub(crate) fn solve(problem: &SmoProblem) -> SmoOutcome {
    let n = problem.y.len();
    let n_kernel = problem.source.n();
    let kidx = |i: usize| if problem.mirrored { i % n_kernel } else { i };
    let c = problem.c;
    let snap = MIN_STEP * c.max(1.0);

    let mut t = vec![0.0f64; n];
    let mut g = problem.p.clone();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut violation;

    loop {
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = usize::MAX;
        let mut big_m_val = f64::INFINITY;
        let mut big_m_idx = usize::MAX;
        for k in 0..n {
            let v = -problem.y[k] * g[k];
            let up = (problem.y[k] > 0.0 && t[k] < c) || (problem.y[k] < 0.0 && t[k] > 0.0);
            let low = (problem.y[k] < 0.0 && t[k] < c) || (problem.y[k] > 0.0 && t[k] > 0.0);
            if up && v > m_val {
                m_val = v;
                m_idx = k;
            }
            if low && v < big_m_val {
                big_m_val = v;
                big_m_idx = k;
            }
        }
        if m_idx == usize::MAX || big_m_idx == usize::MAX {
            violation = 0.0;
            converged = true;
            break;
        }
        violation = m_val - big_m_val;
        if violation <= problem.kkt_tol {
            converged = true;
            break;
        }
        if iterations >= problem.max_iter {
            break;
        }

        let (i, j) = (m_idx, big_m_idx);
        let (ki, kj) = (kidx(i), kidx(j));
        let row_i = problem.source.row(ki);
        let row_j = problem.source.row(kj);
        let ri = row_i.as_slice();
        let rj = row_j.as_slice();

        let eta = ri[ki] + rj[kj] - 2.0 * ri[kj];
        let up_i = if problem.y[i] > 0.0 { c - t[i] } else { t[i] };
        let up_j = if problem.y[j] > 0.0 { t[j] } else { c - t[j] };
        let theta_max = up_i.min(up_j);
        let theta = if eta > 0.0 {
            (violation / eta).min(theta_max)
        } else {
            theta_max
        };
        if theta < MIN_STEP {
            break;
        }

        t[i] += problem.y[i] * theta;
        t[j] -= problem.y[j] * theta;
        for idx in [i, j] {
            if t[idx] < snap {
                t[idx] = 0.0;
            } else if t[idx] > c - snap {
                t[idx] = c;
            }
        }
        for k in 0..n {
            let kk = kidx(k);
            g[k] += problem.y[k] * theta * (ri[kk] - rj[kk]);
        }
        iterations += 1;
    }

    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for k in 0..n {
        if t[k] > 0.0 && t[k] < c {
            free_sum += -problem.y[k] * g[k];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_val = f64::NEG_INFINITY;
        let mut big_m_val = f64::INFINITY;
        for k in 0..n {
            let v = -problem.y[k] * g[k];
            let up = (problem.y[k] > 0.0 && t[k] < c) || (problem.y[k] < 0.0 && t[k] > 0.0);
            let low = (problem.y[k] < 0.0 && t[k] < c) || (problem.y[k] > 0.0 && t[k] > 0.0);
            if up && v > m_val {
                m_val = v;
            }
            if low && v < big_m_val {
                big_m_val = v;
            }
        }
        match (m_val.is_finite(), big_m_val.is_finite()) {
            (true, true) => 0.5 * (m_val + big_m_val),
            (true, false) => m_val,
            (false, true) => big_m_val,
            (false, false) => 0.0,
        }
    };

    SmoOutcome {
        alpha: t,
        bias,
        iterations,
        converged,
        violation,
    }
}

/// Solve against a dense Gram; on non-convergence, regularize the diagonal
/// with the audit module's jitter schedule and retry exactly once. Returns
/// the outcome and the jitter lambda actually used.
pub(crate) fn solve_dense_with_retry(
    values: Array2<f64>,
    mirrored: bool,
    y: Vec<f64>,
    p: Vec<f64>,
    c: f64,
    kkt_tol: f64,
    max_iter: usize,
) -> crate::error::Result<(SmoOutcome, Option<f64>)> {
    use crate::audit::{jitter_regularize, JitterPolicy};
    use crate::error::Error;

    let source = GramSource::dense(values);
    let first = {
        let problem = SmoProblem {
            source: &source,
            mirrored,
            y: y.clone(),
            p: p.clone(),
            c,
            kkt_tol,
            max_iter,
        };
        solve(&problem)
    };
    if first.converged {
        return Ok((first, None));
    }
    let values = match source {
        GramSource::Dense(v) => v,
        GramSource::Lazy { .. } => unreachable!(),
    };
    let (jittered, lambda) = match jitter_regularize(&values.view(), &JitterPolicy::default()) {
        Ok((j, l)) if l > 0.0 => (j, l),
        _ => {
            return Err(Error::Convergence {
                violation: first.violation,
                iterations: first.iterations,
            })
        }
    };
    let source = GramSource::dense(jittered);
    let problem = SmoProblem {
        source: &source,
        mirrored,
        y,
        p,
        c,
        kkt_tol,
        max_iter,
    };
    let second = solve(&problem);
    if second.converged {
        Ok((second, Some(lambda)))
    } else {
        Err(Error::Convergence {
            violation: second.violation,
            iterations: first.iterations + second.iterations,
        })
    }
}
