//! C-SVC: soft-margin kernel classification on the dual problem
//!
//! ```text
//! min  0.5 * sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j) - sum_i alpha_i
//! s.t. sum_i y_i alpha_i = 0,  0 <= alpha_i <= C
//! ```
//!
//! solved by the shared SMO core. The fit first runs against the raw Gram;
//! if the solver stalls or exhausts its update budget (possible, since the
//! trig kernel carries no PSD guarantee) the Gram is jitter-regularized
//! once and the solve retried, with the lambda recorded on the model.

use ndarray::{Array2, ArrayView2};

use crate::data::{Dataset, ScalingStats, Target};
use crate::error::{Error, Result};
use crate::kernel::{GramMatrix, KernelSpec};
use crate::smo::{self, GramSource, SmoProblem};

/// Full Gram precompute bound; larger problems stream rows through a
/// bounded cache.
const DENSE_LIMIT: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub c: f64,
    pub kkt_tol: f64,
    /// `None` selects `10 * n * max(n, 1000)` pair updates.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 1.0,
            kkt_tol: 1e-3,
            max_iter: None,
            seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn with_c(c: f64) -> Self {
        SolverConfig {
            c,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box parameter C must be positive, got {}",
                self.c
            )));
        }
        if !(self.kkt_tol.is_finite() && self.kkt_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kkt_tol must be positive, got {}",
                self.kkt_tol
            )));
        }
        Ok(())
    }
}

/// Trained classifier. `dual_coef[k] = alpha_k * y_k` for the k-th support
/// vector, so the decision function is
/// `f(x) = sum_k dual_coef[k] * K(sv_k, x) + bias`.
#[derive(Debug, Clone)]
pub struct SvcModel {
    pub spec: KernelSpec,
    pub support_vectors: Array2<f64>,
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    /// When present, applied to incoming points before kernel evaluation;
    /// the stored support vectors are already in scaled coordinates.
    pub scaling: Option<ScalingStats>,
    /// Diagonal jitter that was needed to reach convergence, if any.
    pub jitter_lambda: Option<f64>,
    /// Training-set rows behind each support vector. Populated by fit,
    /// empty on models loaded from disk.
    pub support_indices: Vec<usize>,
}

impl SvcModel {
    pub fn with_scaling(mut self, scaling: ScalingStats) -> Self {
        self.scaling = Some(scaling);
        self
    }

    fn prepared_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite probe value {v}")));
        }
        let mut p = x.to_vec();
        if let Some(scaling) = &self.scaling {
            scaling.apply_row(&mut p)?;
        }
        // a model with no support vectors accepts any probe (f = bias)
        if self.support_vectors.nrows() > 0 && p.len() != self.support_vectors.ncols() {
            return Err(Error::Shape(format!(
                "probe has dimension {}, model expects {}",
                p.len(),
                self.support_vectors.ncols()
            )));
        }
        Ok(p)
    }

    /// `f(x) = sum_k dual_coef[k] * K(sv_k, x) + bias`; just the bias when
    /// the model has no support vectors.
    pub fn decision_function(&self, x: &[f64]) -> Result<f64> {
        let p = self.prepared_input(x)?;
        let mut f = self.bias;
        for (k, coef) in self.dual_coef.iter().enumerate() {
            f += coef
                * self
                    .spec
                    .eval_view(self.support_vectors.row(k), ndarray::aview1(&p));
        }
        Ok(f)
    }

    /// Class label `sign(f(x))`, with `sign(0) = +1`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision_function(x)? >= 0.0 {
            1.0
        } else {
            -1.0
        })
    }

    pub fn decision_batch(&self, x: &ArrayView2<f64>) -> Result<Vec<f64>> {
        (0..x.nrows())
            .map(|i| self.decision_function(x.row(i).to_slice().ok_or_else(row_layout_err)?))
            .collect()
    }

    pub fn predict_batch(&self, x: &ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .decision_batch(x)?
            .into_iter()
            .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }
}

fn row_layout_err() -> Error {
    Error::Shape("feature matrix rows must be contiguous".into())
}

fn check_training_input(x: &ArrayView2<f64>, y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyInput("training set has no rows"));
    }
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "feature matrix has {} rows but target has {}",
            x.nrows(),
            y.len()
        )));
    }
    Ok(())
}

/// Fit a C-SVC by SMO with maximal-violating-pair selection.
pub fn fit_svc(
    x: &ArrayView2<f64>,
    y: &[f64],
    spec: &KernelSpec,
    config: &SolverConfig,
) -> Result<SvcModel> {
    spec.validate()?;
    config.validate()?;
    check_training_input(x, y)?;
    for &label in y {
        if label != 1.0 && label != -1.0 {
            return Err(Error::Label(format!(
                "classification labels must be exactly -1 or +1, got {label}"
            )));
        }
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::DegenerateData(
            "training set must contain both classes".into(),
        ));
    }

    let n = x.nrows();
    let max_iter = config.max_iter.unwrap_or_else(|| smo::default_max_iter(n));
    let p = vec![-1.0; n];
    let (outcome, jitter_lambda) = if n <= DENSE_LIMIT {
        let gram = spec.gram(x)?;
        smo::solve_dense_with_retry(
            gram.values,
            false,
            y.to_vec(),
            p,
            config.c,
            config.kkt_tol,
            max_iter,
        )?
    } else {
        let cap = (100_000_000 / (8 * n)).max(16);
        let source = GramSource::lazy(x.to_owned(), spec.clone(), cap);
        let problem = SmoProblem {
            source: &source,
            mirrored: false,
            y: y.to_vec(),
            p,
            c: config.c,
            kkt_tol: config.kkt_tol,
            max_iter,
        };
        let out = smo::solve(&problem);
        if !out.converged {
            return Err(Error::Convergence {
                violation: out.violation,
                iterations: out.iterations,
            });
        }
        (out, None)
    };

    let support_indices: Vec<usize> = (0..n).filter(|&i| outcome.alpha[i] > 0.0).collect();
    let mut support_vectors = Array2::zeros((support_indices.len(), x.ncols()));
    let mut dual_coef = Vec::with_capacity(support_indices.len());
    for (k, &i) in support_indices.iter().enumerate() {
        support_vectors.row_mut(k).assign(&x.row(i));
        dual_coef.push(outcome.alpha[i] * y[i]);
    }
    Ok(SvcModel {
        spec: spec.clone(),
        support_vectors,
        dual_coef,
        bias: outcome.bias,
        c: config.c,
        scaling: None,
        jitter_lambda,
        support_indices,
    })
}

/// Dual objective `0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij - sum_i alpha_i`.
pub fn dual_objective(alpha: &[f64], y: &[f64], gram: &GramMatrix) -> Result<f64> {
    let n = gram.n();
    if alpha.len() != n || y.len() != n {
        return Err(Error::Shape(format!(
            "dual objective needs alpha, y, and gram of matching size ({}, {}, {})",
            alpha.len(),
            y.len(),
            n
        )));
    }
    let mut quad = 0.0;
    for i in 0..n {
        quad += alpha[i] * alpha[i] * gram.values[[i, i]];
        for j in (i + 1)..n {
            quad += 2.0 * alpha[i] * alpha[j] * y[i] * y[j] * gram.values[[i, j]];
        }
    }
    Ok(0.5 * quad - alpha.iter().sum::<f64>())
}

/// Worst per-point KKT violation of a fitted model on its training set:
/// `max(0, 1 - y f)` at `alpha = 0`, `max(0, y f - 1)` at `alpha = C`, and
/// `|y f - 1|` at free alphas.
pub fn kkt_violation(
    model: &SvcModel,
    x: &ArrayView2<f64>,
    y: &[f64],
    gram: &GramMatrix,
) -> Result<f64> {
    check_training_input(x, y)?;
    let n = x.nrows();
    if gram.n() != n {
        return Err(Error::Shape(format!(
            "gram is {}x{} but training set has {} rows",
            gram.n(),
            gram.n(),
            n
        )));
    }
    if model.support_indices.len() != model.dual_coef.len() {
        return Err(Error::InvalidParameter(
            "model carries no training indices; KKT audit needs a freshly fitted model".into(),
        ));
    }
    let mut alpha = vec![0.0; n];
    for (k, &i) in model.support_indices.iter().enumerate() {
        if i >= n {
            return Err(Error::Shape(format!(
                "support index {i} out of range for {n} training rows"
            )));
        }
        alpha[i] = model.dual_coef[k] * y[i];
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut f = model.bias;
        for (k, &j) in model.support_indices.iter().enumerate() {
            f += model.dual_coef[k] * gram.values[[j, i]];
        }
        let margin = y[i] * f;
        let v = if alpha[i] == 0.0 {
            (1.0 - margin).max(0.0)
        } else if alpha[i] == model.c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// `(support vector count, training errors, test errors)`; an empty test
/// set contributes zero errors.
pub fn count_stats(
    model: &SvcModel,
    train: &Dataset,
    test: &Dataset,
) -> Result<(usize, usize, usize)> {
    let count_errors = |ds: &Dataset| -> Result<usize> {
        if ds.n() == 0 {
            return Ok(0);
        }
        let labels = match &ds.target {
            Target::Labels(l) => l,
            Target::Values(_) => {
                return Err(Error::Label(
                    "count_stats needs classification datasets".into(),
                ))
            }
        };
        let predictions = model.predict_batch(&ds.features.view())?;
        Ok(predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| *p != *l)
            .count())
    };
    Ok((
        model.dual_coef.len(),
        count_errors(train)?,
        count_errors(test)?,
    ))
}
