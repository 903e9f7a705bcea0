//! ε-insensitive support vector regression
//!
//! The dual is rewritten over the stacked variable `t = (alpha, alpha*)`
//! with signs `s = (+1…, −1…)` and linear term `p = (ε − y, ε + y)`, which
//! turns it into the same box-and-equality problem the SMO core already
//! solves for classification. After the solve, each `(alpha_i, alpha*_i)`
//! pair is reduced by its overlap `min(alpha_i, alpha*_i)` so no point ever
//! reports both sides of the tube active, and only the net coefficients
//! `beta_i = alpha_i − alpha*_i` are kept.

use ndarray::{Array2, ArrayView2};

use crate::data::ScalingStats;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::smo::{self, GramSource, SmoProblem};
use crate::svc::SolverConfig;

const DENSE_LIMIT: usize = 10_000;

/// Trained regressor: `f(x) = sum_k dual_coef[k] * K(sv_k, x) + bias`.
#[derive(Debug, Clone)]
pub struct SvrModel {
    pub spec: KernelSpec,
    pub support_vectors: Array2<f64>,
    /// Net tube coefficients `beta_i = alpha_i - alpha*_i`, nonzero only.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub epsilon: f64,
    pub c: f64,
    pub scaling: Option<ScalingStats>,
    pub jitter_lambda: Option<f64>,
    pub support_indices: Vec<usize>,
}

impl SvrModel {
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

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
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

    pub fn predict_batch(&self, x: &ArrayView2<f64>) -> Result<Vec<f64>> {
        (0..x.nrows())
            .map(|i| {
                self.predict(
                    x.row(i).to_slice().ok_or_else(|| {
                        Error::Shape("feature matrix rows must be contiguous".into())
                    })?,
                )
            })
            .collect()
    }
}

/// Fit an ε-SVR. The box parameter comes from the explicit `c` argument;
/// `config` contributes the KKT tolerance and iteration budget (its own
/// `c` field is not consulted).
pub fn fit_svr(
    x: &ArrayView2<f64>,
    y: &[f64],
    spec: &KernelSpec,
    c: f64,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<SvrModel> {
    spec.validate()?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "box parameter C must be positive, got {c}"
        )));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tube half-width epsilon must be non-negative, got {epsilon}"
        )));
    }
    if !(config.kkt_tol.is_finite() && config.kkt_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kkt_tol must be positive, got {}",
            config.kkt_tol
        )));
    }
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
    if y.len() < 2 {
        return Err(Error::DegenerateData(
            "regression needs at least two training rows".into(),
        ));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite target value {v}")));
    }

    let n = x.nrows();
    let max_iter = config
        .max_iter
        .unwrap_or_else(|| smo::default_max_iter(2 * n));
    let mut signs = vec![1.0; 2 * n];
    let mut p = vec![0.0; 2 * n];
    for i in 0..n {
        signs[n + i] = -1.0;
        p[i] = epsilon - y[i];
        p[n + i] = epsilon + y[i];
    }

    let (outcome, jitter_lambda) = if n <= DENSE_LIMIT {
        let gram = spec.gram(x)?;
        smo::solve_dense_with_retry(gram.values, true, signs, p, c, config.kkt_tol, max_iter)?
    } else {
        let cap = (100_000_000 / (8 * n)).max(16);
        let source = GramSource::lazy(x.to_owned(), spec.clone(), cap);
        let problem = SmoProblem {
            source: &source,
            mirrored: true,
            y: signs,
            p,
            c,
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

    // Cancel any overlap so each point is active on at most one tube side.
    let mut beta = vec![0.0; n];
    for i in 0..n {
        let overlap = outcome.alpha[i].min(outcome.alpha[n + i]);
        beta[i] = (outcome.alpha[i] - overlap) - (outcome.alpha[n + i] - overlap);
    }
    let support_indices: Vec<usize> = (0..n).filter(|&i| beta[i] != 0.0).collect();
    let mut support_vectors = Array2::zeros((support_indices.len(), x.ncols()));
    let mut dual_coef = Vec::with_capacity(support_indices.len());
    for (k, &i) in support_indices.iter().enumerate() {
        support_vectors.row_mut(k).assign(&x.row(i));
        dual_coef.push(beta[i]);
    }
    Ok(SvrModel {
        spec: spec.clone(),
        support_vectors,
        dual_coef,
        bias: outcome.bias,
        epsilon,
        c,
        scaling: None,
        jitter_lambda,
        support_indices,
    })
}

/// Root mean squared error of the model's predictions against `y_ref`.
pub fn svr_rmse(model: &SvrModel, x: &ArrayView2<f64>, y_ref: &[f64]) -> Result<f64> {
    if y_ref.is_empty() {
        return Err(Error::EmptyInput("rmse needs at least one row"));
    }
    if x.nrows() != y_ref.len() {
        return Err(Error::Shape(format!(
            "feature matrix has {} rows but reference has {}",
            x.nrows(),
            y_ref.len()
        )));
    }
    let predictions = model.predict_batch(x)?;
    let sq_sum: f64 = predictions
        .iter()
        .zip(y_ref)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    Ok((sq_sum / y_ref.len() as f64).sqrt())
}
