//! Kernel family and Gram construction.
//!
//! The centerpiece is the trigonometric kernel
//!
//! ```text
//! K(x, x') = sin(pi / (2 + sigma * ||x - x'||^2)),  sigma > 0
//! ```
//!
//! whose scalar profile `psi(x) = sin(pi / (2 + sigma * x^2))` maps distance
//! 0 to exactly 1 and decreases monotonically toward 0. The family also
//! carries the classical comparison kernels (polynomial, gaussian, rbf,
//! sigmoid) and a convex trig/gaussian mixture.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec;

/// Phase function `pi / (2 + sigma * x^2)`.
///
/// For finite `x` and `sigma > 0` the phase lies in `(0, pi/2]`, with the
/// maximum `pi/2` attained exactly at `x = 0`.
pub fn trig_phase(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !x.is_finite() {
        return Err(Error::Data(format!("non-finite phase input {x}")));
    }
    Ok(PI / (2.0 + sigma * x * x))
}

/// Scalar kernel profile `psi(x) = sin(pi / (2 + sigma * x^2))`.
///
/// `psi(0) = 1` exactly; the profile is positive, bounded by 1, and
/// strictly decreasing in `|x|`.
pub fn trig_profile(x: f64, sigma: f64) -> Result<f64> {
    Ok(trig_phase(x, sigma)?.sin())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be a positive finite real, got {sigma}"
        )));
    }
    Ok(())
}

/// One kernel family with its parameters.
///
/// Serialized as `{"variant": ..., "params": {...}}` inside model files.
/// `rbf` is gaussian reparameterized by `gamma = 1 / (2 sigma^2)`; the two
/// are kept as distinct variants rather than collapsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `(1 + x . y)^p`
    Poly { p: u32 },
    /// `exp(-||x - y||^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `exp(-gamma * ||x - y||^2)`
    Rbf { gamma: f64 },
    /// `tanh(alpha + beta * x . y)`
    Sigmoid { alpha: f64, beta: f64 },
    /// `sin(pi / (2 + sigma * ||x - y||^2))`
    Trig { sigma: f64 },
    /// `beta * trig(sigma) + (1 - beta) * gaussian(sigma)`
    Mixed { sigma: f64, beta: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Poly { p } => {
                if p < 1 {
                    return Err(Error::InvalidParameter(
                        "polynomial degree must be at least 1".into(),
                    ));
                }
            }
            KernelSpec::Gaussian { sigma } | KernelSpec::Trig { sigma } => check_sigma(sigma)?,
            KernelSpec::Rbf { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma must be a positive finite real, got {gamma}"
                    )));
                }
            }
            KernelSpec::Sigmoid { alpha, beta } => {
                if !alpha.is_finite() || !beta.is_finite() {
                    return Err(Error::InvalidParameter(
                        "sigmoid parameters must be finite".into(),
                    ));
                }
            }
            KernelSpec::Mixed { sigma, beta } => {
                check_sigma(sigma)?;
                if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weight beta must lie in [0, 1], got {beta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short lowercase name of the variant, matching the CLI spelling.
    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::Poly { .. } => "poly",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Sigmoid { .. } => "sigmoid",
            KernelSpec::Trig { .. } => "trig",
            KernelSpec::Mixed { .. } => "mixed",
        }
    }

    /// Whether the variant has a width parameter swept by grid search and
    /// the PSD survey.
    pub fn has_width(&self) -> bool {
        matches!(
            self,
            KernelSpec::Gaussian { .. }
                | KernelSpec::Rbf { .. }
                | KernelSpec::Trig { .. }
                | KernelSpec::Mixed { .. }
        )
    }

    /// Copy of `self` with the width parameter replaced (`sigma`, or `gamma`
    /// for rbf). Width-free variants are returned unchanged.
    pub fn with_width(&self, width: f64) -> KernelSpec {
        match *self {
            KernelSpec::Gaussian { .. } => KernelSpec::Gaussian { sigma: width },
            KernelSpec::Rbf { .. } => KernelSpec::Rbf { gamma: width },
            KernelSpec::Trig { .. } => KernelSpec::Trig { sigma: width },
            KernelSpec::Mixed { beta, .. } => KernelSpec::Mixed { sigma: width, beta },
            ref other => other.clone(),
        }
    }

    /// Evaluate the kernel on a pair of points.
    ///
    /// Bit-for-bit symmetric in `x` and `y`. Radial variants (gaussian,
    /// rbf, trig, mixed) return exactly 1 at zero distance.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.validate()?;
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "kernel inputs have dimensions {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::EmptyInput("kernel inputs must have dimension >= 1"));
        }
        for v in x.iter().chain(y.iter()) {
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite kernel input {v}")));
            }
        }
        Ok(self.eval_raw(x.iter().copied(), y.iter().copied()))
    }

    pub(crate) fn eval_view(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        self.eval_raw(x.iter().copied(), y.iter().copied())
    }

    fn eval_raw<I, J>(&self, x: I, y: J) -> f64
    where
        I: Iterator<Item = f64>,
        J: Iterator<Item = f64>,
    {
        match *self {
            KernelSpec::Poly { p } => (1.0 + dot(x, y)).powi(p as i32),
            KernelSpec::Gaussian { sigma } => gaussian_at(squared_distance(x, y), sigma),
            KernelSpec::Rbf { gamma } => (-gamma * squared_distance(x, y)).exp(),
            KernelSpec::Sigmoid { alpha, beta } => (alpha + beta * dot(x, y)).tanh(),
            KernelSpec::Trig { sigma } => trig_at(squared_distance(x, y), sigma),
            KernelSpec::Mixed { sigma, beta } => {
                let r2 = squared_distance(x, y);
                mixed_at(r2, sigma, beta)
            }
        }
    }

    /// Full Gram matrix of a sample. The upper triangle is computed once
    /// and mirrored, so the result is exactly symmetric.
    pub fn gram(&self, x: &ArrayView2<f64>) -> Result<GramMatrix> {
        self.gram_inner(x, true)
    }

    /// Single-threaded twin of [`KernelSpec::gram`]; output is identical.
    pub fn gram_sequential(&self, x: &ArrayView2<f64>) -> Result<GramMatrix> {
        self.gram_inner(x, false)
    }

    fn gram_inner(&self, x: &ArrayView2<f64>, parallel: bool) -> Result<GramMatrix> {
        self.validate()?;
        check_features(x)?;
        let n = x.nrows();
        let rows = exec::map_indexed(n, parallel, |i| {
            (i..n)
                .map(|j| self.eval_view(x.row(i), x.row(j)))
                .collect::<Vec<f64>>()
        });
        Ok(GramMatrix {
            values: assemble_symmetric(n, rows),
            spec: self.clone(),
        })
    }

    /// Rectangular kernel matrix between two samples: `out[i][j] =
    /// K(x_i, z_j)`.
    pub fn cross_gram(&self, x: &ArrayView2<f64>, z: &ArrayView2<f64>) -> Result<Array2<f64>> {
        self.cross_gram_inner(x, z, true)
    }

    /// Single-threaded twin of [`KernelSpec::cross_gram`].
    pub fn cross_gram_sequential(
        &self,
        x: &ArrayView2<f64>,
        z: &ArrayView2<f64>,
    ) -> Result<Array2<f64>> {
        self.cross_gram_inner(x, z, false)
    }

    fn cross_gram_inner(
        &self,
        x: &ArrayView2<f64>,
        z: &ArrayView2<f64>,
        parallel: bool,
    ) -> Result<Array2<f64>> {
        self.validate()?;
        check_features(x)?;
        check_features(z)?;
        if x.ncols() != z.ncols() {
            return Err(Error::Shape(format!(
                "cross gram inputs have dimensions {} and {}",
                x.ncols(),
                z.ncols()
            )));
        }
        let m = z.nrows();
        let rows = exec::map_indexed(x.nrows(), parallel, |i| {
            (0..m)
                .map(|j| self.eval_view(x.row(i), z.row(j)))
                .collect::<Vec<f64>>()
        });
        Ok(from_rows(x.nrows(), m, rows))
    }
}

fn trig_at(r2: f64, sigma: f64) -> f64 {
    (PI / (2.0 + sigma * r2)).sin()
}

fn gaussian_at(r2: f64, sigma: f64) -> f64 {
    (-r2 / (2.0 * sigma * sigma)).exp()
}

/// Mixture evaluated as `g + beta * (t - g)`: exact 1 at zero distance for
/// every beta, and exact reduction to the pure kernels at beta = 0 and 1.
fn mixed_at(r2: f64, sigma: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return gaussian_at(r2, sigma);
    }
    if beta == 1.0 {
        return trig_at(r2, sigma);
    }
    let g = gaussian_at(r2, sigma);
    let t = trig_at(r2, sigma);
    g + beta * (t - g)
}

fn dot<I, J>(x: I, y: J) -> f64
where
    I: Iterator<Item = f64>,
    J: Iterator<Item = f64>,
{
    x.zip(y).map(|(a, b)| a * b).sum()
}

fn squared_distance<I, J>(x: I, y: J) -> f64
where
    I: Iterator<Item = f64>,
    J: Iterator<Item = f64>,
{
    x.zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn check_features(x: &ArrayView2<f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::EmptyInput("feature matrix has no rows"));
    }
    if x.ncols() == 0 {
        return Err(Error::EmptyInput("feature matrix has no columns"));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite feature value {v}")));
    }
    Ok(())
}

fn assemble_symmetric(n: usize, rows: Vec<Vec<f64>>) -> Array2<f64> {
    let mut values = Array2::zeros((n, n));
    for (i, tail) in rows.into_iter().enumerate() {
        for (k, v) in tail.into_iter().enumerate() {
            values[[i, i + k]] = v;
            values[[i + k, i]] = v;
        }
    }
    values
}

fn from_rows(n: usize, m: usize, rows: Vec<Vec<f64>>) -> Array2<f64> {
    let mut values = Array2::zeros((n, m));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    values
}

/// Symmetric kernel matrix of one sample, tagged with the spec that
/// produced it.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub values: Array2<f64>,
    pub spec: KernelSpec,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Convenience constructors used throughout tests and the CLI.
impl KernelSpec {
    pub fn trig(sigma: f64) -> Self {
        KernelSpec::Trig { sigma }
    }
    pub fn gaussian(sigma: f64) -> Self {
        KernelSpec::Gaussian { sigma }
    }
    pub fn mixed(sigma: f64, beta: f64) -> Self {
        KernelSpec::Mixed { sigma, beta }
    }
    pub fn poly(p: u32) -> Self {
        KernelSpec::Poly { p }
    }
}
