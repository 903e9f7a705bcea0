//! Positive-semidefiniteness audits for Gram matrices.
//!
//! Two independent routes are kept deliberately separate: a leading
//! principal minor audit built on the single-pivot elimination recurrence
//! `K'[j][k] = K[j][k] - K[1][k] * K[j][1] / pivot`, and an eigenvalue
//! audit built on a cyclic Jacobi iteration. Whether the trig kernel is
//! PSD for every point configuration is treated as an open empirical
//! question, so [`randomized_psd_survey`] reports measured spectra instead
//! of asserting anything.

use ndarray::{s, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::kernel::KernelSpec;
use crate::select::log2_grid;

/// Entrywise asymmetry beyond `1e-10 * scale` is rejected as a shape error.
const SYMMETRY_TOL: f64 = 1e-10;
/// Elimination stops at pivots below `1e-12 * scale`; the remaining minors
/// come from partial-pivot LU determinants instead.
const PIVOT_FLOOR: f64 = 1e-12;
/// Survey trials count an eigenvalue below this as a PSD violation.
const VIOLATION_TOL: f64 = -1e-6;

const MAX_JACOBI_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdClass {
    PositiveDefinite,
    PositiveSemidefiniteBoundary,
    Indefinite,
}

/// What justified a non-definite verdict: the 1-based index of the first
/// offending leading minor, or the offending eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    MinorIndex(usize),
    Eigenvalue(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub classification: PsdClass,
    pub witness: Option<Witness>,
    pub min_eigenvalue: Option<f64>,
}

impl PsdVerdict {
    pub fn is_positive_definite(&self) -> bool {
        self.classification == PsdClass::PositiveDefinite
    }
}

fn check_square_symmetric(g: &ArrayView2<f64>) -> Result<f64> {
    let n = g.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("audit input has no rows"));
    }
    if g.ncols() != n {
        return Err(Error::Shape(format!(
            "audit input is {}x{}, expected square",
            n,
            g.ncols()
        )));
    }
    if let Some(v) = g.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite matrix entry {v}")));
    }
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (g[[i, j]] - g[[j, i]]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Shape(format!(
                    "matrix is asymmetric at ({i}, {j}): {} vs {}",
                    g[[i, j]],
                    g[[j, i]]
                )));
            }
        }
    }
    Ok(scale)
}

/// Determinants of all leading principal submatrices, in order of size.
///
/// Computed with the symmetric single-pivot elimination recurrence (each
/// step subtracts `row_k * col_k / pivot` from the trailing block, so the
/// k-th minor is the running pivot product). A pivot within
/// `1e-12 * scale` of zero ends the recurrence; minors beyond that point
/// fall back to direct LU determinants of the original leading blocks.
pub fn leading_minors(g: &ArrayView2<f64>) -> Result<Vec<f64>> {
    let scale = check_square_symmetric(g)?;
    let n = g.nrows();
    let mut a = g.to_owned();
    let mut minors = Vec::with_capacity(n);
    let mut det = 1.0;
    for k in 0..n {
        let pivot = a[[k, k]];
        det *= pivot;
        minors.push(det);
        if k + 1 == n {
            break;
        }
        if pivot.abs() <= PIVOT_FLOOR * scale {
            for p in (k + 2)..=n {
                minors.push(lu_determinant(&g.slice(s![..p, ..p]).to_owned()));
            }
            break;
        }
        for j in (k + 1)..n {
            let f = a[[j, k]] / pivot;
            if f == 0.0 {
                continue;
            }
            for l in (k + 1)..n {
                a[[j, l]] -= f * a[[k, l]];
            }
        }
    }
    Ok(minors)
}

fn lu_determinant(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[[i, k]].abs() > a[[piv, k]].abs() {
                piv = i;
            }
        }
        if a[[piv, k]] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[[k, j]];
                a[[k, j]] = a[[piv, j]];
                a[[piv, j]] = tmp;
            }
            det = -det;
        }
        det *= a[[k, k]];
        for i in (k + 1)..n {
            let f = a[[i, k]] / a[[k, k]];
            for j in (k + 1)..n {
                a[[i, j]] -= f * a[[k, j]];
            }
        }
    }
    det
}

/// Classify a symmetric matrix by the signs of its leading principal
/// minors: positive-definite if all exceed `tol`, boundary if some lie in
/// `[-tol, tol]` with none below `-tol`, indefinite otherwise. The witness
/// carries the 1-based index of the first offending minor.
pub fn leading_minor_audit(g: &ArrayView2<f64>, tol: f64) -> Result<PsdVerdict> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "audit tolerance must be positive, got {tol}"
        )));
    }
    let minors = leading_minors(g)?;
    if let Some(idx) = minors.iter().position(|&m| m < -tol) {
        return Ok(PsdVerdict {
            classification: PsdClass::Indefinite,
            witness: Some(Witness::MinorIndex(idx + 1)),
            min_eigenvalue: None,
        });
    }
    if let Some(idx) = minors.iter().position(|&m| m.abs() <= tol) {
        return Ok(PsdVerdict {
            classification: PsdClass::PositiveSemidefiniteBoundary,
            witness: Some(Witness::MinorIndex(idx + 1)),
            min_eigenvalue: None,
        });
    }
    Ok(PsdVerdict {
        classification: PsdClass::PositiveDefinite,
        witness: None,
        min_eigenvalue: None,
    })
}

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi
/// rotations. Accuracy is close to machine precision for the n <= a few
/// hundred sizes this crate audits.
pub fn symmetric_eigenvalues(g: &ArrayView2<f64>) -> Result<Vec<f64>> {
    check_square_symmetric(g)?;
    let n = g.nrows();
    let mut a = g.to_owned();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[[i, j]] * a[[i, j]];
            }
        }
        if off.sqrt() <= 1e-14 * frob {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[p, k]] = a[[k, p]];
                    a[[k, q]] = s * akp + c * akq;
                    a[[q, k]] = a[[k, q]];
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi iteration did not converge within {MAX_JACOBI_SWEEPS} sweeps"
    )))
}

/// Classify a symmetric matrix by its minimum eigenvalue against the
/// threshold `tol * n * max|G|`.
pub fn eigen_audit(g: &ArrayView2<f64>, tol: f64) -> Result<PsdVerdict> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "audit tolerance must be positive, got {tol}"
        )));
    }
    let eigs = symmetric_eigenvalues(g)?;
    let min_eig = eigs[0];
    let threshold = tol * g.nrows() as f64 * g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let classification = if min_eig > threshold {
        PsdClass::PositiveDefinite
    } else if min_eig < -threshold {
        PsdClass::Indefinite
    } else {
        PsdClass::PositiveSemidefiniteBoundary
    };
    Ok(PsdVerdict {
        classification,
        witness: match classification {
            PsdClass::PositiveDefinite => None,
            _ => Some(Witness::Eigenvalue(min_eig)),
        },
        min_eigenvalue: Some(min_eig),
    })
}

/// Diagonal jitter schedule, as multiples of the mean diagonal entry.
#[derive(Debug, Clone)]
pub struct JitterPolicy {
    pub multipliers: Vec<f64>,
    pub audit_tol: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            multipliers: vec![0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2],
            audit_tol: 1e-12,
        }
    }
}

/// Walk the jitter schedule until `G + lambda I` audits positive-definite;
/// returns the regularized matrix and the lambda used (0 when the input is
/// already PD). Fails when even the largest jitter leaves the spectrum
/// negative.
pub fn jitter_regularize(g: &ArrayView2<f64>, policy: &JitterPolicy) -> Result<(Array2<f64>, f64)> {
    check_square_symmetric(g)?;
    let n = g.nrows();
    let mean_diag = (0..n).map(|i| g[[i, i]]).sum::<f64>() / n as f64;
    let scale = if mean_diag.abs() > 0.0 {
        mean_diag.abs()
    } else {
        1.0
    };
    let mut last_min = f64::NEG_INFINITY;
    for &m in &policy.multipliers {
        let lambda = m * scale;
        let mut jittered = g.to_owned();
        for i in 0..n {
            jittered[[i, i]] += lambda;
        }
        let verdict = eigen_audit(&jittered.view(), policy.audit_tol)?;
        if verdict.is_positive_definite() {
            return Ok((jittered, lambda));
        }
        last_min = verdict.min_eigenvalue.unwrap_or(f64::NEG_INFINITY);
    }
    Err(Error::RegularizationFailure {
        min_eigenvalue: last_min,
    })
}

/// One survey trial whose Gram had an eigenvalue below `-1e-6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyViolation {
    pub seed_offset: u64,
    pub n: usize,
    pub d: usize,
    pub sigma: Option<f64>,
    pub min_eig: f64,
}

/// Outcome of a randomized PSD survey. Identical seeds reproduce the
/// report byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub kernel: String,
    pub trials: usize,
    pub min_eigenvalue: f64,
    pub violations: Vec<SurveyViolation>,
}

/// Draw random point sets, build their Grams, and record the minimum
/// eigenvalue seen per trial.
///
/// Trial `t` gets its own `ChaCha8` stream seeded with a SplitMix64-style
/// mix of `(seed, t)` — plain `seed + t` would make adjacent master seeds
/// share all but one trial stream — and draws `n` in `1..=n_max`, `d` in
/// `1..=d_max`, standard normal coordinates, and (for width-carrying
/// kernels) a width from the 16-value power-of-two grid in place of the
/// spec's own width. Trials run concurrently; the report is assembled in
/// trial order.
pub fn randomized_psd_survey(
    spec: &KernelSpec,
    trials: usize,
    n_max: usize,
    d_max: usize,
    seed: u64,
) -> Result<SurveyReport> {
    survey_inner(spec, trials, n_max, d_max, seed, true)
}

/// Single-threaded twin of [`randomized_psd_survey`]; output is identical.
pub fn randomized_psd_survey_sequential(
    spec: &KernelSpec,
    trials: usize,
    n_max: usize,
    d_max: usize,
    seed: u64,
) -> Result<SurveyReport> {
    survey_inner(spec, trials, n_max, d_max, seed, false)
}

/// Decorrelate per-trial streams across master seeds with the SplitMix64
/// finalizer; `seed.wrapping_add(t)` alone would give master seeds `s` and
/// `s + 1` identical streams for all but one trial.
fn trial_seed(seed: u64, t: u64) -> u64 {
    let mut z = seed.wrapping_add((t.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn survey_inner(
    spec: &KernelSpec,
    trials: usize,
    n_max: usize,
    d_max: usize,
    seed: u64,
    parallel: bool,
) -> Result<SurveyReport> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "survey needs at least one trial".into(),
        ));
    }
    if n_max == 0 || d_max == 0 {
        return Err(Error::InvalidParameter(
            "survey bounds n_max and d_max must be at least 1".into(),
        ));
    }
    let grid = log2_grid();
    let outcomes: Vec<Result<(f64, Option<SurveyViolation>)>> =
        exec::map_indexed(trials, parallel, |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t as u64));
            let n = rng.gen_range(1..=n_max);
            let d = rng.gen_range(1..=d_max);
            let (trial_spec, sigma) = if spec.has_width() {
                let w = grid[rng.gen_range(0..grid.len())];
                (spec.with_width(w), Some(w))
            } else {
                (spec.clone(), None)
            };
            let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
            let gram = trial_spec.gram_sequential(&x.view())?;
            let eigs = symmetric_eigenvalues(&gram.values.view())?;
            let min_eig = eigs[0];
            let violation = (min_eig < VIOLATION_TOL).then_some(SurveyViolation {
                seed_offset: t as u64,
                n,
                d,
                sigma,
                min_eig,
            });
            Ok((min_eig, violation))
        });

    let mut min_eigenvalue = f64::INFINITY;
    let mut violations = Vec::new();
    for outcome in outcomes {
        let (min_eig, violation) = outcome?;
        min_eigenvalue = min_eigenvalue.min(min_eig);
        if let Some(v) = violation {
            violations.push(v);
        }
    }
    Ok(SurveyReport {
        kernel: spec.family_name().to_string(),
        trials,
        min_eigenvalue,
        violations,
    })
}
