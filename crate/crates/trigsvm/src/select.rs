//! Parameter selection: the power-of-two grid, the compact/sparse distance
//! heuristic, stratified splitting, and cross-validated grid search.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::exec;
use crate::kernel::KernelSpec;
use crate::svc::{fit_svc, SolverConfig};

/// Max pairwise distance at or below which a dataset counts as compact.
pub const COMPACT_MAX_DISTANCE: f64 = 10.0;

/// Exact-pairwise cutoff: classes larger than this are subsampled (seeded)
/// before the O(n²) distance scan.
const DISTANCE_SAMPLE_CAP: usize = 20_000;
const DISTANCE_SAMPLE_SEED: u64 = 0x5eed;

/// The 16-value search grid `{2^-5, 2^-4, …, 2^10}`, ascending. Used for
/// both the box parameter and kernel widths.
pub fn log2_grid() -> Vec<f64> {
    (-5..=10).map(|e| (e as f64).exp2()).collect()
}

/// Pairwise Euclidean distance extremes within one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistance {
    pub label: f64,
    pub min_pairwise: f64,
    pub max_pairwise: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    /// One entry per class, ascending by label.
    pub classes: Vec<ClassDistance>,
}

impl DistanceStats {
    pub fn overall_max(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| c.max_pairwise)
            .fold(0.0, f64::max)
    }
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Group row indices by class label, ascending by label value.
fn class_groups(dataset: &Dataset) -> Result<Vec<(f64, Vec<usize>)>> {
    let labels = match &dataset.target {
        Target::Labels(l) => l,
        Target::Values(_) => {
            return Err(Error::Label(
                "class statistics need classification labels".into(),
            ))
        }
    };
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((label, vec![i])),
        }
    }
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("labels are finite"));
    Ok(groups)
}

/// Min/max pairwise Euclidean distance per class, exact up to
/// [`DISTANCE_SAMPLE_CAP`] points per class and on a seeded subsample
/// beyond that. A singleton class reports (0, 0).
pub fn class_distance_stats(dataset: &Dataset) -> Result<DistanceStats> {
    distance_stats_inner(dataset, true)
}

/// Single-threaded twin of [`class_distance_stats`]; output is identical.
pub fn class_distance_stats_sequential(dataset: &Dataset) -> Result<DistanceStats> {
    distance_stats_inner(dataset, false)
}

fn distance_stats_inner(dataset: &Dataset, parallel: bool) -> Result<DistanceStats> {
    if dataset.n() == 0 {
        return Err(Error::EmptyInput("distance stats need at least one row"));
    }
    let mut classes = Vec::new();
    for (label, mut indices) in class_groups(dataset)? {
        let sample_count = indices.len();
        if indices.len() > DISTANCE_SAMPLE_CAP {
            let mut rng = ChaCha8Rng::seed_from_u64(DISTANCE_SAMPLE_SEED);
            indices.shuffle(&mut rng);
            indices.truncate(DISTANCE_SAMPLE_CAP);
        }
        let m = indices.len();
        let features = &dataset.features;
        let idx = &indices;
        let extremes = exec::map_indexed(m, parallel, |i| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for j in (i + 1)..m {
                let d2 = squared_distance(features.row(idx[i]), features.row(idx[j]));
                lo = lo.min(d2);
                hi = hi.max(d2);
            }
            (lo, hi)
        });
        let lo = extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let hi = extremes
            .iter()
            .map(|e| e.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let (min_pairwise, max_pairwise) = if m < 2 {
            (0.0, 0.0)
        } else {
            (lo.sqrt(), hi.sqrt())
        };
        classes.push(ClassDistance {
            label,
            min_pairwise,
            max_pairwise,
            sample_count,
        });
    }
    Ok(DistanceStats { classes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaRegime {
    Compact,
    Sparse,
}

impl std::fmt::Display for SigmaRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SigmaRegime::Compact => "compact",
            SigmaRegime::Sparse => "sparse",
        })
    }
}

/// Width-grid recommendation: a compact dataset (max pairwise distance at
/// most `threshold`) favors large widths, a sparse one small widths.
pub fn recommend_sigma_range_with_threshold(
    stats: &DistanceStats,
    threshold: f64,
) -> (SigmaRegime, Vec<f64>) {
    let grid = log2_grid();
    if stats.overall_max() <= threshold {
        (SigmaRegime::Compact, grid[8..].to_vec())
    } else {
        (SigmaRegime::Sparse, grid[..8].to_vec())
    }
}

/// [`recommend_sigma_range_with_threshold`] at the default threshold
/// [`COMPACT_MAX_DISTANCE`].
pub fn recommend_sigma_range(stats: &DistanceStats) -> (SigmaRegime, Vec<f64>) {
    recommend_sigma_range_with_threshold(stats, COMPACT_MAX_DISTANCE)
}

/// Per-group training quotas: floor of the ideal share, then leftover seats
/// by largest fractional remainder (never exceeding a group's size).
fn largest_remainder_quotas(group_sizes: &[usize], fraction: f64, target: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = Vec::with_capacity(group_sizes.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(group_sizes.len());
    let mut assigned = 0usize;
    for (g, &size) in group_sizes.iter().enumerate() {
        let ideal = fraction * size as f64;
        let base = (ideal.floor() as usize).min(size);
        quotas.push(base);
        assigned += base;
        remainders.push((g, ideal - base as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut extra = target.saturating_sub(assigned);
    while extra > 0 {
        let mut progressed = false;
        for &(g, _) in &remainders {
            if extra == 0 {
                break;
            }
            if quotas[g] < group_sizes[g] {
                quotas[g] += 1;
                extra -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    quotas
}

/// Stratified train/test split with `|train| = round(fraction * n)`.
/// Classification data is stratified per label; regression data is split
/// as a single group. Both returned index sets are ascending.
pub fn holdout_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if dataset.n() == 0 {
        return Err(Error::EmptyInput("holdout split needs at least one row"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let groups: Vec<Vec<usize>> = match &dataset.target {
        Target::Labels(_) => class_groups(dataset)?
            .into_iter()
            .map(|(_, idx)| idx)
            .collect(),
        Target::Values(_) => vec![(0..dataset.n()).collect()],
    };
    let target = (train_fraction * dataset.n() as f64).round() as usize;
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quotas = largest_remainder_quotas(&sizes, train_fraction, target);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::with_capacity(target);
    let mut test_idx = Vec::with_capacity(dataset.n() - target);
    for (group, &quota) in groups.iter().zip(&quotas) {
        let mut shuffled = group.clone();
        shuffled.shuffle(&mut rng);
        train_idx.extend_from_slice(&shuffled[..quota]);
        test_idx.extend_from_slice(&shuffled[quota..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((dataset.subset(&train_idx)?, dataset.subset(&test_idx)?))
}

/// Fraction of predictions matching the labels exactly.
pub fn accuracy(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("accuracy needs at least one prediction"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions against {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Shuffled round-robin fold assignment per class; fold `k` holds the
/// indices whose turn is `k`, each sorted ascending. Every class must have
/// at least `folds` members.
pub fn stratified_folds(dataset: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    let groups = class_groups(dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); folds];
    for (label, group) in groups {
        if group.len() < folds {
            return Err(Error::Protocol(format!(
                "class {label} has {} samples, fewer than {folds} folds",
                group.len()
            )));
        }
        let mut shuffled = group;
        shuffled.shuffle(&mut rng);
        for (turn, idx) in shuffled.into_iter().enumerate() {
            assignment[turn % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub sigma: f64,
    pub mean_cv_accuracy: f64,
    pub fold_std: f64,
    pub sv_count_mean: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridReport {
    /// C-major, sigma-minor, in the order the grids were given.
    pub cells: Vec<GridCell>,
    /// Index of the winning cell: highest mean accuracy, ties broken by
    /// smaller C, then smaller sigma.
    pub best: usize,
    pub folds: usize,
    pub seed: u64,
    pub kernel_family: String,
}

impl GridReport {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    /// CSV rendering with columns `C,sigma,mean_acc,std,mean_sv`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("C,sigma,mean_acc,std,mean_sv\n");
        for cell in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cell.c, cell.sigma, cell.mean_cv_accuracy, cell.fold_std, cell.sv_count_mean
            ));
        }
        out
    }
}

/// Cross-validated grid search over `(C, sigma)` pairs.
///
/// `template` fixes the kernel family and any width-free parameters; each
/// cell re-widths it via [`KernelSpec::with_width`]. Folds are drawn once
/// and shared by every cell, so cells differ only in parameters. Cells are
/// scored concurrently and reported in grid order. A fold whose solve
/// fails to converge scores zero for that fold rather than aborting the
/// search; any other error aborts.
pub fn grid_search(
    dataset: &Dataset,
    template: &KernelSpec,
    c_grid: &[f64],
    sigma_grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<GridReport> {
    if c_grid.is_empty() || sigma_grid.is_empty() {
        return Err(Error::EmptyInput("grid search needs non-empty grids"));
    }
    if !template.has_width() && sigma_grid.len() > 1 {
        return Err(Error::InvalidParameter(format!(
            "kernel family {} has no width parameter; pass a single placeholder sigma",
            template.family_name()
        )));
    }
    let fold_sets = stratified_folds(dataset, folds, seed)?;
    let mut splits = Vec::with_capacity(folds);
    for held_out in &fold_sets {
        let train_idx: Vec<usize> = (0..dataset.n()).filter(|i| !held_out.contains(i)).collect();
        splits.push((dataset.subset(&train_idx)?, dataset.subset(held_out)?));
    }

    let pairs: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| sigma_grid.iter().map(move |&s| (c, s)))
        .collect();
    let splits_ref = &splits;
    let cells: Vec<Result<GridCell>> = exec::map_indexed(pairs.len(), true, |cell_idx| {
        let (c, sigma) = pairs[cell_idx];
        let spec = template.with_width(sigma);
        let config = SolverConfig {
            c,
            seed,
            ..SolverConfig::default()
        };
        let mut fold_acc = Vec::with_capacity(splits_ref.len());
        let mut sv_total = 0usize;
        for (train, test) in splits_ref {
            let train_labels = match &train.target {
                Target::Labels(l) => l,
                Target::Values(_) => unreachable!("stratified folds imply labels"),
            };
            let test_labels = match &test.target {
                Target::Labels(l) => l,
                Target::Values(_) => unreachable!("stratified folds imply labels"),
            };
            match fit_svc(&train.features.view(), train_labels, &spec, &config) {
                Ok(model) => {
                    let predictions = model.predict_batch(&test.features.view())?;
                    fold_acc.push(accuracy(&predictions, test_labels)?);
                    sv_total += model.dual_coef.len();
                }
                Err(Error::Convergence { .. }) => fold_acc.push(0.0),
                Err(e) => return Err(e),
            }
        }
        let k = fold_acc.len() as f64;
        let mean = fold_acc.iter().sum::<f64>() / k;
        let var = fold_acc
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / k;
        Ok(GridCell {
            c,
            sigma,
            mean_cv_accuracy: mean,
            fold_std: var.sqrt(),
            sv_count_mean: sv_total as f64 / k,
        })
    });
    let cells: Vec<GridCell> = cells.into_iter().collect::<Result<_>>()?;

    let mut best = 0usize;
    for (i, cell) in cells.iter().enumerate().skip(1) {
        let incumbent = &cells[best];
        let wins = cell.mean_cv_accuracy > incumbent.mean_cv_accuracy
            || (cell.mean_cv_accuracy == incumbent.mean_cv_accuracy
                && (cell.c < incumbent.c
                    || (cell.c == incumbent.c && cell.sigma < incumbent.sigma)));
        if wins {
            best = i;
        }
    }
    Ok(GridReport {
        cells,
        best,
        folds,
        seed,
        kernel_family: template.family_name().to_string(),
    })
}
