//! Dataset ingestion, z-score standardization, the synthetic demo
//! generators, and JSON model persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::svc::SvcModel;
use crate::svr::SvrModel;

/// Classification labels (strictly ±1) or regression values.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Labels(Vec<f64>),
    Values(Vec<f64>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Labels(v) | Target::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            Target::Labels(v) | Target::Values(v) => v,
        }
    }
}

/// A feature matrix with its target column. Loaders and generators always
/// produce at least one row and finite entries; subsetting may produce an
/// empty view (useful for vacuous test splits).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub target: Target,
    pub feature_names: Option<Vec<String>>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(features: Array2<f64>, target: Target) -> Result<Self> {
        if features.nrows() != target.len() {
            return Err(Error::Shape(format!(
                "feature matrix has {} rows but target has {}",
                features.nrows(),
                target.len()
            )));
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature value {v}")));
        }
        match &target {
            Target::Labels(labels) => {
                if let Some(l) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
                    return Err(Error::Label(format!(
                        "classification labels must be exactly -1 or +1, got {l}"
                    )));
                }
            }
            Target::Values(values) => {
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Data(format!("non-finite target value {v}")));
                }
            }
        }
        Ok(Dataset {
            features,
            target,
            feature_names: None,
            provenance: "in-memory".to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(Error::Shape(format!(
                "subset index {bad} out of range for {} rows",
                self.n()
            )));
        }
        let mut features = Array2::zeros((indices.len(), self.d()));
        for (k, &i) in indices.iter().enumerate() {
            features.row_mut(k).assign(&self.features.row(i));
        }
        let pick = |v: &Vec<f64>| indices.iter().map(|&i| v[i]).collect();
        let target = match &self.target {
            Target::Labels(v) => Target::Labels(pick(v)),
            Target::Values(v) => Target::Values(pick(v)),
        };
        Ok(Dataset {
            features,
            target,
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelColumn {
    Last,
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Classification,
    Regression,
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub target_kind: TargetKind,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: LabelColumn::Last,
            has_header: true,
            target_kind: TargetKind::Classification,
        }
    }
}

/// Load a comma-delimited numeric dataset.
///
/// In classification mode, raw labels are mapped onto {−1, +1} by the
/// ascending order of the two distinct raw values (numeric order when every
/// label parses as a number, lexicographic otherwise); files already
/// labeled ±1 pass through unchanged.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .from_reader(BufReader::new(file));

    let header: Option<Vec<String>> = if options.has_header {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let label_index = |width: usize| -> Result<usize> {
        match &options.label_column {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Named(name) => {
                let header = header.as_ref().ok_or_else(|| {
                    Error::Format("a named label column requires a header row".to_string())
                })?;
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Format(format!("label column {name:?} not in header")))
            }
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row: row_idx + 1,
                message: format!("expected {w} columns, found {}", record.len()),
            });
        }
        if w < 2 {
            return Err(Error::Format(
                "need at least one feature column and one label column".to_string(),
            ));
        }
        let label_col = label_index(w)?;
        let mut row = Vec::with_capacity(w - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_col {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: row_idx + 1,
                message: format!("column {}: {cell:?} is not numeric", col + 1),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv contains no data rows"));
    }

    let d = rows[0].len();
    let mut features = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[[i, j]] = v;
        }
    }

    let target = match options.target_kind {
        TargetKind::Regression => {
            let values = raw_labels
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    cell.parse().map_err(|_| Error::Parse {
                        row: i + 1,
                        message: format!("target {cell:?} is not numeric"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Target::Values(values)
        }
        TargetKind::Classification => Target::Labels(map_labels(&raw_labels)?),
    };

    let feature_names = match &header {
        Some(h) => {
            let label_col = label_index(h.len()).unwrap_or(h.len() - 1);
            Some(
                h.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != label_col)
                    .map(|(_, name)| name.clone())
                    .collect(),
            )
        }
        None => None,
    };
    let mut ds = Dataset::new(features, target)?;
    ds.feature_names = feature_names;
    ds.provenance = format!("csv: {}", path.display());
    Ok(ds)
}

/// Ascending-order label mapping: lower raw value → −1, higher → +1.
fn map_labels(raw: &[String]) -> Result<Vec<f64>> {
    let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse().ok()).collect();
    let keys: Vec<String> = match &numeric {
        // normalize numeric labels so "1" and "1.0" coincide
        Some(values) => values.iter().map(|v| v.to_string()).collect(),
        None => raw.to_vec(),
    };
    let mut distinct: Vec<String> = keys.clone();
    distinct.sort_by(|a, b| match &numeric {
        Some(_) => a
            .parse::<f64>()
            .unwrap()
            .partial_cmp(&b.parse::<f64>().unwrap())
            .expect("parsed labels are finite"),
        None => a.cmp(b),
    });
    distinct.dedup();
    match distinct.len() {
        2 => Ok(keys
            .iter()
            .map(|k| if *k == distinct[0] { -1.0 } else { 1.0 })
            .collect()),
        1 => Err(Error::Label(format!(
            "classification data has a single distinct label {:?}",
            distinct[0]
        ))),
        n => Err(Error::Label(format!(
            "classification data must have exactly 2 distinct labels, found {n}: {:?}",
            &distinct[..n.min(5)]
        ))),
    }
}

/// Write the dataset as comma-delimited text with a header row; the target
/// goes in the last column. Floats are printed with enough digits to
/// round-trip exactly.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let names: Vec<String> = match &dataset.feature_names {
        Some(names) => names.clone(),
        None => (1..=dataset.d()).map(|j| format!("x{j}")).collect(),
    };
    let target_name = match dataset.target {
        Target::Labels(_) => "label",
        Target::Values(_) => "target",
    };
    let mut header = names;
    header.push(target_name.to_string());
    writer.write_record(&header)?;
    let target = dataset.target.as_slice();
    for i in 0..dataset.n() {
        let mut record: Vec<String> = dataset.features.row(i).iter().map(f64::to_string).collect();
        record.push(target[i].to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-feature training statistics for z-score scaling. Constant features
/// are flagged and passed through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl ScalingStats {
    pub fn d(&self) -> usize {
        self.mean.len()
    }

    /// Scale one row in place.
    pub fn apply_row(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.d() {
            return Err(Error::Shape(format!(
                "row has dimension {}, scaling expects {}",
                row.len(),
                self.d()
            )));
        }
        for (j, v) in row.iter_mut().enumerate() {
            if !self.constant[j] {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(())
    }
}

/// Threshold below which a feature's spread counts as zero (numerical
/// constancy, relative to the feature's magnitude).
const CONSTANT_STD_TOL: f64 = 1e-12;

/// Z-score both sets using statistics of the training set only (population
/// standard deviation).
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, ScalingStats)> {
    if train.n() == 0 {
        return Err(Error::EmptyInput("standardize needs training rows"));
    }
    if test.n() > 0 && test.d() != train.d() {
        return Err(Error::Shape(format!(
            "train has {} features but test has {}",
            train.d(),
            test.d()
        )));
    }
    let n = train.n() as f64;
    let d = train.d();
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    let mut constant = vec![false; d];
    for j in 0..d {
        let col = train.features.column(j);
        let m = col.sum() / n;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        let s = var.sqrt();
        mean[j] = m;
        if s <= CONSTANT_STD_TOL * (1.0 + m.abs()) {
            constant[j] = true;
            std[j] = 1.0;
        } else {
            std[j] = s;
        }
    }
    let stats = ScalingStats {
        mean,
        std,
        constant,
    };
    let transform = |ds: &Dataset| -> Result<Dataset> {
        let mut out = ds.clone();
        for i in 0..out.n() {
            let mut row: Vec<f64> = out.features.row(i).to_vec();
            stats.apply_row(&mut row)?;
            for (j, v) in row.into_iter().enumerate() {
                out.features[[i, j]] = v;
            }
        }
        Ok(out)
    };
    Ok((transform(train)?, transform(test)?, stats))
}

const CIRCLE_INNER_RADIUS: f64 = 1.0;
const CIRCLE_OUTER_RADIUS: f64 = 3.0;
const CIRCLE_NOISE: f64 = 0.2;

/// Two concentric rings: the first n/2 rows orbit radius 1 with label +1,
/// the rest orbit radius 3 with label −1. Angles are uniform and radii
/// carry Gaussian noise of scale 0.2.
pub fn gen_circles(n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "circles generator needs an even n >= 4, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, CIRCLE_NOISE).expect("constant scale is valid");
    let half = n / 2;
    let mut features = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let base = if i < half {
            CIRCLE_INNER_RADIUS
        } else {
            CIRCLE_OUTER_RADIUS
        };
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = base + noise.sample(&mut rng);
        features[[i, 0]] = radius * angle.cos();
        features[[i, 1]] = radius * angle.sin();
        labels.push(if i < half { 1.0 } else { -1.0 });
    }
    let mut ds = Dataset::new(features, Target::Labels(labels))?;
    ds.feature_names = Some(vec!["x1".to_string(), "x2".to_string()]);
    ds.provenance = format!("synthetic circles (n={n}, seed={seed})");
    Ok(ds)
}

/// The demo regression target `sin(x) * exp(-0.2 x)`.
pub fn sine_curve(x: f64) -> f64 {
    x.sin() * (-0.2 * x).exp()
}

/// One draw of the regression demo: inputs, noisy targets, and the
/// noiseless curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSample {
    pub x: Vec<f64>,
    pub y_noisy: Vec<f64>,
    pub y_true: Vec<f64>,
}

impl SineSample {
    /// Single-feature dataset holding the noisy targets.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let features =
            Array2::from_shape_vec((self.x.len(), 1), self.x.clone()).expect("length matches");
        let mut ds = Dataset::new(features, Target::Values(self.y_noisy.clone()))?;
        ds.feature_names = Some(vec!["x".to_string()]);
        ds.provenance = "synthetic sine".to_string();
        Ok(ds)
    }
}

/// `n` points equally spaced on [0, 10] with Gaussian target noise of the
/// given scale (exactly zero noise reproduces the curve bit-for-bit).
pub fn gen_svr_sine(n: usize, seed: u64, noise_scale: f64) -> Result<SineSample> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "sine generator needs n >= 2, got {n}"
        )));
    }
    if !(noise_scale.is_finite() && noise_scale >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be non-negative, got {noise_scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y_true = Vec::with_capacity(n);
    let mut y_noisy = Vec::with_capacity(n);
    let step = 10.0 / (n - 1) as f64;
    for i in 0..n {
        let xi = step * i as f64;
        let yi = sine_curve(xi);
        x.push(xi);
        y_true.push(yi);
        y_noisy.push(yi);
    }
    if noise_scale > 0.0 {
        let noise = Normal::new(0.0, noise_scale).expect("validated scale");
        for y in y_noisy.iter_mut() {
            *y += noise.sample(&mut rng);
        }
    }
    Ok(SineSample { x, y_noisy, y_true })
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model schema. `epsilon` is present exactly when the model is a
/// regressor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub kernel: KernelSpec,
    pub bias: f64,
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scaling: Option<ScalingStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jitter_lambda: Option<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coef: Vec<f64>,
}

/// A trained model of either kind, as stored on disk.
#[derive(Debug, Clone)]
pub enum Model {
    Svc(SvcModel),
    Svr(SvrModel),
}

impl Model {
    pub fn kernel(&self) -> &KernelSpec {
        match self {
            Model::Svc(m) => &m.spec,
            Model::Svr(m) => &m.spec,
        }
    }
}

fn vectors_to_rows(sv: &Array2<f64>) -> Vec<Vec<f64>> {
    (0..sv.nrows()).map(|i| sv.row(i).to_vec()).collect()
}

fn rows_to_vectors(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::Format(format!(
            "ragged support vectors: expected dimension {d}, found {}",
            bad.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), d), flat)
        .map_err(|e| Error::Format(format!("support vector shape: {e}")))
}

impl From<&Model> for ModelFile {
    fn from(model: &Model) -> Self {
        match model {
            Model::Svc(m) => ModelFile {
                format_version: MODEL_FORMAT_VERSION,
                kernel: m.spec.clone(),
                bias: m.bias,
                c: m.c,
                epsilon: None,
                scaling: m.scaling.clone(),
                jitter_lambda: m.jitter_lambda,
                support_vectors: vectors_to_rows(&m.support_vectors),
                dual_coef: m.dual_coef.clone(),
            },
            Model::Svr(m) => ModelFile {
                format_version: MODEL_FORMAT_VERSION,
                kernel: m.spec.clone(),
                bias: m.bias,
                c: m.c,
                epsilon: Some(m.epsilon),
                scaling: m.scaling.clone(),
                jitter_lambda: m.jitter_lambda,
                support_vectors: vectors_to_rows(&m.support_vectors),
                dual_coef: m.dual_coef.clone(),
            },
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Model> {
        if file.dual_coef.len() != file.support_vectors.len() {
            return Err(Error::Format(format!(
                "{} coefficients for {} support vectors",
                file.dual_coef.len(),
                file.support_vectors.len()
            )));
        }
        let support_vectors = rows_to_vectors(&file.support_vectors)?;
        Ok(match file.epsilon {
            Some(epsilon) => Model::Svr(SvrModel {
                spec: file.kernel,
                support_vectors,
                dual_coef: file.dual_coef,
                bias: file.bias,
                epsilon,
                c: file.c,
                scaling: file.scaling,
                jitter_lambda: file.jitter_lambda,
                support_indices: vec![],
            }),
            None => Model::Svc(SvcModel {
                spec: file.kernel,
                support_vectors,
                dual_coef: file.dual_coef,
                bias: file.bias,
                c: file.c,
                scaling: file.scaling,
                jitter_lambda: file.jitter_lambda,
                support_indices: vec![],
            }),
        })
    }
}

/// Serialize a model to versioned JSON.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let file = ModelFile::from(model);
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Load a model saved by [`save_model`], rejecting unknown format versions
/// before interpreting the rest of the document.
pub fn load_model(path: &Path) -> Result<Model> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Format("model file has no format_version".to_string()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::Format(format!(
            "unsupported model format version {version} (expected {MODEL_FORMAT_VERSION})"
        )));
    }
    let file: ModelFile = serde_json::from_value(value)?;
    Model::try_from(file)
}
