//! Dataset ingestion, splitting, scaling, and synthetic data.
//!
//! Everything downstream assumes a dense `f64` feature matrix and integer
//! class labels in `0..n_classes`. The CSV reader is deliberately small: one
//! header row, comma-separated numeric features, and a label column that is
//! either named explicitly or taken to be the last column. Labels may be
//! non-negative integers (used as-is) or arbitrary strings (mapped to class
//! ids in order of first appearance).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Labeled dataset: an `m x n` feature matrix plus one class id per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
}

impl Dataset {
    /// Validates that labels match the feature rows and stay in range.
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if n_classes == 0 {
            return Err(Error::Data("n_classes must be positive".into()));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Shape(format!(
                "{} feature columns but {} names",
                features.cols(),
                feature_names.len()
            )));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(Error::Label {
                index,
                label,
                classes: n_classes,
            });
        }
        Ok(Self {
            features,
            labels,
            n_classes,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Samples per class, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let n = self.n_features();
        let mut entries = Vec::with_capacity(indices.len() * n);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            entries.extend_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features: Matrix::from_raw(indices.len(), n, entries),
            labels,
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Serializes the dataset back to CSV with the stored header plus a
    /// final `label` column. Used to bundle generated datasets.
    pub fn to_csv_string(&self, class_names: Option<&[String]>) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("label\n");
        for i in 0..self.len() {
            for v in self.features.row(i) {
                // Shortest round-trip float formatting keeps files compact.
                let _ = write!(out, "{v},");
            }
            match class_names {
                Some(names) => out.push_str(&names[self.labels[i]]),
                None => {
                    let _ = write!(out, "{}", self.labels[i]);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Upper bound on class count when integer labels are taken at face value;
/// anything larger is almost certainly a mis-specified label column.
const MAX_DIRECT_CLASSES: usize = 65_536;

/// Loads a CSV file with a header row. `label_column` selects the label by
/// header name; when `None` the last column is used.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<Dataset> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| Error::LoadIo {
        path: display.clone(),
        source,
    })?;

    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header_line = lines.next().filter(|l| !l.trim().is_empty()).ok_or_else(|| {
        Error::LoadEmptyBody {
            path: display.clone(),
        }
    })?;
    let header: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();

    let label_idx = match label_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::LoadNoLabelColumn {
                path: display.clone(),
                name: name.to_string(),
            })?,
        None => header.len() - 1,
    };
    if header.len() < 2 {
        return Err(Error::Data(format!(
            "{display}: need at least one feature column and one label column"
        )));
    }

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut entries: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    // Row numbers in errors are 1-based over data rows (header excluded).
    let mut row = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::LoadRaggedRow {
                path: display,
                row,
                expected: header.len(),
                got: fields.len(),
            });
        }
        for (col, field) in fields.iter().enumerate() {
            let field = field.trim();
            if col == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::LoadBadCell {
                path: display.clone(),
                row,
                column: header[col].clone(),
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::LoadNonFinite {
                    path: display.clone(),
                    row,
                    column: header[col].clone(),
                });
            }
            entries.push(value);
        }
    }
    if row == 0 {
        return Err(Error::LoadEmptyBody { path: display });
    }

    let (labels, n_classes) = encode_labels(&raw_labels);
    let features = Matrix::from_raw(row, header.len() - 1, entries);
    Dataset::new(features, labels, n_classes, feature_names)
}

/// Integer labels are used directly (class count = max + 1); anything else
/// is mapped to ids in order of first appearance.
fn encode_labels(raw: &[String]) -> (Vec<usize>, usize) {
    let as_ints: Option<Vec<usize>> = raw
        .iter()
        .map(|s| s.parse::<usize>().ok().filter(|&v| v < MAX_DIRECT_CLASSES))
        .collect();
    if let Some(ints) = as_ints {
        let n_classes = ints.iter().max().copied().unwrap_or(0) + 1;
        return (ints, n_classes);
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(raw.len());
    for s in raw {
        let next = seen.len();
        let id = *seen.entry(s.as_str()).or_insert(next);
        labels.push(id);
    }
    (labels, seen.len())
}

/// Stratified train/test split.
///
/// Each class contributes `round(count * test_fraction)` samples to the test
/// set, at least one when the class has two or more samples. Singleton
/// classes stay in the training set (with a warning) so the model can still
/// learn them.
pub fn train_test_split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if data.is_empty() {
        return Err(Error::Data("cannot split an empty dataset".into()));
    }
    if !(0.0..1.0).contains(&test_fraction) || !test_fraction.is_finite() {
        return Err(Error::Data(format!(
            "test_fraction must be in [0, 1), got {test_fraction}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx: Vec<usize> = Vec::new();
    let mut test_idx: Vec<usize> = Vec::new();
    for class in 0..data.n_classes {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.len() == 1 {
            log::warn!("class {class} has a single sample; keeping it in the training set");
            train_idx.push(members[0]);
            continue;
        }
        members.shuffle(&mut rng);
        let mut take = (members.len() as f64 * test_fraction).round() as usize;
        if test_fraction > 0.0 {
            take = take.clamp(1, members.len() - 1);
        }
        test_idx.extend_from_slice(&members[..take]);
        train_idx.extend_from_slice(&members[take..]);
    }
    if train_idx.is_empty() {
        return Err(Error::Data(
            "split left the training set empty; lower test_fraction".into(),
        ));
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}

/// Per-column affine scaler fitted on training data.
#[derive(Debug, Clone)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub fitted_rows: usize,
}

impl Scaler {
    /// Fits column means and population standard deviations.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let m = data.len();
        if m == 0 {
            return Err(Error::Data("cannot fit a scaler on an empty dataset".into()));
        }
        let n = data.n_features();
        let mut means = vec![0.0; n];
        for i in 0..m {
            for (mean, &v) in means.iter_mut().zip(data.features.row(i)) {
                *mean += v;
            }
        }
        means.iter_mut().for_each(|v| *v /= m as f64);
        let mut vars = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                let d = data.features.get(i, j) - means[j];
                vars[j] += d * d;
            }
        }
        let stds = vars.iter().map(|v| (v / m as f64).sqrt()).collect();
        Ok(Self {
            means,
            stds,
            fitted_rows: m,
        })
    }

    /// Near-constant columns (std below this) are zeroed rather than divided.
    pub const MIN_STD: f64 = 1e-12;

    /// Applies `(x - mean) / std` per column; constant columns map to 0.
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_features() != self.means.len() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} columns, dataset has {}",
                self.means.len(),
                data.n_features()
            )));
        }
        let mut out = data.clone();
        for i in 0..out.len() {
            let row = out.features.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                if self.stds[j] < Self::MIN_STD {
                    *v = 0.0;
                } else {
                    *v = (*v - self.means[j]) / self.stds[j];
                }
            }
        }
        Ok(out)
    }
}

/// Fits on `train`, applies to both splits.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, Scaler)> {
    let scaler = Scaler::fit(train)?;
    let train_s = scaler.transform(train)?;
    let test_s = scaler.transform(test)?;
    Ok((train_s, test_s, scaler))
}

/// One mini-batch, as row indices into the parent dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub indices: Vec<usize>,
}

/// Splits `0..m` into contiguous batches of `batch_size` (last one may be
/// short). With `shuffle_seed`, the index order is permuted first; batches
/// are still taken contiguously from the permuted order, so a fixed seed
/// gives a fixed batch sequence.
pub fn minibatches(m: usize, batch_size: usize, shuffle_seed: Option<u64>) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Data("batch_size must be positive".into()));
    }
    if m == 0 {
        return Err(Error::Data("cannot batch an empty dataset".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok(order
        .chunks(batch_size)
        .map(|chunk| Batch {
            indices: chunk.to_vec(),
        })
        .collect())
}

/// Gaussian blob dataset: class `c` is centered at `separation * e_{c mod dim}`
/// with isotropic noise. Rows are class-major (all of class 0, then class 1,
/// ...), so labels are deterministic and features depend only on `seed`.
pub fn synthetic_blobs(
    per_class: usize,
    n_classes: usize,
    dim: usize,
    separation: f64,
    noise_std: f64,
    seed: u64,
) -> Result<Dataset> {
    if per_class == 0 || n_classes == 0 || dim == 0 {
        return Err(Error::Data(
            "per_class, n_classes, and dim must all be positive".into(),
        ));
    }
    if !separation.is_finite() || !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::Data(format!(
            "separation {separation} and noise_std {noise_std} must be finite, noise_std >= 0"
        )));
    }
    let noise = Normal::new(0.0, noise_std.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Data(format!("bad noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = per_class * n_classes;
    let mut entries = Vec::with_capacity(m * dim);
    let mut labels = Vec::with_capacity(m);
    for class in 0..n_classes {
        let axis = class % dim;
        for _ in 0..per_class {
            for j in 0..dim {
                let center = if j == axis { separation } else { 0.0 };
                let sample: f64 = if noise_std == 0.0 { 0.0 } else { noise.sample(&mut rng) };
                entries.push(center + sample);
            }
            labels.push(class);
        }
    }
    let feature_names = (0..dim).map(|j| format!("x{j}")).collect();
    Dataset::new(Matrix::from_raw(m, dim, entries), labels, n_classes, feature_names)
}
