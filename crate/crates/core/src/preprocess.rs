//! Feature scaling, label encoding and stratified train/validation splits.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class '{class}' has {count} sample(s); a stratified split needs at least 2")]
    ClassTooSmall { class: String, count: usize },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("validation fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("inconsistent dataset: {0}")]
    InvalidDataset(String),
}

/// Feature matrix with integer-encoded labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    label_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        label_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self, PreprocessError> {
        if features.nrows() != labels.len() {
            return Err(PreprocessError::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(PreprocessError::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(PreprocessError::InvalidDataset(format!(
                "label index {bad} but only {} label names",
                label_names.len()
            )));
        }
        Ok(Dataset {
            features,
            labels,
            label_names,
            feature_names,
        })
    }

    /// Builds a dataset from text labels; the vocabulary is the sorted set of
    /// distinct labels.
    pub fn from_text_labels(
        features: Array2<f64>,
        labels: &[String],
        feature_names: Vec<String>,
    ) -> Result<Self, PreprocessError> {
        let (encoded, names) = encode_labels(labels);
        Dataset::new(features, encoded, names, feature_names)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features
            .row(i)
            .to_slice()
            .expect("dataset rows are contiguous")
    }

    /// Number of rows of each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order, with the same vocabularies.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices).as_standard_layout().to_owned(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    fn with_features(&self, features: Array2<f64>) -> Dataset {
        Dataset {
            features,
            labels: self.labels.clone(),
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Maps text labels to indices into their sorted distinct values.
pub fn encode_labels(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = labels.to_vec();
    names.sort();
    names.dedup();
    let encoded = labels
        .iter()
        .map(|l| names.binary_search(l).expect("label is in its own vocabulary"))
        .collect();
    (encoded, names)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    #[default]
    Standard,
    MinMax,
}

/// Per-feature statistics of a fitted scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalerParams {
    /// Mean and population standard deviation.
    Standard { mean: Vec<f64>, std: Vec<f64> },
    MinMax { min: Vec<f64>, max: Vec<f64> },
}

impl ScalerParams {
    pub fn kind(&self) -> ScalerKind {
        match self {
            ScalerParams::Standard { .. } => ScalerKind::Standard,
            ScalerParams::MinMax { .. } => ScalerKind::MinMax,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ScalerParams::Standard { mean, .. } => mean.len(),
            ScalerParams::MinMax { min, .. } => min.len(),
        }
    }

    fn scale_value(&self, j: usize, x: f64) -> f64 {
        match self {
            ScalerParams::Standard { mean, std } => {
                if std[j] == 0.0 {
                    0.0
                } else {
                    (x - mean[j]) / std[j]
                }
            }
            ScalerParams::MinMax { min, max } => {
                let range = max[j] - min[j];
                if range == 0.0 {
                    0.0
                } else {
                    (x - min[j]) / range
                }
            }
        }
    }

    /// Scales a single feature row.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, PreprocessError> {
        if row.len() != self.n_features() {
            return Err(PreprocessError::DimensionMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &x)| self.scale_value(j, x))
            .collect())
    }
}

/// Fits per-feature statistics on the given rows.
pub fn fit_scaler(data: &Dataset, kind: ScalerKind) -> Result<ScalerParams, PreprocessError> {
    if data.n_samples() == 0 {
        return Err(PreprocessError::EmptyDataset);
    }
    let n = data.n_samples() as f64;
    let columns = data.features.columns();
    Ok(match kind {
        ScalerKind::Standard => {
            let mean: Vec<f64> = columns.into_iter().map(|c| c.sum() / n).collect();
            let std = data
                .features
                .columns()
                .into_iter()
                .zip(&mean)
                .map(|(c, m)| (c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
                .collect();
            ScalerParams::Standard { mean, std }
        }
        ScalerKind::MinMax => {
            let (min, max) = columns
                .into_iter()
                .map(|c| {
                    c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    })
                })
                .unzip();
            ScalerParams::MinMax { min, max }
        }
    })
}

/// Applies fitted scaler statistics; labels pass through unchanged.
pub fn apply_scaler(data: &Dataset, params: &ScalerParams) -> Result<Dataset, PreprocessError> {
    if data.n_features() != params.n_features() {
        return Err(PreprocessError::DimensionMismatch {
            expected: params.n_features(),
            got: data.n_features(),
        });
    }
    let mut scaled = data.features.clone();
    for mut row in scaled.rows_mut() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = params.scale_value(j, *x);
        }
    }
    Ok(data.with_features(scaled))
}

/// Row indices of a stratified train/validation partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

/// Chooses `round(val_fraction * count)` validation rows per class (capped so
/// every class keeps a training row) with a seeded shuffle.
///
/// Both index lists come back in ascending order.
pub fn stratified_split_indices(
    data: &Dataset,
    val_fraction: f64,
    seed: u64,
) -> Result<SplitIndices, PreprocessError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(PreprocessError::InvalidFraction(val_fraction));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes()];
    for (i, &l) in data.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    if let Some((c, rows)) = by_class.iter().enumerate().find(|(_, rows)| rows.len() == 1) {
        return Err(PreprocessError::ClassTooSmall {
            class: data.label_names[c].clone(),
            count: rows.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = SplitIndices {
        train: Vec::with_capacity(data.n_samples()),
        val: Vec::new(),
    };
    for mut rows in by_class.into_iter().filter(|r| !r.is_empty()) {
        rows.shuffle(&mut rng);
        let n_val = ((val_fraction * rows.len() as f64).round() as usize).min(rows.len() - 1);
        split.val.extend_from_slice(&rows[..n_val]);
        split.train.extend_from_slice(&rows[n_val..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    Ok(split)
}

/// Stratified `(train, val)` partition of a dataset.
pub fn stratified_split(
    data: &Dataset,
    val_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), PreprocessError> {
    let split = stratified_split_indices(data, val_fraction, seed)?;
    Ok((data.select(&split.train), data.select(&split.val)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dataset(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Dataset {
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        let label_names = (0..n_classes).map(|c| format!("c{c}")).collect();
        Dataset::new(features, labels, label_names, names).unwrap()
    }

    #[test]
    fn standard_fit() {
        let d = dataset(array![[1.0], [3.0]], vec![0, 0], 1);
        let p = fit_scaler(&d, ScalerKind::Standard).unwrap();
        assert_eq!(
            p,
            ScalerParams::Standard {
                mean: vec![2.0],
                std: vec![1.0]
            }
        );
    }

    #[test]
    fn minmax_fit() {
        let d = dataset(array![[5.0, 0.0], [5.0, 10.0], [5.0, 4.0]], vec![0, 0, 0], 1);
        let p = fit_scaler(&d, ScalerKind::MinMax).unwrap();
        assert_eq!(
            p,
            ScalerParams::MinMax {
                min: vec![5.0, 0.0],
                max: vec![5.0, 10.0]
            }
        );
        let scaled = apply_scaler(&d, &p).unwrap();
        assert_eq!(scaled.features(), &array![[0.0, 0.0], [0.0, 1.0], [0.0, 0.4]]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let d = dataset(array![[7.0], [7.0]], vec![0, 0], 1);
        for kind in [ScalerKind::Standard, ScalerKind::MinMax] {
            let p = fit_scaler(&d, kind).unwrap();
            let s = apply_scaler(&d, &p).unwrap();
            assert!(s.features().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn scaler_errors() {
        let d = dataset(Array2::zeros((0, 2)), vec![], 1);
        assert_eq!(fit_scaler(&d, ScalerKind::Standard), Err(PreprocessError::EmptyDataset));
        let d = dataset(array![[1.0, 2.0]], vec![0], 1);
        let p = fit_scaler(&d, ScalerKind::Standard).unwrap();
        let wide = dataset(array![[1.0, 2.0, 3.0]], vec![0], 1);
        assert_eq!(
            apply_scaler(&wide, &p),
            Err(PreprocessError::DimensionMismatch { expected: 2, got: 3 })
        );
        assert!(p.transform_row(&[1.0]).is_err());
    }

    #[test]
    fn label_encoding_is_sorted() {
        let labels: Vec<String> = ["jazz", "blues", "jazz"].iter().map(|s| s.to_string()).collect();
        let (enc, names) = encode_labels(&labels);
        assert_eq!(names, vec!["blues", "jazz"]);
        assert_eq!(enc, vec![1, 0, 1]);
    }

    #[test]
    fn dataset_validation() {
        let bad = Dataset::new(array![[1.0]], vec![3], vec!["a".into()], vec!["f".into()]);
        assert!(matches!(bad, Err(PreprocessError::InvalidDataset(_))));
        let bad = Dataset::new(array![[1.0]], vec![0, 0], vec!["a".into()], vec!["f".into()]);
        assert!(matches!(bad, Err(PreprocessError::InvalidDataset(_))));
    }

    #[test]
    fn split_counts() {
        let n = 500;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..n).map(|i| i % 5).collect();
        let d = dataset(features, labels, 5);
        let (train, val) = stratified_split(&d, 0.2, 42).unwrap();
        assert_eq!(train.n_samples(), 400);
        assert_eq!(val.n_samples(), 100);
        assert_eq!(val.class_counts(), vec![20; 5]);
        assert_eq!(train.class_counts(), vec![80; 5]);
        assert_eq!(
            stratified_split_indices(&d, 0.2, 42).unwrap(),
            stratified_split_indices(&d, 0.2, 42).unwrap()
        );
        assert_ne!(
            stratified_split_indices(&d, 0.2, 42).unwrap(),
            stratified_split_indices(&d, 0.2, 7).unwrap()
        );
    }

    #[test]
    fn split_two_per_class() {
        let d = dataset(array![[0.0], [1.0], [2.0], [3.0]], vec![0, 0, 1, 1], 2);
        let (train, val) = stratified_split(&d, 0.5, 1).unwrap();
        assert_eq!(train.class_counts(), vec![1, 1]);
        assert_eq!(val.class_counts(), vec![1, 1]);
    }

    #[test]
    fn split_errors() {
        let d = dataset(array![[0.0], [1.0], [2.0]], vec![0, 0, 1], 2);
        assert!(matches!(
            stratified_split(&d, 0.2, 1),
            Err(PreprocessError::ClassTooSmall { count: 1, .. })
        ));
        let d = dataset(array![[0.0], [1.0]], vec![0, 0], 1);
        assert!(matches!(
            stratified_split(&d, 1.0, 1),
            Err(PreprocessError::InvalidFraction(_))
        ));
    }
}
