//! The four classifiers and the uniform fit/predict/serialize surface over them.
//!
//! Every model consumes a (scaled) [`Dataset`] and predicts a class index from
//! one feature row. All ties resolve to the lower index so predictions are
//! fully deterministic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::Dataset;

pub mod forest;
pub mod knn;
pub mod logreg;
pub mod mlp;
pub mod persist;

pub use forest::{forest_fit, gini_impurity, tree_fit, DecisionTree, ForestModel, ForestParams, SplitCriterion, TreeNode};
pub use knn::{knn_fit, Distance, KnnModel, KnnParams};
pub use logreg::{logreg_fit, sigmoid, LogRegModel, LogRegParams};
pub use mlp::{mlp_fit, Activation, DenseLayer, MlpModel, MlpParams};
pub use persist::{load_model, save_model, ModelMetadata, TrainedModel, TrainingMetadata, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("k = {k} exceeds the {n_samples} training rows")]
    KTooLarge { k: usize, n_samples: usize },
    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training data contains a single class; at least two are required")]
    SingleClass,
    #[error("training data is empty")]
    EmptyTrainingSet,
    #[error("Gini impurity of an empty node is undefined")]
    EmptyNode,
    #[error("loss became non-finite in epoch {epoch}; the learning rate is too high")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("model file format version {found} is not supported (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },
    #[error("corrupt model file: {0}")]
    CorruptModelFile(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::KTooLarge { .. } => "KTooLarge",
            ModelError::DimensionMismatch { .. } => "DimensionMismatch",
            ModelError::SingleClass => "SingleClass",
            ModelError::EmptyTrainingSet => "EmptyTrainingSet",
            ModelError::EmptyNode => "EmptyNode",
            ModelError::NonFiniteLoss { .. } => "NonFiniteLoss",
            ModelError::InvalidHyperparameter(_) => "InvalidHyperparameter",
            ModelError::UnsupportedVersion { .. } => "UnsupportedVersion",
            ModelError::CorruptModelFile(_) => "CorruptModelFile",
            ModelError::Io { .. } => "Io",
        }
    }
}

pub(crate) fn check_dimension(expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, got })
    }
}

/// Fails with `SingleClass` unless at least two labels occur in the data.
pub(crate) fn require_two_classes(data: &Dataset) -> Result<(), ModelError> {
    if data.n_samples() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Knn,
    Logreg,
    Forest,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Knn, ModelKind::Logreg, ModelKind::Forest, ModelKind::Mlp];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::Logreg => "logreg",
            ModelKind::Forest => "forest",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Human-readable name used in reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Knn => "KNN",
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Forest => "Random Forest",
            ModelKind::Mlp => "Artificial Neural Network",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "knn" => Ok(ModelKind::Knn),
            "logreg" => Ok(ModelKind::Logreg),
            "forest" => Ok(ModelKind::Forest),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(format!("unknown model kind '{other}' (expected knn, logreg, forest or mlp)")),
        }
    }
}

/// Hyperparameters of one classifier, ready to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Knn(KnnParams),
    Logreg(LogRegParams),
    Forest(ForestParams),
    Mlp(MlpParams),
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> ModelConfig {
        match kind {
            ModelKind::Knn => ModelConfig::Knn(KnnParams::default()),
            ModelKind::Logreg => ModelConfig::Logreg(LogRegParams::default()),
            ModelKind::Forest => ModelConfig::Forest(ForestParams::default()),
            ModelKind::Mlp => ModelConfig::Mlp(MlpParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Knn(_) => ModelKind::Knn,
            ModelConfig::Logreg(_) => ModelKind::Logreg,
            ModelConfig::Forest(_) => ModelKind::Forest,
            ModelConfig::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn fit(&self, train: &Dataset) -> Result<Classifier, ModelError> {
        Ok(match self {
            ModelConfig::Knn(p) => Classifier::Knn(knn_fit(train, p)?),
            ModelConfig::Logreg(p) => Classifier::Logreg(logreg_fit(train, p)?),
            ModelConfig::Forest(p) => Classifier::Forest(forest_fit(train, p)?),
            ModelConfig::Mlp(p) => Classifier::Mlp(mlp_fit(train, p)?),
        })
    }
}

/// Class decision plus a per-class score vector.
///
/// Scores are vote fractions for KNN and the forest, raw one-vs-rest sigmoid
/// outputs for logistic regression and softmax probabilities for the MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub scores: Vec<f64>,
}

/// A fitted classifier of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Knn(KnnModel),
    Logreg(LogRegModel),
    Forest(ForestModel),
    Mlp(MlpModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Knn(_) => ModelKind::Knn,
            Classifier::Logreg(_) => ModelKind::Logreg,
            Classifier::Forest(_) => ModelKind::Forest,
            Classifier::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Knn(m) => m.n_features(),
            Classifier::Logreg(m) => m.n_features(),
            Classifier::Forest(m) => m.n_features(),
            Classifier::Mlp(m) => m.n_features(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Classifier::Knn(m) => m.n_classes(),
            Classifier::Logreg(m) => m.n_classes(),
            Classifier::Forest(m) => m.n_classes(),
            Classifier::Mlp(m) => m.n_classes(),
        }
    }

    pub fn predict(&self, query: &[f64]) -> Result<Prediction, ModelError> {
        match self {
            Classifier::Knn(m) => {
                let p = m.predict(query)?;
                let k = m.params().k as f64;
                Ok(Prediction {
                    class: p.class,
                    scores: p.votes.iter().map(|&v| v as f64 / k).collect(),
                })
            }
            Classifier::Logreg(m) => {
                let (class, scores) = m.predict(query)?;
                Ok(Prediction { class, scores })
            }
            Classifier::Forest(m) => {
                let (class, votes) = m.predict(query)?;
                let n = m.trees().len() as f64;
                Ok(Prediction {
                    class,
                    scores: votes.iter().map(|&v| v as f64 / n).collect(),
                })
            }
            Classifier::Mlp(m) => {
                let (class, scores) = m.predict(query)?;
                Ok(Prediction { class, scores })
            }
        }
    }

    /// Predicted class of every row of a dataset.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<usize>, ModelError> {
        (0..data.n_samples())
            .map(|i| self.predict(data.row(i)).map(|p| p.class))
            .collect()
    }
}

/// Serde adapter writing an `Array1<f64>` as a plain array.
pub(crate) mod vector_serde {
    use ndarray::Array1;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Array1<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().expect("owned vectors are contiguous").serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array1<f64>, D::Error> {
        Vec::<f64>::deserialize(d).map(Array1::from)
    }
}

/// Serde adapter writing an `Array2<f64>` as row-major nested arrays.
pub(crate) mod matrix_serde {
    use ndarray::Array2;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        to_matrix(rows).map_err(D::Error::custom)
    }

    pub fn to_matrix(rows: Vec<Vec<f64>>) -> Result<Array2<f64>, String> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err("ragged matrix".into());
        }
        Array2::from_shape_vec((n, m), rows.concat()).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lower_index() {
        assert_eq!(argmax(&[0.5, 0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.9]), 2);
    }

    #[test]
    fn kind_round_trips_through_text() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }
}
