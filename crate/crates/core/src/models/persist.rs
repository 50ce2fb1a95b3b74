//! Self-describing JSON model files.
//!
//! A file holds everything needed to predict from raw audio: the classifier,
//! the fitted scaler, the label vocabulary, the feature schema and the
//! analysis settings used at extraction time.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{
    matrix_serde, Classifier, DecisionTree, DenseLayer, ForestModel, ForestParams, KnnModel, KnnParams,
    LogRegModel, LogRegParams, MlpModel, MlpParams, ModelError, Prediction,
};
use crate::audio_io::AudioClip;
use crate::features::{extract_segment_features, AnalysisConfig};
use crate::preprocess::ScalerParams;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub val_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    pub label_names: Vec<String>,
    pub feature_schema: Vec<String>,
    pub scaler: ScalerParams,
    pub training: TrainingMetadata,
    pub analysis: AnalysisConfig,
}

/// A classifier together with the preprocessing it was trained behind.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    classifier: Classifier,
    metadata: ModelMetadata,
}

impl TrainedModel {
    /// Checks that the classifier, scaler, labels and schema agree in shape.
    pub fn new(classifier: Classifier, metadata: ModelMetadata) -> Result<Self, ModelError> {
        let corrupt = |msg: String| Err(ModelError::CorruptModelFile(msg));
        if metadata.label_names.len() != classifier.n_classes() {
            return corrupt(format!(
                "{} label names for a {}-class model",
                metadata.label_names.len(),
                classifier.n_classes()
            ));
        }
        if metadata.feature_schema.len() != classifier.n_features() {
            return corrupt(format!(
                "feature schema has {} names, model expects {} features",
                metadata.feature_schema.len(),
                classifier.n_features()
            ));
        }
        if metadata.scaler.n_features() != classifier.n_features() {
            return corrupt(format!(
                "scaler covers {} features, model expects {}",
                metadata.scaler.n_features(),
                classifier.n_features()
            ));
        }
        Ok(TrainedModel { classifier, metadata })
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn label_name(&self, class: usize) -> &str {
        &self.metadata.label_names[class]
    }

    /// Scales an unscaled feature row and classifies it.
    pub fn predict_features(&self, raw: &[f64]) -> Result<Prediction, ModelError> {
        let scaled = self
            .metadata
            .scaler
            .transform_row(raw)
            .map_err(|_| ModelError::DimensionMismatch {
                expected: self.classifier.n_features(),
                got: raw.len(),
            })?;
        self.classifier.predict(&scaled)
    }

    /// Runs the stored analysis on a clip and classifies the result.
    pub fn predict_clip(&self, clip: &AudioClip) -> Result<Prediction, ModelError> {
        let features = extract_segment_features(clip, &self.metadata.analysis)
            .map_err(|e| ModelError::InvalidHyperparameter(format!("feature extraction failed: {e}")))?;
        self.predict_features(&features.values)
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(&ModelDocument::from_model(self)).expect("model documents always serialize")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ModelError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ModelError::CorruptModelFile(e.to_string()))?;
        match value.get("format_version").map(serde_json::Value::as_u64) {
            None | Some(None) => {
                return Err(ModelError::CorruptModelFile("missing format_version".into()));
            }
            Some(Some(FORMAT_VERSION)) => {}
            Some(Some(found)) => {
                return Err(ModelError::UnsupportedVersion {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
        }
        let doc: ModelDocument =
            serde_json::from_value(value).map_err(|e| ModelError::CorruptModelFile(e.to_string()))?;
        doc.into_model()
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    fs::write(path, model.to_json()).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, ModelError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TrainedModel::from_json(&bytes)
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u64,
    #[serde(flatten)]
    body: ModelBody,
    scaler_params: ScalerParams,
    label_names: Vec<String>,
    feature_schema: Vec<String>,
    training_metadata: TrainingMetadata,
    analysis_config: AnalysisConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
enum ModelBody {
    Knn {
        hyperparameters: KnnParams,
        parameters: KnnParameters,
    },
    Logreg {
        hyperparameters: LogRegParams,
        parameters: LogRegParameters,
    },
    Forest {
        hyperparameters: ForestParams,
        parameters: ForestParameters,
    },
    Mlp {
        hyperparameters: MlpParams,
        parameters: MlpParameters,
    },
}

#[derive(Serialize, Deserialize)]
struct KnnParameters {
    #[serde(with = "matrix_serde")]
    rows: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

#[derive(Serialize, Deserialize)]
struct LogRegParameters {
    #[serde(with = "matrix_serde")]
    weights: Array2<f64>,
    biases: Vec<f64>,
    loss_curves: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ForestParameters {
    n_features: usize,
    n_classes: usize,
    trees: Vec<DecisionTree>,
}

#[derive(Serialize, Deserialize)]
struct MlpParameters {
    layers: Vec<DenseLayer>,
    loss_curve: Vec<f64>,
}

impl ModelDocument {
    fn from_model(model: &TrainedModel) -> Self {
        let body = match &model.classifier {
            Classifier::Knn(m) => ModelBody::Knn {
                hyperparameters: *m.params(),
                parameters: KnnParameters {
                    rows: m.rows().clone(),
                    labels: m.labels().to_vec(),
                    n_classes: m.n_classes(),
                },
            },
            Classifier::Logreg(m) => ModelBody::Logreg {
                hyperparameters: *m.params(),
                parameters: LogRegParameters {
                    weights: m.weights().clone(),
                    biases: m.biases().to_vec(),
                    loss_curves: m.loss_curves().to_vec(),
                },
            },
            Classifier::Forest(m) => ModelBody::Forest {
                hyperparameters: *m.params(),
                parameters: ForestParameters {
                    n_features: m.n_features(),
                    n_classes: m.n_classes(),
                    trees: m.trees().to_vec(),
                },
            },
            Classifier::Mlp(m) => ModelBody::Mlp {
                hyperparameters: m.params().clone(),
                parameters: MlpParameters {
                    layers: m.layers().to_vec(),
                    loss_curve: m.loss_curve().to_vec(),
                },
            },
        };
        let meta = &model.metadata;
        ModelDocument {
            format_version: FORMAT_VERSION,
            body,
            scaler_params: meta.scaler.clone(),
            label_names: meta.label_names.clone(),
            feature_schema: meta.feature_schema.clone(),
            training_metadata: meta.training,
            analysis_config: meta.analysis,
        }
    }

    fn into_model(self) -> Result<TrainedModel, ModelError> {
        let classifier = match self.body {
            ModelBody::Knn {
                hyperparameters,
                parameters: p,
            } => KnnModel::from_parts(hyperparameters, p.rows, p.labels, p.n_classes).map(Classifier::Knn),
            ModelBody::Logreg {
                hyperparameters,
                parameters: p,
            } => LogRegModel::from_parameters(hyperparameters, p.weights, p.biases).map(|mut m| {
                m.loss_curves = p.loss_curves;
                Classifier::Logreg(m)
            }),
            ModelBody::Forest {
                hyperparameters,
                parameters: p,
            } => ForestModel::from_trees(hyperparameters, p.trees, p.n_features, p.n_classes).map(Classifier::Forest),
            ModelBody::Mlp {
                hyperparameters,
                parameters: p,
            } => MlpModel::from_layers(hyperparameters, p.layers).map(|mut m| {
                m.loss_curve = p.loss_curve;
                Classifier::Mlp(m)
            }),
        }
        .map_err(ModelError::CorruptModelFile)?;
        TrainedModel::new(
            classifier,
            ModelMetadata {
                label_names: self.label_names,
                feature_schema: self.feature_schema,
                scaler: self.scaler_params,
                training: self.training_metadata,
                analysis: self.analysis_config,
            },
        )
    }
}
