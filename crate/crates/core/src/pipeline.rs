//! End-to-end steps shared by the command line and the test suites:
//! corpus extraction, the split/scale step and single-model training.

use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use thiserror::Error;

use crate::audio_io::{read_wav, scan_dataset, AudioError};
use crate::config::RunConfig;
use crate::evaluate::{accuracy, compare_models, EvalReport};
use crate::feature_csv::{FeatureCsvError, FeatureTable};
use crate::features::{extract_segment_features, feature_schema, AnalysisConfig};
use crate::models::{ModelError, ModelKind, ModelMetadata, TrainedModel, TrainingMetadata};
use crate::preprocess::{apply_scaler, fit_scaler, stratified_split, Dataset, PreprocessError, ScalerParams};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    FeatureCsv(#[from] FeatureCsvError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no clip could be decoded")]
    NothingExtracted,
}

/// A file left out of the feature table, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: String,
    pub kind: &'static str,
    pub message: String,
}

/// Extracts one row per decodable `<root>/<genre>/*.wav` file.
///
/// Rows follow the sorted file paths, which are stored relative to `root`.
/// Undecodable files are logged and reported back instead of failing the run.
pub fn extract_corpus(
    root: impl AsRef<Path>,
    analysis: &AnalysisConfig,
) -> Result<(FeatureTable, Vec<SkippedFile>), PipelineError> {
    let root = root.as_ref();
    let manifest = scan_dataset(root)?;
    info!(
        "extracting {} files in {} genres",
        manifest.entries.len(),
        manifest.genres.len()
    );
    let results: Vec<_> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let shown = entry.path.strip_prefix(root).unwrap_or(&entry.path).to_string_lossy().into_owned();
            let outcome = read_wav(&entry.path)
                .map_err(|e| (e.kind(), e.to_string()))
                .and_then(|clip| {
                    extract_segment_features(&clip, analysis).map_err(|e| ("FeatureError", e.to_string()))
                });
            (shown, entry.genre.clone(), outcome)
        })
        .collect();

    let mut table = FeatureTable::new(analysis.n_mfcc);
    let mut skipped = Vec::new();
    for (path, genre, outcome) in results {
        match outcome {
            Ok(features) => table.push(path, genre, features.values),
            Err((kind, message)) => {
                warn!("skipping {path}: {kind}: {message}");
                skipped.push(SkippedFile { path, kind, message });
            }
        }
    }
    if table.is_empty() {
        return Err(PipelineError::NothingExtracted);
    }
    Ok((table, skipped))
}

/// Train/validation partitions scaled by statistics of the training part.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub train: Dataset,
    pub val: Dataset,
    pub scaler: ScalerParams,
}

pub fn prepare(data: &Dataset, config: &RunConfig) -> Result<PreparedData, PreprocessError> {
    let (train, val) = stratified_split(data, config.val_fraction, config.seed)?;
    let scaler = fit_scaler(&train, config.scaler)?;
    Ok(PreparedData {
        train: apply_scaler(&train, &scaler)?,
        val: apply_scaler(&val, &scaler)?,
        scaler,
    })
}

/// Loads a feature table and checks it against the configured analysis.
pub fn load_features(table: &FeatureTable, config: &RunConfig) -> Result<Dataset, PipelineError> {
    if table.n_mfcc != config.n_mfcc {
        return Err(FeatureCsvError::SchemaMismatch(format!(
            "table has {} MFCCs per frame, configuration expects {}",
            table.n_mfcc, config.n_mfcc
        ))
        .into());
    }
    Ok(table.to_dataset()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

pub fn train_model(data: &Dataset, kind: ModelKind, config: &RunConfig) -> Result<TrainOutcome, PipelineError> {
    let analysis = config.analysis().map_err(PipelineError::Config)?;
    let prepared = prepare(data, config)?;
    let classifier = config.model_config(kind).fit(&prepared.train)?;
    let train_pred = classifier.predict_dataset(&prepared.train)?;
    let val_pred = classifier.predict_dataset(&prepared.val)?;
    let train_accuracy = accuracy(&train_pred, prepared.train.labels()).unwrap_or(0.0);
    let val_accuracy = accuracy(&val_pred, prepared.val.labels()).unwrap_or(0.0);
    let model = TrainedModel::new(
        classifier,
        ModelMetadata {
            label_names: data.label_names().to_vec(),
            feature_schema: feature_schema(analysis.n_mfcc),
            scaler: prepared.scaler,
            training: TrainingMetadata {
                seed: config.seed,
                val_fraction: config.val_fraction,
            },
            analysis,
        },
    )?;
    Ok(TrainOutcome {
        model,
        train_accuracy,
        val_accuracy,
    })
}

/// Split, scale and run every configured model.
pub fn compare_all(data: &Dataset, config: &RunConfig) -> Result<EvalReport, PipelineError> {
    let prepared = prepare(data, config)?;
    let report = compare_models(
        &prepared.train,
        &prepared.val,
        &config.all_model_configs(),
        config.segment_s,
    )
    .expect("the configuration always lists four models");
    Ok(report)
}
