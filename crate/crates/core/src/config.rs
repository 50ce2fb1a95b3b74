//! Run configuration: one flat TOML document covering analysis, split and
//! model settings. Missing keys take the library defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{FrameConfig, WindowKind};
use crate::features::{AnalysisConfig, ChromaConfig, RolloffConfig};
use crate::models::{
    Distance, ForestParams, KnnParams, LogRegParams, MlpParams, ModelConfig, ModelKind, SplitCriterion,
};
use crate::preprocess::ScalerKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub frame_length: usize,
    pub hop_length: usize,
    pub window: WindowKind,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub mel_fmin_hz: f64,
    pub mel_fmax_hz: Option<f64>,
    pub rolloff_p: f64,
    pub chroma_f_ref_hz: f64,
    pub chroma_fmin_hz: f64,
    pub segment_s: f64,

    pub val_fraction: f64,
    /// Seeds the split, the forest and the network.
    pub seed: u64,
    pub scaler: ScalerKind,

    pub knn_k: usize,
    pub knn_distance: Distance,
    pub logreg_learning_rate: f64,
    pub logreg_epochs: usize,
    pub forest_n_estimators: usize,
    pub forest_max_depth: usize,
    pub mlp_hidden_layers: Vec<usize>,
    pub mlp_learning_rate: f64,
    pub mlp_epochs: usize,
    pub mlp_batch_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let analysis = AnalysisConfig::default();
        let knn = KnnParams::default();
        let logreg = LogRegParams::default();
        let forest = ForestParams::default();
        let mlp = MlpParams::default();
        RunConfig {
            frame_length: analysis.frame.frame_length(),
            hop_length: analysis.frame.hop_length(),
            window: analysis.frame.window(),
            n_mels: analysis.n_mels,
            n_mfcc: analysis.n_mfcc,
            mel_fmin_hz: analysis.mel_fmin_hz,
            mel_fmax_hz: analysis.mel_fmax_hz,
            rolloff_p: analysis.rolloff.p(),
            chroma_f_ref_hz: analysis.chroma.f_ref_hz(),
            chroma_fmin_hz: analysis.chroma.fmin_hz(),
            segment_s: analysis.segment_s,
            val_fraction: 0.2,
            seed: 42,
            scaler: ScalerKind::default(),
            knn_k: knn.k,
            knn_distance: knn.distance,
            logreg_learning_rate: logreg.learning_rate,
            logreg_epochs: logreg.epochs,
            forest_n_estimators: forest.n_estimators,
            forest_max_depth: forest.max_depth,
            mlp_hidden_layers: mlp.hidden_layers,
            mlp_learning_rate: mlp.learning_rate,
            mlp_epochs: mlp.epochs,
            mlp_batch_size: mlp.batch_size,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig, String> {
        let config: RunConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
        config.analysis()?;
        if !(config.val_fraction > 0.0 && config.val_fraction < 1.0) {
            return Err(format!("val_fraction must lie in (0, 1), got {}", config.val_fraction));
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, String> {
        RunConfig::load_with_overrides(Some(path.as_ref()), &[])
    }

    /// Reads an optional file, then applies `key=value` overrides on top.
    /// Override values use TOML syntax (`mlp_hidden_layers=[64, 32]`).
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, String> {
        let mut table = match path {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                text.parse::<toml::Table>()
                    .map_err(|e| format!("{}: {}", path.display(), e.message()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let parsed = item
                .parse::<toml::Table>()
                .map_err(|e| format!("override '{item}': {}", e.message()))?;
            table.extend(parsed);
        }
        let text = toml::to_string(&table).map_err(|e| e.to_string())?;
        RunConfig::from_toml_str(&text)
    }

    /// Validated analysis settings.
    pub fn analysis(&self) -> Result<AnalysisConfig, String> {
        let frame = FrameConfig::new(self.frame_length, self.hop_length, self.window).map_err(|e| e.to_string())?;
        let rolloff = RolloffConfig::new(self.rolloff_p).map_err(|e| e.to_string())?;
        let chroma = ChromaConfig::new(self.chroma_f_ref_hz, self.chroma_fmin_hz).map_err(|e| e.to_string())?;
        if self.n_mels == 0 || self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return Err(format!(
                "need 1 <= n_mfcc <= n_mels, got n_mfcc = {} and n_mels = {}",
                self.n_mfcc, self.n_mels
            ));
        }
        if self.segment_s.is_nan() || self.segment_s <= 0.0 {
            return Err("segment_s must be positive".into());
        }
        Ok(AnalysisConfig {
            frame,
            n_mels: self.n_mels,
            n_mfcc: self.n_mfcc,
            mel_fmin_hz: self.mel_fmin_hz,
            mel_fmax_hz: self.mel_fmax_hz,
            rolloff,
            chroma,
            segment_s: self.segment_s,
        })
    }

    pub fn model_config(&self, kind: ModelKind) -> ModelConfig {
        match kind {
            ModelKind::Knn => ModelConfig::Knn(KnnParams {
                k: self.knn_k,
                distance: self.knn_distance,
            }),
            ModelKind::Logreg => ModelConfig::Logreg(LogRegParams {
                learning_rate: self.logreg_learning_rate,
                epochs: self.logreg_epochs,
            }),
            ModelKind::Forest => ModelConfig::Forest(ForestParams {
                n_estimators: self.forest_n_estimators,
                max_depth: self.forest_max_depth,
                criterion: SplitCriterion::Gini,
                seed: self.seed,
            }),
            ModelKind::Mlp => ModelConfig::Mlp(MlpParams {
                hidden_layers: self.mlp_hidden_layers.clone(),
                learning_rate: self.mlp_learning_rate,
                epochs: self.mlp_epochs,
                batch_size: self.mlp_batch_size,
                seed: self.seed,
            }),
        }
    }

    pub fn all_model_configs(&self) -> Vec<ModelConfig> {
        ModelKind::ALL.iter().map(|&k| self.model_config(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.analysis().unwrap(), AnalysisConfig::default());
        for kind in ModelKind::ALL {
            assert_eq!(c.model_config(kind), ModelConfig::default_for(kind));
        }
    }

    #[test]
    fn overrides_and_rejections() {
        let c = RunConfig::from_toml_str("knn_k = 3\nscaler = \"min_max\"\nmlp_hidden_layers = [16]\n").unwrap();
        assert_eq!(c.knn_k, 3);
        assert_eq!(c.scaler, ScalerKind::MinMax);
        assert_eq!(c.mlp_hidden_layers, vec![16]);
        assert!(RunConfig::from_toml_str("knn_kk = 3").unwrap_err().contains("unknown field"));
        assert!(RunConfig::from_toml_str("frame_length = 1000").is_err());
        assert!(RunConfig::from_toml_str("val_fraction = 1.0").is_err());
    }

    #[test]
    fn overrides_win_over_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 1\nknn_k = 9\n").unwrap();
        let c = RunConfig::load_with_overrides(Some(&path), &["seed=7".into()]).unwrap();
        assert_eq!((c.seed, c.knn_k), (7, 9));
        assert!(RunConfig::load_with_overrides(None, &["bogus=1".into()]).is_err());
    }
}
