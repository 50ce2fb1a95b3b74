//! Zero-crossing rate, spectral centroid, spectral roll-off, MFCC and chroma,
//! plus aggregation of the per-frame series into one fixed-order row per clip.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::{take_segment, AudioClip};
use crate::dsp::{stft, FrameConfig, Spectrogram};

/// Floor added to mel energies before taking the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

/// Pitch C1 in Hz; chroma class 0 is pitch class C.
pub const C1_HZ: f64 = 32.703;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("signal has {0} samples; at least 2 are needed")]
    TooShort(usize),
    #[error("mel filter {index} collapses onto fewer than two FFT bins; use fewer mel bands or a longer frame")]
    DegenerateFilter { index: usize },
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
}

/// Fraction of adjacent sample pairs whose product is strictly negative.
///
/// A pair containing an exact zero is not a crossing.
pub fn zero_crossing_rate(samples: &[f64]) -> Result<f64, FeatureError> {
    if samples.len() < 2 {
        return Err(FeatureError::TooShort(samples.len()));
    }
    let crossings = samples.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    Ok(crossings as f64 / (samples.len() - 1) as f64)
}

/// Per-frame amplitude-weighted mean frequency. Silent frames give 0.
///
/// The weights are the spectrogram values as given, so pass a power
/// spectrogram to weight by energy.
pub fn spectral_centroid(spec: &Spectrogram) -> Vec<f64> {
    let freqs = spec.bin_freqs_hz();
    spec.magnitudes()
        .rows()
        .into_iter()
        .map(|row| {
            let total: f64 = row.sum();
            if total > 0.0 {
                row.iter().zip(freqs).map(|(a, f)| a * f).sum::<f64>() / total
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloffConfig {
    p: f64,
}

impl RolloffConfig {
    pub fn new(p: f64) -> Result<Self, FeatureError> {
        if p > 0.0 && p <= 1.0 {
            Ok(RolloffConfig { p })
        } else {
            Err(FeatureError::InvalidConfig(format!(
                "roll-off fraction {p} is outside (0, 1]"
            )))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Default for RolloffConfig {
    fn default() -> Self {
        RolloffConfig { p: 0.85 }
    }
}

fn rolloff_bin(row: ArrayView1<f64>, p: f64) -> Option<usize> {
    let total: f64 = row.sum();
    if total <= 0.0 {
        return None;
    }
    let target = p * total;
    let mut cumulative = 0.0;
    for (k, a) in row.iter().enumerate() {
        cumulative += a;
        if cumulative >= target {
            return Some(k);
        }
    }
    // rounding can leave the running sum a hair short of p = 1
    row.iter().rposition(|&a| a > 0.0)
}

/// Per-frame frequency of the first bin at which the cumulative spectral sum
/// reaches `p` of the frame total. Silent frames give 0.
pub fn spectral_rolloff(spec: &Spectrogram, cfg: &RolloffConfig) -> Vec<f64> {
    let freqs = spec.bin_freqs_hz();
    spec.magnitudes()
        .rows()
        .into_iter()
        .map(|row| rolloff_bin(row, cfg.p).map_or(0.0, |k| freqs[k]))
        .collect()
}

/// `2595 log10(1 + f / 700)`.
pub fn mel_scale(f_hz: f64) -> f64 {
    2595.0 * (1.0 + f_hz / 700.0).log10()
}

/// Inverse of [`mel_scale`].
pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with corners equally spaced on the mel scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterBank {
    n_mels: usize,
    fmin_hz: f64,
    fmax_hz: f64,
    corner_mels: Vec<f64>,
    /// `[n_mels, num_bins]`
    weights: Array2<f64>,
}

impl MelFilterBank {
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn fmin_hz(&self) -> f64 {
        self.fmin_hz
    }

    pub fn fmax_hz(&self) -> f64 {
        self.fmax_hz
    }

    /// The `n_mels + 2` filter corners, in mel.
    pub fn corner_mels(&self) -> &[f64] {
        &self.corner_mels
    }

    pub fn corner_hz(&self) -> Vec<f64> {
        self.corner_mels.iter().map(|&m| mel_to_hz(m)).collect()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn num_bins(&self) -> usize {
        self.weights.ncols()
    }
}

/// Builds `n_mels` triangular filters over `num_bins` half-spectrum bins of
/// a frame sampled at `sample_rate_hz`.
pub fn build_mel_filterbank(
    n_mels: usize,
    fmin_hz: f64,
    fmax_hz: f64,
    num_bins: usize,
    sample_rate_hz: u32,
) -> Result<MelFilterBank, FeatureError> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    if n_mels == 0 {
        return Err(FeatureError::InvalidConfig("n_mels must be at least 1".into()));
    }
    if !(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= nyquist) {
        return Err(FeatureError::InvalidConfig(format!(
            "mel range [{fmin_hz}, {fmax_hz}] Hz must satisfy 0 <= fmin < fmax <= {nyquist}"
        )));
    }
    if num_bins < n_mels + 2 {
        return Err(FeatureError::InvalidConfig(format!(
            "{num_bins} FFT bins cannot hold {n_mels} mel filters"
        )));
    }

    let frame_length = 2 * (num_bins - 1);
    let bin_width = sample_rate_hz as f64 / frame_length as f64;
    let mel_lo = mel_scale(fmin_hz);
    let step = (mel_scale(fmax_hz) - mel_lo) / (n_mels + 1) as f64;
    let corner_mels: Vec<f64> = (0..n_mels + 2).map(|i| mel_lo + step * i as f64).collect();
    let corner_hz: Vec<f64> = corner_mels.iter().map(|&m| mel_to_hz(m)).collect();

    let mut weights = Array2::zeros((n_mels, num_bins));
    for m in 0..n_mels {
        let (lower, center, upper) = (corner_hz[m], corner_hz[m + 1], corner_hz[m + 2]);
        let mut distinct = [lower, center, upper].map(|f| (f / bin_width).round() as usize);
        distinct.sort_unstable();
        let distinct_bins = 1 + distinct.windows(2).filter(|w| w[0] != w[1]).count();
        if distinct_bins < 2 {
            return Err(FeatureError::DegenerateFilter { index: m });
        }
        for k in 0..num_bins {
            let f = k as f64 * bin_width;
            let rising = (f - lower) / (center - lower);
            let falling = (upper - f) / (upper - center);
            weights[[m, k]] = rising.min(falling).max(0.0);
        }
        if weights.row(m).iter().all(|&w| w <= 0.0) {
            return Err(FeatureError::DegenerateFilter { index: m });
        }
    }

    Ok(MelFilterBank {
        n_mels,
        fmin_hz,
        fmax_hz,
        corner_mels,
        weights,
    })
}

/// `ln(sum_k w[m][k] * A_k^2 + LOG_FLOOR)` for every mel band of one frame.
pub fn log_mel_energies(magnitudes: &[f64], bank: &MelFilterBank) -> Vec<f64> {
    assert_eq!(magnitudes.len(), bank.num_bins(), "bin count mismatch");
    bank.weights
        .rows()
        .into_iter()
        .map(|filter| {
            let energy: f64 = filter.iter().zip(magnitudes).map(|(w, a)| w * a * a).sum();
            (energy + LOG_FLOOR).ln()
        })
        .collect()
}

/// Orthonormal DCT-II basis, `[n_out, n_in]`.
fn dct2_matrix(n_out: usize, n_in: usize) -> Array2<f64> {
    let n = n_in as f64;
    Array2::from_shape_fn((n_out, n_in), |(k, i)| {
        let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
        scale * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()
    })
}

/// Orthonormal DCT-II of a vector.
pub fn dct2_orthonormal(x: &[f64]) -> Vec<f64> {
    dct2_matrix(x.len(), x.len()).dot(&ArrayView1::from(x)).to_vec()
}

/// Mel-frequency cepstral coefficients, `[num_frames, n_mfcc]`.
pub fn mfcc(spec: &Spectrogram, bank: &MelFilterBank, n_mfcc: usize) -> Result<Array2<f64>, FeatureError> {
    if n_mfcc == 0 || n_mfcc > bank.n_mels {
        return Err(FeatureError::InvalidConfig(format!(
            "n_mfcc = {n_mfcc} must be in 1..={}",
            bank.n_mels
        )));
    }
    if spec.num_bins() != bank.num_bins() {
        return Err(FeatureError::InvalidConfig(format!(
            "filter bank expects {} bins, spectrogram has {}",
            bank.num_bins(),
            spec.num_bins()
        )));
    }
    let dct = dct2_matrix(n_mfcc, bank.n_mels);
    let mut out = Array2::zeros((spec.num_frames(), n_mfcc));
    for (row, mut dst) in spec.magnitudes().rows().into_iter().zip(out.rows_mut()) {
        let frame = row.to_vec();
        let log_mel = ndarray::Array1::from(log_mel_energies(&frame, bank));
        dst.assign(&dct.dot(&log_mel));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChromaConfig {
    f_ref_hz: f64,
    fmin_hz: f64,
}

impl ChromaConfig {
    pub fn new(f_ref_hz: f64, fmin_hz: f64) -> Result<Self, FeatureError> {
        if f_ref_hz > 0.0 && fmin_hz > 0.0 {
            Ok(ChromaConfig { f_ref_hz, fmin_hz })
        } else {
            Err(FeatureError::InvalidConfig(
                "chroma reference and minimum frequency must be positive".into(),
            ))
        }
    }

    pub fn f_ref_hz(&self) -> f64 {
        self.f_ref_hz
    }

    pub fn fmin_hz(&self) -> f64 {
        self.fmin_hz
    }
}

impl Default for ChromaConfig {
    fn default() -> Self {
        ChromaConfig {
            f_ref_hz: C1_HZ,
            fmin_hz: 20.0,
        }
    }
}

/// Pitch class of a frequency: `round(mod(12 log2(f / f_ref), 12)) mod 12`,
/// halves rounding up.
pub fn pitch_class(f_hz: f64, f_ref_hz: f64) -> usize {
    let c = (12.0 * (f_hz / f_ref_hz).log2()).rem_euclid(12.0);
    ((c + 0.5).floor() as usize) % 12
}

/// Per-frame 12-class pitch profile, each row L1-normalized (or all zero
/// for frames with no energy above `fmin_hz`).
pub fn chroma(spec: &Spectrogram, cfg: &ChromaConfig) -> Array2<f64> {
    let classes: Vec<Option<usize>> = spec
        .bin_freqs_hz()
        .iter()
        .map(|&f| (f >= cfg.fmin_hz).then(|| pitch_class(f, cfg.f_ref_hz)))
        .collect();
    let mut out = Array2::zeros((spec.num_frames(), 12));
    for (row, mut dst) in spec.magnitudes().rows().into_iter().zip(out.rows_mut()) {
        for (a, class) in row.iter().zip(&classes) {
            if let Some(c) = class {
                dst[*c] += a;
            }
        }
        let total = dst.sum();
        if total > 0.0 {
            dst /= total;
        }
    }
    out
}

/// Every knob of the clip-to-feature-row pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub frame: FrameConfig,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub mel_fmin_hz: f64,
    /// `None` means the Nyquist frequency of each clip.
    pub mel_fmax_hz: Option<f64>,
    pub rolloff: RolloffConfig,
    pub chroma: ChromaConfig,
    /// Clips are truncated to this many seconds before extraction.
    pub segment_s: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            frame: FrameConfig::default(),
            n_mels: 40,
            n_mfcc: 20,
            mel_fmin_hz: 0.0,
            mel_fmax_hz: None,
            rolloff: RolloffConfig::default(),
            chroma: ChromaConfig::default(),
            segment_s: 30.0,
        }
    }
}

/// Column names of a feature row for a given MFCC count.
pub fn feature_schema(n_mfcc: usize) -> Vec<String> {
    let mut names: Vec<String> = [
        "zcr_mean",
        "zcr_std",
        "centroid_mean",
        "centroid_std",
        "rolloff_mean",
        "rolloff_std",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend((1..=n_mfcc).map(|i| format!("mfcc{i}_mean")));
    names.extend((1..=n_mfcc).map(|i| format!("mfcc{i}_std")));
    names.extend((1..=12).map(|i| format!("chroma{i}_mean")));
    names.extend((1..=12).map(|i| format!("chroma{i}_std")));
    names
}

/// One clip's aggregated features, in [`feature_schema`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub n_mfcc: usize,
}

impl FeatureVector {
    pub fn schema(&self) -> Vec<String> {
        feature_schema(self.n_mfcc)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema().iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Mean and population standard deviation.
pub fn mean_std<I: IntoIterator<Item = f64>>(values: I) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs the full analysis on one clip.
///
/// The ZCR is taken over the whole clip. Centroid and roll-off are computed
/// on the power spectrogram, MFCCs on mel-band power and chroma on the
/// magnitude spectrogram. The clip is not segmented here.
pub fn extract_features(clip: &AudioClip, config: &AnalysisConfig) -> Result<FeatureVector, FeatureError> {
    let zcr = zero_crossing_rate(clip.samples())?;
    let spec = stft(clip, &config.frame);
    let power = spec.to_power();
    let fmax = config
        .mel_fmax_hz
        .unwrap_or(clip.sample_rate_hz() as f64 / 2.0);
    let bank = build_mel_filterbank(
        config.n_mels,
        config.mel_fmin_hz,
        fmax,
        spec.num_bins(),
        clip.sample_rate_hz(),
    )?;
    let cepstra = mfcc(&spec, &bank, config.n_mfcc)?;
    let pitch = chroma(&spec, &config.chroma);

    let mut values = Vec::with_capacity(6 + 2 * config.n_mfcc + 24);
    // one global ZCR per clip, so its spread is zero
    values.extend([zcr, 0.0]);
    let (m, s) = mean_std(spectral_centroid(&power));
    values.extend([m, s]);
    let (m, s) = mean_std(spectral_rolloff(&power, &config.rolloff));
    values.extend([m, s]);
    let push_columns = |values: &mut Vec<f64>, matrix: &Array2<f64>| {
        let stats: Vec<(f64, f64)> = matrix
            .columns()
            .into_iter()
            .map(|c| mean_std(c.iter().copied()))
            .collect();
        values.extend(stats.iter().map(|s| s.0));
        values.extend(stats.iter().map(|s| s.1));
    };
    push_columns(&mut values, &cepstra);
    push_columns(&mut values, &pitch);

    Ok(FeatureVector {
        values,
        n_mfcc: config.n_mfcc,
    })
}

/// Truncates a clip to `config.segment_s` seconds and extracts its features.
pub fn extract_segment_features(clip: &AudioClip, config: &AnalysisConfig) -> Result<FeatureVector, FeatureError> {
    let segment = take_segment(clip, config.segment_s);
    extract_features(&segment, config)
}
