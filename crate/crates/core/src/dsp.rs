//! Framing, windowing and magnitude spectra.
//!
//! The FFT is an iterative radix-2 Cooley-Tukey transform over power-of-two
//! lengths. Only the non-redundant half spectrum (`n/2 + 1` bins) of a real
//! frame is returned.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioClip;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("frame length {0} is not a power of two")]
    FrameLengthNotPowerOfTwo(usize),
    #[error("hop length {hop} must satisfy 0 < hop <= frame length {frame}")]
    InvalidHop { hop: usize, frame: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Rectangular,
}

/// Frame and window parameters of the short-time analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    frame_length: usize,
    hop_length: usize,
    window: WindowKind,
}

impl FrameConfig {
    pub fn new(frame_length: usize, hop_length: usize, window: WindowKind) -> Result<Self, DspError> {
        if !frame_length.is_power_of_two() {
            return Err(DspError::FrameLengthNotPowerOfTwo(frame_length));
        }
        if hop_length == 0 || hop_length > frame_length {
            return Err(DspError::InvalidHop {
                hop: hop_length,
                frame: frame_length,
            });
        }
        Ok(FrameConfig {
            frame_length,
            hop_length,
            window,
        })
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn hop_length(&self) -> usize {
        self.hop_length
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    /// Number of bins in the half spectrum.
    pub fn num_bins(&self) -> usize {
        self.frame_length / 2 + 1
    }

    /// `ceil(num_samples / hop)`: every sample lands in at least one frame.
    pub fn num_frames(&self, num_samples: usize) -> usize {
        num_samples.div_ceil(self.hop_length).max(1)
    }

    pub fn window_coefficients(&self) -> Vec<f64> {
        match self.window {
            WindowKind::Hann => hann_window(self.frame_length),
            WindowKind::Rectangular => vec![1.0; self.frame_length],
        }
    }
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            frame_length: 2048,
            hop_length: 512,
            window: WindowKind::Hann,
        }
    }
}

fn copy_frame(samples: &[f64], start: usize, out: &mut [f64]) {
    let end = (start + out.len()).min(samples.len());
    let available = end.saturating_sub(start);
    out[..available].copy_from_slice(&samples[start..start + available]);
    out[available..].fill(0.0);
}

/// Splits a clip into overlapping frames starting at `0, hop, 2*hop, ...`.
///
/// Trailing frames that run past the end of the signal are zero-padded.
pub fn frame_signal(clip: &AudioClip, config: &FrameConfig) -> Vec<Vec<f64>> {
    let samples = clip.samples();
    (0..config.num_frames(samples.len()))
        .map(|i| {
            let mut frame = vec![0.0; config.frame_length];
            copy_frame(samples, i * config.hop_length, &mut frame);
            frame
        })
        .collect()
}

/// Symmetric Hann window, `0.5 - 0.5 cos(2 pi i / (n - 1))`.
pub fn hann_window(n: usize) -> Vec<f64> {
    assert!(n >= 1, "window length must be positive");
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / denom).cos())
        .collect()
}

/// Precomputed radix-2 FFT of a fixed power-of-two length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    bit_reverse: Vec<usize>,
    // twiddle[k] = exp(-2 pi i k / len), k < len / 2
    twiddle_re: Vec<f64>,
    twiddle_im: Vec<f64>,
}

impl Fft {
    pub fn new(len: usize) -> Fft {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let (twiddle_re, twiddle_im) = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / len as f64;
                (angle.cos(), angle.sin())
            })
            .unzip();
        Fft {
            len,
            bit_reverse,
            twiddle_re,
            twiddle_im,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform of a complex sequence.
    pub fn transform(&self, re: &mut [f64], im: &mut [f64]) {
        assert_eq!(re.len(), self.len);
        assert_eq!(im.len(), self.len);
        for i in 0..self.len {
            let j = self.bit_reverse[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let (wr, wi) = (self.twiddle_re[k * stride], self.twiddle_im[k * stride]);
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            size *= 2;
        }
    }

    /// Magnitudes `|X[k]|` for `k = 0..=len/2` of a real frame.
    pub fn magnitude_into(&self, frame: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), self.len / 2 + 1);
        let mut re = frame.to_vec();
        let mut im = vec![0.0; self.len];
        self.transform(&mut re, &mut im);
        for (k, o) in out.iter_mut().enumerate() {
            *o = re[k].hypot(im[k]);
        }
    }
}

/// Half-spectrum DFT magnitudes of a power-of-two length real frame.
pub fn fft_magnitude(frame: &[f64]) -> Vec<f64> {
    let fft = Fft::new(frame.len());
    let mut out = vec![0.0; frame.len() / 2 + 1];
    fft.magnitude_into(frame, &mut out);
    out
}

/// Per-frame magnitude spectra of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// `[num_frames, num_bins]`, non-negative.
    magnitudes: Array2<f64>,
    bin_freqs_hz: Vec<f64>,
    sample_rate_hz: u32,
    config: FrameConfig,
}

impl Spectrogram {
    /// Wraps precomputed spectra; bin frequencies follow from the config.
    ///
    /// Panics if the column count does not match `config.num_bins()` or any
    /// value is negative.
    pub fn from_magnitudes(magnitudes: Array2<f64>, sample_rate_hz: u32, config: FrameConfig) -> Self {
        assert_eq!(magnitudes.ncols(), config.num_bins(), "bin count mismatch");
        assert!(magnitudes.iter().all(|&m| m >= 0.0), "magnitudes must be non-negative");
        let bin_freqs_hz = (0..config.num_bins())
            .map(|k| k as f64 * sample_rate_hz as f64 / config.frame_length as f64)
            .collect();
        Spectrogram {
            magnitudes,
            bin_freqs_hz,
            sample_rate_hz,
            config,
        }
    }

    pub fn magnitudes(&self) -> &Array2<f64> {
        &self.magnitudes
    }

    pub fn bin_freqs_hz(&self) -> &[f64] {
        &self.bin_freqs_hz
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn num_frames(&self) -> usize {
        self.magnitudes.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.magnitudes.ncols()
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.config.frame_length as f64
    }

    /// The same spectrogram with every value squared.
    pub fn to_power(&self) -> Spectrogram {
        Spectrogram {
            magnitudes: self.magnitudes.mapv(|m| m * m),
            bin_freqs_hz: self.bin_freqs_hz.clone(),
            sample_rate_hz: self.sample_rate_hz,
            config: self.config,
        }
    }
}

/// Short-time Fourier transform: frame, window, then FFT magnitude per frame.
pub fn stft(clip: &AudioClip, config: &FrameConfig) -> Spectrogram {
    let samples = clip.samples();
    let n = config.frame_length;
    let num_frames = config.num_frames(samples.len());
    let window = config.window_coefficients();
    let fft = Fft::new(n);

    let bins = config.num_bins();
    let rows: Vec<Vec<f64>> = (0..num_frames)
        .into_par_iter()
        .map(|i| {
            let mut frame = vec![0.0; n];
            copy_frame(samples, i * config.hop_length, &mut frame);
            for (x, w) in frame.iter_mut().zip(&window) {
                *x *= w;
            }
            let mut out = vec![0.0; bins];
            fft.magnitude_into(&frame, &mut out);
            out
        })
        .collect();
    let magnitudes = Array2::from_shape_vec((num_frames, bins), rows.concat())
        .expect("every row has num_bins entries");

    Spectrogram::from_magnitudes(magnitudes, clip.sample_rate_hz(), *config)
}
