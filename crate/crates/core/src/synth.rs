//! Seeded synthetic "genres" for demos and tests when no real corpus is at hand.
//!
//! Each style is a harmonic tone family with its own register, brightness,
//! noise floor and pulse rate. Clips of one style vary in pitch, phase and
//! level, so the styles are separable but not trivially so.

use std::f64::consts::TAU;
use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio_io::{write_wav, AudioClip, AudioError};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthStyle {
    pub name: String,
    /// Range of the fundamental, Hz.
    pub fundamental_hz: (f64, f64),
    /// Amplitude ratio between successive harmonics.
    pub harmonic_decay: f64,
    pub n_harmonics: usize,
    /// White-noise amplitude relative to the tone.
    pub noise: f64,
    /// Amplitude-modulation rate, Hz; 0 for a steady tone.
    pub pulse_hz: f64,
}

impl SynthStyle {
    fn new(name: &str, fundamental_hz: (f64, f64), harmonic_decay: f64, n_harmonics: usize, noise: f64, pulse_hz: f64) -> Self {
        SynthStyle {
            name: name.to_string(),
            fundamental_hz,
            harmonic_decay,
            n_harmonics,
            noise,
            pulse_hz,
        }
    }
}

/// Five styles named after the genres they loosely caricature.
pub fn default_styles() -> Vec<SynthStyle> {
    vec![
        SynthStyle::new("blues", (98.0, 147.0), 0.7, 8, 0.05, 1.5),
        SynthStyle::new("classical", (262.0, 523.0), 0.35, 4, 0.01, 0.0),
        SynthStyle::new("country", (196.0, 294.0), 0.6, 10, 0.08, 3.0),
        SynthStyle::new("hiphop", (55.0, 82.0), 0.8, 6, 0.25, 2.0),
        SynthStyle::new("jazz", (147.0, 247.0), 0.5, 6, 0.03, 0.7),
    ]
}

/// Renders one clip of a style.
pub fn synth_clip<R: Rng>(style: &SynthStyle, duration_s: f64, sample_rate_hz: u32, rng: &mut R) -> AudioClip {
    let n = ((duration_s * sample_rate_hz as f64).round() as usize).max(1);
    let f0 = rng.random_range(style.fundamental_hz.0..=style.fundamental_hz.1);
    let level = rng.random_range(0.3..0.6);
    let phases: Vec<f64> = (0..style.n_harmonics).map(|_| rng.random_range(0.0..TAU)).collect();
    let nyquist = sample_rate_hz as f64 / 2.0;
    let mut norm = 0.0;
    let partials: Vec<(f64, f64, f64)> = (1..=style.n_harmonics)
        .filter(|&h| f0 * h as f64 <= nyquist)
        .map(|h| {
            let amp = style.harmonic_decay.powi(h as i32 - 1);
            norm += amp;
            (f0 * h as f64, amp, phases[h - 1])
        })
        .collect();
    let sr = sample_rate_hz as f64;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let tone: f64 = partials
                .iter()
                .map(|&(f, a, p)| a * (TAU * f * t + p).sin())
                .sum::<f64>()
                / norm;
            let envelope = if style.pulse_hz > 0.0 {
                0.6 + 0.4 * (TAU * style.pulse_hz * t).cos()
            } else {
                1.0
            };
            let noise = style.noise * rng.random_range(-1.0..1.0);
            level * (envelope * tone + noise) / (1.0 + style.noise)
        })
        .collect();
    AudioClip::new(samples, sample_rate_hz, format!("synth:{}", style.name))
}

/// Writes `<root>/<style>/<style>.NNNNN.wav` for every style.
pub fn write_corpus(
    root: impl AsRef<Path>,
    styles: &[SynthStyle],
    clips_per_style: usize,
    duration_s: f64,
    sample_rate_hz: u32,
    seed: u64,
) -> Result<(), AudioError> {
    let root = root.as_ref();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for style in styles {
        let dir = root.join(&style.name);
        fs::create_dir_all(&dir).map_err(|source: io::Error| AudioError::Io {
            path: dir.clone(),
            source,
        })?;
        for i in 0..clips_per_style {
            let clip = synth_clip(style, duration_s, sample_rate_hz, &mut rng);
            write_wav(dir.join(format!("{}.{i:05}.wav", style.name)), &clip)?;
        }
    }
    Ok(())
}
