//! Music genre classification from raw WAV audio.
//!
//! The pipeline decodes PCM audio, computes a short-time spectrum, summarizes
//! each clip as a 70-dimensional feature vector (zero-crossing rate, spectral
//! centroid and roll-off, MFCCs, chroma) and trains one of four classifiers on
//! the result.

pub mod audio_io;
pub mod cli;
pub mod config;
pub mod dsp;
pub mod evaluate;
pub mod feature_csv;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
