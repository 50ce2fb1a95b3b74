//! Full 70-value feature vector of a pure 440 Hz tone.

use std::f64::consts::TAU;

use genreforge::audio_io::AudioClip;
use genreforge::features::{extract_features, AnalysisConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sr = 22050u32;
    let samples: Vec<f64> = (0..sr as usize).map(|i| (TAU * 440.0 * i as f64 / sr as f64).sin()).collect();
    let clip = AudioClip::new(samples, sr, "a440");

    let features = extract_features(&clip, &AnalysisConfig::default())?;
    for name in ["zcr_mean", "centroid_mean", "rolloff_mean", "mfcc1_mean", "mfcc2_mean"] {
        println!("{name:<14} {:>12.5}", features.get(name).unwrap());
    }
    // pitch class 9 is A
    let chroma: Vec<f64> = (1..=12).map(|i| features.get(&format!("chroma{i}_mean")).unwrap()).collect();
    let top = (0..12).max_by(|&a, &b| chroma[a].total_cmp(&chroma[b])).unwrap();
    println!("dominant pitch class: {top}");
    println!("{} values in total", features.values.len());
    Ok(())
}
