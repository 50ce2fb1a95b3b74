//! Write a 16-bit tone to disk, read it back and cut a segment.

use std::f64::consts::TAU;

use genreforge::audio_io::{read_wav, take_segment, write_wav, AudioClip};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sr = 22050;
    let samples: Vec<f64> = (0..sr * 2).map(|i| 0.5 * (TAU * 440.0 * i as f64 / sr as f64).sin()).collect();
    let clip = AudioClip::new(samples, sr as u32, "a440");

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("a440.wav");
    write_wav(&path, &clip)?;
    let decoded = read_wav(&path)?;
    println!(
        "{}: {} samples at {} Hz ({:.2} s)",
        path.display(),
        decoded.len(),
        decoded.sample_rate_hz(),
        decoded.duration_s()
    );

    let worst = clip
        .samples()
        .iter()
        .zip(decoded.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max 16-bit quantization error: {worst:.2e}");

    let head = take_segment(&decoded, 0.5);
    println!("first 0.5 s: {} samples", head.len());
    Ok(())
}
