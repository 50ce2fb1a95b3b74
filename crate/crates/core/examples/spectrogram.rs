//! STFT of a two-tone signal; prints the strongest bin of a few frames.

use std::f64::consts::TAU;

use genreforge::audio_io::AudioClip;
use genreforge::dsp::{stft, FrameConfig};

fn main() {
    let sr = 22050u32;
    // 220 Hz for one second, then 1760 Hz
    let samples: Vec<f64> = (0..2 * sr as usize)
        .map(|i| {
            let t = i as f64 / sr as f64;
            let f = if t < 1.0 { 220.0 } else { 1760.0 };
            0.8 * (TAU * f * t).sin()
        })
        .collect();
    let clip = AudioClip::new(samples, sr, "two-tone");

    let spec = stft(&clip, &FrameConfig::default());
    println!(
        "{} frames x {} bins, {:.2} Hz per bin",
        spec.num_frames(),
        spec.num_bins(),
        spec.bin_width_hz()
    );
    for frame in [0, 20, 40, 60, spec.num_frames() - 1] {
        let row = spec.magnitudes().row(frame);
        let (bin, mag) = row
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, &m)| if m > best.1 { (i, m) } else { best });
        println!("frame {frame:>3}: peak {:>7.1} Hz (|X| = {mag:.1})", spec.bin_freqs_hz()[bin]);
    }
}
