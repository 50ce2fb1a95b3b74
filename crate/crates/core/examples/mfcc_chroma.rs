//! Mel filterbank, MFCCs and chroma of an A-minor triad.

use std::f64::consts::TAU;

use genreforge::audio_io::AudioClip;
use genreforge::dsp::{stft, FrameConfig};
use genreforge::features::{build_mel_filterbank, chroma, mel_scale, mfcc, ChromaConfig};

const NOTES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sr = 22050u32;
    let triad = [220.0, 261.63, 329.63];
    let samples: Vec<f64> = (0..sr as usize)
        .map(|i| triad.iter().map(|f| (TAU * f * i as f64 / sr as f64).sin()).sum::<f64>() / 3.0)
        .collect();
    let clip = AudioClip::new(samples, sr, "a-minor");
    let spec = stft(&clip, &FrameConfig::default());

    println!("mel(1000 Hz) = {:.3}", mel_scale(1000.0));
    let bank = build_mel_filterbank(40, 0.0, sr as f64 / 2.0, spec.num_bins(), sr)?;
    println!("first filter corners (Hz): {:.1?}", &bank.corner_hz()[..3]);

    let cepstra = mfcc(&spec, &bank, 13)?;
    let frame = cepstra.nrows() / 2;
    println!("MFCC of frame {frame}: {:.2}", cepstra.row(frame));

    let pitch = chroma(&spec, &ChromaConfig::default());
    let mean: Vec<f64> = pitch.columns().into_iter().map(|c| c.mean().unwrap()).collect();
    let mut ranked: Vec<usize> = (0..12).collect();
    ranked.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]));
    let top: Vec<&str> = ranked[..3].iter().map(|&i| NOTES[i]).collect();
    println!("strongest pitch classes: {top:?}");
    Ok(())
}
