mod common;

use common::{inverse_dct2, sine};
use genreforge::audio_io::AudioClip;
use genreforge::dsp::{stft, FrameConfig, Spectrogram};
use genreforge::features::{
    build_mel_filterbank, chroma, dct2_orthonormal, extract_features, log_mel_energies, mel_scale, mfcc,
    pitch_class, AnalysisConfig, ChromaConfig, C1_HZ,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pure_tone_features() {
    let sr = 22050;
    let clip = AudioClip::new(sine(440.0, sr, 22050, 0.5), sr, "a440");
    let f = extract_features(&clip, &AnalysisConfig::default()).unwrap();
    let bin = sr as f64 / 2048.0;
    assert!((f.get("zcr_mean").unwrap() - 879.0 / 22049.0).abs() < 1e-3);
    assert!((f.get("centroid_mean").unwrap() - 440.0).abs() <= bin);
    assert!((f.get("rolloff_mean").unwrap() - 440.0).abs() <= bin);
    let chroma_means: Vec<f64> = (1..=12).map(|i| f.get(&format!("chroma{i}_mean")).unwrap()).collect();
    let top = (0..12).max_by(|&a, &b| chroma_means[a].total_cmp(&chroma_means[b])).unwrap();
    assert_eq!(top, 9);
    assert_eq!(f.values.len(), 70);
}

#[test]
fn mel_anchor_points() {
    assert_eq!(mel_scale(0.0), 0.0);
    let m = mel_scale(1000.0);
    assert!((999.9..=1000.1).contains(&m), "{m}");
}

#[test]
fn filterbank_matches_textbook_triangles() {
    let (n_mels, sr, num_bins) = (26, 16000u32, 257);
    let bank = build_mel_filterbank(n_mels, 100.0, 7000.0, num_bins, sr).unwrap();
    let to_mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let to_hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let (lo, hi) = (to_mel(100.0), to_mel(7000.0));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    for m in 0..n_mels {
        for k in 0..num_bins {
            let f = k as f64 * sr as f64 / 512.0;
            let (l, c, r) = (edges[m], edges[m + 1], edges[m + 2]);
            let expected = if f <= l || f >= r {
                0.0
            } else if f <= c {
                (f - l) / (c - l)
            } else {
                (r - f) / (r - c)
            };
            let got = bank.weights()[[m, k]];
            assert!((got - expected).abs() < 1e-9, "filter {m} bin {k}: {got} vs {expected}");
        }
    }
}

#[test]
fn log_mel_inverse_dct_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bank = build_mel_filterbank(40, 0.0, 11025.0, 1025, 22050).unwrap();
    for _ in 0..20 {
        let mags: Vec<f64> = (0..1025).map(|_| rng.random_range(0.0..10.0)).collect();
        let log_mel = log_mel_energies(&mags, &bank);
        let back = inverse_dct2(&dct2_orthonormal(&log_mel));
        for (a, b) in log_mel.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn silent_frame_has_only_a_constant_cepstrum() {
    let cfg = FrameConfig::default();
    let spec = Spectrogram::from_magnitudes(Array2::zeros((3, 1025)), 22050, cfg);
    let bank = build_mel_filterbank(40, 0.0, 11025.0, 1025, 22050).unwrap();
    let c = mfcc(&spec, &bank, 20).unwrap();
    for row in c.rows() {
        assert!((row[0] - 1e-10f64.ln() * 40f64.sqrt()).abs() < 1e-9);
        assert!(row.iter().skip(1).all(|v| v.abs() < 1e-9));
    }
}

#[test]
fn pitch_classes_of_reference_notes() {
    assert_eq!(pitch_class(C1_HZ, C1_HZ), 0);
    assert_eq!(pitch_class(440.0, C1_HZ), 9);
    assert_eq!(pitch_class(261.63, C1_HZ), 0);
    assert_eq!(pitch_class(329.63, C1_HZ), 4);
}

#[test]
fn chord_chroma_lights_up_its_notes() {
    let sr = 22050;
    let n = sr as usize;
    let a: Vec<f64> = sine(220.0, sr, n, 0.3);
    let c = sine(261.63, sr, n, 0.3);
    let e = sine(329.63, sr, n, 0.3);
    let samples: Vec<f64> = (0..n).map(|i| a[i] + c[i] + e[i]).collect();
    let spec = stft(&AudioClip::new(samples, sr, "am"), &FrameConfig::default());
    let profile = chroma(&spec, &ChromaConfig::default());
    let mean: Vec<f64> = profile.columns().into_iter().map(|c| c.mean().unwrap()).collect();
    let mut order: Vec<usize> = (0..12).collect();
    order.sort_by(|&x, &y| mean[y].total_cmp(&mean[x]));
    let mut top = order[..3].to_vec();
    top.sort();
    assert_eq!(top, vec![0, 4, 9]);
}
