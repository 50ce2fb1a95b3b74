//! Reference implementations and fixtures shared by the integration tests.
//! Nothing here calls into the library's numeric code.

#![allow(dead_code)]

use std::f64::consts::PI;

use genreforge::preprocess::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// |X_k| for k = 0..=n/2 by direct summation.
pub fn naive_dft_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let angle = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            re.hypot(im)
        })
        .collect()
}

pub fn sine(freq_hz: f64, sample_rate_hz: u32, n: usize, amplitude: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sample_rate_hz as f64).sin())
        .collect()
}

pub fn dataset(rows: Vec<f64>, n_features: usize, labels: Vec<usize>, n_classes: usize) -> Dataset {
    let n = labels.len();
    Dataset::new(
        Array2::from_shape_vec((n, n_features), rows).unwrap(),
        labels,
        (0..n_classes).map(|c| format!("class{c}")).collect(),
        (0..n_features).map(|j| format!("f{j}")).collect(),
    )
    .unwrap()
}

/// Gaussian-ish clusters: `n_per` rows around each centre.
pub fn blobs(centres: &[Vec<f64>], n_per: usize, spread: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = centres[0].len();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, centre) in centres.iter().enumerate() {
        for _ in 0..n_per {
            for c in centre {
                // sum of three uniforms, roughly bell-shaped
                let noise: f64 = (0..3).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() / 3.0;
                rows.push(c + spread * noise);
            }
            labels.push(class);
        }
    }
    dataset(rows, d, labels, centres.len())
}

/// Four noisy corners; opposite corners share a class.
pub fn xor(n_per: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (cx, cy) in [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)] {
        for _ in 0..n_per {
            rows.push(cx + rng.random_range(-0.3..0.3));
            rows.push(cy + rng.random_range(-0.3..0.3));
            labels.push(usize::from(cx * cy < 0.0));
        }
    }
    dataset(rows, 2, labels, 2)
}

pub fn random_dataset(n: usize, d: usize, n_classes: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let rows = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    dataset(rows, d, labels, n_classes)
}

/// k-NN by sorting every training row; same tie rules stated independently.
pub fn brute_force_knn(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    query: &[f64],
    k: usize,
    manhattan: bool,
) -> usize {
    let mut all: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = if manhattan {
                r.iter().zip(query).map(|(a, b)| (a - b).abs()).sum()
            } else {
                r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            (d, i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; n_classes];
    let mut dist = vec![0.0; n_classes];
    for &(d, i) in &all[..k] {
        votes[labels[i]] += 1;
        dist[labels[i]] += d;
    }
    let max_votes = *votes.iter().max().unwrap();
    let tied: Vec<usize> = (0..n_classes).filter(|&c| votes[c] == max_votes).collect();
    let best_dist = tied.iter().map(|&c| dist[c]).fold(f64::INFINITY, f64::min);
    *tied.iter().find(|&&c| dist[c] == best_dist).unwrap()
}

/// Mean binary cross-entropy written out directly.
pub fn bce_loss(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64) -> f64 {
    let mut total = 0.0;
    for (row, &t) in x.iter().zip(y) {
        let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
        let p = 1.0 / (1.0 + (-z).exp());
        total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    total / x.len() as f64
}

/// Dense layer as plain nested vectors, `weights[input][output]`.
#[derive(Clone, Debug)]
pub struct RefLayer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub relu: bool,
}

/// Mean categorical cross-entropy of a ReLU/softmax network, loop by loop.
pub fn mlp_loss(layers: &[RefLayer], x: &[Vec<f64>], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &y) in x.iter().zip(labels) {
        let mut a = row.clone();
        for layer in layers {
            let mut z = layer.bias.clone();
            for (i, ai) in a.iter().enumerate() {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += ai * layer.weights[i][j];
                }
            }
            if layer.relu {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        let max = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = a.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        total += log_sum - a[y];
    }
    total / x.len() as f64
}

/// ‖a − b‖ / (‖a‖ + ‖b‖), zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Inverse of the orthonormal DCT-II (a scaled DCT-III).
pub fn inverse_dct2(c: &[f64]) -> Vec<f64> {
    let n = c.len() as f64;
    (0..c.len())
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, &ck)| {
                    let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                    scale * ck * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()
                })
                .sum()
        })
        .collect()
}
