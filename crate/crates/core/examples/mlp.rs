//! A one-hidden-layer network learning XOR.

use genreforge::models::{mlp_fit, MlpParams};
use genreforge::preprocess::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (cx, cy) in [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)] {
        for _ in 0..25 {
            rows.push(cx + rng.random_range(-0.3..0.3));
            rows.push(cy + rng.random_range(-0.3..0.3));
            labels.push(usize::from(cx * cy < 0.0));
        }
    }
    let data = Dataset::new(
        Array2::from_shape_vec((100, 2), rows)?,
        labels,
        vec!["same".into(), "different".into()],
        vec!["x".into(), "y".into()],
    )?;

    let params = MlpParams {
        hidden_layers: vec![8],
        learning_rate: 0.1,
        epochs: 500,
        batch_size: 8,
        seed: 1,
    };
    let model = mlp_fit(&data, &params)?;
    let curve = model.loss_curve();
    for epoch in [0, 10, 50, 100, curve.len() - 1] {
        println!("epoch {epoch:>3}: loss {:.5}", curve[epoch]);
    }
    for probe in [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]] {
        let (class, probs) = model.predict(&probe)?;
        println!("{probe:?} -> {} {probs:.3?}", data.label_names()[class]);
    }
    Ok(())
}
