//! One-vs-rest logistic regression on three clusters; prints the loss curve.

use genreforge::models::{logreg_fit, LogRegParams};
use genreforge::preprocess::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let centres = [(-2.0, 0.0), (2.0, 0.0), (0.0, 2.5)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, (cx, cy)) in centres.iter().enumerate() {
        for _ in 0..30 {
            rows.push(cx + rng.random_range(-0.8..0.8));
            rows.push(cy + rng.random_range(-0.8..0.8));
            labels.push(class);
        }
    }
    let data = Dataset::new(
        Array2::from_shape_vec((90, 2), rows)?,
        labels,
        vec!["a".into(), "b".into(), "c".into()],
        vec!["x".into(), "y".into()],
    )?;

    let model = logreg_fit(&data, &LogRegParams::default())?;
    for (class, curve) in model.loss_curves().iter().enumerate() {
        println!(
            "class {class}: loss {:.4} -> {:.4} over {} epochs",
            curve[0],
            curve[curve.len() - 1],
            curve.len()
        );
    }
    let hits = (0..data.n_samples())
        .filter(|&i| model.predict(data.row(i)).unwrap().0 == data.labels()[i])
        .count();
    println!("training accuracy {:.3}", hits as f64 / data.n_samples() as f64);
    let (class, scores) = model.predict(&[0.0, 2.0])?;
    println!("(0, 2) -> class {class}, sigmoid scores {scores:.3?}");
    Ok(())
}
