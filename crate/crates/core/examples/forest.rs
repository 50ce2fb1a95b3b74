//! A small random forest on a ring-inside-a-square problem.

use genreforge::models::{forest_fit, ForestParams};
use genreforge::preprocess::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 300;
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        rows.extend([x, y]);
        labels.push(usize::from(x * x + y * y < 0.4));
    }
    let data = Dataset::new(
        Array2::from_shape_vec((n, 2), rows)?,
        labels,
        vec!["outside".into(), "inside".into()],
        vec!["x".into(), "y".into()],
    )?;

    let params = ForestParams {
        n_estimators: 50,
        max_depth: 6,
        ..Default::default()
    };
    let forest = forest_fit(&data, &params)?;
    let depths: Vec<usize> = forest.trees().iter().map(|t| t.depth()).collect();
    println!(
        "{} trees, depth {}..={}, {} leaves in the first tree",
        forest.trees().len(),
        depths.iter().min().unwrap(),
        depths.iter().max().unwrap(),
        forest.trees()[0].n_leaves()
    );
    for probe in [[0.0, 0.0], [0.9, 0.9], [0.5, 0.3]] {
        let (class, votes) = forest.predict(&probe)?;
        println!("{probe:?} -> {} (votes {votes:?})", data.label_names()[class]);
    }
    Ok(())
}
