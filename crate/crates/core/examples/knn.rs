//! k-nearest neighbours on two noisy clusters, with both distance metrics.

use genreforge::models::{knn_fit, Distance, KnnParams};
use genreforge::preprocess::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, centre) in [(0, -1.5), (1, 1.5)] {
        for _ in 0..40 {
            rows.push(centre + rng.random_range(-1.0..1.0));
            rows.push(centre + rng.random_range(-1.0..1.0));
            labels.push(class);
        }
    }
    let data = Dataset::new(
        Array2::from_shape_vec((80, 2), rows)?,
        labels,
        vec!["left".into(), "right".into()],
        vec!["x".into(), "y".into()],
    )?;

    for distance in [Distance::Euclidean, Distance::Manhattan] {
        let model = knn_fit(&data, &KnnParams { k: 5, distance })?;
        let p = model.predict(&[0.2, 0.4])?;
        println!(
            "{distance:?}: class {} votes {:?} nearest rows {:?} at {:.3?}",
            data.label_names()[p.class],
            p.votes,
            p.neighbors,
            p.neighbor_distances
        );
    }
    Ok(())
}
