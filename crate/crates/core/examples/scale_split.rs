//! Stratified split and train-fitted scaling on a small labelled table.

use genreforge::preprocess::{apply_scaler, fit_scaler, stratified_split, Dataset, ScalerKind};
use ndarray::Array2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels: Vec<String> = ["rock", "jazz", "pop"].iter().cycle().take(30).map(|s| s.to_string()).collect();
    let features = Array2::from_shape_fn((30, 2), |(i, j)| (i * (j + 1)) as f64 + 100.0 * j as f64);
    let data = Dataset::from_text_labels(features, &labels, vec!["a".into(), "b".into()])?;
    println!("classes {:?}, counts {:?}", data.label_names(), data.class_counts());

    let (train, val) = stratified_split(&data, 0.2, 42)?;
    println!("train counts {:?}, val counts {:?}", train.class_counts(), val.class_counts());

    for kind in [ScalerKind::Standard, ScalerKind::MinMax] {
        let params = fit_scaler(&train, kind)?;
        let scaled = apply_scaler(&val, &params)?;
        println!("{kind:?}: first val row {:?} -> {:.3?}", val.row(0), scaled.row(0));
    }
    Ok(())
}
