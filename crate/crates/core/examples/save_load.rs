//! Train a forest on synthetic clips, save it, reload it and classify a new clip.

use genreforge::config::RunConfig;
use genreforge::models::{load_model, save_model, ModelKind};
use genreforge::pipeline::{extract_corpus, train_model};
use genreforge::synth::{default_styles, synth_clip, write_corpus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let styles = default_styles();
    write_corpus(dir.path().join("corpus"), &styles, 10, 1.5, 22050, 1)?;

    let config = RunConfig::load_with_overrides(None, &["segment_s=1.5".into(), "forest_n_estimators=60".into()])?;
    let (table, _) = extract_corpus(dir.path().join("corpus"), &config.analysis()?)?;
    let outcome = train_model(&table.to_dataset()?, ModelKind::Forest, &config)?;
    println!(
        "train accuracy {:.3}, val accuracy {:.3}",
        outcome.train_accuracy, outcome.val_accuracy
    );

    let path = dir.path().join("forest.json");
    save_model(&outcome.model, &path)?;
    println!("saved {} bytes", std::fs::metadata(&path)?.len());
    let model = load_model(&path)?;
    assert_eq!(model, outcome.model);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for style in &styles {
        let clip = synth_clip(style, 1.5, 22050, &mut rng);
        let p = model.predict_clip(&clip)?;
        println!("fresh {:<10} -> {}", style.name, model.label_name(p.class));
    }
    Ok(())
}
