//! Extract features from a synthetic five-style corpus and rank all four models.

use genreforge::config::RunConfig;
use genreforge::pipeline::{compare_all, extract_corpus};
use genreforge::synth::{default_styles, write_corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    write_corpus(dir.path(), &default_styles(), 16, 2.0, 22050, 42)?;

    // smaller models than the defaults keep the demo quick
    let config = RunConfig::load_with_overrides(
        None,
        &[
            "segment_s=2.0".into(),
            "forest_n_estimators=100".into(),
            "mlp_hidden_layers=[64, 32]".into(),
            "mlp_epochs=100".into(),
        ],
    )?;
    let (table, skipped) = extract_corpus(dir.path(), &config.analysis()?)?;
    println!("{} clips extracted, {} skipped", table.len(), skipped.len());

    let report = compare_all(&table.to_dataset()?, &config)?;
    print!("{}", report.to_table());
    if let Some(top) = report.top() {
        println!("\nconfusion matrix of the best model:");
        print!("{}", top.confusion.as_ref().unwrap().to_csv());
    }
    Ok(())
}
