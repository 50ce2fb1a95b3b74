//! Writes a synthetic `<dir>/<genre>/*.wav` corpus for trying the CLI.
//!
//! Usage: cargo run --example synth_corpus -- <dir> [clips per genre] [seconds]

use genreforge::synth::{default_styles, write_corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().ok_or("usage: synth_corpus <dir> [clips per genre] [seconds]")?;
    let clips: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let seconds: f64 = args.next().map_or(Ok(5.0), |s| s.parse())?;
    write_corpus(&dir, &default_styles(), clips, seconds, 22050, 42)?;
    println!("wrote {} clips of {seconds} s under {dir}", clips * default_styles().len());
    Ok(())
}
