//! `genreforge` command line.
//!
//! Exit codes: 0 on success, 1 on an operational failure, 2 when the input
//! corpus is missing or contains nothing usable.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audio_io::{read_wav, AudioError};
use crate::config::RunConfig;
use crate::feature_csv::FeatureTable;
use crate::models::{load_model, save_model, ModelKind};
use crate::pipeline::{compare_all, extract_corpus, load_features, train_model, PipelineError};

#[derive(Debug, Parser)]
#[command(name = "genreforge", version, about = "Music genre classification from WAV audio")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set knn_k=7`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, Failure> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        RunConfig::load_with_overrides(self.config.as_deref(), &overrides).map_err(Failure::operational)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract a feature CSV from `<data>/<genre>/*.wav`.
    Extract {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Train one model on a feature CSV and save it.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Classify one WAV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        audio: PathBuf,
    },
    /// Train and rank all four models, writing reports to a directory.
    Compare {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// An error message and the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn operational(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn bad_corpus(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::Audio(AudioError::NoAudioFound(_) | AudioError::NotADirectory(_))
            | PipelineError::NothingExtracted => Failure::bad_corpus(e.to_string()),
            _ => Failure::operational(e.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::operational(format!("cannot write {}: {e}", path.display())))
}

fn read_table(path: &Path, config: &RunConfig) -> Result<crate::preprocess::Dataset, Failure> {
    let table = FeatureTable::read(path).map_err(|e| Failure::operational(e.to_string()))?;
    Ok(load_features(&table, config)?)
}

/// Runs a parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::operational(e.to_string());
    match cli.command {
        Command::Extract {
            data,
            out: csv_path,
            jobs,
            config,
        } => {
            let config = config.load()?;
            let analysis = config.analysis().map_err(Failure::operational)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| Failure::operational(e.to_string()))?;
            let (table, skipped) = pool.install(|| extract_corpus(&data, &analysis))?;
            table
                .write(&csv_path)
                .map_err(|e| Failure::operational(e.to_string()))?;
            writeln!(
                out,
                "wrote {} rows to {} ({} skipped)",
                table.len(),
                csv_path.display(),
                skipped.len()
            )
            .map_err(io)?;
        }
        Command::Train {
            features,
            model,
            out: model_path,
            config,
        } => {
            let config = config.load()?;
            let data = read_table(&features, &config)?;
            let outcome = train_model(&data, model, &config)?;
            save_model(&outcome.model, &model_path).map_err(|e| Failure::operational(e.to_string()))?;
            writeln!(out, "train accuracy: {:.4}", outcome.train_accuracy).map_err(io)?;
            writeln!(out, "val accuracy: {:.4}", outcome.val_accuracy).map_err(io)?;
        }
        Command::Predict { model, audio } => {
            let model = load_model(&model).map_err(|e| Failure::operational(e.to_string()))?;
            let clip = read_wav(&audio).map_err(|e| Failure::operational(format!("{}: {e}", e.kind())))?;
            let prediction = model
                .predict_clip(&clip)
                .map_err(|e| Failure::operational(e.to_string()))?;
            writeln!(out, "genre: {}", model.label_name(prediction.class)).map_err(io)?;
            for (name, score) in model.metadata().label_names.iter().zip(&prediction.scores) {
                writeln!(out, "  {name:<16} {score:.4}").map_err(io)?;
            }
        }
        Command::Compare {
            features,
            out_dir,
            config,
        } => {
            let config = config.load()?;
            let data = read_table(&features, &config)?;
            let report = compare_all(&data, &config)?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::operational(format!("cannot create {}: {e}", out_dir.display())))?;
            let table = report.to_table();
            write_file(&out_dir.join("report.txt"), &table)?;
            write_file(&out_dir.join("report.json"), report.to_json())?;
            out.write_all(table.as_bytes()).map_err(io)?;
            let Some(top) = report.top() else {
                return Err(Failure::operational("every model failed to train"));
            };
            let cm = top.confusion.as_ref().expect("successful entries carry a confusion matrix");
            let stem = format!("confusion_{}", top.model_kind);
            write_file(&out_dir.join(format!("{stem}.csv")), cm.to_csv())?;
            write_file(&out_dir.join(format!("{stem}.svg")), cm.to_svg())?;
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}
