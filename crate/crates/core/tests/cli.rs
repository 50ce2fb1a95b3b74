use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use genreforge::feature_csv::FeatureTable;
use genreforge::preprocess::stratified_split_indices;
use genreforge::synth::{default_styles, write_corpus};

const FAST: &str = "segment_s = 1.5\nforest_n_estimators = 40\nmlp_hidden_layers = [32]\nmlp_epochs = 40\n";

fn genreforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genreforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(clips: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path().join("data"), &default_styles(), clips, 1.5, 22050, 3).unwrap();
        fs::write(dir.path().join("run.toml"), FAST).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn extract(&self) -> Output {
        genreforge(&["extract", "--data", &self.s("data"), "--out", &self.s("f.csv"), "--config", &self.s("run.toml")])
    }

    fn train(&self, kind: &str, out: &str) -> Output {
        genreforge(&[
            "train",
            "--features",
            &self.s("f.csv"),
            "--model",
            kind,
            "--out",
            &self.s(out),
            "--config",
            &self.s("run.toml"),
        ])
    }
}

#[test]
fn extract_skips_corrupt_files_and_sorts_rows() {
    let ws = Workspace::new(2);
    fs::write(ws.path("data/jazz/zz_broken.wav"), b"RIFF....WAVEjunk").unwrap();
    let out = ws.extract();
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("zz_broken.wav") && stderr.contains("MalformedContainer"), "{stderr}");

    let table = FeatureTable::read(ws.path("f.csv")).unwrap();
    assert_eq!(table.len(), 10);
    let mut sorted = table.paths.clone();
    sorted.sort();
    assert_eq!(table.paths, sorted);
    assert!(table.paths.iter().all(|p| !Path::new(p).is_absolute()));
}

#[test]
fn extract_reports_an_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("rock")).unwrap();
    let root = dir.path().to_string_lossy().into_owned();
    let csv = dir.path().join("x.csv").to_string_lossy().into_owned();
    assert_eq!(genreforge(&["extract", "--data", &root, "--out", &csv]).status.code(), Some(2));
    let missing = dir.path().join("nope").to_string_lossy().into_owned();
    assert_eq!(genreforge(&["extract", "--data", &missing, "--out", &csv]).status.code(), Some(2));
}

#[test]
fn train_predict_and_compare() {
    let ws = Workspace::new(6);
    assert_eq!(ws.extract().status.code(), Some(0));

    // deterministic model files
    let first = ws.train("knn", "knn1.json");
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    assert!(text.contains("train accuracy:") && text.contains("val accuracy:"), "{text}");
    assert_eq!(ws.train("knn", "knn2.json").status.code(), Some(0));
    assert_eq!(fs::read(ws.path("knn1.json")).unwrap(), fs::read(ws.path("knn2.json")).unwrap());

    // a forest remembers a clip it was trained on
    assert_eq!(ws.train("forest", "forest.json").status.code(), Some(0));
    let table = FeatureTable::read(ws.path("f.csv")).unwrap();
    let split = stratified_split_indices(&table.to_dataset().unwrap(), 0.2, 42).unwrap();
    let i = split.train[0];
    let clip = ws.path("data").join(&table.paths[i]);
    let out = genreforge(&["predict", "--model", &ws.s("forest.json"), &clip.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with(&format!("genre: {}\n", table.labels[i])), "{}", stdout(&out));

    // network probabilities add up
    assert_eq!(ws.train("mlp", "mlp.json").status.code(), Some(0));
    let out = genreforge(&["predict", "--model", &ws.s("mlp.json"), &clip.to_string_lossy()]);
    let total: f64 = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() <= 0.003, "{total}");

    // comparison report
    let report_dir = ws.s("report");
    let args = ["compare", "--features", &ws.s("f.csv"), "--out-dir", &report_dir, "--config", &ws.s("run.toml")];
    let out = genreforge(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table_text = fs::read_to_string(ws.path("report/report.txt")).unwrap();
    assert_eq!(table_text.lines().count(), 5);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(ws.path("report/report.json")).unwrap()).unwrap();
    let top = report["entries"][0]["model_kind"].as_str().unwrap().to_string();
    let vals: Vec<f64> = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["val_accuracy"].as_f64().unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[0] >= w[1]));

    let csv = fs::read_to_string(ws.path(&format!("report/confusion_{top}.csv"))).unwrap();
    for line in csv.lines().skip(1) {
        let row_sum: usize = line.split(',').skip(1).map(|c| c.parse::<usize>().unwrap()).sum();
        // 6 clips per genre, round(0.2 * 6) = 1 held out
        assert_eq!(row_sum, 1);
    }
    assert!(ws.path(&format!("report/confusion_{top}.svg")).exists());

    assert_eq!(genreforge(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(ws.path("report/report.txt")).unwrap(), table_text);
}

#[test]
fn operational_failures_exit_with_one() {
    let ws = Workspace::new(2);
    assert_eq!(ws.extract().status.code(), Some(0));

    let missing = genreforge(&["predict", "--model", &ws.s("absent.json"), &ws.s("data/jazz/jazz.00000.wav")]);
    assert_eq!(missing.status.code(), Some(1));

    let mut table = FeatureTable::read(ws.path("f.csv")).unwrap();
    table.labels.iter_mut().for_each(|l| *l = "rock".into());
    table.write(ws.path("f.csv")).unwrap();
    let single = ws.train("logreg", "lr.json");
    assert_eq!(single.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&single.stderr).contains("single class"));

    let unknown = genreforge(&["train", "--features", &ws.s("f.csv"), "--model", "svm", "--out", &ws.s("x.json")]);
    assert_eq!(unknown.status.code(), Some(1));

    fs::write(ws.path("bad.toml"), "knn_kk = 3\n").unwrap();
    let bad = genreforge(&["train", "--features", &ws.s("f.csv"), "--model", "knn", "--out", &ws.s("x.json"), "--config", &ws.s("bad.toml")]);
    assert_eq!(bad.status.code(), Some(1));
}
