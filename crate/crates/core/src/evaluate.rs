//! Accuracy, confusion matrices and the side-by-side classifier report.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{Classifier, ModelConfig, ModelKind};
use crate::preprocess::Dataset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction and truth lengths differ ({predictions} vs {truth})")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("cannot score an empty prediction set")]
    Empty,
    #[error("class index {index} is out of range for {n_classes} classes")]
    IndexOutOfRange { index: usize, n_classes: usize },
    #[error("no model configurations given")]
    NoModels,
}

fn check_lengths(predictions: &[usize], truth: &[usize]) -> Result<(), EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    Ok(())
}

/// Fraction of positions where prediction and truth agree.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64, EvalError> {
    check_lengths(predictions, truth)?;
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
    pub label_names: Vec<String>,
}

pub fn confusion(predictions: &[usize], truth: &[usize], label_names: &[String]) -> Result<ConfusionMatrix, EvalError> {
    check_lengths(predictions, truth)?;
    let n = label_names.len();
    let mut counts = vec![vec![0usize; n]; n];
    for (&p, &t) in predictions.iter().zip(truth) {
        for index in [p, t] {
            if index >= n {
                return Err(EvalError::IndexOutOfRange { index, n_classes: n });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        label_names: label_names.to_vec(),
    })
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Whether every diagonal entry is the maximum of its row.
    pub fn is_diagonally_dominant(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|&c| c <= row[i]))
    }

    /// CSV with label names heading both the rows (actual) and columns (predicted).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("actual\\predicted");
        for name in &self.label_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (name, row) in self.label_names.iter().zip(&self.counts) {
            out.push_str(name);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    /// Heat map with one labelled cell per count.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 60;
        const MARGIN: usize = 110;
        let n = self.n_classes();
        let size = MARGIN + n * CELL + 20;
        let max = self.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="14" text-anchor="middle">predicted</text>"#,
            MARGIN + n * CELL / 2
        );
        for (i, name) in self.label_names.iter().enumerate() {
            let name = xml_escape(name);
            let centre = MARGIN + i * CELL + CELL / 2;
            let _ = writeln!(
                svg,
                r#"<text x="{centre}" y="{}" text-anchor="middle">{name}</text>"#,
                MARGIN - 8
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{name}</text>"#,
                MARGIN - 8,
                centre + 4
            );
        }
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let t = c as f64 / max;
                // white to dark blue
                let r = (255.0 * (1.0 - 0.85 * t)).round() as u8;
                let g = (255.0 * (1.0 - 0.65 * t)).round() as u8;
                let text = if t > 0.5 { "white" } else { "black" };
                let (x, y) = (MARGIN + j * CELL, MARGIN + i * CELL);
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}ff" stroke="#999"/>"##
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{}" text-anchor="middle" fill="{text}">{c}</text>"#,
                    x + CELL / 2,
                    y + CELL / 2 + 4
                );
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model_kind: ModelKind,
    pub segment_duration_s: f64,
    pub train_accuracy: Option<f64>,
    pub val_accuracy: Option<f64>,
    pub confusion: Option<ConfusionMatrix>,
    /// Set when the model failed to train or predict.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Successful entries by descending validation accuracy, then failures.
    pub entries: Vec<ReportEntry>,
}

impl EvalReport {
    /// The entry with the highest validation accuracy, if any model succeeded.
    pub fn top(&self) -> Option<&ReportEntry> {
        self.entries.first().filter(|e| e.error.is_none())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Aligned plain-text table, the best model marked with `*`.
    pub fn to_table(&self) -> String {
        let name_width = self
            .entries
            .iter()
            .map(|e| e.model_kind.display_name().len())
            .max()
            .unwrap_or(0)
            .max("Classifier".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "  {:<name_width$}  {:>8}  {:>10}  {:>10}",
            "Classifier", "Segment", "Train acc", "Val acc"
        );
        let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.2}%", 100.0 * v));
        for (i, e) in self.entries.iter().enumerate() {
            let mark = if i == 0 && e.error.is_none() { '*' } else { ' ' };
            let _ = write!(
                out,
                "{mark} {:<name_width$}  {:>7}s  {:>10}  {:>10}",
                e.model_kind.display_name(),
                e.segment_duration_s,
                pct(e.train_accuracy),
                pct(e.val_accuracy)
            );
            if let Some(err) = &e.error {
                let _ = write!(out, "  failed: {err}");
            }
            out.push('\n');
        }
        out
    }
}

fn evaluate_one(config: &ModelConfig, train: &Dataset, val: &Dataset, segment_s: f64) -> ReportEntry {
    let mut entry = ReportEntry {
        model_kind: config.kind(),
        segment_duration_s: segment_s,
        train_accuracy: None,
        val_accuracy: None,
        confusion: None,
        error: None,
    };
    let result = (|| -> Result<(f64, f64, ConfusionMatrix), String> {
        let model: Classifier = config.fit(train).map_err(|e| e.to_string())?;
        let train_pred = model.predict_dataset(train).map_err(|e| e.to_string())?;
        let val_pred = model.predict_dataset(val).map_err(|e| e.to_string())?;
        let train_acc = accuracy(&train_pred, train.labels()).map_err(|e| e.to_string())?;
        let val_acc = accuracy(&val_pred, val.labels()).map_err(|e| e.to_string())?;
        let cm = confusion(&val_pred, val.labels(), val.label_names()).map_err(|e| e.to_string())?;
        Ok((train_acc, val_acc, cm))
    })();
    match result {
        Ok((t, v, cm)) => {
            entry.train_accuracy = Some(t);
            entry.val_accuracy = Some(v);
            entry.confusion = Some(cm);
        }
        Err(e) => entry.error = Some(e),
    }
    entry
}

/// Fits every configuration on `train` and scores it on both partitions.
///
/// A failing model becomes an entry with an error note; the others still run.
/// Equal validation accuracies keep the order of `configs`.
pub fn compare_models(
    train: &Dataset,
    val: &Dataset,
    configs: &[ModelConfig],
    segment_s: f64,
) -> Result<EvalReport, EvalError> {
    if configs.is_empty() {
        return Err(EvalError::NoModels);
    }
    let mut entries: Vec<ReportEntry> = configs
        .par_iter()
        .map(|c| evaluate_one(c, train, val, segment_s))
        .collect();
    entries.sort_by(|a, b| match (a.val_accuracy, b.val_accuracy) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(EvalReport { entries })
}
