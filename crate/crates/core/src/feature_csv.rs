//! The feature table on disk: `path,label,<schema columns>`, one clip per row.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::features::feature_schema;
use crate::preprocess::{Dataset, PreprocessError};

#[derive(Debug, Error)]
pub enum FeatureCsvError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed feature CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("header does not match the feature schema: {0}")]
    SchemaMismatch(String),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] PreprocessError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub n_mfcc: usize,
    pub paths: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(n_mfcc: usize) -> Self {
        FeatureTable {
            n_mfcc,
            paths: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, path: impl Into<String>, label: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), feature_schema(self.n_mfcc).len(), "row width must match the schema");
        self.paths.push(path.into());
        self.labels.push(label.into());
        self.rows.push(values);
    }

    pub fn schema(&self) -> Vec<String> {
        feature_schema(self.n_mfcc)
    }

    /// Labels become indices into their sorted vocabulary.
    pub fn to_dataset(&self) -> Result<Dataset, FeatureCsvError> {
        let width = self.schema().len();
        let matrix = Array2::from_shape_vec((self.rows.len(), width), self.rows.concat())
            .map_err(|e| FeatureCsvError::SchemaMismatch(e.to_string()))?;
        Ok(Dataset::from_text_labels(matrix, &self.labels, self.schema())?)
    }

    /// Values are written with 9 significant digits.
    pub fn write_to<W: Write>(&self, writer: W) -> Result<(), FeatureCsvError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["path".to_string(), "label".to_string()];
        header.extend(self.schema());
        w.write_record(&header)?;
        for ((path, label), row) in self.paths.iter().zip(&self.labels).zip(&self.rows) {
            let mut record = vec![path.clone(), label.clone()];
            record.extend(row.iter().map(|v| format!("{v:.8e}")));
            w.write_record(&record)?;
        }
        w.flush().map_err(|source| FeatureCsvError::Io {
            path: "<output>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<FeatureTable, FeatureCsvError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "path" || header[1] != "label" {
            return Err(FeatureCsvError::SchemaMismatch("expected leading columns path,label".into()));
        }
        // 6 scalar columns, 24 chroma columns, the rest MFCC mean/std pairs
        let n_values = header.len() - 2;
        let n_mfcc = n_values.checked_sub(30).filter(|n| n % 2 == 0).map(|n| n / 2).unwrap_or(0);
        if n_mfcc == 0 || header[2..] != feature_schema(n_mfcc)[..] {
            return Err(FeatureCsvError::SchemaMismatch(format!(
                "{n_values} feature columns do not form a valid schema"
            )));
        }
        let mut table = FeatureTable::new(n_mfcc);
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let row = i + 1;
            let values = record
                .iter()
                .skip(2)
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| FeatureCsvError::BadRow {
                            row,
                            message: format!("'{s}' is not a finite number"),
                        })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            table.push(&record[0], &record[1], values);
        }
        Ok(table)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FeatureCsvError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| FeatureCsvError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<FeatureTable, FeatureCsvError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| FeatureCsvError::Io {
            path: path.display().to_string(),
            source,
        })?;
        FeatureTable::read_from(std::io::BufReader::new(file))
    }
}
