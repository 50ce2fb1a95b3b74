//! Exact k-nearest-neighbour classification by majority vote.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{check_dimension, ModelError};
use crate::preprocess::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Euclidean,
    Manhattan,
}

impl Distance {
    pub fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub distance: Distance,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 5,
            distance: Distance::Euclidean,
        }
    }
}

/// A lazy learner: the training rows themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    params: KnnParams,
    rows: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnPrediction {
    pub class: usize,
    /// Training-row indices of the k neighbours, nearest first.
    pub neighbors: Vec<usize>,
    /// Distances of those neighbours, ascending.
    pub neighbor_distances: Vec<f64>,
    /// Neighbour count per class.
    pub votes: Vec<usize>,
}

/// Stores the training set verbatim.
pub fn knn_fit(train: &Dataset, params: &KnnParams) -> Result<KnnModel, ModelError> {
    if train.n_samples() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if params.k == 0 {
        return Err(ModelError::InvalidHyperparameter("k must be at least 1".into()));
    }
    if params.k > train.n_samples() {
        return Err(ModelError::KTooLarge {
            k: params.k,
            n_samples: train.n_samples(),
        });
    }
    Ok(KnnModel {
        params: *params,
        rows: train.features().clone(),
        labels: train.labels().to_vec(),
        n_classes: train.n_classes(),
    })
}

impl KnnModel {
    pub(crate) fn from_parts(
        params: KnnParams,
        rows: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, String> {
        if rows.nrows() != labels.len() {
            return Err("KNN rows and labels differ in length".into());
        }
        if params.k == 0 || params.k > rows.nrows() {
            return Err(format!("k = {} is invalid for {} rows", params.k, rows.nrows()));
        }
        if labels.iter().any(|&l| l >= n_classes) {
            return Err("KNN label out of range".into());
        }
        Ok(KnnModel {
            params,
            rows,
            labels,
            n_classes,
        })
    }

    pub fn params(&self) -> &KnnParams {
        &self.params
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Majority vote over the exact k nearest rows.
    ///
    /// Rows at equal distance are ordered by row index. Classes tied on vote
    /// count are separated by the smaller summed neighbour distance, then by
    /// the lower class index.
    pub fn predict(&self, query: &[f64]) -> Result<KnnPrediction, ModelError> {
        check_dimension(self.n_features(), query.len())?;
        let mut ranked: Vec<(f64, usize)> = self
            .rows
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                let row = row.to_slice().expect("stored rows are contiguous");
                (self.params.distance.between(row, query), i)
            })
            .collect();
        let k = self.params.k;
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k - 1, by_distance);
            ranked.truncate(k);
        }
        ranked.sort_by(by_distance);

        let mut votes = vec![0usize; self.n_classes];
        let mut summed = vec![0.0f64; self.n_classes];
        for &(d, i) in &ranked {
            votes[self.labels[i]] += 1;
            summed[self.labels[i]] += d;
        }
        let mut class = 0;
        for c in 1..self.n_classes {
            let better = votes[c] > votes[class] || (votes[c] == votes[class] && summed[c] < summed[class]);
            if better {
                class = c;
            }
        }

        Ok(KnnPrediction {
            class,
            neighbors: ranked.iter().map(|r| r.1).collect(),
            neighbor_distances: ranked.iter().map(|r| r.0).collect(),
            votes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn data(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Dataset {
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        let classes = (0..n_classes).map(|c| format!("c{c}")).collect();
        Dataset::new(features, labels, classes, names).unwrap()
    }

    #[test]
    fn nearest_point_wins() {
        let d = data(array![[0.0, 0.0], [10.0, 10.0]], vec![0, 1], 2);
        let m = knn_fit(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        let p = m.predict(&[1.0, 1.0]).unwrap();
        assert_eq!(p.class, 0);
        assert_eq!(p.neighbors, vec![0]);
        assert!((p.neighbor_distances[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn k1_reproduces_training_labels() {
        let d = data(array![[0.0], [1.0], [2.0], [3.0]], vec![1, 0, 1, 0], 2);
        let m = knn_fit(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        for i in 0..4 {
            assert_eq!(m.predict(d.row(i)).unwrap().class, d.labels()[i]);
        }
    }

    #[test]
    fn majority_and_global_majority() {
        let d = data(array![[0.0], [0.1], [5.0], [9.0], [9.5]], vec![0, 0, 1, 2, 2], 3);
        let m = knn_fit(&d, &KnnParams { k: 3, ..Default::default() }).unwrap();
        let p = m.predict(&[0.05]).unwrap();
        assert_eq!(p.votes, vec![2, 1, 0]);
        assert_eq!(p.class, 0);

        let all = knn_fit(&d, &KnnParams { k: 5, ..Default::default() }).unwrap();
        // classes 0 and 2 tie on votes; the query is nearer class 2
        assert_eq!(all.predict(&[8.0]).unwrap().class, 2);
        assert_eq!(all.predict(&[1.0]).unwrap().class, 0);
    }

    #[test]
    fn vote_tie_falls_back_to_class_index() {
        let d = data(array![[-1.0], [1.0]], vec![1, 0], 2);
        let m = knn_fit(&d, &KnnParams { k: 2, ..Default::default() }).unwrap();
        // equal votes, equal summed distance
        assert_eq!(m.predict(&[0.0]).unwrap().class, 0);
    }

    #[test]
    fn equal_distance_admits_lower_row() {
        let d = data(array![[-1.0], [1.0], [5.0]], vec![1, 0, 0], 2);
        let m = knn_fit(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        let p = m.predict(&[0.0]).unwrap();
        assert_eq!(p.neighbors, vec![0]);
        assert_eq!(p.class, 1);
    }

    #[test]
    fn manhattan_metric() {
        assert_eq!(Distance::Manhattan.between(&[0.0, 0.0], &[3.0, -4.0]), 7.0);
        assert_eq!(Distance::Euclidean.between(&[0.0, 0.0], &[3.0, -4.0]), 5.0);
    }

    #[test]
    fn errors() {
        let d = data(array![[0.0], [1.0]], vec![0, 1], 2);
        assert!(matches!(
            knn_fit(&d, &KnnParams { k: 3, ..Default::default() }),
            Err(ModelError::KTooLarge { k: 3, n_samples: 2 })
        ));
        let m = knn_fit(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        assert!(matches!(
            m.predict(&[0.0, 1.0]),
            Err(ModelError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }
}
