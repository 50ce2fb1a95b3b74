//! One-vs-rest logistic regression trained by full-batch gradient descent on
//! the mean binary cross-entropy.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{argmax, check_dimension, require_two_classes, ModelError};
use crate::preprocess::Dataset;

/// Logistic function, evaluated without overflow for any finite input.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)`, stable for large |z|.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            epochs: 500,
        }
    }
}

/// Mean binary cross-entropy of one sigmoid unit and its gradient.
///
/// `targets` are 0/1. Returns `(loss, d loss / d weights, d loss / d bias)`.
pub fn binary_cross_entropy(
    features: ArrayView2<f64>,
    targets: &[f64],
    weights: ArrayView1<f64>,
    bias: f64,
) -> (f64, Array1<f64>, f64) {
    let n = features.nrows() as f64;
    let z = features.dot(&weights) + bias;
    let loss = z
        .iter()
        .zip(targets)
        .map(|(&z, &y)| softplus(z) - y * z)
        .sum::<f64>()
        / n;
    let residual: Array1<f64> = z.iter().zip(targets).map(|(&z, &y)| sigmoid(z) - y).collect();
    let grad_w = features.t().dot(&residual) / n;
    let grad_b = residual.sum() / n;
    (loss, grad_w, grad_b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    params: LogRegParams,
    /// `[n_classes, n_features]`
    weights: Array2<f64>,
    biases: Vec<f64>,
    /// Training loss per class, one entry per epoch (before that epoch's step).
    pub(crate) loss_curves: Vec<Vec<f64>>,
}

/// Trains one binary classifier per class from zero-initialized weights.
pub fn logreg_fit(train: &Dataset, params: &LogRegParams) -> Result<LogRegModel, ModelError> {
    require_two_classes(train)?;
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "learning rate {} must be positive",
            params.learning_rate
        )));
    }
    let x = train.features().view();
    let n_classes = train.n_classes();
    let mut weights = Array2::zeros((n_classes, train.n_features()));
    let mut biases = Vec::with_capacity(n_classes);
    let mut loss_curves = Vec::with_capacity(n_classes);

    for class in 0..n_classes {
        let targets: Vec<f64> = train
            .labels()
            .iter()
            .map(|&l| if l == class { 1.0 } else { 0.0 })
            .collect();
        let mut w = weights.row(class).to_owned();
        let mut b = 0.0;
        let mut curve = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            let (loss, grad_w, grad_b) = binary_cross_entropy(x, &targets, w.view(), b);
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            curve.push(loss);
            w.scaled_add(-params.learning_rate, &grad_w);
            b -= params.learning_rate * grad_b;
        }
        weights.row_mut(class).assign(&w);
        biases.push(b);
        loss_curves.push(curve);
    }

    Ok(LogRegModel {
        params: *params,
        weights,
        biases,
        loss_curves,
    })
}

impl LogRegModel {
    /// Builds a model from explicit per-class parameters.
    pub fn from_parameters(params: LogRegParams, weights: Array2<f64>, biases: Vec<f64>) -> Result<Self, String> {
        if weights.nrows() != biases.len() {
            return Err("one bias per class is required".into());
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err("logistic regression parameters must be finite".into());
        }
        Ok(LogRegModel {
            params,
            weights,
            biases,
            loss_curves: Vec::new(),
        })
    }

    pub fn params(&self) -> &LogRegParams {
        &self.params
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn loss_curves(&self) -> &[Vec<f64>] {
        &self.loss_curves
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    /// Per-class sigmoid scores (not normalized across classes) and their
    /// argmax.
    pub fn predict(&self, query: &[f64]) -> Result<(usize, Vec<f64>), ModelError> {
        check_dimension(self.n_features(), query.len())?;
        let q = ArrayView1::from(query);
        let scores: Vec<f64> = self
            .weights
            .rows()
            .into_iter()
            .zip(&self.biases)
            .map(|(w, b)| sigmoid(w.dot(&q) + b))
            .collect();
        Ok((argmax(&scores), scores))
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
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(100.0) - 1.0).abs() <= 1e-15);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(-1000.0).is_finite());
        assert!(sigmoid(1000.0).is_finite());
        assert!((sigmoid(2.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
        for z in [-30.0, -2.5, -1e-3, 0.7, 12.0] {
            assert!((sigmoid(z) - (1.0 - sigmoid(-z))).abs() <= 1e-15);
        }
    }

    #[test]
    fn zero_epochs_give_uniform_half() {
        let d = data(array![[0.0], [1.0]], vec![0, 1], 2);
        let m = logreg_fit(&d, &LogRegParams { epochs: 0, ..Default::default() }).unwrap();
        assert!(m.weights().iter().all(|&w| w == 0.0));
        let (class, scores) = m.predict(&[3.0]).unwrap();
        assert_eq!(scores, vec![0.5, 0.5]);
        assert_eq!(class, 0);
    }

    #[test]
    fn hand_built_scores() {
        let m = LogRegModel::from_parameters(
            LogRegParams::default(),
            array![[1.0, 0.0], [-1.0, 0.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let (class, scores) = m.predict(&[2.0, 7.0]).unwrap();
        assert_eq!(class, 0);
        assert!((scores[0] - 0.8808).abs() < 1e-4);
        assert!((scores[1] - 0.1192).abs() < 1e-4);
    }

    #[test]
    fn rejects_single_class_and_bad_dims() {
        let d = data(array![[0.0], [1.0]], vec![1, 1], 2);
        assert!(matches!(logreg_fit(&d, &LogRegParams::default()), Err(ModelError::SingleClass)));
        let d = data(array![[0.0], [1.0]], vec![0, 1], 2);
        let m = logreg_fit(&d, &LogRegParams { epochs: 3, ..Default::default() }).unwrap();
        assert!(matches!(m.predict(&[]), Err(ModelError::DimensionMismatch { .. })));
    }
}
