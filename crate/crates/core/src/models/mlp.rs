//! Feed-forward network: dense ReLU hidden layers, a softmax output layer,
//! mean categorical cross-entropy, and plain mini-batch gradient descent.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_dimension, matrix_serde, require_two_classes, vector_serde, ModelError};
use crate::preprocess::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softmax,
}

/// `y = activation(x W + b)` with `W` shaped `[inputs, outputs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    #[serde(with = "matrix_serde")]
    pub weights: Array2<f64>,
    #[serde(with = "vector_serde")]
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        DenseLayer {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layers: vec![256, 128, 64],
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            seed: 42,
        }
    }
}

/// Gradient of the loss with respect to one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    params: MlpParams,
    layers: Vec<DenseLayer>,
    pub(crate) loss_curve: Vec<f64>,
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

fn apply_activation(z: Array2<f64>, activation: Activation) -> Array2<f64> {
    match activation {
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Softmax => softmax_rows(&z),
    }
}

fn glorot_uniform<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (inputs + outputs) as f64).sqrt();
    Array2::from_shape_simple_fn((inputs, outputs), || rng.random_range(-limit..=limit))
}

/// Trains a network `n_features -> hidden... -> n_classes`.
pub fn mlp_fit(train: &Dataset, params: &MlpParams) -> Result<MlpModel, ModelError> {
    require_two_classes(train)?;
    if params.hidden_layers.contains(&0) {
        return Err(ModelError::InvalidHyperparameter("hidden layers need at least one unit".into()));
    }
    if params.batch_size == 0 {
        return Err(ModelError::InvalidHyperparameter("batch size must be at least 1".into()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "learning rate {} must be positive",
            params.learning_rate
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut widths = vec![train.n_features()];
    widths.extend(&params.hidden_layers);
    widths.push(train.n_classes());
    let last = widths.len() - 2;
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| DenseLayer {
            weights: glorot_uniform(w[0], w[1], &mut rng),
            bias: Array1::zeros(w[1]),
            activation: if i == last { Activation::Softmax } else { Activation::Relu },
        })
        .collect();
    let mut model = MlpModel {
        params: params.clone(),
        layers,
        loss_curve: Vec::with_capacity(params.epochs),
    };

    let n = train.n_samples();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(params.batch_size) {
            let x = train.features().select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| train.labels()[i]).collect();
            let (loss, grads) = model.loss_and_gradients(x.view(), &y);
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            model.apply_gradients(&grads, params.learning_rate);
        }
        model.loss_curve.push(epoch_loss / n as f64);
    }
    if model.layers.iter().any(|l| l.weights.iter().chain(&l.bias).any(|v| !v.is_finite())) {
        return Err(ModelError::NonFiniteLoss { epoch: params.epochs });
    }
    Ok(model)
}

impl MlpModel {
    /// Wraps explicit layers. The last layer must be the only softmax layer.
    pub fn from_layers(params: MlpParams, layers: Vec<DenseLayer>) -> Result<Self, String> {
        let Some(last) = layers.last() else {
            return Err("a network needs at least one layer".into());
        };
        if last.activation != Activation::Softmax
            || layers[..layers.len() - 1].iter().any(|l| l.activation == Activation::Softmax)
        {
            return Err("only the output layer may (and must) use softmax".into());
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(format!("layer {i} outputs do not feed layer {}", i + 1));
            }
        }
        if layers.iter().any(|l| l.bias.len() != l.outputs()) {
            return Err("bias length differs from layer width".into());
        }
        Ok(MlpModel {
            params,
            layers,
            loss_curve: Vec::new(),
        })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    /// Mean training loss of each epoch.
    pub fn loss_curve(&self) -> &[f64] {
        &self.loss_curve
    }

    pub fn n_features(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().expect("validated non-empty").outputs()
    }

    /// Pre-activation values of the final layer for a batch of rows.
    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut a = x.to_owned();
        let (last, hidden) = self.layers.split_last().expect("validated non-empty");
        for layer in hidden {
            a = apply_activation(a.dot(&layer.weights) + &layer.bias, layer.activation);
        }
        a.dot(&last.weights) + &last.bias
    }

    /// Class probabilities for a batch of rows.
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        softmax_rows(&self.logits(x))
    }

    /// Mean cross-entropy over the batch and its gradient for every layer.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, labels: &[usize]) -> (f64, Vec<LayerGradient>) {
        let batch = x.nrows() as f64;
        let mut activations = vec![x.to_owned()];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let z = activations.last().expect("input is present").dot(&layer.weights) + &layer.bias;
            activations.push(apply_activation(z.clone(), layer.activation));
            pre_activations.push(z);
        }

        let probs = activations.last().expect("output is present");
        let loss = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| -probs[[i, y]].ln())
            .sum::<f64>()
            / batch;

        // softmax + cross-entropy: dL/dz = (p - onehot) / batch
        let mut delta = probs.clone();
        for (i, &y) in labels.iter().enumerate() {
            delta[[i, y]] -= 1.0;
        }
        delta /= batch;

        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            grads.push(LayerGradient {
                weights: activations[l].t().dot(&delta),
                bias: delta.sum_axis(Axis(0)),
            });
            if l > 0 {
                let mut upstream = delta.dot(&self.layers[l].weights.t());
                upstream.zip_mut_with(&pre_activations[l - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = upstream;
            }
        }
        grads.reverse();
        (loss, grads)
    }

    fn apply_gradients(&mut self, grads: &[LayerGradient], learning_rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            layer.weights.scaled_add(-learning_rate, &g.weights);
            layer.bias.scaled_add(-learning_rate, &g.bias);
        }
    }

    /// Softmax probabilities and their argmax (ties to the lower class).
    pub fn predict(&self, query: &[f64]) -> Result<(usize, Vec<f64>), ModelError> {
        check_dimension(self.n_features(), query.len())?;
        let x = ArrayView2::from_shape((1, query.len()), query).expect("one row");
        let probs = self.forward(x).row(0).to_vec();
        Ok((argmax(&probs), probs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_network_is_uniform() {
        let layers = vec![
            DenseLayer::zeros(3, 4, Activation::Relu),
            DenseLayer::zeros(4, 5, Activation::Softmax),
        ];
        let m = MlpModel::from_layers(MlpParams::default(), layers).unwrap();
        let (class, probs) = m.predict(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(class, 0);
        for p in probs {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        let z = array![[1.0, 2.0, -3.0], [100.0, 99.0, 0.0]];
        let shifted = &z + 37.5;
        let (a, b) = (softmax_rows(&z), softmax_rows(&shifted));
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        for row in a.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_chain_validation() {
        let bad = vec![
            DenseLayer::zeros(3, 4, Activation::Relu),
            DenseLayer::zeros(5, 2, Activation::Softmax),
        ];
        assert!(MlpModel::from_layers(MlpParams::default(), bad).is_err());
        let no_softmax = vec![DenseLayer::zeros(3, 2, Activation::Relu)];
        assert!(MlpModel::from_layers(MlpParams::default(), no_softmax).is_err());
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let d = Dataset::new(
            array![[0.0], [1.0]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
            vec!["f".into()],
        )
        .unwrap();
        let mut p = MlpParams {
            hidden_layers: vec![0],
            ..Default::default()
        };
        assert!(matches!(mlp_fit(&d, &p), Err(ModelError::InvalidHyperparameter(_))));
        p.hidden_layers = vec![2];
        p.batch_size = 0;
        assert!(matches!(mlp_fit(&d, &p), Err(ModelError::InvalidHyperparameter(_))));
        let single = Dataset::new(array![[0.0], [1.0]], vec![0, 0], vec!["a".into()], vec!["f".into()]).unwrap();
        assert!(matches!(mlp_fit(&single, &MlpParams::default()), Err(ModelError::SingleClass)));
    }
}
