//! From-scratch dense feedforward classifier: forward pass, softmax
//! cross-entropy, minibatch backpropagation, and score-vs-boundary
//! classification.
//!
//! Class convention everywhere: index 1 is the positive class (busy for
//! the transmitter, ACK for the adversary); `forward` returns its softmax
//! component as the score p(s).

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single class only")]
    SingleClass,
    #[error("invalid hyperparameters: {0}")]
    BadHyperparams(String),
}

/// Training and decision hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub hidden_layers: usize,
    /// Neuron counts per hidden layer; a shorter list repeats its last
    /// entry, a longer one is truncated to `hidden_layers`.
    pub neurons_per_layer: Vec<usize>,
    pub batch_size: usize,
    pub training_steps: usize,
    pub learning_rate: f64,
    /// Decision boundary tau: scores below it classify as the negative
    /// class, scores at or above it as the positive class.
    pub decision_boundary: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            neurons_per_layer: vec![100],
            batch_size: 100,
            training_steps: 1000,
            learning_rate: 0.05,
            decision_boundary: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), String> {
        if self.hidden_layers < 1 {
            return Err("hidden_layers must be >= 1".into());
        }
        if self.neurons_per_layer.is_empty() || self.neurons_per_layer.iter().any(|&n| n < 1) {
            return Err("neurons_per_layer entries must be >= 1".into());
        }
        if self.batch_size < 1 {
            return Err("batch_size must be >= 1".into());
        }
        if self.learning_rate <= 0.0 {
            return Err("learning_rate must be > 0".into());
        }
        if !(self.decision_boundary > 0.0 && self.decision_boundary < 1.0) {
            return Err("decision_boundary must be in (0,1)".into());
        }
        Ok(())
    }

    /// Hidden layer sizes expanded to exactly `hidden_layers` entries.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        let last = *self.neurons_per_layer.last().unwrap_or(&1);
        (0..self.hidden_layers)
            .map(|i| *self.neurons_per_layer.get(i).unwrap_or(&last))
            .collect()
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.training_steps = steps;
        self
    }
}

/// One labeled feature window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: bool,
}

/// Ordered sample collection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_both_classes(&self) -> bool {
        let mut pos = false;
        let mut neg = false;
        for s in &self.samples {
            if s.label {
                pos = true;
            } else {
                neg = true;
            }
        }
        pos && neg
    }

    /// Temporal split: the first `n` samples and the rest.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.samples.len());
        (
            Dataset::new(self.samples[..n].to_vec()),
            Dataset::new(self.samples[n..].to_vec()),
        )
    }
}

/// Per-feature zero-mean unit-variance transform fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(samples: &[Sample]) -> Self {
        let dim = samples.first().map_or(0, |s| s.features.len());
        let n = samples.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for s in samples {
            for (m, &x) in mean.iter_mut().zip(&s.features) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for s in samples {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(&s.features) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s < 1e-12 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }

    pub fn invert(&self, standardized: &[f64]) -> Vec<f64> {
        standardized
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&z, (&m, &s))| z * s + m)
            .collect()
    }
}

/// One dense layer: weights are input x output, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Dense network: ReLU hidden activations, softmax output over 2 classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// He-style fan-in scaled uniform init; biases zero.
    pub fn init(input_dim: usize, hidden: &[usize], output_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(output_dim);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / fan_in as f64).sqrt();
                let weights =
                    Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-limit..limit));
                Layer {
                    weights,
                    biases: Array1::zeros(fan_out),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.weights.nrows())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.ncols())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }
}

fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Batch forward pass returning per-layer pre-activations and activations.
fn forward_pass(mlp: &Mlp, x: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
    let mut activations = vec![x.clone()];
    let mut zs = Vec::with_capacity(mlp.layers.len());
    let mut a = x.clone();
    let last = mlp.layers.len() - 1;
    for (i, layer) in mlp.layers.iter().enumerate() {
        let z = a.dot(&layer.weights) + &layer.biases;
        a = if i < last {
            z.mapv(|v| v.max(0.0))
        } else {
            softmax_rows(&z)
        };
        zs.push(z);
        activations.push(a.clone());
    }
    (zs, activations)
}

/// Softmax output for one feature vector.
pub fn forward_probs(mlp: &Mlp, features: &[f64]) -> Vec<f64> {
    assert_eq!(
        features.len(),
        mlp.input_dim(),
        "feature length {} does not match input dim {}",
        features.len(),
        mlp.input_dim()
    );
    let x = Array2::from_shape_vec((1, features.len()), features.to_vec()).unwrap();
    let (_, acts) = forward_pass(mlp, &x);
    acts.last().unwrap().row(0).to_vec()
}

/// Classification score p(s): the softmax component of the positive class.
pub fn forward(mlp: &Mlp, features: &[f64]) -> f64 {
    forward_probs(mlp, features)[1]
}

/// Boundary rule: scores below tau classify negative (idle / no-ACK);
/// a score equal to tau goes to the positive side.
pub fn classify_score(score: f64, tau: f64) -> bool {
    score >= tau
}

/// Cross-entropy of one sample against a (possibly soft) target.
pub fn ce_loss(mlp: &Mlp, features: &[f64], target: &[f64; 2]) -> f64 {
    let p = forward_probs(mlp, features);
    -(target[0] * p[0].max(1e-300).ln() + target[1] * p[1].max(1e-300).ln())
}

fn one_hot(label: bool) -> [f64; 2] {
    if label {
        [0.0, 1.0]
    } else {
        [1.0, 0.0]
    }
}

/// Gradient of one sample's cross-entropy with respect to every
/// parameter, flattened layer by layer (weights row-major, then biases).
pub fn analytic_gradient(mlp: &Mlp, features: &[f64], target: &[f64; 2]) -> Vec<f64> {
    let x = Array2::from_shape_vec((1, features.len()), features.to_vec()).unwrap();
    let y = Array2::from_shape_vec((1, 2), target.to_vec()).unwrap();
    let grads = backprop(mlp, &x, &y);
    let mut flat = Vec::with_capacity(mlp.parameter_count());
    for (gw, gb) in &grads {
        flat.extend(gw.iter().cloned());
        flat.extend(gb.iter().cloned());
    }
    flat
}

/// Central finite differences over every parameter, same layout as
/// `analytic_gradient`.
pub fn numeric_gradient(mlp: &Mlp, features: &[f64], target: &[f64; 2], h: f64) -> Vec<f64> {
    let mut flat = Vec::with_capacity(mlp.parameter_count());
    let mut probe = mlp.clone();
    for li in 0..mlp.layers.len() {
        let n_w = mlp.layers[li].weights.len();
        for idx in 0..n_w {
            let orig = mlp.layers[li].weights.as_slice().unwrap()[idx];
            probe.layers[li].weights.as_slice_mut().unwrap()[idx] = orig + h;
            let up = ce_loss(&probe, features, target);
            probe.layers[li].weights.as_slice_mut().unwrap()[idx] = orig - h;
            let down = ce_loss(&probe, features, target);
            probe.layers[li].weights.as_slice_mut().unwrap()[idx] = orig;
            flat.push((up - down) / (2.0 * h));
        }
        let n_b = mlp.layers[li].biases.len();
        for idx in 0..n_b {
            let orig = mlp.layers[li].biases[idx];
            probe.layers[li].biases[idx] = orig + h;
            let up = ce_loss(&probe, features, target);
            probe.layers[li].biases[idx] = orig - h;
            let down = ce_loss(&probe, features, target);
            probe.layers[li].biases[idx] = orig;
            flat.push((up - down) / (2.0 * h));
        }
    }
    flat
}

/// Maximum relative error between analytic backprop and central finite
/// differences (step 1e-5) over every parameter.
pub fn gradient_check(mlp: &Mlp, features: &[f64], label: bool) -> f64 {
    let target = one_hot(label);
    let analytic = analytic_gradient(mlp, features, &target);
    let numeric = numeric_gradient(mlp, features, &target, 1e-5);
    max_relative_error(&analytic, &numeric)
}

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Per-layer (dW, db) gradients of mean cross-entropy over the batch.
fn backprop(mlp: &Mlp, x: &Array2<f64>, y: &Array2<f64>) -> Vec<(Array2<f64>, Array1<f64>)> {
    let (zs, activations) = forward_pass(mlp, x);
    let batch = x.nrows() as f64;
    let mut grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); mlp.layers.len()];
    // Softmax + cross-entropy: output delta is (p - y) / batch.
    let mut delta = (activations.last().unwrap() - y) / batch;
    for i in (0..mlp.layers.len()).rev() {
        let gw = activations[i].t().dot(&delta);
        let gb = delta.sum_axis(Axis(0));
        grads[i] = (gw, gb);
        if i > 0 {
            let mask = zs[i - 1].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            delta = delta.dot(&mlp.layers[i].weights.t()) * mask;
        }
    }
    grads
}

/// A trained model bundled with its fitted standardization and boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub mlp: Mlp,
    pub norm: Standardizer,
    pub boundary: f64,
}

impl Classifier {
    pub fn score(&self, raw_features: &[f64]) -> f64 {
        forward(&self.mlp, &self.norm.apply(raw_features))
    }

    pub fn classify(&self, raw_features: &[f64]) -> bool {
        classify_score(self.score(raw_features), self.boundary)
    }
}

/// Minibatch SGD on softmax cross-entropy. Deterministic for a fixed
/// seed: same data and stream give bitwise-identical parameters.
pub fn train(
    data: &Dataset,
    h: &Hyperparams,
    rng: &mut ChaCha8Rng,
) -> Result<Classifier, NeuralError> {
    train_logged(data, h, rng).map(|(c, _)| c)
}

/// As `train`, additionally returning the per-step minibatch loss.
pub fn train_logged(
    data: &Dataset,
    h: &Hyperparams,
    rng: &mut ChaCha8Rng,
) -> Result<(Classifier, Vec<f64>), NeuralError> {
    h.validate().map_err(NeuralError::BadHyperparams)?;
    if data.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    if !data.has_both_classes() {
        return Err(NeuralError::SingleClass);
    }
    let norm = Standardizer::fit(&data.samples);
    let dim = data.samples[0].features.len();
    let n = data.len();
    let mut features = Array2::zeros((n, dim));
    let mut targets = Array2::zeros((n, 2));
    for (i, s) in data.samples.iter().enumerate() {
        for (j, v) in norm.apply(&s.features).into_iter().enumerate() {
            features[(i, j)] = v;
        }
        let t = one_hot(s.label);
        targets[(i, 0)] = t[0];
        targets[(i, 1)] = t[1];
    }

    let mut mlp = Mlp::init(dim, &h.hidden_sizes(), 2, rng);
    let mut losses = Vec::with_capacity(h.training_steps);
    let bs = h.batch_size.min(n);
    let mut batch_x = Array2::zeros((bs, dim));
    let mut batch_y = Array2::zeros((bs, 2));
    for _ in 0..h.training_steps {
        for row in 0..bs {
            let pick = rng.gen_range(0..n);
            batch_x.row_mut(row).assign(&features.row(pick));
            batch_y.row_mut(row).assign(&targets.row(pick));
        }
        let (_, acts) = forward_pass(&mlp, &batch_x);
        let probs = acts.last().unwrap();
        let mut loss = 0.0;
        for (p, y) in probs.rows().into_iter().zip(batch_y.rows()) {
            loss -= y[0] * p[0].max(1e-300).ln() + y[1] * p[1].max(1e-300).ln();
        }
        losses.push(loss / bs as f64);

        let grads = backprop(&mlp, &batch_x, &batch_y);
        for (layer, (gw, gb)) in mlp.layers.iter_mut().zip(grads) {
            layer.weights.scaled_add(-h.learning_rate, &gw);
            layer.biases.scaled_add(-h.learning_rate, &gb);
        }
    }
    Ok((
        Classifier {
            mlp,
            norm,
            boundary: h.decision_boundary,
        },
        losses,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::substream;
    use rand::Rng;

    fn tiny_hyperparams() -> Hyperparams {
        Hyperparams {
            hidden_layers: 1,
            neurons_per_layer: vec![16],
            batch_size: 50,
            training_steps: 400,
            learning_rate: 0.1,
            decision_boundary: 0.5,
        }
    }

    /// Two 2-D Gaussian blobs separated by 6 sigma.
    fn blob_dataset(n_per_class: usize, seed: u64) -> Dataset {
        let mut rng = substream(seed, "blobs");
        let draw = |rng: &mut ChaCha8Rng| {
            // Box-Muller keeps the oracle independent of rand_distr.
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let mut samples = Vec::new();
        for i in 0..(2 * n_per_class) {
            let label = i % 2 == 1;
            let center = if label { 3.0 } else { -3.0 };
            samples.push(Sample {
                features: vec![center + draw(&mut rng), draw(&mut rng)],
                label,
            });
        }
        Dataset::new(samples)
    }

    /// Plain-gradient logistic regression, the independent oracle for the
    /// blob accuracy bound.
    fn logistic_oracle_accuracy(train: &Dataset, test: &Dataset) -> f64 {
        let mut w = vec![0.0; 2];
        let mut b = 0.0;
        for _ in 0..500 {
            let mut gw = vec![0.0; 2];
            let mut gb = 0.0;
            for s in &train.samples {
                let z: f64 = w.iter().zip(&s.features).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                let p = 1.0 / (1.0 + (-z).exp());
                let err = p - if s.label { 1.0 } else { 0.0 };
                for (g, &x) in gw.iter_mut().zip(&s.features) {
                    *g += err * x;
                }
                gb += err;
            }
            let n = train.len() as f64;
            for (wi, g) in w.iter_mut().zip(&gw) {
                *wi -= 0.1 * g / n;
            }
            b -= 0.1 * gb / n;
        }
        let correct = test
            .samples
            .iter()
            .filter(|s| {
                let z: f64 = w.iter().zip(&s.features).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                (z >= 0.0) == s.label
            })
            .count();
        correct as f64 / test.len() as f64
    }

    #[test]
    fn zero_network_scores_one_half() {
        let mut rng = substream(1, "init");
        let mut mlp = Mlp::init(3, &[4], 2, &mut rng);
        for layer in &mut mlp.layers {
            layer.weights.fill(0.0);
            layer.biases.fill(0.0);
        }
        for f in [[0.0, 0.0, 0.0], [1.0, -2.0, 5.0]] {
            assert!((forward(&mlp, &f) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_components_sum_to_one() {
        let mut rng = substream(2, "init");
        let mlp = Mlp::init(10, &[32, 32], 2, &mut rng);
        for _ in 0..10_000 {
            let f: Vec<f64> = (0..10).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let p = forward_probs(&mlp, &f);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn hand_computed_single_hidden_unit_forward() {
        let mut rng = substream(3, "init");
        let mut mlp = Mlp::init(1, &[1], 2, &mut rng);
        mlp.layers[0].weights[(0, 0)] = 0.7;
        mlp.layers[0].biases[0] = 0.1;
        mlp.layers[1].weights[(0, 0)] = 0.3;
        mlp.layers[1].weights[(0, 1)] = -0.4;
        mlp.layers[1].biases[0] = 0.05;
        mlp.layers[1].biases[1] = 0.2;
        let x = 2.0;
        let h = (0.7 * x + 0.1f64).max(0.0);
        let z0 = 0.3 * h + 0.05;
        let z1 = -0.4 * h + 0.2;
        let expected = z1.exp() / (z0.exp() + z1.exp());
        assert!((forward(&mlp, &[x]) - expected).abs() < 1e-12);
        // Negative pre-activation exercises the ReLU clamp.
        let x = -1.0;
        let h = (0.7 * x + 0.1f64).max(0.0);
        assert_eq!(h, 0.0);
        let expected = (0.2f64).exp() / ((0.05f64).exp() + (0.2f64).exp());
        assert!((forward(&mlp, &[x]) - expected).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "feature length")]
    fn forward_rejects_dimension_mismatch() {
        let mut rng = substream(4, "init");
        let mlp = Mlp::init(3, &[4], 2, &mut rng);
        forward(&mlp, &[1.0, 2.0]);
    }

    #[test]
    fn classify_boundary_goes_to_positive_side() {
        assert!(classify_score(0.5, 0.5));
        assert!(!classify_score(0.1, 0.5));
        assert!(classify_score(0.9, 0.5));
    }

    #[test]
    fn threshold_sweep_is_monotone() {
        let mut rng = substream(5, "scores");
        let scores: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut prev = usize::MAX;
        for i in 0..=100 {
            let tau = i as f64 / 100.0;
            let busy = scores.iter().filter(|&&s| classify_score(s, tau)).count();
            assert!(busy <= prev);
            prev = busy;
        }
    }

    #[test]
    fn gradient_check_random_small_network() {
        let mut rng = substream(6, "grad");
        let mlp = Mlp::init(2, &[8], 2, &mut rng);
        let features: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let err = gradient_check(&mlp, &features, true);
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn gradient_check_stationary_point() {
        let mut rng = substream(7, "grad");
        let mut mlp = Mlp::init(2, &[4], 2, &mut rng);
        for layer in &mut mlp.layers {
            layer.weights.fill(0.0);
            layer.biases.fill(0.0);
        }
        // Soft target 0.5/0.5 at the symmetric output is a CE stationary
        // point: both gradients vanish.
        let target = [0.5, 0.5];
        let analytic = analytic_gradient(&mlp, &[0.3, -0.2], &target);
        let numeric = numeric_gradient(&mlp, &[0.3, -0.2], &target, 1e-5);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-7);
            assert!(a.abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_check_detects_corruption() {
        let mut rng = substream(8, "grad");
        let mlp = Mlp::init(3, &[8], 2, &mut rng);
        let features = vec![0.4, -1.2, 0.7];
        let target = one_hot(false);
        let mut analytic = analytic_gradient(&mlp, &features, &target);
        let numeric = numeric_gradient(&mlp, &features, &target, 1e-5);
        // Corrupt the largest entry so the fault cannot hide below the
        // relative-error floor.
        let (idx, _) = analytic
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        analytic[idx] *= 2.0;
        assert!(max_relative_error(&analytic, &numeric) > 0.1);
    }

    #[test]
    fn gradient_check_many_random_pairs() {
        let mut rng = substream(9, "grad");
        for i in 0..100 {
            let dims = [rng.gen_range(2..6), rng.gen_range(2..10)];
            let mlp = Mlp::init(dims[0], &[dims[1]], 2, &mut rng);
            let features: Vec<f64> = (0..dims[0]).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let err = gradient_check(&mlp, &features, i % 2 == 0);
            assert!(err < 1e-4, "pair {i}: max relative error {err}");
        }
    }

    #[test]
    fn training_separates_blobs_at_oracle_level() {
        let train_set = blob_dataset(200, 21);
        let test_set = blob_dataset(200, 22);
        let oracle = logistic_oracle_accuracy(&train_set, &test_set);
        assert!(oracle >= 0.99, "oracle accuracy {oracle}");

        let mut rng = substream(23, "train");
        let clf = train(&train_set, &tiny_hyperparams(), &mut rng).unwrap();
        let correct = test_set
            .samples
            .iter()
            .filter(|s| clf.classify(&s.features) == s.label)
            .count();
        let acc = correct as f64 / test_set.len() as f64;
        assert!(acc >= 0.99, "mlp accuracy {acc}");
    }

    #[test]
    fn loss_decreases_on_separable_data() {
        let data = blob_dataset(200, 31);
        let mut rng = substream(32, "train");
        let (_, losses) = train_logged(&data, &tiny_hyperparams(), &mut rng).unwrap();
        let k = losses.len() / 10;
        let first: f64 = losses[..k].iter().sum::<f64>() / k as f64;
        let last: f64 = losses[losses.len() - k..].iter().sum::<f64>() / k as f64;
        assert!(last <= first, "first {first} last {last}");
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let data = blob_dataset(50, 41);
        let h = tiny_hyperparams().with_steps(0);
        let mut rng_a = substream(42, "train");
        let trained = train(&data, &h, &mut rng_a).unwrap();
        let mut rng_b = substream(42, "train");
        let init = Mlp::init(2, &h.hidden_sizes(), 2, &mut rng_b);
        assert_eq!(trained.mlp, init);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let data = blob_dataset(100, 51);
        let h = tiny_hyperparams().with_steps(120);
        let run = || {
            let mut rng = substream(52, "train");
            train(&data, &h, &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.mlp, b.mlp);
        assert_eq!(a.norm, b.norm);
    }

    #[test]
    fn single_class_dataset_is_rejected() {
        let samples: Vec<Sample> = (0..20)
            .map(|i| Sample {
                features: vec![i as f64],
                label: true,
            })
            .collect();
        let mut rng = substream(61, "train");
        let err = train(&Dataset::new(samples), &tiny_hyperparams(), &mut rng).unwrap_err();
        assert_eq!(err, NeuralError::SingleClass);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let mut rng = substream(62, "train");
        let err = train(&Dataset::default(), &tiny_hyperparams(), &mut rng).unwrap_err();
        assert_eq!(err, NeuralError::EmptyDataset);
    }

    #[test]
    fn standardizer_round_trips() {
        let data = blob_dataset(100, 71);
        let norm = Standardizer::fit(&data.samples);
        for s in data.samples.iter().take(20) {
            let back = norm.invert(&norm.apply(&s.features));
            for (a, b) in back.iter().zip(&s.features) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classifier_json_round_trips_bitwise() {
        let data = blob_dataset(60, 81);
        let mut rng = substream(82, "train");
        let clf = train(&data, &tiny_hyperparams().with_steps(50), &mut rng).unwrap();
        let text = serde_json::to_string(&clf).unwrap();
        let back: Classifier = serde_json::from_str(&text).unwrap();
        assert_eq!(clf, back);
    }
}
