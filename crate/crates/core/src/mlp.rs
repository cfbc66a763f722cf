//! Feed-forward multilayer perceptron trained by backpropagation with
//! per-sample gradient descent, momentum, and plateau-triggered weight
//! perturbation. Used both as the auto-associative compressor and as the
//! classifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::pca::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Tanh => x.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative expressed through the activation's own output `y`.
    #[inline]
    pub fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Logistic => y * (1.0 - y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub size: usize,
    /// Ignored for the input layer.
    pub activation: Activation,
}

impl LayerSpec {
    pub const fn new(size: usize, activation: Activation) -> Self {
        Self { size, activation }
    }

    pub const fn input(size: usize) -> Self {
        Self::new(size, Activation::Linear)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct MlpNetwork {
    layers: Vec<LayerSpec>,
    /// `weights[l]` has shape `layers[l+1].size × layers[l].size`.
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawNetwork {
    layers: Vec<LayerSpec>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

impl TryFrom<RawNetwork> for MlpNetwork {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        MlpNetwork::from_parts(raw.layers, raw.weights, raw.biases)
    }
}

/// Per-parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

fn check_specs(specs: &[LayerSpec]) -> Result<()> {
    if specs.len() < 2 {
        return Err(Error::BadArchitecture(format!(
            "need at least 2 layers, got {}",
            specs.len()
        )));
    }
    if let Some(i) = specs.iter().position(|s| s.size == 0) {
        return Err(Error::BadArchitecture(format!("layer {i} has no neurons")));
    }
    Ok(())
}

impl MlpNetwork {
    /// Uniform weights on `±1/√fan_in`, zero biases, from a seeded generator.
    pub fn init(specs: &[LayerSpec], seed: u64) -> Result<Self> {
        check_specs(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(specs.len() - 1);
        let mut biases = Vec::with_capacity(specs.len() - 1);
        for pair in specs.windows(2) {
            let (fan_in, fan_out) = (pair[0].size, pair[1].size);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..=bound))
                .collect();
            weights.push(Matrix::from_row_major(fan_out, fan_in, data));
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            layers: specs.to_vec(),
            weights,
            biases,
        })
    }

    /// Assembles a network from explicit parameters, validating every shape.
    pub fn from_parts(
        layers: Vec<LayerSpec>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_specs(&layers)?;
        let n = layers.len() - 1;
        if weights.len() != n || biases.len() != n {
            return Err(Error::BadArchitecture(format!(
                "{} layers need {n} weight matrices and bias vectors, got {} and {}",
                layers.len(),
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..n {
            let expected = (layers[l + 1].size, layers[l].size);
            if weights[l].shape() != expected {
                return Err(Error::BadArchitecture(format!(
                    "weight matrix {l} is {:?}, expected {:?}",
                    weights[l].shape(),
                    expected
                )));
            }
            if biases[l].len() != expected.0 {
                return Err(Error::BadArchitecture(format!(
                    "bias vector {l} has length {}, expected {}",
                    biases[l].len(),
                    expected.0
                )));
            }
            if !weights[l].is_finite() || biases[l].iter().any(|b| !b.is_finite()) {
                return Err(Error::BadArchitecture(format!(
                    "connection layer {l} has non-finite parameters"
                )));
            }
        }
        Ok(Self {
            layers,
            weights,
            biases,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].size
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].size
    }

    pub fn parameter_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.as_slice().len() + b.len())
            .sum()
    }

    /// The sub-network computing layers `0..=last_layer`.
    pub fn truncated(&self, last_layer: usize) -> Result<MlpNetwork> {
        if last_layer == 0 || last_layer >= self.layers.len() {
            return Err(Error::OutOfRange {
                what: "truncation layer",
                value: last_layer,
                min: 1,
                max: self.layers.len() - 1,
            });
        }
        Ok(Self {
            layers: self.layers[..=last_layer].to_vec(),
            weights: self.weights[..last_layer].to_vec(),
            biases: self.biases[..last_layer].to_vec(),
        })
    }

    /// Activations of every layer, starting with the input itself.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_size() {
            return Err(Error::dims("network input", self.input_size(), x.len()));
        }
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(x.to_vec());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = self.layers[l + 1].activation;
            let prev = &acts[l];
            let next = (0..w.rows())
                .map(|i| act.apply(dot(w.row(i), prev) + b[i]))
                .collect();
            acts.push(next);
        }
        Ok(acts)
    }

    /// Output layer activation.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.pop().expect("at least two layers"))
    }

    /// Activation of `layer` (0 is the input).
    pub fn encode(&self, x: &[f64], layer: usize) -> Result<Vec<f64>> {
        if layer >= self.layers.len() {
            return Err(Error::OutOfRange {
                what: "layer index",
                value: layer,
                min: 0,
                max: self.layers.len() - 1,
            });
        }
        Ok(self.forward(x)?.swap_remove(layer))
    }

    /// Exact gradients of the sum-of-squares loss for one sample.
    pub fn backprop_gradients(&self, x: &[f64], target: &[f64]) -> Result<Gradients> {
        let acts = self.forward(x)?;
        if target.len() != self.output_size() {
            return Err(Error::dims("network target", self.output_size(), target.len()));
        }
        let deltas = self.deltas(&acts, target);
        let weights = deltas
            .iter()
            .enumerate()
            .map(|(l, delta)| {
                let a = &acts[l];
                let mut g = Matrix::zeros(delta.len(), a.len());
                for (i, &d) in delta.iter().enumerate() {
                    for (gij, &aj) in g.row_mut(i).iter_mut().zip(a) {
                        *gij = d * aj;
                    }
                }
                g
            })
            .collect();
        Ok(Gradients {
            weights,
            biases: deltas,
        })
    }

    /// `deltas[l]` is ∂loss/∂(pre-activation of layer l+1).
    fn deltas(&self, acts: &[Vec<f64>], target: &[f64]) -> Vec<Vec<f64>> {
        let n = self.weights.len();
        let mut deltas = vec![Vec::new(); n];
        let out_act = self.layers[n].activation;
        deltas[n - 1] = acts[n]
            .iter()
            .zip(target)
            .map(|(&y, &t)| 2.0 * (y - t) * out_act.derivative_at_output(y))
            .collect();
        for l in (0..n - 1).rev() {
            let act = self.layers[l + 1].activation;
            let back = self.weights[l + 1].mul_vec_transposed(&deltas[l + 1]);
            deltas[l] = back
                .iter()
                .zip(&acts[l + 1])
                .map(|(&g, &y)| g * act.derivative_at_output(y))
                .collect();
        }
        deltas
    }

    /// Mean over rows of the per-sample sum-of-squares loss.
    pub fn mean_loss(&self, inputs: &DataMatrix, targets: &DataMatrix) -> Result<f64> {
        check_dataset(self, inputs, targets)?;
        let mut total = 0.0;
        for (x, t) in inputs.rows().zip(targets.rows()) {
            total += loss(&self.predict(x)?, t)?;
        }
        Ok(total / inputs.n_samples() as f64)
    }

    /// Trains in place; see [`TrainingConfig`] for the stopping and
    /// perturbation rules.
    ///
    /// Each epoch first evaluates the mean loss of the current weights and
    /// records it; training stops once that value reaches `mse_goal` or the
    /// epoch budget is spent, so `final_mse` always describes the returned
    /// weights.
    pub fn train(
        &mut self,
        inputs: &DataMatrix,
        targets: &DataMatrix,
        config: &TrainingConfig,
    ) -> Result<TrainingReport> {
        config.validate()?;
        check_dataset(self, inputs, targets)?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut vel_w: Vec<Matrix> = self
            .weights
            .iter()
            .map(|w| Matrix::zeros(w.rows(), w.cols()))
            .collect();
        let mut vel_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();

        let mut history = Vec::new();
        let mut perturbations = 0;
        let mut last_event = 0;

        for epoch in 0..config.max_epochs {
            let mse = self.mean_loss(inputs, targets)?;
            if !mse.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            history.push(mse);
            if mse <= config.mse_goal || epoch + 1 == config.max_epochs {
                break;
            }

            for (x, t) in inputs.rows().zip(targets.rows()) {
                let acts = self.forward(x)?;
                let deltas = self.deltas(&acts, t);
                for (l, delta) in deltas.iter().enumerate() {
                    let a = &acts[l];
                    let w = &mut self.weights[l];
                    let vw = &mut vel_w[l];
                    for (i, &d) in delta.iter().enumerate() {
                        let step = config.learning_rate * d;
                        for ((wij, vij), &aj) in
                            w.row_mut(i).iter_mut().zip(vw.row_mut(i)).zip(a)
                        {
                            *vij = config.momentum * *vij - step * aj;
                            *wij += *vij;
                        }
                        let vb = &mut vel_b[l][i];
                        *vb = config.momentum * *vb - step;
                        self.biases[l][i] += *vb;
                    }
                }
            }

            if config.perturb_magnitude > 0.0 && epoch >= last_event + config.plateau_window {
                let reference = history[epoch - config.plateau_window];
                let improvement = if reference > 0.0 {
                    (reference - mse) / reference
                } else {
                    0.0
                };
                if improvement < config.plateau_rel_improvement {
                    let m = config.perturb_magnitude;
                    for w in &mut self.weights {
                        for v in w.as_mut_slice() {
                            *v += rng.random_range(-m..=m);
                        }
                    }
                    perturbations += 1;
                    last_event = epoch;
                }
            }
        }

        Ok(TrainingReport {
            epochs_run: history.len(),
            final_mse: *history.last().expect("max_epochs >= 1"),
            mse_history: history,
            perturbations_applied: perturbations,
        })
    }
}

fn check_dataset(net: &MlpNetwork, inputs: &DataMatrix, targets: &DataMatrix) -> Result<()> {
    if inputs.n_samples() != targets.n_samples() {
        return Err(Error::dims(
            "training target rows",
            inputs.n_samples(),
            targets.n_samples(),
        ));
    }
    if inputs.dim() != net.input_size() {
        return Err(Error::dims("training input", net.input_size(), inputs.dim()));
    }
    if targets.dim() != net.output_size() {
        return Err(Error::dims("training target", net.output_size(), targets.dim()));
    }
    Ok(())
}

/// Sum of squared differences, no ½ factor.
pub fn loss(output: &[f64], target: &[f64]) -> Result<f64> {
    if output.len() != target.len() {
        return Err(Error::dims("loss target", output.len(), target.len()));
    }
    Ok(output
        .iter()
        .zip(target)
        .map(|(o, t)| (o - t) * (o - t))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub mse_goal: f64,
    pub plateau_window: usize,
    pub plateau_rel_improvement: f64,
    pub perturb_magnitude: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.9,
            max_epochs: 2000,
            mse_goal: 1e-6,
            plateau_window: 10,
            plateau_rel_improvement: 1e-6,
            perturb_magnitude: 1e-3,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a positive finite number");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if !(self.mse_goal >= 0.0) {
            return bad("mse_goal must be non-negative");
        }
        if self.plateau_window == 0 {
            return bad("plateau_window must be at least 1");
        }
        if !(self.plateau_rel_improvement >= 0.0) || !(self.perturb_magnitude >= 0.0) {
            return bad("plateau_rel_improvement and perturb_magnitude must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub epochs_run: usize,
    pub final_mse: f64,
    pub mse_history: Vec<f64>,
    pub perturbations_applied: usize,
}
