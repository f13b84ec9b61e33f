use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Matrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(0.0),
            Activation::Linear => v,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Self::Tanh),
            "relu" => Ok(Self::Relu),
            "linear" => Ok(Self::Linear),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Layer widths (input, hidden…, output) and one activation per hidden
/// layer. The output layer is always linear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
    hidden_activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, hidden_activations: Vec<Activation>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config("an MLP needs at least input and output sizes".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!("layer sizes must be positive: {layer_sizes:?}")));
        }
        if hidden_activations.len() != layer_sizes.len() - 2 {
            return Err(Error::Config(format!(
                "{} hidden layers but {} activations",
                layer_sizes.len() - 2,
                hidden_activations.len()
            )));
        }
        Ok(Self {
            layer_sizes,
            hidden_activations,
        })
    }

    /// Same activation on every hidden layer.
    pub fn uniform(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        let hidden = layer_sizes.len().saturating_sub(2);
        Self::new(layer_sizes, vec![activation; hidden])
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("validated non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn activation(&self, layer: usize) -> Activation {
        self.hidden_activations
            .get(layer)
            .copied()
            .unwrap_or(Activation::Linear)
    }

    pub fn num_params(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// The decoder counterpart: reversed widths and activations.
    pub fn mirrored(&self) -> Self {
        let mut sizes = self.layer_sizes.clone();
        sizes.reverse();
        let mut acts = self.hidden_activations.clone();
        acts.reverse();
        Self {
            layer_sizes: sizes,
            hidden_activations: acts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `fan_in × fan_out`, so a batch maps as `h · W + b`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    /// Uniform weights on ±√(6/(fan_in+fan_out)), zero biases.
    pub fn init(spec: &MlpSpec, rng: &mut Rng) -> Self {
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Layer {
                    weights: Matrix::from_fn(w[0], w[1], |_, _| rng.uniform_range(-limit, limit)),
                    bias: vec![0.0; w[1]],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| Layer {
                weights: Matrix::zeros(w[0], w[1]),
                bias: vec![0.0; w[1]],
            })
            .collect();
        Self { layers }
    }

    pub fn check(&self, spec: &MlpSpec) -> Result<()> {
        if self.layers.len() != spec.num_layers() {
            return Err(Error::Dimension(format!(
                "{} layers, spec has {}",
                self.layers.len(),
                spec.num_layers()
            )));
        }
        for (l, (layer, w)) in self.layers.iter().zip(spec.layer_sizes.windows(2)).enumerate() {
            if layer.weights.shape() != (w[0], w[1]) || layer.bias.len() != w[1] {
                return Err(Error::Dimension(format!(
                    "layer {l} has weights {:?} and {} biases, expected ({}, {})",
                    layer.weights.shape(),
                    layer.bias.len(),
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Every parameter in a fixed order: per layer, weights row-major then
    /// biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.values().copied().collect()
    }

    pub fn from_flat(spec: &MlpSpec, flat: &[f64]) -> Result<Self> {
        if flat.len() != spec.num_params() {
            return Err(Error::Dimension(format!(
                "spec needs {} parameters, got {}",
                spec.num_params(),
                flat.len()
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter array".into()));
        }
        let mut params = Self::zeros(spec);
        for (dst, src) in params.values_mut().zip(flat) {
            *dst = *src;
        }
        Ok(params)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }
}

/// Post-activation outputs of every layer, input first.
pub struct ForwardTrace {
    activations: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("trace holds at least the input")
    }
}

fn affine(h: &Matrix, layer: &Layer, act: Activation) -> Matrix {
    let mut out = h.matmul(&layer.weights).expect("shapes validated by caller");
    for i in 0..out.rows() {
        for (v, b) in out.row_mut(i).iter_mut().zip(&layer.bias) {
            *v = act.apply(*v + b);
        }
    }
    out
}

fn check_input(spec: &MlpSpec, params: &MlpParams, x: &Matrix) -> Result<()> {
    params.check(spec)?;
    if x.cols() != spec.input_size() {
        return Err(Error::Dimension(format!(
            "network expects {} inputs, got {}",
            spec.input_size(),
            x.cols()
        )));
    }
    Ok(())
}

pub fn forward(params: &MlpParams, spec: &MlpSpec, x: &Matrix) -> Result<Matrix> {
    check_input(spec, params, x)?;
    let mut h = x.clone();
    for (l, layer) in params.layers.iter().enumerate() {
        h = affine(&h, layer, spec.activation(l));
    }
    Ok(h)
}

pub fn forward_traced(params: &MlpParams, spec: &MlpSpec, x: &Matrix) -> Result<ForwardTrace> {
    check_input(spec, params, x)?;
    let mut activations = Vec::with_capacity(params.layers.len() + 1);
    activations.push(x.clone());
    for (l, layer) in params.layers.iter().enumerate() {
        let next = affine(activations.last().expect("non-empty"), layer, spec.activation(l));
        activations.push(next);
    }
    Ok(ForwardTrace { activations })
}

/// Reverse pass: parameter gradients and the gradient w.r.t. the input,
/// given the gradient w.r.t. the network output.
pub fn backward(
    params: &MlpParams,
    spec: &MlpSpec,
    trace: &ForwardTrace,
    grad_output: &Matrix,
) -> (MlpParams, Matrix) {
    let mut grads = Vec::with_capacity(params.layers.len());
    let mut delta = grad_output.clone();
    for l in (0..params.layers.len()).rev() {
        let act = spec.activation(l);
        if act != Activation::Linear {
            let out = &trace.activations[l + 1];
            for (d, o) in delta.as_mut_slice().iter_mut().zip(out.as_slice()) {
                *d *= act.derivative_from_output(*o);
            }
        }
        let input = &trace.activations[l];
        let weights = input.t_matmul(&delta).expect("trace shapes");
        let mut bias = vec![0.0; delta.cols()];
        for i in 0..delta.rows() {
            for (b, d) in bias.iter_mut().zip(delta.row(i)) {
                *b += d;
            }
        }
        grads.push(Layer { weights, bias });
        delta = delta
            .matmul_t(&params.layers[l].weights)
            .expect("trace shapes");
    }
    grads.reverse();
    (MlpParams { layers: grads }, delta)
}
