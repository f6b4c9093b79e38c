//! Layered feedforward networks with Gaussian radial-basis and dense layers.
//!
//! A network is a stack of layers evaluated in order:
//!
//! - `radial_gaussian`: unit `j` emits `exp(-||x - c_j||^2 / (2 sigma_j^2))`.
//!   Widths are stored through a softplus reparameterization so positivity is
//!   structural: `sigma = ln(1 + exp(rho))`, with `rho` the trained value.
//! - `dense_tanh`: `tanh(W x + b)`.
//! - `dense_linear`: `W x + b`.
//!
//! The last layer is always `dense_linear` sized to the output width, and at
//! most one radial layer is allowed, in first position.

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag embedded in serialized model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Floor applied to initial radial widths.
pub const WIDTH_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    DenseTanh,
    DenseLinear,
    RadialGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub units: usize,
}

impl LayerSpec {
    pub fn new(kind: LayerKind, units: usize) -> Self {
        Self { kind, units }
    }
}

/// Topology description: input width, layer stack, output width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_width: usize,
    pub layers: Vec<LayerSpec>,
    pub output_width: usize,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite parameter or activation in layer {layer}")]
    NonFiniteParameter { layer: usize },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unsupported model format version {0}")]
    UnsupportedFormatVersion(u32),
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.input_width == 0 || self.output_width == 0 {
            return Err(NetworkError::InvalidSpec("zero input or output width".into()));
        }
        let last = self
            .layers
            .last()
            .ok_or_else(|| NetworkError::InvalidSpec("no layers".into()))?;
        if last.kind != LayerKind::DenseLinear || last.units != self.output_width {
            return Err(NetworkError::InvalidSpec(
                "last layer must be dense_linear sized to the output width".into(),
            ));
        }
        if self.layers.iter().any(|l| l.units == 0) {
            return Err(NetworkError::InvalidSpec("zero-unit layer".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.kind == LayerKind::RadialGaussian && i != 0 {
                return Err(NetworkError::InvalidSpec(
                    "a radial layer may only appear first".into(),
                ));
            }
        }
        Ok(())
    }

    /// Unit counts per layer, in order.
    pub fn unit_counts(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.units).collect()
    }

    /// Input width of layer `i`.
    fn fan_in(&self, i: usize) -> usize {
        if i == 0 {
            self.input_width
        } else {
            self.layers[i - 1].units
        }
    }

    /// Total scalar parameter count of a network with this topology.
    ///
    /// Dense layers hold `units x fan_in` weights plus `units` biases; radial
    /// layers hold `units x fan_in` centers plus `units` width reparameters.
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, layer)| layer.units * (self.fan_in(i) + 1))
            .sum()
    }
}

/// Trainable parameters of one layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Dense {
        /// `units x fan_in`, row-major.
        weights: Array2<f64>,
        biases: Array1<f64>,
    },
    Radial {
        /// `units x input_width`, row-major.
        centers: Array2<f64>,
        /// Unconstrained width reparameters; `sigma = softplus(rho)`.
        width_rhos: Array1<f64>,
    },
}

/// Numerically stable `ln(1 + exp(x))`.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`]: `ln(exp(y) - 1)` for `y > 0`.
pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// An instantiated network: a spec plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<LayerParams>,
}

impl Network {
    /// Assembles a network from explicit parameters, validating shapes and
    /// finiteness.
    pub fn from_parts(spec: NetworkSpec, layers: Vec<LayerParams>) -> Result<Self, NetworkError> {
        spec.validate()?;
        if layers.len() != spec.layers.len() {
            return Err(NetworkError::DimensionMismatch(format!(
                "spec has {} layers, parameters have {}",
                spec.layers.len(),
                layers.len()
            )));
        }
        for (i, (layer_spec, params)) in spec.layers.iter().zip(&layers).enumerate() {
            let fan_in = spec.fan_in(i);
            let (rows, cols, extra, finite) = match (layer_spec.kind, params) {
                (LayerKind::RadialGaussian, LayerParams::Radial { centers, width_rhos }) => (
                    centers.nrows(),
                    centers.ncols(),
                    width_rhos.len(),
                    centers.iter().chain(width_rhos.iter()).all(|v| v.is_finite()),
                ),
                (LayerKind::DenseTanh | LayerKind::DenseLinear, LayerParams::Dense { weights, biases }) => (
                    weights.nrows(),
                    weights.ncols(),
                    biases.len(),
                    weights.iter().chain(biases.iter()).all(|v| v.is_finite()),
                ),
                _ => {
                    return Err(NetworkError::DimensionMismatch(format!(
                        "layer {i} parameter kind does not match its spec"
                    )))
                }
            };
            if rows != layer_spec.units || cols != fan_in || extra != layer_spec.units {
                return Err(NetworkError::DimensionMismatch(format!(
                    "layer {i}: expected {}x{fan_in} (+{} vector), got {rows}x{cols} (+{extra})",
                    layer_spec.units, layer_spec.units
                )));
            }
            if !finite {
                return Err(NetworkError::NonFiniteParameter { layer: i });
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    /// Radial widths of the first layer, if it is radial.
    pub fn radial_widths(&self) -> Option<Vec<f64>> {
        match self.layers.first() {
            Some(LayerParams::Radial { width_rhos, .. }) => {
                Some(width_rhos.iter().map(|&r| softplus(r)).collect())
            }
            _ => None,
        }
    }

    /// Flattens all parameters into one vector.
    ///
    /// Canonical order: layers in stack order; dense layers emit weights
    /// row-major then biases; radial layers emit centers row-major then width
    /// reparameters. Gradient vectors follow the same order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            match layer {
                LayerParams::Dense { weights, biases } => {
                    flat.extend(weights.iter());
                    flat.extend(biases.iter());
                }
                LayerParams::Radial { centers, width_rhos } => {
                    flat.extend(centers.iter());
                    flat.extend(width_rhos.iter());
                }
            }
        }
        flat
    }

    /// Overwrites all parameters from a flat vector in canonical order.
    pub fn set_flat_parameters(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.parameter_count() {
            return Err(NetworkError::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            match layer {
                LayerParams::Dense { weights, biases } => {
                    for w in weights.iter_mut() {
                        *w = flat[offset];
                        offset += 1;
                    }
                    for b in biases.iter_mut() {
                        *b = flat[offset];
                        offset += 1;
                    }
                }
                LayerParams::Radial { centers, width_rhos } => {
                    for c in centers.iter_mut() {
                        *c = flat[offset];
                        offset += 1;
                    }
                    for r in width_rhos.iter_mut() {
                        *r = flat[offset];
                        offset += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluates the network, returning the output activation.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetworkError> {
        Ok(self.forward_trace(input)?.pop().expect("at least one layer"))
    }

    /// Evaluates the network, returning every layer's activation in order.
    /// The last entry is the network output.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>, NetworkError> {
        if input.len() != self.spec.input_width {
            return Err(NetworkError::DimensionMismatch(format!(
                "input width {} does not match spec width {}",
                input.len(),
                self.spec.input_width
            )));
        }
        let mut trace: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let x = if i == 0 { input } else { trace[i - 1].as_slice() };
            let activation = match layer {
                LayerParams::Radial { centers, width_rhos } => {
                    radial_activation(centers, width_rhos, x)
                }
                LayerParams::Dense { weights, biases } => {
                    let mut pre = weights.dot(&ArrayView1::from(x)) + biases;
                    if self.spec.layers[i].kind == LayerKind::DenseTanh {
                        pre.mapv_inplace(f64::tanh);
                    }
                    pre.to_vec()
                }
            };
            if activation.iter().any(|v| !v.is_finite()) {
                return Err(NetworkError::NonFiniteParameter { layer: i });
            }
            trace.push(activation);
        }
        Ok(trace)
    }
}

fn radial_activation(centers: &Array2<f64>, width_rhos: &Array1<f64>, x: &[f64]) -> Vec<f64> {
    centers
        .rows()
        .into_iter()
        .zip(width_rhos.iter())
        .map(|(center, &rho)| {
            let dist_sq: f64 = center
                .iter()
                .zip(x)
                .map(|(c, xi)| {
                    let d = xi - c;
                    d * d
                })
                .sum();
            let sigma = softplus(rho);
            (-dist_sq / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

/// Instantiates a network from a spec, seeded.
///
/// Dense weights are uniform in `[-1/sqrt(fan_in), +1/sqrt(fan_in)]` and
/// biases start at zero. Radial centers are sampled from `center_init_data`
/// without replacement (with replacement when the data is smaller than the
/// unit count); absent data they are uniform in [0, 1). Every unit's initial
/// width is the mean nearest-other-center distance, floored at
/// [`WIDTH_FLOOR`].
pub fn build_network(
    spec: &NetworkSpec,
    seed: u64,
    center_init_data: Option<&[Vec<f64>]>,
) -> Result<Network, NetworkError> {
    spec.validate()?;
    if let Some(data) = center_init_data {
        if let Some(bad) = data.iter().find(|v| v.len() != spec.input_width) {
            return Err(NetworkError::DimensionMismatch(format!(
                "center init vector has width {}, expected {}",
                bad.len(),
                spec.input_width
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (i, layer_spec) in spec.layers.iter().enumerate() {
        let fan_in = spec.fan_in(i);
        match layer_spec.kind {
            LayerKind::RadialGaussian => {
                let centers = init_centers(layer_spec.units, fan_in, center_init_data, &mut rng);
                let sigma = mean_nearest_center_distance(&centers).max(WIDTH_FLOOR);
                let rho = softplus_inverse(sigma);
                layers.push(LayerParams::Radial {
                    centers,
                    width_rhos: Array1::from_elem(layer_spec.units, rho),
                });
            }
            LayerKind::DenseTanh | LayerKind::DenseLinear => {
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((layer_spec.units, fan_in), |_| {
                    rng.gen_range(-bound..=bound)
                });
                layers.push(LayerParams::Dense {
                    weights,
                    biases: Array1::zeros(layer_spec.units),
                });
            }
        }
    }
    Network::from_parts(spec.clone(), layers)
}

fn init_centers(
    units: usize,
    width: usize,
    data: Option<&[Vec<f64>]>,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    match data {
        Some(data) if !data.is_empty() => {
            let picks: Vec<usize> = if data.len() >= units {
                let mut indices: Vec<usize> = (0..data.len()).collect();
                indices.shuffle(rng);
                indices.truncate(units);
                indices
            } else {
                (0..units).map(|_| rng.gen_range(0..data.len())).collect()
            };
            Array2::from_shape_fn((units, width), |(j, d)| data[picks[j]][d])
        }
        _ => Array2::from_shape_fn((units, width), |_| rng.gen::<f64>()),
    }
}

fn mean_nearest_center_distance(centers: &Array2<f64>) -> f64 {
    let n = centers.nrows();
    if n < 2 {
        return 1.0;
    }
    let mut total = 0.0;
    for j in 0..n {
        let mut nearest = f64::INFINITY;
        for k in 0..n {
            if k == j {
                continue;
            }
            let dist_sq: f64 = centers
                .row(j)
                .iter()
                .zip(centers.row(k).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            nearest = nearest.min(dist_sq.sqrt());
        }
        total += nearest;
    }
    total / n as f64
}

/// The full-scale topology: a 100-unit radial input layer, a tanh stack of
/// 50/100/200/400/200/100/50 units, and a linear output layer.
pub fn final_network_spec(input_width: usize, output_width: usize) -> NetworkSpec {
    let mut layers = vec![LayerSpec::new(LayerKind::RadialGaussian, 100)];
    for units in [50, 100, 200, 400, 200, 100, 50] {
        layers.push(LayerSpec::new(LayerKind::DenseTanh, units));
    }
    layers.push(LayerSpec::new(LayerKind::DenseLinear, output_width));
    NetworkSpec {
        input_width,
        layers,
        output_width,
    }
}

/// Candidate models for the preliminary comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreliminaryModel {
    /// Dense tanh stack only.
    Mlp,
    /// Radial first layer, remaining stack dense tanh.
    RadialGeneral,
    /// Radial input layer prepended before the full tanh stack.
    RbfMlp,
}

const PRELIMINARY_UNITS: [usize; 7] = [20, 60, 100, 150, 100, 60, 20];

/// Builds the spec of one preliminary model around the shared seven-layer
/// hidden stack of 20/60/100/150/100/60/20 units.
pub fn preliminary_network_spec(
    model: PreliminaryModel,
    input_width: usize,
    output_width: usize,
) -> NetworkSpec {
    let mut layers = Vec::new();
    match model {
        PreliminaryModel::Mlp => {
            for units in PRELIMINARY_UNITS {
                layers.push(LayerSpec::new(LayerKind::DenseTanh, units));
            }
        }
        PreliminaryModel::RadialGeneral => {
            layers.push(LayerSpec::new(LayerKind::RadialGaussian, PRELIMINARY_UNITS[0]));
            for units in &PRELIMINARY_UNITS[1..] {
                layers.push(LayerSpec::new(LayerKind::DenseTanh, *units));
            }
        }
        PreliminaryModel::RbfMlp => {
            layers.push(LayerSpec::new(LayerKind::RadialGaussian, PRELIMINARY_UNITS[0]));
            for units in PRELIMINARY_UNITS {
                layers.push(LayerSpec::new(LayerKind::DenseTanh, units));
            }
        }
    }
    layers.push(LayerSpec::new(LayerKind::DenseLinear, output_width));
    NetworkSpec {
        input_width,
        layers,
        output_width,
    }
}

/// Serialized model container: spec plus flat parameters in canonical order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub spec: NetworkSpec,
    pub params: Vec<f64>,
}

impl Network {
    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            spec: self.spec.clone(),
            params: self.flat_parameters(),
        }
    }

    pub fn from_model_file(file: &ModelFile) -> Result<Self, NetworkError> {
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(NetworkError::UnsupportedFormatVersion(file.format_version));
        }
        let mut network = build_network(&file.spec, 0, None)?;
        network.set_flat_parameters(&file.params)?;
        if file.params.iter().any(|p| !p.is_finite()) {
            return Err(NetworkError::NonFiniteParameter { layer: 0 });
        }
        Ok(network)
    }
}
