//! Small fully-connected networks with hand-written forward and backward
//! passes.
//!
//! Hidden layers apply an affine map followed by LeakyReLU; the final layer
//! applies an affine map followed by either tanh or sigmoid. Weights are
//! stored row-major, `weights[l][i * fan_in + j]` connecting input `j` to
//! output `i` of layer `l`.
//!
//! Networks are values: [`DenseNet::sgd_step`] returns a new network and
//! leaves the original untouched.
//!
//! # Checkpoint format
//!
//! Plain UTF-8 text, one record per line, tokens separated by single spaces:
//!
//! ```text
//! advrefine-densenet 1
//! layer_dims 32 64 64 9
//! hidden leaky_relu 0.2
//! output tanh
//! seed 17
//! weights 0
//! <fan_out lines of fan_in values>
//! biases 0
//! <one line of fan_out values>
//! weights 1
//! ...
//! ```
//!
//! Floats are written with Rust's shortest round-trip representation, so a
//! save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use thiserror::Error;

use crate::seed;

pub const CHECKPOINT_MAGIC: &str = "advrefine-densenet";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("network needs at least two layer dimensions, got {0}")]
    TooFewLayers(usize),
    #[error("layer dimension {index} is zero")]
    ZeroDimension { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("leaky relu slope must be finite and non-negative, got {0}")]
    InvalidSlope(f64),
    #[error("learning rate must be finite and non-negative, got {0}")]
    InvalidLearningRate(f64),
    #[error("checkpoint line {line}: {reason}")]
    Checkpoint { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Tanh,
    Sigmoid,
}

impl OutputActivation {
    fn apply(self, x: f64) -> f64 {
        match self {
            OutputActivation::Tanh => x.tanh(),
            OutputActivation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            OutputActivation::Tanh => 1.0 - y * y,
            OutputActivation::Sigmoid => y * (1.0 - y),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            OutputActivation::Tanh => "tanh",
            OutputActivation::Sigmoid => "sigmoid",
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

fn leaky_derivative(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        slope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    leaky_slope: f64,
    output: OutputActivation,
    seed: u64,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct GradientTape {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pre_activations: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl GradientTape {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// Parameter gradients shaped like the owning network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .flat_map(|v| v.iter_mut())
            .for_each(|x| *x *= factor);
    }

    /// Flattened in the same order as [`DenseNet::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl DenseNet {
    /// Xavier-uniform weights, zero biases, deterministic in `seed`.
    pub fn init(
        layer_dims: &[usize],
        leaky_slope: f64,
        output: OutputActivation,
        seed: u64,
    ) -> Result<Self, NetError> {
        check_dims(layer_dims)?;
        check_slope(leaky_slope)?;
        let mut rng = seed::rng(seed);
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("bound is positive and finite");
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| dist.sample(&mut rng))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            leaky_slope,
            output,
            seed,
        })
    }

    /// Network with every weight and bias set to zero.
    pub fn zeroed(
        layer_dims: &[usize],
        leaky_slope: f64,
        output: OutputActivation,
    ) -> Result<Self, NetError> {
        check_dims(layer_dims)?;
        check_slope(leaky_slope)?;
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights: layer_dims
                .windows(2)
                .map(|p| vec![0.0; p[0] * p[1]])
                .collect(),
            biases: layer_dims.windows(2).map(|p| vec![0.0; p[1]]).collect(),
            leaky_slope,
            output,
            seed: 0,
        })
    }

    /// Build from explicit row-major weights and biases.
    pub fn from_parts(
        layer_dims: &[usize],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        leaky_slope: f64,
        output: OutputActivation,
    ) -> Result<Self, NetError> {
        let mut net = Self::zeroed(layer_dims, leaky_slope, output)?;
        if weights.len() != net.weights.len() || biases.len() != net.biases.len() {
            return Err(NetError::DimensionMismatch {
                expected: net.weights.len(),
                got: weights.len().min(biases.len()),
            });
        }
        for (l, (w, b)) in weights.into_iter().zip(biases).enumerate() {
            check_len(net.weights[l].len(), w.len())?;
            check_len(net.biases[l].len(), b.len())?;
            net.weights[l] = w;
            net.biases[l] = b;
        }
        if !net.params_finite() {
            return Err(NetError::NonFinite("parameters"));
        }
        Ok(net)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn leaky_slope(&self) -> f64 {
        self.leaky_slope
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    /// Copy with parameters replaced, same order as [`DenseNet::parameters`].
    pub fn with_parameters(&self, params: &[f64]) -> Result<Self, NetError> {
        check_len(self.parameter_count(), params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NetError::NonFinite("parameters"));
        }
        let mut next = self.clone();
        let mut offset = 0;
        for (w, b) in next.weights.iter_mut().zip(next.biases.iter_mut()) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            b.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(next)
    }

    fn params_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NetError> {
        check_len(self.input_dim(), input.len())?;
        if input.iter().any(|x| !x.is_finite()) {
            return Err(NetError::NonFinite("input"));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, GradientTape), NetError> {
        self.check_input(input)?;
        let layers = self.weights.len();
        let mut inputs = Vec::with_capacity(layers);
        let mut pre_activations = Vec::with_capacity(layers);
        let mut current = input.to_vec();
        for l in 0..layers {
            let z = self.affine(l, &current);
            let activated: Vec<f64> = if l + 1 == layers {
                z.iter().map(|&x| self.output.apply(x)).collect()
            } else {
                z.iter().map(|&x| leaky(x, self.leaky_slope)).collect()
            };
            inputs.push(std::mem::replace(&mut current, activated));
            pre_activations.push(z);
        }
        let tape = GradientTape {
            inputs,
            pre_activations,
            output: current.clone(),
        };
        Ok((current, tape))
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(input)?;
        let layers = self.weights.len();
        let mut current = input.to_vec();
        for l in 0..layers {
            let z = self.affine(l, &current);
            current = if l + 1 == layers {
                z.iter().map(|&x| self.output.apply(x)).collect()
            } else {
                z.iter().map(|&x| leaky(x, self.leaky_slope)).collect()
            };
        }
        Ok(current)
    }

    fn affine(&self, layer: usize, x: &[f64]) -> Vec<f64> {
        let fan_in = self.layer_dims[layer];
        let w = &self.weights[layer];
        self.biases[layer]
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let row = &w[i * fan_in..(i + 1) * fan_in];
                row.iter().zip(x).fold(b, |acc, (wi, xi)| acc + wi * xi)
            })
            .collect()
    }

    /// Reverse-mode pass. `output_grad` is dL/d(output); returns parameter
    /// gradients and dL/d(input).
    pub fn backward(
        &self,
        tape: &GradientTape,
        output_grad: &[f64],
    ) -> Result<(Gradients, Vec<f64>), NetError> {
        let layers = self.weights.len();
        if tape.inputs.len() != layers || tape.pre_activations.len() != layers {
            return Err(NetError::DimensionMismatch {
                expected: layers,
                got: tape.inputs.len(),
            });
        }
        for (l, input) in tape.inputs.iter().enumerate() {
            check_len(self.layer_dims[l], input.len())?;
        }
        check_len(self.output_dim(), output_grad.len())?;

        let mut grads = Gradients::zeros_like(self);
        // delta = dL/dz for the current layer
        let mut delta: Vec<f64> = output_grad
            .iter()
            .zip(&tape.output)
            .map(|(&g, &y)| g * self.output.derivative_from_output(y))
            .collect();

        for l in (0..layers).rev() {
            let fan_in = self.layer_dims[l];
            let x = &tape.inputs[l];
            let w = &self.weights[l];
            for (i, &d) in delta.iter().enumerate() {
                grads.biases[l][i] = d;
                let row = &mut grads.weights[l][i * fan_in..(i + 1) * fan_in];
                row.iter_mut().zip(x).for_each(|(g, &xj)| *g = d * xj);
            }
            let mut upstream = vec![0.0; fan_in];
            for (i, &d) in delta.iter().enumerate() {
                let row = &w[i * fan_in..(i + 1) * fan_in];
                upstream
                    .iter_mut()
                    .zip(row)
                    .for_each(|(u, &wij)| *u += wij * d);
            }
            if l > 0 {
                let z_prev = &tape.pre_activations[l - 1];
                upstream
                    .iter_mut()
                    .zip(z_prev)
                    .for_each(|(u, &z)| *u *= leaky_derivative(z, self.leaky_slope));
            }
            delta = upstream;
        }
        Ok((grads, delta))
    }

    /// `p <- p - learning_rate * grad(p)` for every parameter.
    pub fn sgd_step(&self, grads: &Gradients, learning_rate: f64) -> Result<Self, NetError> {
        if !learning_rate.is_finite() || learning_rate < 0.0 {
            return Err(NetError::InvalidLearningRate(learning_rate));
        }
        if grads.weights.len() != self.weights.len() || grads.biases.len() != self.biases.len() {
            return Err(NetError::DimensionMismatch {
                expected: self.weights.len(),
                got: grads.weights.len(),
            });
        }
        for l in 0..self.weights.len() {
            check_len(self.weights[l].len(), grads.weights[l].len())?;
            check_len(self.biases[l].len(), grads.biases[l].len())?;
        }
        if !grads.is_finite() {
            return Err(NetError::NonFinite("gradients"));
        }
        let mut next = self.clone();
        let pairs = next
            .weights
            .iter_mut()
            .zip(&grads.weights)
            .chain(next.biases.iter_mut().zip(&grads.biases));
        for (params, g) in pairs {
            params
                .iter_mut()
                .zip(g)
                .for_each(|(p, &gp)| *p -= learning_rate * gp);
        }
        if !next.params_finite() {
            return Err(NetError::NonFinite("updated parameters"));
        }
        Ok(next)
    }

    pub fn to_checkpoint_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}");
        let dims: Vec<String> = self.layer_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "layer_dims {}", dims.join(" "));
        let _ = writeln!(out, "hidden leaky_relu {:?}", self.leaky_slope);
        let _ = writeln!(out, "output {}", self.output.as_str());
        let _ = writeln!(out, "seed {}", self.seed);
        for l in 0..self.weights.len() {
            let fan_in = self.layer_dims[l];
            let _ = writeln!(out, "weights {l}");
            for row in self.weights[l].chunks(fan_in) {
                let _ = writeln!(out, "{}", join_floats(row));
            }
            let _ = writeln!(out, "biases {l}");
            let _ = writeln!(out, "{}", join_floats(&self.biases[l]));
        }
        out
    }

    pub fn from_checkpoint_str(text: &str) -> Result<Self, NetError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| NetError::Checkpoint {
                line: text.lines().count() + 1,
                reason: format!("unexpected end of file, expected {what}"),
            })
        };
        let err = |line: usize, reason: String| NetError::Checkpoint { line, reason };

        let (n, header) = next("header")?;
        if header != format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}") {
            return Err(err(n, format!("bad header '{header}'")));
        }
        let (n, dims_line) = next("layer_dims")?;
        let dims: Vec<usize> = keyed(dims_line, "layer_dims")
            .ok_or_else(|| err(n, "expected layer_dims".into()))?
            .split(' ')
            .map(|t| {
                t.parse()
                    .map_err(|_| err(n, format!("bad dimension '{t}'")))
            })
            .collect::<Result<_, _>>()?;
        let (n, hidden) = next("hidden")?;
        let slope: f64 = keyed(hidden, "hidden leaky_relu")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(n, "expected 'hidden leaky_relu <slope>'".into()))?;
        let (n, output) = next("output")?;
        let output = match keyed(output, "output") {
            Some("tanh") => OutputActivation::Tanh,
            Some("sigmoid") => OutputActivation::Sigmoid,
            _ => return Err(err(n, format!("bad output activation '{output}'"))),
        };
        let (n, seed_line) = next("seed")?;
        let seed: u64 = keyed(seed_line, "seed")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(n, "expected 'seed <u64>'".into()))?;

        let mut net = Self::zeroed(&dims, slope, output).map_err(|e| err(3, e.to_string()))?;
        net.seed = seed;
        for l in 0..net.weights.len() {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let (n, tag) = next("weights")?;
            if tag != format!("weights {l}") {
                return Err(err(n, format!("expected 'weights {l}'")));
            }
            let mut w = Vec::with_capacity(fan_in * fan_out);
            for _ in 0..fan_out {
                let (n, row) = next("weight row")?;
                let values = parse_floats(row).map_err(|r| err(n, r))?;
                if values.len() != fan_in {
                    return Err(err(
                        n,
                        format!("expected {fan_in} values, got {}", values.len()),
                    ));
                }
                w.extend(values);
            }
            let (n, tag) = next("biases")?;
            if tag != format!("biases {l}") {
                return Err(err(n, format!("expected 'biases {l}'")));
            }
            let (n, row) = next("bias row")?;
            let b = parse_floats(row).map_err(|r| err(n, r))?;
            if b.len() != fan_out {
                return Err(err(
                    n,
                    format!("expected {fan_out} values, got {}", b.len()),
                ));
            }
            net.weights[l] = w;
            net.biases[l] = b;
        }
        if !net.params_finite() {
            return Err(NetError::NonFinite("checkpoint parameters"));
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetError> {
        fs::write(path, self.to_checkpoint_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetError> {
        Self::from_checkpoint_str(&fs::read_to_string(path)?)
    }
}

fn keyed<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix(key)?.strip_prefix(' ')
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_floats(line: &str) -> Result<Vec<f64>, String> {
    line.split(' ')
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number '{t}'")))
        .collect()
}

fn check_dims(dims: &[usize]) -> Result<(), NetError> {
    if dims.len() < 2 {
        return Err(NetError::TooFewLayers(dims.len()));
    }
    if let Some(index) = dims.iter().position(|&d| d == 0) {
        return Err(NetError::ZeroDimension { index });
    }
    Ok(())
}

fn check_slope(slope: f64) -> Result<(), NetError> {
    if !slope.is_finite() || slope < 0.0 {
        return Err(NetError::InvalidSlope(slope));
    }
    Ok(())
}

fn check_len(expected: usize, got: usize) -> Result<(), NetError> {
    if expected != got {
        return Err(NetError::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_shaped() {
        let a = DenseNet::init(&[2, 3, 1], 0.2, OutputActivation::Tanh, 11).unwrap();
        let b = DenseNet::init(&[2, 3, 1], 0.2, OutputActivation::Tanh, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights()[0].len(), 6);
        assert_eq!(a.weights()[1].len(), 3);
        assert_eq!(a.biases()[0].len(), 3);
        assert_eq!(a.biases()[1].len(), 1);
        assert!(a.biases().iter().flatten().all(|&b| b == 0.0));
        let bound = (6.0f64 / 5.0).sqrt();
        assert!(a.weights()[0].iter().all(|w| w.abs() <= bound));

        let c = DenseNet::init(&[2, 3, 1], 0.2, OutputActivation::Tanh, 12).unwrap();
        assert_ne!(a.parameters(), c.parameters());
    }

    #[test]
    fn init_rejects_bad_dims() {
        assert!(matches!(
            DenseNet::init(&[3], 0.2, OutputActivation::Tanh, 0),
            Err(NetError::TooFewLayers(1))
        ));
        assert!(matches!(
            DenseNet::init(&[3, 0, 1], 0.2, OutputActivation::Tanh, 0),
            Err(NetError::ZeroDimension { index: 1 })
        ));
    }

    #[test]
    fn zero_network_outputs() {
        let s = DenseNet::zeroed(&[4, 5, 1], 0.2, OutputActivation::Sigmoid).unwrap();
        assert_eq!(s.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.5]);
        let t = DenseNet::zeroed(&[4, 5, 3], 0.2, OutputActivation::Tanh).unwrap();
        assert_eq!(t.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_layer_hand_computation() {
        let net = DenseNet::from_parts(
            &[1, 1],
            vec![vec![2.0]],
            vec![vec![0.0]],
            0.2,
            OutputActivation::Tanh,
        )
        .unwrap();
        let (y, _) = net.forward(&[0.5]).unwrap();
        assert!((y[0] - 0.761_594_155_955_764_9).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let net = DenseNet::init(&[2, 1], 0.2, OutputActivation::Tanh, 0).unwrap();
        assert!(matches!(
            net.forward(&[1.0]),
            Err(NetError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            net.forward(&[1.0, f64::INFINITY]),
            Err(NetError::NonFinite(_))
        ));
    }

    #[test]
    fn zero_output_grad_gives_zero_gradients() {
        let net = DenseNet::init(&[3, 4, 2], 0.2, OutputActivation::Sigmoid, 3).unwrap();
        let (_, tape) = net.forward(&[0.1, -0.4, 0.9]).unwrap();
        let (grads, input_grad) = net.backward(&tape, &[0.0, 0.0]).unwrap();
        assert!(grads.flatten().iter().all(|&g| g == 0.0));
        assert!(input_grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_rejects_mismatched_tape() {
        let a = DenseNet::init(&[3, 4, 2], 0.2, OutputActivation::Tanh, 3).unwrap();
        let b = DenseNet::init(&[2, 4, 2], 0.2, OutputActivation::Tanh, 3).unwrap();
        let (_, tape) = b.forward(&[0.1, 0.2]).unwrap();
        assert!(a.backward(&tape, &[1.0, 1.0]).is_err());
        let (_, tape) = a.forward(&[0.1, 0.2, 0.3]).unwrap();
        assert!(a.backward(&tape, &[1.0]).is_err());
    }

    #[test]
    fn sgd_arithmetic() {
        let net = DenseNet::from_parts(
            &[1, 1],
            vec![vec![1.0]],
            vec![vec![0.0]],
            0.2,
            OutputActivation::Tanh,
        )
        .unwrap();
        let grads = Gradients {
            weights: vec![vec![2.0]],
            biases: vec![vec![0.0]],
        };
        let next = net.sgd_step(&grads, 0.1).unwrap();
        assert!((next.weights()[0][0] - 0.8).abs() < 1e-15);
        assert_eq!(net.weights()[0][0], 1.0);

        let zero = Gradients::zeros_like(&net);
        assert_eq!(net.sgd_step(&zero, 0.5).unwrap(), net);
        assert_eq!(net.sgd_step(&grads, 0.0).unwrap(), net);
    }

    #[test]
    fn sgd_rejects_non_finite() {
        let net = DenseNet::init(&[1, 1], 0.2, OutputActivation::Tanh, 0).unwrap();
        let grads = Gradients {
            weights: vec![vec![f64::NAN]],
            biases: vec![vec![0.0]],
        };
        assert!(matches!(
            net.sgd_step(&grads, 0.1),
            Err(NetError::NonFinite(_))
        ));
        let ok = Gradients::zeros_like(&net);
        assert!(matches!(
            net.sgd_step(&ok, -1.0),
            Err(NetError::InvalidLearningRate(_))
        ));
    }

    #[test]
    fn quadratic_descent_matches_closed_form() {
        // L(w) = w^2, dL/dw = 2w, so w_k = (1 - 2 lr)^k = 0.8^k
        let mut net = DenseNet::from_parts(
            &[1, 1],
            vec![vec![1.0]],
            vec![vec![0.0]],
            0.2,
            OutputActivation::Tanh,
        )
        .unwrap();
        let mut prev = 1.0;
        for k in 1..=20 {
            let w = net.weights()[0][0];
            let grads = Gradients {
                weights: vec![vec![2.0 * w]],
                biases: vec![vec![0.0]],
            };
            net = net.sgd_step(&grads, 0.1).unwrap();
            let w = net.weights()[0][0];
            assert!(w < prev && w > 0.0);
            assert!((w - 0.8f64.powi(k)).abs() < 1e-12);
            prev = w;
        }
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let net = DenseNet::init(&[5, 7, 3], 0.15, OutputActivation::Sigmoid, 99).unwrap();
        let text = net.to_checkpoint_string();
        assert!(text.starts_with("advrefine-densenet 1\nlayer_dims 5 7 3\n"));
        let back = DenseNet::from_checkpoint_str(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn checkpoint_errors_carry_line() {
        let net = DenseNet::init(&[2, 2], 0.2, OutputActivation::Tanh, 1).unwrap();
        let text = net.to_checkpoint_string().replace("weights 0", "weights 9");
        match DenseNet::from_checkpoint_str(&text) {
            Err(NetError::Checkpoint { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let truncated: String = net
            .to_checkpoint_string()
            .lines()
            .take(7)
            .collect::<Vec<_>>()
            .join("\n");
        assert!(DenseNet::from_checkpoint_str(&truncated).is_err());
    }
}
