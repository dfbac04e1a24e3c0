//! The two generators, the discriminator, and their update rules.
//!
//! The discriminator sees raw tanh-space proposals and estimates the
//! probability that a proposal came from the currently better generator.
//! It ascends
//!
//! ```text
//! (1/m) * sum_j [ log D(G_a(z_j)) + log(1 - D(G_b(z_j))) ]
//! ```
//!
//! while only the worse generator `G_b` descends
//! `(1/m) * sum_j log(1 - D(G_b(z_j)))` with gradients chained through `D`.

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::param_space::{to_open_interval, DecodedParams, ParamSpace, RawParams, SpaceError};
use crate::seed;
use crate::tinynet::{DenseNet, Gradients, NetError, OutputActivation};

/// Clamp applied inside every log.
pub const LOG_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("batch sizes differ: better has {better}, worse has {worse}")]
    BatchMismatch { better: usize, worse: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("{0} network has the wrong shape: {1}")]
    Shape(&'static str, String),
    #[error("non-finite {0} loss")]
    NonFiniteLoss(&'static str),
}

fn safe_ln(p: f64) -> f64 {
    p.max(LOG_EPSILON).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorId {
    One,
    Two,
}

impl GeneratorId {
    pub fn other(self) -> Self {
        match self {
            GeneratorId::One => GeneratorId::Two,
            GeneratorId::Two => GeneratorId::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            GeneratorId::One => 1,
            GeneratorId::Two => 2,
        }
    }
}

/// Architecture shared by both generators and the discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub noise_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub leaky_slope: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            noise_dim: 32,
            generator_hidden: vec![64, 64],
            discriminator_hidden: vec![64, 32],
            leaky_slope: 0.2,
        }
    }
}

impl Architecture {
    pub fn generator_dims(&self, output_dim: usize) -> Vec<usize> {
        let mut dims = vec![self.noise_dim];
        dims.extend(&self.generator_hidden);
        dims.push(output_dim);
        dims
    }

    pub fn discriminator_dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(&self.discriminator_hidden);
        dims.push(1);
        dims
    }
}

/// `m` i.i.d. standard normal vectors, reproducible from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBatch {
    seed: u64,
    dim: usize,
    samples: Vec<Vec<f64>>,
}

impl NoiseBatch {
    /// Sample `j` is drawn from its own stream `derive(seed, j)`.
    pub fn sample(m: usize, dim: usize, seed: u64) -> Self {
        let samples = (0..m)
            .map(|j| {
                let mut rng = seed::rng(seed::derive(seed, j as u64));
                (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
            })
            .collect();
        Self { seed, dim, samples }
    }

    pub fn from_samples(samples: Vec<Vec<f64>>) -> Self {
        let dim = samples.first().map_or(0, Vec::len);
        Self {
            seed: 0,
            dim,
            samples,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    id: GeneratorId,
    net: DenseNet,
}

impl Generator {
    pub fn new(id: GeneratorId, net: DenseNet) -> Result<Self, AdversaryError> {
        if net.output_activation() != OutputActivation::Tanh {
            return Err(AdversaryError::Shape(
                "generator",
                "output must be tanh".into(),
            ));
        }
        Ok(Self { id, net })
    }

    pub fn init(
        id: GeneratorId,
        arch: &Architecture,
        output_dim: usize,
        seed: u64,
    ) -> Result<Self, AdversaryError> {
        let net = DenseNet::init(
            &arch.generator_dims(output_dim),
            arch.leaky_slope,
            OutputActivation::Tanh,
            seed,
        )?;
        Ok(Self { id, net })
    }

    pub fn id(&self) -> GeneratorId {
        self.id
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    /// Propose one tanh-space vector.
    pub fn propose(&self, z: &[f64]) -> Result<RawParams, AdversaryError> {
        let y = self.net.predict(z)?;
        Ok(RawParams::new(
            y.into_iter().map(to_open_interval).collect(),
        )?)
    }

    /// One proposal per noise sample.
    pub fn generate(&self, noise: &NoiseBatch) -> Result<Vec<RawParams>, AdversaryError> {
        noise.samples().iter().map(|z| self.propose(z)).collect()
    }

    /// Decode the proposal for `z` in `space`.
    pub fn decode(&self, z: &[f64], space: &ParamSpace) -> Result<DecodedParams, AdversaryError> {
        let raw = self.propose(z)?;
        Ok(space.rescale(raw.as_slice())?)
    }

    /// `(1/m) * sum_j log(1 - D(G(z_j)))`.
    pub fn adversarial_loss(
        &self,
        d: &Discriminator,
        noise: &NoiseBatch,
    ) -> Result<f64, AdversaryError> {
        if noise.is_empty() {
            return Err(AdversaryError::EmptyBatch);
        }
        let mut total = 0.0;
        for raw in self.generate(noise)? {
            total += safe_ln(1.0 - d.probability(&raw)?);
        }
        let loss = total / noise.len() as f64;
        if !loss.is_finite() {
            return Err(AdversaryError::NonFiniteLoss("generator"));
        }
        Ok(loss)
    }

    /// One SGD descent step on [`Generator::adversarial_loss`], with the
    /// gradient flowing through `d` (whose parameters are not touched).
    /// Returns the updated generator and the loss before the step.
    pub fn update_against(
        &self,
        d: &Discriminator,
        noise: &NoiseBatch,
        lr: f64,
    ) -> Result<(Generator, f64), AdversaryError> {
        if noise.is_empty() {
            return Err(AdversaryError::EmptyBatch);
        }
        let m = noise.len() as f64;
        let mut grads = Gradients::zeros_like(&self.net);
        let mut total = 0.0;
        for z in noise.samples() {
            let (y, g_tape) = self.net.forward(z)?;
            let raw: Vec<f64> = y.into_iter().map(to_open_interval).collect();
            let (p, d_tape) = d.net.forward(&raw)?;
            let p = p[0];
            total += safe_ln(1.0 - p);
            // d/dp log(1 - p), with the same clamp as the loss
            let dl_dp = -1.0 / (1.0 - p).max(LOG_EPSILON) / m;
            let (_, dl_dx) = d.net.backward(&d_tape, &[dl_dp])?;
            let (g, _) = self.net.backward(&g_tape, &dl_dx)?;
            grads.accumulate(&g);
        }
        let loss = total / m;
        if !loss.is_finite() {
            return Err(AdversaryError::NonFiniteLoss("generator"));
        }
        let net = self.net.sgd_step(&grads, lr)?;
        Ok((Generator { id: self.id, net }, loss))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    net: DenseNet,
}

impl Discriminator {
    pub fn new(net: DenseNet) -> Result<Self, AdversaryError> {
        if net.output_activation() != OutputActivation::Sigmoid || net.output_dim() != 1 {
            return Err(AdversaryError::Shape(
                "discriminator",
                "output must be a single sigmoid unit".into(),
            ));
        }
        Ok(Self { net })
    }

    pub fn init(arch: &Architecture, input_dim: usize, seed: u64) -> Result<Self, AdversaryError> {
        let net = DenseNet::init(
            &arch.discriminator_dims(input_dim),
            arch.leaky_slope,
            OutputActivation::Sigmoid,
            seed,
        )?;
        Ok(Self { net })
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    /// Probability that `raw` came from the better generator.
    pub fn probability(&self, raw: &RawParams) -> Result<f64, AdversaryError> {
        Ok(self.net.predict(raw.as_slice())?[0])
    }

    /// `(1/m) * sum_j [log D(better_j) + log(1 - D(worse_j))]`, the quantity
    /// the discriminator maximizes.
    pub fn objective(
        &self,
        better: &[RawParams],
        worse: &[RawParams],
    ) -> Result<f64, AdversaryError> {
        check_batches(better, worse)?;
        let mut total = 0.0;
        for (a, b) in better.iter().zip(worse) {
            total += safe_ln(self.probability(a)?) + safe_ln(1.0 - self.probability(b)?);
        }
        let value = total / better.len() as f64;
        if !value.is_finite() {
            return Err(AdversaryError::NonFiniteLoss("discriminator"));
        }
        Ok(value)
    }

    /// One SGD step descending the negated objective (better labelled 1,
    /// worse labelled 0). Returns the updated discriminator and the objective
    /// before the step.
    pub fn update(
        &self,
        better: &[RawParams],
        worse: &[RawParams],
        lr: f64,
    ) -> Result<(Discriminator, f64), AdversaryError> {
        check_batches(better, worse)?;
        let m = better.len() as f64;
        let mut grads = Gradients::zeros_like(&self.net);
        let mut total = 0.0;
        for (a, b) in better.iter().zip(worse) {
            let (pa, tape_a) = self.net.forward(a.as_slice())?;
            total += safe_ln(pa[0]);
            // loss = -log p
            let (ga, _) = self
                .net
                .backward(&tape_a, &[-1.0 / pa[0].max(LOG_EPSILON) / m])?;
            grads.accumulate(&ga);

            let (pb, tape_b) = self.net.forward(b.as_slice())?;
            total += safe_ln(1.0 - pb[0]);
            // loss = -log(1 - p)
            let (gb, _) = self
                .net
                .backward(&tape_b, &[1.0 / (1.0 - pb[0]).max(LOG_EPSILON) / m])?;
            grads.accumulate(&gb);
        }
        let objective = total / m;
        if !objective.is_finite() {
            return Err(AdversaryError::NonFiniteLoss("discriminator"));
        }
        let net = self.net.sgd_step(&grads, lr)?;
        Ok((Discriminator { net }, objective))
    }
}

fn check_batches(better: &[RawParams], worse: &[RawParams]) -> Result<(), AdversaryError> {
    if better.len() != worse.len() {
        return Err(AdversaryError::BatchMismatch {
            better: better.len(),
            worse: worse.len(),
        });
    }
    if better.is_empty() {
        return Err(AdversaryError::EmptyBatch);
    }
    Ok(())
}

/// Equality verdicts of the two most recent iterations, newest last.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeHistory {
    previous: bool,
    latest: bool,
}

impl ProbeHistory {
    pub fn new(previous: bool, latest: bool) -> Self {
        Self { previous, latest }
    }

    pub fn push(&mut self, equal: bool) {
        self.previous = self.latest;
        self.latest = equal;
    }

    pub fn both_equal(&self) -> bool {
        self.previous && self.latest
    }

    pub fn as_pair(&self) -> (bool, bool) {
        (self.previous, self.latest)
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// Re-initialize `g_b` when both recorded verdicts say the two generators
/// decoded identically on the probe; the history is reset when that happens.
/// Returns the (possibly new) generator and whether it was replaced.
pub fn maybe_reinit(
    g_b: &Generator,
    history: &mut ProbeHistory,
    arch: &Architecture,
    seed: u64,
) -> Result<(Generator, bool), AdversaryError> {
    if !history.both_equal() {
        return Ok((g_b.clone(), false));
    }
    let dims = g_b.net.layer_dims().to_vec();
    let net = DenseNet::init(&dims, arch.leaky_slope, OutputActivation::Tanh, seed)?;
    history.reset();
    Ok((Generator { id: g_b.id, net }, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch() -> Architecture {
        Architecture {
            noise_dim: 4,
            generator_hidden: vec![8],
            discriminator_hidden: vec![8],
            leaky_slope: 0.2,
        }
    }

    fn zero_d(p: usize) -> Discriminator {
        Discriminator::new(DenseNet::zeroed(&[p, 8, 1], 0.2, OutputActivation::Sigmoid).unwrap())
            .unwrap()
    }

    fn constant_batch(value: f64, m: usize, p: usize) -> Vec<RawParams> {
        (0..m)
            .map(|_| RawParams::new(vec![value; p]).unwrap())
            .collect()
    }

    #[test]
    fn noise_is_reproducible() {
        let a = NoiseBatch::sample(4, 5, 77);
        let b = NoiseBatch::sample(4, 5, 77);
        assert_eq!(a, b);
        assert_ne!(a, NoiseBatch::sample(4, 5, 78));
        assert!(a.samples().iter().flatten().all(|x| x.is_finite()));
    }

    #[test]
    fn zero_generator_outputs_zero() {
        let g = Generator::new(
            GeneratorId::One,
            DenseNet::zeroed(&[4, 8, 3], 0.2, OutputActivation::Tanh).unwrap(),
        )
        .unwrap();
        let out = g.generate(&NoiseBatch::sample(3, 4, 1)).unwrap();
        assert!(out.iter().all(|r| r.as_slice() == [0.0, 0.0, 0.0]));
    }

    #[test]
    fn random_generator_stays_in_open_interval() {
        let g = Generator::init(GeneratorId::Two, &arch(), 3, 5).unwrap();
        let out = g.generate(&NoiseBatch::sample(4, 4, 9)).unwrap();
        assert_eq!(out.len(), 4);
        for r in &out {
            assert_eq!(r.len(), 3);
            assert!(r.as_slice().iter().all(|&x| x > -1.0 && x < 1.0));
        }
        assert_eq!(out, g.generate(&NoiseBatch::sample(4, 4, 9)).unwrap());
    }

    #[test]
    fn saturated_tanh_is_pulled_inside() {
        let net = DenseNet::from_parts(
            &[1, 1],
            vec![vec![1000.0]],
            vec![vec![0.0]],
            0.2,
            OutputActivation::Tanh,
        )
        .unwrap();
        let g = Generator::new(GeneratorId::One, net).unwrap();
        let r = g.propose(&[1.0]).unwrap();
        assert!(r.as_slice()[0] < 1.0);
    }

    #[test]
    fn generate_rejects_wrong_noise_dim() {
        let g = Generator::init(GeneratorId::One, &arch(), 3, 5).unwrap();
        assert!(g.generate(&NoiseBatch::sample(2, 7, 0)).is_err());
    }

    #[test]
    fn zero_discriminator_objective() {
        let d = zero_d(3);
        let better = constant_batch(0.3, 5, 3);
        let worse = constant_batch(-0.3, 5, 3);
        let value = d.objective(&better, &worse).unwrap();
        assert!((value - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((value + 1.386_294_361_119_890_6).abs() < 1e-12);
    }

    #[test]
    fn discriminator_lr_zero_is_identity() {
        let d = Discriminator::init(&arch(), 3, 4).unwrap();
        let (next, _) = d
            .update(&constant_batch(0.5, 4, 3), &constant_batch(-0.5, 4, 3), 0.0)
            .unwrap();
        assert_eq!(next, d);
    }

    #[test]
    fn discriminator_rejects_unequal_batches() {
        let d = zero_d(2);
        assert!(matches!(
            d.update(&constant_batch(0.1, 3, 2), &constant_batch(0.1, 2, 2), 0.1),
            Err(AdversaryError::BatchMismatch {
                better: 3,
                worse: 2
            })
        ));
    }

    #[test]
    fn constant_discriminator_leaves_generator_unchanged() {
        let g = Generator::init(GeneratorId::Two, &arch(), 3, 2).unwrap();
        let d = zero_d(3);
        let noise = NoiseBatch::sample(6, 4, 3);
        let (next, loss) = g.update_against(&d, &noise, 0.5).unwrap();
        assert_eq!(next, g);
        assert!((loss - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn generator_update_leaves_discriminator_untouched() {
        let g = Generator::init(GeneratorId::Two, &arch(), 3, 2).unwrap();
        let d = Discriminator::init(&arch(), 3, 8).unwrap();
        let before = d.clone();
        let _ = g
            .update_against(&d, &NoiseBatch::sample(6, 4, 3), 0.1)
            .unwrap();
        assert_eq!(d, before);
    }

    #[test]
    fn reinit_rule() {
        let a = arch();
        let g = Generator::init(GeneratorId::Two, &a, 3, 2).unwrap();

        let mut history = ProbeHistory::new(false, true);
        let (same, fired) = maybe_reinit(&g, &mut history, &a, 10).unwrap();
        assert!(!fired);
        assert_eq!(same, g);
        assert_eq!(history.as_pair(), (false, true));

        let mut history = ProbeHistory::new(true, true);
        let (fresh, fired) = maybe_reinit(&g, &mut history, &a, 10).unwrap();
        assert!(fired);
        assert_ne!(fresh.net().parameters(), g.net().parameters());
        assert_eq!(fresh.net().layer_dims(), g.net().layer_dims());
        assert_eq!(fresh.id(), GeneratorId::Two);
        assert_eq!(history.as_pair(), (false, false));
    }

    #[test]
    fn history_push_shifts() {
        let mut h = ProbeHistory::default();
        h.push(true);
        assert!(!h.both_equal());
        h.push(true);
        assert!(h.both_equal());
        h.push(false);
        assert_eq!(h.as_pair(), (true, false));
    }
}
