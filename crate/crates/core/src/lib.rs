//! Black-box hyperparameter refinement with two competing generators.
//!
//! Two small generator networks map Gaussian noise to proposals in
//! `(-1, 1)^P`. Each proposal is rescaled onto a [`ParamSpace`] and scored
//! by an [`Evaluator`]. A discriminator learns to tell the better
//! generator's proposals from the worse one's, and its gradient is used to
//! pull the worse generator toward the better one. When both generators
//! decode to the same assignment on a fixed probe for two iterations in a
//! row, the worse one is re-initialized.
//!
//! Modules, bottom up:
//!
//! - [`param_space`]: slots, bounds, rescaling and binning, config parsing
//! - [`tinynet`]: dense networks with manual backprop and SGD
//! - [`adversary`]: generators, discriminator, update rules, re-init rule
//! - [`evaluation`]: evaluator contract, synthetic objectives, worker protocol
//! - [`refine`]: the iteration loop
//! - [`bench`]: budget-matched comparison with random search
//! - [`config`], [`cli`], [`selftest`]: run documents and the command-line driver
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod adversary;
pub mod bench;
pub mod cli;
pub mod config;
pub mod evaluation;
pub mod param_space;
pub mod refine;
pub mod seed;
pub mod selftest;
pub mod tinynet;

pub use adversary::{Architecture, Discriminator, Generator, GeneratorId, NoiseBatch};
pub use evaluation::{EvalError, Evaluator, EvaluatorSpec, Score};
pub use param_space::{DecodedParams, ParamSlot, ParamSpace, RawParams};
pub use refine::{Candidate, IterationRecord, RefineConfig, RefineOutcome, Refiner};
pub use tinynet::DenseNet;
