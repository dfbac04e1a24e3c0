//! Evaluators turn a decoded parameter assignment into an accuracy in `[0, 1]`.
//!
//! Two families ship: pure synthetic objectives (see [`synthetic`]) and
//! external worker processes speaking line-delimited JSON (see [`external`]).

pub mod external;
pub mod synthetic;

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::param_space::{DecodedParams, ParamSpace};

pub use external::{ExternalEvaluator, ExternalOptions};
pub use synthetic::{SyntheticEvaluator, SyntheticObjective};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown synthetic objective '{name}' (available: {})", synthetic::NAMES.join(", "))]
    UnknownObjective { name: String },
    #[error("invalid evaluator spec: {0}")]
    InvalidSpec(String),
    #[error("params {params} are not valid for the evaluator's space")]
    InvalidParams { params: DecodedParams },
    #[error("accuracy {accuracy} outside [0, 1]{}", exchange_suffix(.exchange))]
    ProtocolViolation {
        accuracy: f64,
        exchange: Vec<String>,
    },
    #[error("worker error: {message}{}", exchange_suffix(.exchange))]
    Worker {
        message: String,
        exchange: Vec<String>,
    },
    #[error("worker reported failure for request {id}: {message}")]
    WorkerReported { id: u64, message: String },
    #[error("cannot average an empty list of scores")]
    EmptyScores,
}

fn exchange_suffix(exchange: &[String]) -> String {
    if exchange.is_empty() {
        String::new()
    } else {
        format!(" [exchange: {}]", exchange.join(" | "))
    }
}

/// One scored candidate. `cost` is 1 per synthetic call and wall-clock
/// seconds for external calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub accuracy: f64,
    pub cost: f64,
    pub params: DecodedParams,
}

pub trait Evaluator {
    /// Score every candidate; output order matches input order.
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError>;

    fn evaluate(&mut self, params: &DecodedParams) -> Result<Score, EvalError> {
        let mut scores = self.evaluate_batch(std::slice::from_ref(params))?;
        Ok(scores.pop().expect("one score per candidate"))
    }

    /// Number of candidates scored so far, cache hits included.
    fn calls(&self) -> u64;
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        (**self).evaluate_batch(batch)
    }

    fn calls(&self) -> u64 {
        (**self).calls()
    }
}

/// `(1/m) * sum_j acc_j`.
pub fn mean_accuracy(scores: &[Score]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    Ok(scores.iter().map(|s| s.accuracy).sum::<f64>() / scores.len() as f64)
}

/// How to build an evaluator for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvaluatorSpec {
    Synthetic {
        name: String,
    },
    External {
        command: String,
        #[serde(default = "default_early_stop_c")]
        early_stop_c: u32,
        #[serde(default = "default_workers")]
        workers: usize,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
        #[serde(default)]
        cache: bool,
    },
}

fn default_early_stop_c() -> u32 {
    5
}

fn default_workers() -> usize {
    1
}

fn default_timeout_secs() -> u64 {
    3600
}

impl EvaluatorSpec {
    pub fn synthetic(name: impl Into<String>) -> Self {
        EvaluatorSpec::Synthetic { name: name.into() }
    }

    pub fn external(command: impl Into<String>) -> Self {
        EvaluatorSpec::External {
            command: command.into(),
            early_stop_c: default_early_stop_c(),
            workers: default_workers(),
            timeout_secs: default_timeout_secs(),
            cache: false,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        match self {
            EvaluatorSpec::Synthetic { name } => {
                SyntheticObjective::from_name(name)?;
            }
            EvaluatorSpec::External {
                command,
                early_stop_c,
                workers,
                timeout_secs,
                ..
            } => {
                if command.trim().is_empty() {
                    return Err(EvalError::InvalidSpec("external command is empty".into()));
                }
                if *early_stop_c < 1 {
                    return Err(EvalError::InvalidSpec(
                        "early_stop_c must be at least 1".into(),
                    ));
                }
                if *workers < 1 {
                    return Err(EvalError::InvalidSpec("workers must be at least 1".into()));
                }
                if *timeout_secs < 1 {
                    return Err(EvalError::InvalidSpec(
                        "timeout_secs must be at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Instantiate over `space`. External specs spawn their workers here.
    pub fn build(&self, space: &ParamSpace) -> Result<Box<dyn Evaluator + Send>, EvalError> {
        self.validate()?;
        match self {
            EvaluatorSpec::Synthetic { name } => {
                let objective = SyntheticObjective::from_name(name)?;
                Ok(Box::new(SyntheticEvaluator::new(objective, space.clone())))
            }
            EvaluatorSpec::External {
                command,
                early_stop_c,
                workers,
                timeout_secs,
                cache,
            } => {
                let options = ExternalOptions {
                    early_stop_c: *early_stop_c,
                    workers: *workers,
                    timeout: Duration::from_secs(*timeout_secs),
                };
                let evaluator = ExternalEvaluator::spawn(command, space.clone(), options)?;
                if *cache {
                    Ok(Box::new(Cached::new(evaluator)))
                } else {
                    Ok(Box::new(evaluator))
                }
            }
        }
    }
}

/// Memoizes scores by params. Cache hits still count as calls.
pub struct Cached<E> {
    inner: E,
    cache: HashMap<DecodedParams, Score>,
    calls: u64,
}

impl<E: Evaluator> Cached<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            cache: HashMap::new(),
            calls: 0,
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Evaluator> Evaluator for Cached<E> {
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        let mut missing: Vec<DecodedParams> = batch
            .iter()
            .filter(|p| !self.cache.contains_key(*p))
            .cloned()
            .collect();
        missing.sort();
        missing.dedup();
        if !missing.is_empty() {
            for score in self.inner.evaluate_batch(&missing)? {
                self.cache.insert(score.params.clone(), score);
            }
        }
        self.calls += batch.len() as u64;
        Ok(batch.iter().map(|p| self.cache[p].clone()).collect())
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Returns the same accuracy for every candidate.
#[derive(Debug, Clone)]
pub struct ConstantEvaluator {
    accuracy: f64,
    calls: u64,
    batch_sizes: Vec<usize>,
}

impl ConstantEvaluator {
    pub fn new(accuracy: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&accuracy),
            "accuracy must lie in [0, 1]"
        );
        Self {
            accuracy,
            calls: 0,
            batch_sizes: Vec::new(),
        }
    }

    /// Size of every batch seen, in call order.
    pub fn batch_sizes(&self) -> &[usize] {
        &self.batch_sizes
    }
}

impl Evaluator for ConstantEvaluator {
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        self.calls += batch.len() as u64;
        self.batch_sizes.push(batch.len());
        Ok(batch
            .iter()
            .map(|p| Score {
                accuracy: self.accuracy,
                cost: 1.0,
                params: p.clone(),
            })
            .collect())
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Wraps a closure. Results outside `[0, 1]` are reported as errors, not clamped.
pub struct FnEvaluator<F> {
    f: F,
    calls: u64,
}

impl<F> FnEvaluator<F>
where
    F: FnMut(&DecodedParams) -> f64,
{
    pub fn new(f: F) -> Self {
        Self { f, calls: 0 }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: FnMut(&DecodedParams) -> f64,
{
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        let mut out = Vec::with_capacity(batch.len());
        for p in batch {
            let accuracy = (self.f)(p);
            if !(0.0..=1.0).contains(&accuracy) {
                return Err(EvalError::ProtocolViolation {
                    accuracy,
                    exchange: vec![],
                });
            }
            self.calls += 1;
            out.push(Score {
                accuracy,
                cost: 1.0,
                params: p.clone(),
            });
        }
        Ok(out)
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}
