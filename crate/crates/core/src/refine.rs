//! The refinement loop.
//!
//! Each iteration:
//!
//! 1. draws fresh noise batches `Z_1`, `Z_2` of size `m`;
//! 2. lets each generator propose `m` raw vectors and decodes them;
//! 3. scores all `2m` candidates in one evaluator batch;
//! 4. labels the generator with the higher mean accuracy `a`, the other `b`
//!    (ties keep the previous winner);
//! 5. takes one discriminator step with `G_a`'s batch as positives and
//!    `G_b`'s batch as negatives;
//! 6. takes one step on `G_b` through the updated discriminator;
//! 7. compares the decoded outputs of both generators on a fixed probe
//!    vector and re-initializes `G_b` after two consecutive matches;
//! 8. updates the best single candidate seen so far.
//!
//! The loop stops at `max_iterations` or when fewer than `2m` evaluations
//! remain in the budget.
//!
//! Seeds: every stream is derived from the root seed, see [`crate::seed`].
//! Generator `i` starts from `[GENERATOR_INIT, i]`, the discriminator from
//! `[DISCRIMINATOR_INIT]`, the probe from `[PROBE]`, the noise of generator
//! `i` at iteration `t` from `[ITERATION, t, i]` (sample `j` then from `j`),
//! and a re-initialization at iteration `t` from `[REINIT, t]`.

use thiserror::Error;

use crate::adversary::{
    maybe_reinit, AdversaryError, Architecture, Discriminator, Generator, GeneratorId, NoiseBatch,
    ProbeHistory,
};
use crate::evaluation::{mean_accuracy, EvalError, Evaluator, Score};
use crate::param_space::{DecodedParams, ParamSpace};
use crate::seed::{self, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    /// Noise samples (and candidates) per generator per iteration.
    pub m: usize,
    pub max_iterations: usize,
    /// Upper bound on evaluator calls for the whole run.
    pub eval_budget: u64,
    pub lr_d: f64,
    pub lr_g: f64,
    pub seed: u64,
    pub arch: Architecture,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            m: 8,
            max_iterations: 100,
            eval_budget: 1600,
            lr_d: 0.01,
            lr_g: 0.01,
            seed: 0,
            arch: Architecture::default(),
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |msg: String| Err(RefineError::Config(msg));
        if self.m < 1 {
            return bad("m must be at least 1".into());
        }
        if self.eval_budget < 2 * self.m as u64 {
            return bad(format!(
                "eval_budget ({}) must cover one iteration (2m = {})",
                self.eval_budget,
                2 * self.m
            ));
        }
        for (name, lr) in [("lr_d", self.lr_d), ("lr_g", self.lr_g)] {
            if !(lr.is_finite() && lr > 0.0) {
                return bad(format!("{name} must be positive and finite, got {lr}"));
            }
        }
        if self.arch.noise_dim < 1 {
            return bad("noise_dim must be at least 1".into());
        }
        if self.arch.generator_hidden.contains(&0) || self.arch.discriminator_hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        if !(self.arch.leaky_slope.is_finite() && self.arch.leaky_slope >= 0.0) {
            return bad("leaky_slope must be finite and non-negative".into());
        }
        Ok(())
    }

    /// Iterations the budget allows, capped by `max_iterations`.
    pub fn planned_iterations(&self) -> usize {
        let by_budget = (self.eval_budget / (2 * self.m as u64)) as usize;
        by_budget.min(self.max_iterations)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub params: DecodedParams,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub acc1: f64,
    pub acc2: f64,
    pub winner: GeneratorId,
    pub best: Candidate,
    /// Discriminator objective before its step.
    pub d_loss: f64,
    /// `G_b` loss before its step.
    pub g_loss: f64,
    pub reinit_fired: bool,
    /// Evaluator calls made so far, this iteration included.
    pub evaluations: u64,
    /// Summed score cost of this iteration's candidates.
    pub cost: f64,
}

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("invalid refine config: {0}")]
    Config(String),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("iteration {iteration} aborted: {source}")]
    Evaluation {
        iteration: usize,
        #[source]
        source: EvalError,
        partial_log: Vec<IterationRecord>,
    },
}

impl RefineError {
    /// Records of the iterations completed before the failure.
    pub fn partial_log(&self) -> &[IterationRecord] {
        match self {
            RefineError::Evaluation { partial_log, .. } => partial_log,
            _ => &[],
        }
    }
}

/// Winner label: the higher mean accuracy, or the previous winner on a tie
/// (generator 1 on the first iteration).
pub fn tie_break(acc1: f64, acc2: f64, previous: Option<GeneratorId>) -> GeneratorId {
    if acc1 > acc2 {
        GeneratorId::One
    } else if acc2 > acc1 {
        GeneratorId::Two
    } else {
        previous.unwrap_or(GeneratorId::One)
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// `None` when no iteration ran.
    pub best: Option<Candidate>,
    pub log: Vec<IterationRecord>,
    pub evaluations: u64,
    pub generators: (Generator, Generator),
    pub discriminator: Discriminator,
}

pub struct Refiner<E> {
    config: RefineConfig,
    space: ParamSpace,
    evaluator: E,
    g1: Generator,
    g2: Generator,
    d: Discriminator,
    probe: Vec<f64>,
    history: ProbeHistory,
    previous_winner: Option<GeneratorId>,
    best: Option<Candidate>,
    log: Vec<IterationRecord>,
    evaluations: u64,
}

impl<E: Evaluator> Refiner<E> {
    pub fn new(config: RefineConfig, space: ParamSpace, evaluator: E) -> Result<Self, RefineError> {
        config.validate()?;
        let root = config.seed;
        let p = space.len();
        let g1 = Generator::init(
            GeneratorId::One,
            &config.arch,
            p,
            seed::derive_path(root, &[stream::GENERATOR_INIT, 1]),
        )?;
        let g2 = Generator::init(
            GeneratorId::Two,
            &config.arch,
            p,
            seed::derive_path(root, &[stream::GENERATOR_INIT, 2]),
        )?;
        let d = Discriminator::init(
            &config.arch,
            p,
            seed::derive(root, stream::DISCRIMINATOR_INIT),
        )?;
        let probe = NoiseBatch::sample(1, config.arch.noise_dim, seed::derive(root, stream::PROBE))
            .samples()[0]
            .clone();
        Ok(Self {
            config,
            space,
            evaluator,
            g1,
            g2,
            d,
            probe,
            history: ProbeHistory::default(),
            previous_winner: None,
            best: None,
            log: Vec::new(),
            evaluations: 0,
        })
    }

    /// Replace the initial generators (same architecture required).
    pub fn with_generators(mut self, g1: Generator, g2: Generator) -> Result<Self, RefineError> {
        let expected = self.config.arch.generator_dims(self.space.len());
        for g in [&g1, &g2] {
            if g.net().layer_dims() != expected.as_slice() {
                return Err(AdversaryError::Shape(
                    "generator",
                    format!("expected {:?}, got {:?}", expected, g.net().layer_dims()),
                )
                .into());
            }
        }
        if g1.id() != GeneratorId::One || g2.id() != GeneratorId::Two {
            return Err(RefineError::Config(
                "generators must be passed as (G1, G2)".into(),
            ));
        }
        self.g1 = g1;
        self.g2 = g2;
        Ok(self)
    }

    pub fn with_discriminator(mut self, d: Discriminator) -> Result<Self, RefineError> {
        if d.net().input_dim() != self.space.len() {
            return Err(AdversaryError::Shape(
                "discriminator",
                format!("input must be {}", self.space.len()),
            )
            .into());
        }
        self.d = d;
        Ok(self)
    }

    pub fn config(&self) -> &RefineConfig {
        &self.config
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }

    pub fn generator(&self, id: GeneratorId) -> &Generator {
        match id {
            GeneratorId::One => &self.g1,
            GeneratorId::Two => &self.g2,
        }
    }

    pub fn discriminator(&self) -> &Discriminator {
        &self.d
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    pub fn log(&self) -> &[IterationRecord] {
        &self.log
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.best.as_ref()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn probe(&self) -> &[f64] {
        &self.probe
    }

    /// Whether another full iteration fits both limits.
    pub fn can_continue(&self) -> bool {
        self.log.len() < self.config.max_iterations
            && self.evaluations + 2 * self.config.m as u64 <= self.config.eval_budget
    }

    /// Run one iteration. `Ok(None)` once a limit is reached.
    pub fn step(&mut self) -> Result<Option<IterationRecord>, RefineError> {
        if !self.can_continue() {
            return Ok(None);
        }
        let t = self.log.len();
        let m = self.config.m;
        let root = self.config.seed;
        let dz = self.config.arch.noise_dim;

        let z1 = NoiseBatch::sample(
            m,
            dz,
            seed::derive_path(root, &[stream::ITERATION, t as u64, 1]),
        );
        let z2 = NoiseBatch::sample(
            m,
            dz,
            seed::derive_path(root, &[stream::ITERATION, t as u64, 2]),
        );
        let raw1 = self.g1.generate(&z1)?;
        let raw2 = self.g2.generate(&z2)?;

        let mut candidates = Vec::with_capacity(2 * m);
        for raw in raw1.iter().chain(&raw2) {
            candidates.push(
                self.space
                    .rescale(raw.as_slice())
                    .map_err(AdversaryError::from)?,
            );
        }
        let scores = match self.evaluator.evaluate_batch(&candidates) {
            Ok(s) => s,
            Err(source) => {
                return Err(RefineError::Evaluation {
                    iteration: t,
                    source,
                    partial_log: self.log.clone(),
                })
            }
        };
        self.evaluations += candidates.len() as u64;
        let eval_err = |source| RefineError::Evaluation {
            iteration: t,
            source,
            partial_log: self.log.clone(),
        };
        let acc1 = mean_accuracy(&scores[..m]).map_err(eval_err)?;
        let acc2 = mean_accuracy(&scores[m..]).map_err(eval_err)?;
        let cost: f64 = scores.iter().map(|s| s.cost).sum();

        let winner = tie_break(acc1, acc2, self.previous_winner);
        self.previous_winner = Some(winner);
        let (better, worse, worse_noise) = match winner {
            GeneratorId::One => (&raw1, &raw2, &z2),
            GeneratorId::Two => (&raw2, &raw1, &z1),
        };

        let (d, d_loss) = self.d.update(better, worse, self.config.lr_d)?;
        self.d = d;

        let loser = winner.other();
        let (g_b, g_loss) =
            self.generator(loser)
                .update_against(&self.d, worse_noise, self.config.lr_g)?;

        let decoded_a = self.generator(winner).decode(&self.probe, &self.space)?;
        let decoded_b = g_b.decode(&self.probe, &self.space)?;
        self.history.push(decoded_a == decoded_b);
        let reinit_seed = seed::derive_path(root, &[stream::REINIT, t as u64]);
        let (g_b, reinit_fired) =
            maybe_reinit(&g_b, &mut self.history, &self.config.arch, reinit_seed)?;
        if reinit_fired {
            log::info!(
                "iter {t}: generators decoded identically on the probe twice, re-initialized G{}",
                loser.number()
            );
        }
        match loser {
            GeneratorId::One => self.g1 = g_b,
            GeneratorId::Two => self.g2 = g_b,
        }

        self.update_best(&scores);
        let record = IterationRecord {
            iteration: t,
            acc1,
            acc2,
            winner,
            best: self.best.clone().expect("at least one candidate scored"),
            d_loss,
            g_loss,
            reinit_fired,
            evaluations: self.evaluations,
            cost,
        };
        log::debug!(
            "iter {t}: acc1={acc1:.4} acc2={acc2:.4} winner={} best={:.4} d_obj={d_loss:.5} g_loss={g_loss:.5}{}",
            winner.number(),
            record.best.accuracy,
            if reinit_fired { " reinit" } else { "" }
        );
        self.log.push(record.clone());
        Ok(Some(record))
    }

    fn update_best(&mut self, scores: &[Score]) {
        for s in scores {
            let improves = self.best.as_ref().is_none_or(|b| s.accuracy > b.accuracy);
            if improves {
                self.best = Some(Candidate {
                    params: s.params.clone(),
                    accuracy: s.accuracy,
                });
            }
        }
    }

    /// Run to completion, calling `on_record` after every iteration.
    pub fn run_with(
        mut self,
        mut on_record: impl FnMut(&IterationRecord),
    ) -> Result<RefineOutcome, RefineError> {
        while let Some(record) = self.step()? {
            on_record(&record);
        }
        Ok(self.into_outcome())
    }

    pub fn run(self) -> Result<RefineOutcome, RefineError> {
        self.run_with(|_| {})
    }

    pub fn into_outcome(self) -> RefineOutcome {
        RefineOutcome {
            best: self.best,
            log: self.log,
            evaluations: self.evaluations,
            generators: (self.g1, self.g2),
            discriminator: self.d,
        }
    }
}

/// Convenience wrapper around [`Refiner`].
pub fn run<E: Evaluator>(
    config: RefineConfig,
    space: ParamSpace,
    evaluator: E,
) -> Result<RefineOutcome, RefineError> {
    Refiner::new(config, space, evaluator)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{ConstantEvaluator, SyntheticEvaluator, SyntheticObjective};

    fn small_config(seed: u64) -> RefineConfig {
        RefineConfig {
            m: 4,
            max_iterations: 10,
            eval_budget: 1000,
            seed,
            arch: Architecture {
                noise_dim: 8,
                generator_hidden: vec![16],
                discriminator_hidden: vec![16],
                leaky_slope: 0.2,
            },
            ..RefineConfig::default()
        }
    }

    #[test]
    fn tie_break_cases() {
        assert_eq!(tie_break(0.7, 0.6, None), GeneratorId::One);
        assert_eq!(tie_break(0.6, 0.7, None), GeneratorId::Two);
        assert_eq!(tie_break(0.5, 0.5, None), GeneratorId::One);
        assert_eq!(
            tie_break(0.5, 0.5, Some(GeneratorId::Two)),
            GeneratorId::Two
        );
    }

    #[test]
    fn zero_iterations_yield_empty_result() {
        let config = RefineConfig {
            max_iterations: 0,
            ..small_config(1)
        };
        let space = SyntheticObjective::Ridge.native_space();
        let out = run(config, space, ConstantEvaluator::new(0.5)).unwrap();
        assert!(out.best.is_none());
        assert!(out.log.is_empty());
        assert_eq!(out.evaluations, 0);
    }

    #[test]
    fn config_validation() {
        let mut c = small_config(0);
        c.m = 0;
        assert!(c.validate().is_err());
        let mut c = small_config(0);
        c.eval_budget = 7;
        assert!(c.validate().is_err());
        let mut c = small_config(0);
        c.lr_g = 0.0;
        assert!(c.validate().is_err());
        assert!(small_config(0).validate().is_ok());
    }

    #[test]
    fn budget_stops_the_loop() {
        let config = RefineConfig {
            eval_budget: 27,
            max_iterations: 100,
            ..small_config(3)
        };
        let space = SyntheticObjective::Ridge.native_space();
        let out = run(config, space, ConstantEvaluator::new(0.5)).unwrap();
        assert_eq!(out.log.len(), 3);
        assert_eq!(out.evaluations, 24);
    }

    #[test]
    fn same_seed_same_log() {
        let space = SyntheticObjective::Ridge.native_space();
        let a = run(
            small_config(9),
            space.clone(),
            SyntheticEvaluator::new(SyntheticObjective::Ridge, space.clone()),
        )
        .unwrap();
        let b = run(
            small_config(9),
            space.clone(),
            SyntheticEvaluator::new(SyntheticObjective::Ridge, space.clone()),
        )
        .unwrap();
        assert_eq!(a.log, b.log);
        let c = run(
            small_config(10),
            space.clone(),
            SyntheticEvaluator::new(SyntheticObjective::Ridge, space),
        )
        .unwrap();
        assert_ne!(a.log, c.log);
    }

    #[test]
    fn evaluator_failure_carries_partial_log() {
        struct FailAfter(u64, u64);
        impl Evaluator for FailAfter {
            fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
                if self.1 >= self.0 {
                    return Err(EvalError::Worker {
                        message: "boom".into(),
                        exchange: vec![],
                    });
                }
                self.1 += batch.len() as u64;
                Ok(batch
                    .iter()
                    .map(|p| Score {
                        accuracy: 0.5,
                        cost: 1.0,
                        params: p.clone(),
                    })
                    .collect())
            }
            fn calls(&self) -> u64 {
                self.1
            }
        }
        let space = SyntheticObjective::Ridge.native_space();
        let err = run(small_config(2), space, FailAfter(16, 0)).unwrap_err();
        assert_eq!(err.partial_log().len(), 2);
        assert!(matches!(err, RefineError::Evaluation { iteration: 2, .. }));
    }
}
