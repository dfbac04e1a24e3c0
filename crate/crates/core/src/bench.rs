//! Budget-matched comparison of adversarial refinement against uniform
//! random search on the synthetic objectives.
//!
//! Both methods see the same per-seed root seed and the same evaluation
//! budget. Refinement consumes whole iterations of `2m` calls, so it may use
//! up to `2m - 1` fewer evaluations than random search; exact counts are
//! recorded per row.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::evaluation::{EvalError, Evaluator, Score, SyntheticEvaluator, SyntheticObjective};
use crate::param_space::ParamSpace;
use crate::refine::{Candidate, RefineConfig, RefineError, Refiner};
use crate::seed::{self, stream};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark arguments: {0}")]
    InvalidArgs(String),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: Candidate,
    /// Every scored sample, in draw order.
    pub trace: Vec<Score>,
}

const RANDOM_SEARCH_CHUNK: usize = 16;

/// `budget` i.i.d. uniform samples over the decoded space.
pub fn random_search<E: Evaluator + ?Sized>(
    space: &ParamSpace,
    evaluator: &mut E,
    budget: u64,
    seed: u64,
) -> Result<SearchOutcome, BenchError> {
    if budget < 1 {
        return Err(BenchError::InvalidArgs(
            "random search needs a budget of at least 1".into(),
        ));
    }
    let mut rng = seed::rng(seed::derive(seed, stream::RANDOM_SEARCH));
    let mut best: Option<Candidate> = None;
    let mut trace = Vec::with_capacity(budget as usize);
    let mut remaining = budget as usize;
    while remaining > 0 {
        let n = remaining.min(RANDOM_SEARCH_CHUNK);
        let batch: Vec<_> = (0..n).map(|_| space.sample_uniform(&mut rng)).collect();
        for score in evaluator.evaluate_batch(&batch)? {
            if best.as_ref().is_none_or(|b| score.accuracy > b.accuracy) {
                best = Some(Candidate {
                    params: score.params.clone(),
                    accuracy: score.accuracy,
                });
            }
            trace.push(score);
        }
        remaining -= n;
    }
    Ok(SearchOutcome {
        best: best.expect("budget >= 1"),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Refinement with this template; `seed`, `eval_budget` and
    /// `max_iterations` are set per run.
    Adversarial(RefineConfig),
    Random,
}

impl Method {
    pub fn adversarial() -> Self {
        Method::Adversarial(RefineConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Adversarial(_) => "adversarial",
            Method::Random => "random",
        }
    }

    /// Smallest budget that lets the method score anything.
    pub fn min_budget(&self) -> u64 {
        match self {
            Method::Adversarial(c) => 2 * c.m as u64,
            Method::Random => 1,
        }
    }

    pub fn run(
        &self,
        objective: SyntheticObjective,
        budget: u64,
        seed: u64,
    ) -> Result<MethodRun, BenchError> {
        let space = objective.native_space();
        let evaluator = SyntheticEvaluator::new(objective, space.clone());
        match self {
            Method::Adversarial(template) => {
                let config = RefineConfig {
                    seed,
                    eval_budget: budget,
                    max_iterations: usize::MAX,
                    ..template.clone()
                };
                let outcome = Refiner::new(config, space, evaluator)?.run()?;
                let best = outcome.best.ok_or_else(|| {
                    BenchError::InvalidArgs("refinement produced no candidate".into())
                })?;
                Ok(MethodRun {
                    best_accuracy: best.accuracy,
                    evaluations: outcome.evaluations,
                })
            }
            Method::Random => {
                let mut evaluator = evaluator;
                let outcome = random_search(&space, &mut evaluator, budget, seed)?;
                Ok(MethodRun {
                    best_accuracy: outcome.best.accuracy,
                    evaluations: evaluator.calls(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRun {
    pub best_accuracy: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub seed_index: usize,
    pub seed: u64,
    pub runs: [MethodRun; 2],
}

impl SeedRow {
    /// First method's best accuracy minus the second's.
    pub fn paired_difference(&self) -> f64 {
        self.runs[0].best_accuracy - self.runs[1].best_accuracy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
    pub evaluations_min: u64,
    pub evaluations_max: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub objective: String,
    pub budget: u64,
    pub n_seeds: usize,
    pub root_seed: u64,
    /// Set when the budget is below some method's minimum; no runs happen.
    pub degenerate: bool,
    pub methods: [String; 2],
    pub rows: Vec<SeedRow>,
    pub summaries: Vec<MethodSummary>,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub fn sample_stddev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Per-seed root seeds for a benchmark.
pub fn bench_seed(root: u64, index: usize) -> u64 {
    seed::derive_path(root, &[stream::BENCH_SEED, index as u64])
}

/// Adversarial refinement (default settings) against random search.
pub fn compare(
    objective: SyntheticObjective,
    budget: u64,
    n_seeds: usize,
    root_seed: u64,
) -> Result<BenchReport, BenchError> {
    compare_methods(
        &Method::adversarial(),
        &Method::Random,
        objective,
        budget,
        n_seeds,
        root_seed,
    )
}

pub fn compare_methods(
    first: &Method,
    second: &Method,
    objective: SyntheticObjective,
    budget: u64,
    n_seeds: usize,
    root_seed: u64,
) -> Result<BenchReport, BenchError> {
    if n_seeds < 2 {
        return Err(BenchError::InvalidArgs(format!(
            "need at least 2 seeds, got {n_seeds}"
        )));
    }
    let methods = [first.name().to_string(), second.name().to_string()];
    let degenerate = budget < first.min_budget().max(second.min_budget());
    let mut report = BenchReport {
        objective: objective.name().to_string(),
        budget,
        n_seeds,
        root_seed,
        degenerate,
        methods,
        rows: Vec::new(),
        summaries: Vec::new(),
    };
    if degenerate {
        return Ok(report);
    }

    let rows: Result<Vec<SeedRow>, BenchError> = (0..n_seeds)
        .into_par_iter()
        .map(|seed_index| {
            let seed = bench_seed(root_seed, seed_index);
            let a = first.run(objective, budget, seed)?;
            let b = second.run(objective, budget, seed)?;
            Ok(SeedRow {
                seed_index,
                seed,
                runs: [a, b],
            })
        })
        .collect();
    report.rows = rows?;
    report.summaries = (0..2)
        .map(|k| {
            let acc: Vec<f64> = report
                .rows
                .iter()
                .map(|r| r.runs[k].best_accuracy)
                .collect();
            let evals = report.rows.iter().map(|r| r.runs[k].evaluations);
            MethodSummary {
                method: report.methods[k].clone(),
                mean: mean(&acc),
                median: median(&acc),
                stddev: sample_stddev(&acc),
                evaluations_min: evals.clone().min().unwrap_or(0),
                evaluations_max: evals.max().unwrap_or(0),
            }
        })
        .collect();
    Ok(report)
}

impl BenchReport {
    /// Count of seeds where the first method beat, tied, and lost to the second.
    pub fn win_tie_loss(&self) -> (usize, usize, usize) {
        self.rows.iter().fold((0, 0, 0), |(w, t, l), r| {
            let d = r.paired_difference();
            if d > 0.0 {
                (w + 1, t, l)
            } else if d < 0.0 {
                (w, t, l + 1)
            } else {
                (w, t + 1, l)
            }
        })
    }

    /// Four blank-line separated blocks: run metadata, one row per seed per
    /// method, per-method aggregates, and per-seed paired differences.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "objective,budget,n_seeds,root_seed,degenerate");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            self.objective, self.budget, self.n_seeds, self.root_seed, self.degenerate
        );
        out.push('\n');
        let _ = writeln!(out, "method,seed_index,seed,best_accuracy,evaluations");
        for row in &self.rows {
            for (k, run) in row.runs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.methods[k], row.seed_index, row.seed, run.best_accuracy, run.evaluations
                );
            }
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "method,mean,median,stddev,evaluations_min,evaluations_max"
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.method, s.mean, s.median, s.stddev, s.evaluations_min, s.evaluations_max
            );
        }
        out.push('\n');
        let _ = writeln!(out, "seed_index,paired_difference");
        for row in &self.rows {
            let _ = writeln!(out, "{},{}", row.seed_index, row.paired_difference());
        }
        out
    }

    /// Short human-readable summary.
    pub fn summary_text(&self) -> String {
        if self.degenerate {
            return format!(
                "{}: budget {} is below the minimum for one of the methods; nothing was run",
                self.objective, self.budget
            );
        }
        let mut out = String::new();
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<12} mean {:.4}  median {:.4}  stddev {:.4}  evals {}..{}",
                s.method, s.mean, s.median, s.stddev, s.evaluations_min, s.evaluations_max
            );
        }
        let (w, t, l) = self.win_tie_loss();
        let _ = write!(
            out,
            "{} vs {}: {w} wins, {t} ties, {l} losses over {} seeds",
            self.methods[0], self.methods[1], self.n_seeds
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::ConstantEvaluator;

    #[test]
    fn stats_helpers() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((sample_stddev(&[1.0, 2.0, 3.0, 4.0]) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(sample_stddev(&[1.0]), 0.0);
    }

    #[test]
    fn random_search_budget_one() {
        let space = SyntheticObjective::Ridge.native_space();
        let mut eval = SyntheticEvaluator::new(SyntheticObjective::Ridge, space.clone());
        let out = random_search(&space, &mut eval, 1, 4).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.best.params, out.trace[0].params);
        assert_eq!(out.best.accuracy, out.trace[0].accuracy);
    }

    #[test]
    fn random_search_is_deterministic() {
        let space = SyntheticObjective::Deceptive.native_space();
        let run = || {
            let mut eval = SyntheticEvaluator::new(SyntheticObjective::Deceptive, space.clone());
            random_search(&space, &mut eval, 50, 8).unwrap().trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn random_search_rejects_zero_budget() {
        let space = SyntheticObjective::Ridge.native_space();
        let mut eval = ConstantEvaluator::new(0.5);
        assert!(random_search(&space, &mut eval, 0, 1).is_err());
    }

    #[test]
    fn degenerate_budget_is_flagged() {
        let report = compare(SyntheticObjective::Ridge, 3, 2, 0).unwrap();
        assert!(report.degenerate);
        assert!(report.rows.is_empty());
        assert!(report.to_csv().contains("ridge,3,2,0,true"));
    }

    #[test]
    fn too_few_seeds_rejected() {
        assert!(matches!(
            compare(SyntheticObjective::Ridge, 100, 1, 0),
            Err(BenchError::InvalidArgs(_))
        ));
    }

    #[test]
    fn self_comparison_has_zero_differences() {
        let m = Method::Adversarial(RefineConfig {
            m: 4,
            ..RefineConfig::default()
        });
        let report = compare_methods(&m, &m, SyntheticObjective::Plateau, 40, 3, 11).unwrap();
        assert!(report.rows.iter().all(|r| r.paired_difference() == 0.0));
        assert_eq!(report.win_tie_loss(), (0, 3, 0));
    }

    #[test]
    fn small_report_aggregates() {
        let report = compare(SyntheticObjective::Ridge, 32, 2, 5).unwrap();
        assert_eq!(report.rows.len(), 2);
        for (k, s) in report.summaries.iter().enumerate() {
            let a = report.rows[0].runs[k].best_accuracy;
            let b = report.rows[1].runs[k].best_accuracy;
            assert!((s.mean - (a + b) / 2.0).abs() < 1e-15);
            assert!((s.median - (a + b) / 2.0).abs() < 1e-15);
            assert!((s.stddev - (a - b).abs() / 2f64.sqrt()).abs() < 1e-12);
        }
        for r in &report.rows {
            assert_eq!(r.runs[0].evaluations, 32);
            assert_eq!(r.runs[1].evaluations, 32);
        }
    }
}
