//! Refine on the synthetic ridge objective over several seeds and compare
//! each run's best accuracy with the exhaustive optimum.
//!
//! cargo run --example refine_ridge -- [seeds] [budget] [m]

use advrefine::evaluation::{SyntheticEvaluator, SyntheticObjective};
use advrefine::refine::{self, RefineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let seeds = args.first().copied().unwrap_or(10);
    let budget = args.get(1).copied().unwrap_or(500);
    let m = args.get(2).copied().unwrap_or(8) as usize;

    let objective = SyntheticObjective::Ridge;
    let space = objective.native_space();
    let optimum = objective.optimum();
    println!(
        "ridge over {} configurations, optimum {:.6} at {:?}",
        space.total_configurations(),
        optimum.accuracy,
        optimum.argmax
    );

    let mut close = 0;
    for seed in 0..seeds {
        let config = RefineConfig {
            m,
            max_iterations: usize::MAX,
            eval_budget: budget,
            seed,
            ..RefineConfig::default()
        };
        let outcome = refine::run(
            config,
            space.clone(),
            SyntheticEvaluator::new(objective, space.clone()),
        )?;
        let best = outcome.best.expect("at least one iteration");
        let gap = optimum.accuracy - best.accuracy;
        if gap <= 0.05 {
            close += 1;
        }
        let reinits = outcome.log.iter().filter(|r| r.reinit_fired).count();
        println!(
            "seed {seed:>2}: best {:.6} at {} gap {gap:.4} ({} iterations, {} evaluations, {reinits} reinits)",
            best.accuracy,
            best.params,
            outcome.log.len(),
            outcome.evaluations
        );
    }
    println!("{close}/{seeds} seeds within 0.05 of the optimum");
    Ok(())
}
