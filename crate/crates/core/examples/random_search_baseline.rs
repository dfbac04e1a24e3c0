//! Uniform random search on each synthetic objective.

use advrefine::bench::random_search;
use advrefine::evaluation::{SyntheticEvaluator, SyntheticObjective};

fn main() {
    for objective in SyntheticObjective::all() {
        let space = objective.native_space();
        let mut evaluator = SyntheticEvaluator::new(objective, space.clone());
        let out = random_search(&space, &mut evaluator, 500, 1).unwrap();
        println!(
            "{:<9} best {:.4} at {} (optimum {:.4})",
            objective.name(),
            out.best.accuracy,
            out.best.params,
            objective.optimum().accuracy
        );
    }
}
