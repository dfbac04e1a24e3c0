//! Drive refinement with an external worker process over the line protocol.
//!
//! cargo run --example external_worker -- ["worker command"]

use std::path::Path;

use advrefine::evaluation::{ExternalEvaluator, ExternalOptions};
use advrefine::param_space::{ParamSlot, ParamSpace};
use advrefine::refine::{self, RefineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let default = format!(
        "python3 {}",
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("examples/workers/toy_worker.py")
            .display()
    );
    let command = std::env::args().nth(1).unwrap_or(default);
    let space = ParamSpace::new(vec![
        ParamSlot::integer("units_a", 1, 40)?,
        ParamSlot::integer("units_b", 1, 40)?,
        ParamSlot::boolean("dropout")?,
    ])?;
    let options = ExternalOptions {
        workers: 2,
        ..ExternalOptions::default()
    };
    let evaluator = ExternalEvaluator::spawn(&command, space.clone(), options)?;
    let config = RefineConfig {
        m: 4,
        max_iterations: 25,
        eval_budget: 200,
        seed: 1,
        ..RefineConfig::default()
    };
    let out = refine::run(config, space, evaluator)?;
    let best = out.best.expect("ran at least once");
    println!(
        "{} evaluations via '{command}', best {:.4} at {}",
        out.evaluations, best.accuracy, best.params
    );
    Ok(())
}
