//! Refine over a space read from TOML, scored by a plain closure.

use advrefine::evaluation::FnEvaluator;
use advrefine::param_space::ParamSpace;
use advrefine::refine::{self, RefineConfig};

const SPACE: &str = r#"
[[space.slots]]
name = "layers"
kind = "integer"
min = 1
max = 8

[[space.slots]]
name = "width"
kind = "integer"
min = 16
max = 512

[[space.slots]]
name = "optimizer"
kind = "categorical"
choices = ["sgd", "adam", "rmsprop"]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = ParamSpace::from_toml_str(SPACE)?;
    // pretend 4 layers of 256 units with adam is ideal
    let evaluator = FnEvaluator::new(|p: &advrefine::DecodedParams| {
        let v = p.as_slice();
        let layers = (v[0] as f64 - 4.0).abs() / 7.0;
        let width = (v[1] as f64 - 256.0).abs() / 496.0;
        let opt = if v[2] == 1 { 0.0 } else { 0.2 };
        (1.0 - 0.4 * layers - 0.4 * width - opt).clamp(0.0, 1.0)
    });
    let config = RefineConfig {
        m: 6,
        max_iterations: 60,
        eval_budget: 720,
        seed: 3,
        ..RefineConfig::default()
    };
    let out = refine::run(config, space.clone(), evaluator)?;
    let best = out.best.expect("ran at least once");
    println!(
        "best {:.4} after {} evaluations",
        best.accuracy, out.evaluations
    );
    for (name, value) in space.describe(&best.params) {
        println!("  {name} = {value}");
    }
    Ok(())
}
