//! Built-in sanity checks: finite-difference gradient checks, rescaling
//! properties on the reference layouts, and one tiny refinement run.

use std::time::Instant;

use rand::Rng;

use crate::adversary::{Architecture, Discriminator, Generator, GeneratorId, NoiseBatch};
use crate::evaluation::{SyntheticEvaluator, SyntheticObjective};
use crate::param_space::{layouts, OPEN_UNIT_MAX};
use crate::refine::{self, RefineConfig};
use crate::seed;
use crate::tinynet::{DenseNet, OutputActivation};

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Perturb one analytic gradient coordinate before comparing.
    Gradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

const FD_STEP: f64 = 1e-5;
const GRAD_TOLERANCE: f64 = 1e-4;

/// `|a - b| / max(|a|, |b|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Largest per-coordinate relative error between backprop and central
/// differences for `L = sum_k c_k * y_k` on one random input.
pub fn max_gradient_error(net: &DenseNet, seed: u64, fault: Fault) -> f64 {
    let mut rng = seed::rng(seed);
    let x: Vec<f64> = (0..net.input_dim())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let c: Vec<f64> = (0..net.output_dim())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let loss = |n: &DenseNet| -> f64 {
        n.predict(&x)
            .unwrap()
            .iter()
            .zip(&c)
            .map(|(y, ci)| y * ci)
            .sum()
    };
    let (_, tape) = net.forward(&x).unwrap();
    let (grads, _) = net.backward(&tape, &c).unwrap();
    let mut analytic = grads.flatten();
    if fault == Fault::Gradient {
        analytic[0] = analytic[0] * 1.01 + 1e-3;
    }
    let params = net.parameters();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = params.clone();
        plus[i] += FD_STEP;
        let mut minus = params.clone();
        minus[i] -= FD_STEP;
        let numeric = (loss(&net.with_parameters(&plus).unwrap())
            - loss(&net.with_parameters(&minus).unwrap()))
            / (2.0 * FD_STEP);
        worst = worst.max(relative_error(a, numeric));
    }
    worst
}

fn random_small_net(rng: &mut impl Rng, output: OutputActivation, seed: u64) -> DenseNet {
    let layers = rng.random_range(1..=3);
    let mut dims = vec![rng.random_range(1..=4)];
    for _ in 0..layers {
        dims.push(rng.random_range(1..=4));
    }
    let net = DenseNet::init(&dims, 0.2, output, seed).unwrap();
    // non-zero biases so every path is exercised
    let params: Vec<f64> = net
        .parameters()
        .iter()
        .map(|&p| {
            if p == 0.0 {
                rng.random_range(-0.5..0.5)
            } else {
                p
            }
        })
        .collect();
    net.with_parameters(&params).unwrap()
}

fn gradient_check(output: OutputActivation, fault: Fault) -> Result<String, String> {
    let mut rng = seed::rng(0x5e1f_7e57);
    let mut worst: f64 = 0.0;
    for k in 0..25 {
        let net = random_small_net(&mut rng, output, k);
        worst = worst.max(max_gradient_error(&net, 1000 + k, fault));
    }
    let detail = format!("25 nets, max relative error {worst:.2e}");
    if worst < GRAD_TOLERANCE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chained_gradient_check(fault: Fault) -> Result<String, String> {
    let arch = Architecture {
        noise_dim: 3,
        generator_hidden: vec![4],
        discriminator_hidden: vec![4],
        leaky_slope: 0.2,
    };
    let g = Generator::init(GeneratorId::Two, &arch, 2, 21).map_err(|e| e.to_string())?;
    let d = Discriminator::init(&arch, 2, 22).map_err(|e| e.to_string())?;
    let noise = NoiseBatch::sample(3, 3, 23);
    // the update with lr = 1 moves every parameter by exactly -grad
    let (moved, _) = g
        .update_against(&d, &noise, 1.0)
        .map_err(|e| e.to_string())?;
    let base = g.net().parameters();
    let mut analytic: Vec<f64> = base
        .iter()
        .zip(moved.net().parameters())
        .map(|(p, q)| p - q)
        .collect();
    if fault == Fault::Gradient {
        analytic[0] = analytic[0] * 1.01 + 1e-3;
    }
    let loss = |params: &[f64]| {
        let net = g.net().with_parameters(params).unwrap();
        let g = Generator::new(GeneratorId::Two, net).unwrap();
        g.adversarial_loss(&d, &noise).unwrap()
    };
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = base.clone();
        plus[i] += FD_STEP;
        let mut minus = base.clone();
        minus[i] -= FD_STEP;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(a, numeric));
    }
    let detail = format!(
        "{} generator parameters, max relative error {worst:.2e}",
        base.len()
    );
    if worst < GRAD_TOLERANCE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rescale_bounds_check() -> Result<String, String> {
    let mut rng = seed::rng(0xb0_0d5);
    let mut n = 0;
    for (name, space) in layouts::all() {
        let upper = space.rescale(&vec![OPEN_UNIT_MAX; space.len()]).unwrap();
        let lower = space.rescale(&vec![-OPEN_UNIT_MAX; space.len()]).unwrap();
        for (j, slot) in space.slots().iter().enumerate() {
            let (lo, hi) = slot.decoded_bounds();
            if upper.as_slice()[j] != hi || lower.as_slice()[j] != lo {
                return Err(format!(
                    "{name}: slot {} misses its bounds at the limits",
                    slot.name()
                ));
            }
        }
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..space.len())
                .map(|_| rng.random_range(-OPEN_UNIT_MAX..OPEN_UNIT_MAX))
                .collect();
            let decoded = space.rescale(&raw).map_err(|e| e.to_string())?;
            if space.decoded(decoded.as_slice().to_vec()).is_err() {
                return Err(format!("{name}: decoded {decoded} out of bounds"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} random vectors over 3 layouts"))
}

fn rescale_monotone_check() -> Result<String, String> {
    for (name, space) in layouts::all() {
        for slot in space.slots() {
            let mut prev = i64::MIN;
            for k in 0..=2000 {
                let raw = (-1.0 + k as f64 / 1000.0).clamp(-OPEN_UNIT_MAX, OPEN_UNIT_MAX);
                let v = slot.decode(raw);
                if v < prev {
                    return Err(format!(
                        "{name}: slot {} decreases at raw {raw}",
                        slot.name()
                    ));
                }
                prev = v;
            }
        }
    }
    Ok("all slots nondecreasing on a 2001-point sweep".into())
}

fn end_to_end_check() -> Result<String, String> {
    let objective = SyntheticObjective::Ridge;
    let space = objective.native_space();
    let config = RefineConfig {
        m: 4,
        max_iterations: 20,
        eval_budget: 160,
        seed: 7,
        ..RefineConfig::default()
    };
    let run = || {
        refine::run(
            config.clone(),
            space.clone(),
            SyntheticEvaluator::new(objective, space.clone()),
        )
    };
    let a = run().map_err(|e| e.to_string())?;
    let b = run().map_err(|e| e.to_string())?;
    if a.log != b.log {
        return Err("two runs with the same seed diverged".into());
    }
    if a.log
        .windows(2)
        .any(|w| w[1].best.accuracy < w[0].best.accuracy)
    {
        return Err("best-so-far decreased".into());
    }
    let best = a.best.ok_or("no candidate")?;
    Ok(format!(
        "{} iterations, {} evaluations, best {:.4}",
        a.log.len(),
        a.evaluations,
        best.accuracy
    ))
}

/// Run every check in order.
pub fn run_checks(fault: Fault) -> Vec<CheckResult> {
    type Check = Box<dyn Fn() -> Result<String, String>>;
    let checks: Vec<(&'static str, Check)> = vec![
        (
            "gradient check (tanh output)",
            Box::new(move || gradient_check(OutputActivation::Tanh, fault)),
        ),
        (
            "gradient check (sigmoid output)",
            Box::new(move || gradient_check(OutputActivation::Sigmoid, fault)),
        ),
        (
            "chained gradient (discriminator into generator)",
            Box::new(move || chained_gradient_check(fault)),
        ),
        (
            "rescale bounds on reference layouts",
            Box::new(rescale_bounds_check),
        ),
        (
            "rescale monotone per slot",
            Box::new(rescale_monotone_check),
        ),
        ("end-to-end refinement (ridge)", Box::new(end_to_end_check)),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_checks_pass() {
        let results = run_checks(Fault::None);
        assert_eq!(results.len(), 6);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn injected_gradient_fault_is_caught() {
        let results = run_checks(Fault::Gradient);
        let failed: Vec<_> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect();
        assert!(failed.contains(&"gradient check (tanh output)"));
        assert!(failed.contains(&"chained gradient (discriminator into generator)"));
    }
}
