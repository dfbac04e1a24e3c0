//! Backprop against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use advrefine::adversary::{Architecture, Discriminator, Generator, GeneratorId, NoiseBatch};
use advrefine::tinynet::{DenseNet, OutputActivation};

const H: f64 = 1e-5;

fn rel(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn central(f: impl Fn(&[f64]) -> f64, at: &[f64]) -> Vec<f64> {
    (0..at.len())
        .map(|i| {
            let mut plus = at.to_vec();
            plus[i] += H;
            let mut minus = at.to_vec();
            minus[i] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

fn random_net(rng: &mut ChaCha8Rng, output: OutputActivation, seed: u64) -> DenseNet {
    let layers = rng.random_range(1..=3);
    let dims: Vec<usize> = (0..=layers).map(|_| rng.random_range(1..=8)).collect();
    let net = DenseNet::init(&dims, 0.2, output, seed).unwrap();
    let params: Vec<f64> = net
        .parameters()
        .iter()
        .map(|p| p + rng.random_range(-0.3..0.3))
        .collect();
    net.with_parameters(&params).unwrap()
}

#[test]
fn parameter_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..50 {
        for output in [OutputActivation::Tanh, OutputActivation::Sigmoid] {
            let net = random_net(&mut rng, output, k);
            let x: Vec<f64> = (0..net.input_dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let c: Vec<f64> = (0..net.output_dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let loss = |p: &[f64]| -> f64 {
                let y = net.with_parameters(p).unwrap().predict(&x).unwrap();
                y.iter().zip(&c).map(|(a, b)| a * b).sum()
            };
            let (_, tape) = net.forward(&x).unwrap();
            let analytic = net.backward(&tape, &c).unwrap().0.flatten();
            let numeric = central(loss, &net.parameters());
            for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
                assert!(
                    rel(*a, *n) < 1e-4,
                    "net {k} dims {:?} coord {i}: {a} vs {n}",
                    net.layer_dims()
                );
            }
        }
    }
}

#[test]
fn input_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for k in 0..20 {
        let net = random_net(&mut rng, OutputActivation::Sigmoid, k);
        let x: Vec<f64> = (0..net.input_dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let c: Vec<f64> = (0..net.output_dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let loss = |x: &[f64]| -> f64 {
            net.predict(x)
                .unwrap()
                .iter()
                .zip(&c)
                .map(|(a, b)| a * b)
                .sum()
        };
        let (_, tape) = net.forward(&x).unwrap();
        let (_, analytic) = net.backward(&tape, &c).unwrap();
        for (a, n) in analytic.iter().zip(central(loss, &x)) {
            assert!(rel(*a, n) < 1e-4, "{a} vs {n}");
        }
    }
}

#[test]
fn chained_generator_gradient_matches_finite_differences() {
    let arch = Architecture {
        noise_dim: 3,
        generator_hidden: vec![5, 4],
        discriminator_hidden: vec![4],
        leaky_slope: 0.2,
    };
    for seed in 0..5 {
        let g = Generator::init(GeneratorId::Two, &arch, 3, 100 + seed).unwrap();
        let d = Discriminator::init(&arch, 3, 200 + seed).unwrap();
        let noise = NoiseBatch::sample(4, 3, 300 + seed);
        let base = g.net().parameters();
        // one step with lr = 1 subtracts exactly the gradient
        let (stepped, _) = g.update_against(&d, &noise, 1.0).unwrap();
        let analytic: Vec<f64> = base
            .iter()
            .zip(stepped.net().parameters())
            .map(|(a, b)| a - b)
            .collect();
        let loss = |p: &[f64]| {
            let moved =
                Generator::new(GeneratorId::Two, g.net().with_parameters(p).unwrap()).unwrap();
            moved.adversarial_loss(&d, &noise).unwrap()
        };
        for (i, (a, n)) in analytic.iter().zip(central(loss, &base)).enumerate() {
            assert!(rel(*a, n) < 1e-4, "seed {seed} coord {i}: {a} vs {n}");
        }
    }
}

#[test]
fn discriminator_gradient_matches_finite_differences() {
    let arch = Architecture {
        noise_dim: 3,
        generator_hidden: vec![4],
        discriminator_hidden: vec![5, 3],
        leaky_slope: 0.2,
    };
    let d = Discriminator::init(&arch, 4, 9).unwrap();
    let ga = Generator::init(GeneratorId::One, &arch, 4, 1).unwrap();
    let gb = Generator::init(GeneratorId::Two, &arch, 4, 2).unwrap();
    let better = ga.generate(&NoiseBatch::sample(3, 3, 5)).unwrap();
    let worse = gb.generate(&NoiseBatch::sample(3, 3, 6)).unwrap();
    let base = d.net().parameters();
    let (stepped, _) = d.update(&better, &worse, 1.0).unwrap();
    // the update descends the negated objective
    let analytic: Vec<f64> = base
        .iter()
        .zip(stepped.net().parameters())
        .map(|(a, b)| b - a)
        .collect();
    let objective = |p: &[f64]| {
        let moved = Discriminator::new(d.net().with_parameters(p).unwrap()).unwrap();
        moved.objective(&better, &worse).unwrap()
    };
    for (a, n) in analytic.iter().zip(central(objective, &base)) {
        assert!(rel(*a, n) < 1e-4, "{a} vs {n}");
    }
}
