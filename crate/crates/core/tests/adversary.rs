use advrefine::adversary::{Architecture, Discriminator, Generator, GeneratorId, NoiseBatch};
use advrefine::param_space::RawParams;
use advrefine::tinynet::{DenseNet, OutputActivation};

fn arch() -> Architecture {
    Architecture {
        noise_dim: 6,
        generator_hidden: vec![16, 16],
        discriminator_hidden: vec![16, 8],
        leaky_slope: 0.2,
    }
}

fn constant_batch(value: f64, p: usize, m: usize) -> Vec<RawParams> {
    (0..m)
        .map(|_| RawParams::new(vec![value; p]).unwrap())
        .collect()
}

fn mean_probability(d: &Discriminator, batch: &[RawParams]) -> f64 {
    batch.iter().map(|x| d.probability(x).unwrap()).sum::<f64>() / batch.len() as f64
}

#[test]
fn zero_discriminator_objective_is_two_log_half() {
    let dims = arch().discriminator_dims(4);
    let d = Discriminator::new(DenseNet::zeroed(&dims, 0.2, OutputActivation::Sigmoid).unwrap())
        .unwrap();
    let a = constant_batch(0.3, 4, 5);
    let b = constant_batch(-0.7, 4, 5);
    let objective = d.objective(&a, &b).unwrap();
    assert!((objective - 2.0 * 0.5f64.ln()).abs() < 1e-12);
    assert!((objective + 1.3863).abs() < 1e-4);
}

#[test]
fn zero_discriminator_leaves_generator_unchanged() {
    let a = arch();
    let d = Discriminator::new(
        DenseNet::zeroed(&a.discriminator_dims(3), 0.2, OutputActivation::Sigmoid).unwrap(),
    )
    .unwrap();
    let g = Generator::init(GeneratorId::Two, &a, 3, 4).unwrap();
    let (moved, _) = g
        .update_against(&d, &NoiseBatch::sample(8, a.noise_dim, 1), 0.5)
        .unwrap();
    assert_eq!(moved, g);
}

#[test]
fn discriminator_separates_fixed_batches() {
    let p = 5;
    let better = constant_batch(0.5, p, 8);
    let worse = constant_batch(-0.5, p, 8);
    let mut d = Discriminator::init(&Architecture::default(), p, 12).unwrap();
    for _ in 0..200 {
        d = d.update(&better, &worse, 0.05).unwrap().0;
    }
    assert!(mean_probability(&d, &better) > 0.9);
    assert!(mean_probability(&d, &worse) < 0.1);
}

#[test]
fn generator_climbs_a_trained_discriminator() {
    let a = arch();
    let p = 3;
    let mut d = Discriminator::init(&a, p, 7).unwrap();
    let better = constant_batch(0.6, p, 8);
    let worse = constant_batch(-0.6, p, 8);
    for _ in 0..300 {
        d = d.update(&better, &worse, 0.05).unwrap().0;
    }
    let mut g = Generator::init(GeneratorId::Two, &a, p, 8).unwrap();
    let noise = NoiseBatch::sample(8, a.noise_dim, 9);
    let start = mean_probability(&d, &g.generate(&noise).unwrap());
    for _ in 0..150 {
        g = g.update_against(&d, &noise, 0.01).unwrap().0;
    }
    let end = mean_probability(&d, &g.generate(&noise).unwrap());
    assert!(end > start, "{start} -> {end}");
}
