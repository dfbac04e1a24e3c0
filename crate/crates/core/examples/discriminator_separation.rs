//! Train a discriminator on two fixed batches and watch it separate them.

use advrefine::adversary::{Architecture, Discriminator};
use advrefine::param_space::RawParams;

fn main() {
    let p = 9;
    let better: Vec<RawParams> = (0..8)
        .map(|_| RawParams::new(vec![0.5; p]).unwrap())
        .collect();
    let worse: Vec<RawParams> = (0..8)
        .map(|_| RawParams::new(vec![-0.5; p]).unwrap())
        .collect();
    let mut d = Discriminator::init(&Architecture::default(), p, 3).unwrap();
    for step in 0..=200 {
        if step % 40 == 0 {
            let hi = d.probability(&better[0]).unwrap();
            let lo = d.probability(&worse[0]).unwrap();
            let objective = d.objective(&better, &worse).unwrap();
            println!("step {step:>3}: D(better)={hi:.4} D(worse)={lo:.4} objective={objective:.4}");
        }
        d = d.update(&better, &worse, 0.05).unwrap().0;
    }
}
