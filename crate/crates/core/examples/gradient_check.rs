//! Compare backprop with central differences on a small network.

use advrefine::tinynet::{DenseNet, OutputActivation};

fn main() {
    let net = DenseNet::init(&[3, 5, 4, 2], 0.2, OutputActivation::Sigmoid, 42).unwrap();
    let x = [0.3, -0.7, 0.1];
    let weights = [1.0, -0.5];
    let loss = |n: &DenseNet| -> f64 {
        n.predict(&x)
            .unwrap()
            .iter()
            .zip(weights)
            .map(|(y, w)| y * w)
            .sum()
    };

    let (y, tape) = net.forward(&x).unwrap();
    let analytic = net.backward(&tape, &weights).unwrap().0.flatten();
    let params = net.parameters();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut plus = params.clone();
        plus[i] += h;
        let mut minus = params.clone();
        minus[i] -= h;
        let numeric = (loss(&net.with_parameters(&plus).unwrap())
            - loss(&net.with_parameters(&minus).unwrap()))
            / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    println!("output {y:?}");
    println!(
        "{} parameters, max relative error {worst:.2e}",
        params.len()
    );
}
