//! Save a network to a text checkpoint and load it back.

use advrefine::tinynet::{DenseNet, OutputActivation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = DenseNet::init(&[4, 3, 2], 0.2, OutputActivation::Tanh, 7)?;
    let dir = std::env::temp_dir().join("advrefine-checkpoint-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("net.ckpt");
    net.save(&path)?;
    let back = DenseNet::load(&path)?;
    println!("{}", std::fs::read_to_string(&path)?);
    println!("identical after reload: {}", back == net);
    Ok(())
}
