use std::path::Path;

use advrefine::config::RunConfig;
use advrefine::param_space::{layouts, ParamSpace};

fn load(name: &str) -> RunConfig {
    RunConfig::load(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name),
    )
    .unwrap()
}

#[test]
fn shipped_layout_configs_equal_the_built_in_layouts() {
    assert_eq!(load("modelnet40.toml").space, layouts::modelnet40());
    assert_eq!(load("uci_har.toml").space, layouts::uci_har());
    assert_eq!(load("chars74k.toml").space, layouts::chars74k());
}

#[test]
fn layout_bounds() {
    let cases: [(ParamSpace, Vec<f64>, Vec<f64>); 3] = [
        (
            layouts::modelnet40(),
            vec![4000., 4000., 4., 4., 4., 4., 4., 4., 1.],
            vec![1., 1., 0., 0., 0., 0., 0., 0., 0.],
        ),
        (
            layouts::uci_har(),
            vec![4000., 4000., 2000., 2000., 1., 1., 1., 1., 1.],
            vec![10., 10., 10., 10., 0., 0., 0., 0., 0.],
        ),
        (
            layouts::chars74k(),
            vec![4000., 4000., 4., 4., 4., 4., 1.],
            vec![10., 10., 0., 0., 0., 0., 0.],
        ),
    ];
    for (space, max, min) in cases {
        assert_eq!(space.pm_max(), max);
        assert_eq!(space.pm_min(), min);
    }
}

#[test]
fn ridge_config_uses_the_native_space() {
    let c = load("ridge.toml");
    assert_eq!(
        c.space,
        advrefine::evaluation::SyntheticObjective::Ridge.native_space()
    );
}
