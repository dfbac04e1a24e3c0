//! Decode a few raw generator outputs onto the three reference layouts.

use advrefine::param_space::{layouts, OPEN_UNIT_MAX};

fn main() {
    let probes: [(&str, f64); 5] = [
        ("lower limit", -OPEN_UNIT_MAX),
        ("-0.5", -0.5),
        ("centre", 0.0),
        ("+0.5", 0.5),
        ("upper limit", OPEN_UNIT_MAX),
    ];
    for (name, space) in layouts::all() {
        println!(
            "{name}: {} slots, {} configurations",
            space.len(),
            space.total_configurations()
        );
        for (label, raw) in probes {
            let decoded = space.rescale(&vec![raw; space.len()]).unwrap();
            let shown: Vec<String> = space
                .describe(&decoded)
                .into_iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!("  {label:>11}: {}", shown.join(" "));
        }
    }
}
