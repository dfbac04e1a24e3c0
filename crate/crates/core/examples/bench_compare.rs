//! Budget-matched comparison of refinement and random search.
//!
//! cargo run --release --example bench_compare -- [objective] [budget] [seeds]

use advrefine::bench;
use advrefine::evaluation::SyntheticObjective;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let objective =
        SyntheticObjective::from_name(args.first().map_or("deceptive", String::as_str))?;
    let budget = args.get(1).map_or(Ok(500), |s| s.parse())?;
    let seeds = args.get(2).map_or(Ok(10), |s| s.parse())?;

    let report = bench::compare(objective, budget, seeds, 2024)?;
    for row in &report.rows {
        println!(
            "seed {:>2}: {} {:.4} ({} evals)  {} {:.4} ({} evals)",
            row.seed_index,
            report.methods[0],
            row.runs[0].best_accuracy,
            row.runs[0].evaluations,
            report.methods[1],
            row.runs[1].best_accuracy,
            row.runs[1].evaluations
        );
    }
    println!("{}", report.summary_text());
    let (w, t, l) = report.win_tie_loss();
    println!("wins/ties/losses for {}: {w}/{t}/{l}", report.methods[0]);
    Ok(())
}
