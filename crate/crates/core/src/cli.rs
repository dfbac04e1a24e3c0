//! Command-line driver behind the `advrefine` binary.
//!
//! ```text
//! advrefine run      --config PATH [--seed INT] [--budget INT] [--iterations INT] [--m INT]
//!                    [--objective NAME] [--evaluator-cmd STRING] [--out DIR]
//! advrefine bench    --objective NAME [--budget INT] [--seeds INT] [--seed INT] [--m INT] [--out DIR]
//! advrefine selftest
//! ```
//!
//! `run` writes `manifest`, `iterations.csv`, `best.conf` and
//! `checkpoints/{g1,g2,d}.net` under `--out`. The log level comes from the
//! `ADVREFINE_LOG` environment variable.
//!
//! Exit codes: 0 success, 1 execution failure, 2 usage or config error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::bench::{self, BenchError, Method};
use crate::config::{
    best_document, ConfigError, Overrides, RunConfig, RunManifest, SeedSource, ENGINE_VERSION,
    MAX_SEED,
};
use crate::evaluation::{EvalError, SyntheticObjective};
use crate::refine::{IterationRecord, RefineConfig, Refiner};
use crate::selftest::{self, Fault};

pub const ITERATIONS_HEADER: &str = "iteration,acc1,acc2,winner,best_acc,d_loss,g_loss,reinit";

#[derive(Debug, Parser)]
#[command(
    name = "advrefine",
    version,
    about = "Adversarial hyperparameter refinement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run refinement from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Replace the evaluator with a synthetic objective.
        #[arg(long)]
        objective: Option<String>,
        /// Replace the evaluator with an external worker command.
        #[arg(long = "evaluator-cmd")]
        evaluator_cmd: Option<String>,
        #[arg(long, default_value = "advrefine-run")]
        out: PathBuf,
    },
    /// Compare refinement against random search on a synthetic objective.
    Bench {
        #[arg(long)]
        objective: String,
        #[arg(long, default_value_t = 500)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Write `bench.csv` and `manifest` here instead of printing the CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run built-in gradient, rescaling and end-to-end checks.
    Selftest {
        #[arg(long, hide = true, value_parser = ["gradient"])]
        inject_fault: Option<String>,
    },
}

/// Parse `args` (program name first), execute, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging();
    match cli.command {
        Command::Run {
            config,
            seed,
            budget,
            iterations,
            m,
            objective,
            evaluator_cmd,
            out,
        } => {
            let overrides = Overrides {
                seed,
                budget,
                iterations,
                m,
                objective,
                evaluator_cmd,
            };
            cmd_run(&config, &overrides, &out)
        }
        Command::Bench {
            objective,
            budget,
            seeds,
            seed,
            m,
            out,
        } => cmd_bench(&objective, budget, seeds, seed, m, out.as_deref()),
        Command::Selftest { inject_fault } => {
            let fault = match inject_fault.as_deref() {
                Some("gradient") => Fault::Gradient,
                _ => Fault::None,
            };
            cmd_selftest(fault)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("ADVREFINE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

fn entropy_seed() -> u64 {
    rand::random::<u64>() & MAX_SEED
}

fn check_seed(seed: Option<u64>) -> Result<(), ConfigError> {
    match seed {
        Some(s) if s > MAX_SEED => Err(ConfigError::SeedTooLarge(s)),
        _ => Ok(()),
    }
}

pub fn format_iteration_row(r: &IterationRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.iteration,
        r.acc1,
        r.acc2,
        r.winner.number(),
        r.best.accuracy,
        r.d_loss,
        r.g_loss,
        u8::from(r.reinit_fired)
    )
}

fn io_fail(path: &Path, e: std::io::Error) -> i32 {
    eprintln!("error: {}: {e}", path.display());
    1
}

pub fn cmd_run(config_path: &Path, overrides: &Overrides, out: &Path) -> i32 {
    let mut config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = check_seed(overrides.seed).and_then(|_| config.apply(overrides)) {
        eprintln!("error: {e}");
        return 2;
    }
    let (root_seed, seed_source) = match (overrides.seed, config.refine.seed) {
        (Some(s), _) => (s, SeedSource::Cli),
        (None, Some(s)) => (s, SeedSource::Config),
        (None, None) => (entropy_seed(), SeedSource::Entropy),
    };
    config.refine.seed = Some(root_seed);

    let checkpoints = out.join("checkpoints");
    if let Err(e) = fs::create_dir_all(&checkpoints) {
        return io_fail(&checkpoints, e);
    }
    let manifest = RunManifest {
        config: config.clone(),
        root_seed,
        seed_source,
        engine_version: ENGINE_VERSION.to_string(),
        iterations_csv: "iterations.csv".into(),
        best: "best.conf".into(),
        checkpoints: "checkpoints".into(),
    };
    let manifest_path = out.join("manifest");
    if let Err(e) = fs::write(&manifest_path, manifest.to_toml_string()) {
        return io_fail(&manifest_path, e);
    }

    let evaluator = match config.evaluator.build(&config.space) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: cannot start evaluator: {e}");
            return 1;
        }
    };
    let refine_config = config.refine.to_refine_config(root_seed);
    let mut refiner = match Refiner::new(refine_config, config.space.clone(), evaluator) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let csv_path = out.join("iterations.csv");
    let mut csv = match File::create(&csv_path) {
        Ok(f) => BufWriter::new(f),
        Err(e) => return io_fail(&csv_path, e),
    };
    let write_line =
        |csv: &mut BufWriter<File>, line: &str| writeln!(csv, "{line}").and_then(|_| csv.flush());
    if let Err(e) = write_line(&mut csv, ITERATIONS_HEADER) {
        return io_fail(&csv_path, e);
    }

    let started = Instant::now();
    loop {
        match refiner.step() {
            Ok(Some(record)) => {
                if let Err(e) = write_line(&mut csv, &format_iteration_row(&record)) {
                    return io_fail(&csv_path, e);
                }
            }
            Ok(None) => break,
            Err(e) => {
                eprintln!("error: {e}");
                eprintln!(
                    "{} completed iterations preserved in {}",
                    e.partial_log().len(),
                    csv_path.display()
                );
                return 1;
            }
        }
    }
    let outcome = refiner.into_outcome();

    let best_path = out.join("best.conf");
    if let Err(e) = fs::write(
        &best_path,
        best_document(&config.space, outcome.best.as_ref()),
    ) {
        return io_fail(&best_path, e);
    }
    let (g1, g2) = &outcome.generators;
    for (name, net) in [
        ("g1.net", g1.net()),
        ("g2.net", g2.net()),
        ("d.net", outcome.discriminator.net()),
    ] {
        if let Err(e) = net.save(checkpoints.join(name)) {
            eprintln!("error: {}: {e}", checkpoints.join(name).display());
            return 1;
        }
    }

    println!(
        "{} iterations, {} evaluations in {:.2?} (seed {root_seed})",
        outcome.log.len(),
        outcome.evaluations,
        started.elapsed()
    );
    match &outcome.best {
        Some(best) => {
            let described: Vec<String> = config
                .space
                .describe(&best.params)
                .into_iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!(
                "best accuracy {:.6}: {}",
                best.accuracy,
                described.join(" ")
            );
        }
        None => println!("no candidate evaluated"),
    }
    println!("artifacts in {}", out.display());
    0
}

pub fn cmd_bench(
    objective: &str,
    budget: u64,
    seeds: usize,
    seed: Option<u64>,
    m: usize,
    out: Option<&Path>,
) -> i32 {
    let objective = match SyntheticObjective::from_name(objective) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = check_seed(seed) {
        eprintln!("error: {e}");
        return 2;
    }
    let root_seed = seed.unwrap_or_else(entropy_seed);
    let template = RefineConfig {
        m,
        ..RefineConfig::default()
    };
    if m < 1 {
        eprintln!("error: --m must be at least 1");
        return 2;
    }
    let report = match bench::compare_methods(
        &Method::Adversarial(template),
        &Method::Random,
        objective,
        budget,
        seeds,
        root_seed,
    ) {
        Ok(r) => r,
        Err(BenchError::InvalidArgs(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(BenchError::Eval(EvalError::UnknownObjective { name })) => {
            eprintln!("error: unknown objective {name}");
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let csv = report.to_csv();
    match out {
        Some(dir) => {
            if let Err(e) = fs::create_dir_all(dir) {
                return io_fail(dir, e);
            }
            let manifest = format!(
                "[bench]\nobjective = \"{}\"\nbudget = {budget}\nseeds = {seeds}\nm = {m}\nroot_seed = {root_seed}\nengine_version = \"{ENGINE_VERSION}\"\nreport = \"bench.csv\"\n",
                objective.name()
            );
            for (name, body) in [("manifest", manifest.as_str()), ("bench.csv", csv.as_str())] {
                let path = dir.join(name);
                if let Err(e) = fs::write(&path, body) {
                    return io_fail(&path, e);
                }
            }
            println!("{}", report.summary_text());
            println!("report written to {}", dir.join("bench.csv").display());
        }
        None => {
            print!("{csv}");
            eprintln!("{}", report.summary_text());
        }
    }
    0
}

pub fn cmd_selftest(fault: Fault) -> i32 {
    let results = selftest::run_checks(fault);
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {} ({:.2}s): {}", r.name, r.seconds, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all {} checks passed", results.len());
        0
    } else {
        println!("{failed} of {} checks failed", results.len());
        1
    }
}
