//! Run configuration documents and run manifests.
//!
//! A run config is a TOML document with three tables:
//!
//! ```toml
//! [refine]
//! m = 8
//! max_iterations = 50
//! eval_budget = 800
//! seed = 42                       # optional
//!
//! [evaluator]
//! kind = "synthetic"
//! name = "ridge"
//!
//! [[space.slots]]
//! name = "fc1_units"
//! kind = "integer"
//! min = 1
//! max = 4000
//! ```
//!
//! A manifest is the same document with the seed resolved and an extra
//! `[manifest]` table, so it can be fed back to `run --config` unchanged.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::Architecture;
use crate::evaluation::{EvalError, EvaluatorSpec};
use crate::param_space::{DecodedParams, ParamSpace, SpaceDoc, SpaceError};
use crate::refine::{Candidate, RefineConfig, RefineError};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seeds must fit a TOML integer.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read '{path}': {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Evaluator(#[from] EvalError),
    #[error("seed {0} exceeds the maximum of {MAX_SEED}")]
    SeedTooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineSection {
    #[serde(default = "defaults::m")]
    pub m: usize,
    pub max_iterations: usize,
    pub eval_budget: u64,
    #[serde(default = "defaults::lr")]
    pub lr_d: f64,
    #[serde(default = "defaults::lr")]
    pub lr_g: f64,
    #[serde(default = "defaults::noise_dim")]
    pub noise_dim: usize,
    #[serde(default = "defaults::generator_hidden")]
    pub generator_hidden: Vec<usize>,
    #[serde(default = "defaults::discriminator_hidden")]
    pub discriminator_hidden: Vec<usize>,
    #[serde(default = "defaults::leaky_slope")]
    pub leaky_slope: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

mod defaults {
    use crate::adversary::Architecture;

    pub fn m() -> usize {
        8
    }
    pub fn lr() -> f64 {
        0.01
    }
    pub fn noise_dim() -> usize {
        Architecture::default().noise_dim
    }
    pub fn generator_hidden() -> Vec<usize> {
        Architecture::default().generator_hidden
    }
    pub fn discriminator_hidden() -> Vec<usize> {
        Architecture::default().discriminator_hidden
    }
    pub fn leaky_slope() -> f64 {
        Architecture::default().leaky_slope
    }
}

impl RefineSection {
    /// Refine settings with the given root seed.
    pub fn to_refine_config(&self, seed: u64) -> RefineConfig {
        RefineConfig {
            m: self.m,
            max_iterations: self.max_iterations,
            eval_budget: self.eval_budget,
            lr_d: self.lr_d,
            lr_g: self.lr_g,
            seed,
            arch: Architecture {
                noise_dim: self.noise_dim,
                generator_hidden: self.generator_hidden.clone(),
                discriminator_hidden: self.discriminator_hidden.clone(),
                leaky_slope: self.leaky_slope,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub refine: RefineSection,
    pub evaluator: EvaluatorSpec,
    pub space: ParamSpace,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub iterations: Option<usize>,
    pub m: Option<usize>,
    pub objective: Option<String>,
    pub evaluator_cmd: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    refine: RefineSection,
    evaluator: EvaluatorSpec,
    space: SpaceDoc,
    #[serde(default)]
    #[allow(dead_code)]
    manifest: Option<toml::Table>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let doc: RunDoc = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let space = ParamSpace::from_doc(doc.space, Some(text))?;
        let config = Self {
            refine: doc.refine,
            evaluator: doc.evaluator,
            space,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.refine.to_refine_config(0).validate()?;
        self.evaluator.validate()?;
        if let Some(seed) = self.refine.seed {
            if seed > MAX_SEED {
                return Err(ConfigError::SeedTooLarge(seed));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(seed) = o.seed {
            self.refine.seed = Some(seed);
        }
        if let Some(b) = o.budget {
            self.refine.eval_budget = b;
        }
        if let Some(i) = o.iterations {
            self.refine.max_iterations = i;
        }
        if let Some(m) = o.m {
            self.refine.m = m;
        }
        if let Some(name) = &o.objective {
            self.evaluator = EvaluatorSpec::synthetic(name.clone());
        }
        if let Some(cmd) = &o.evaluator_cmd {
            self.evaluator = match &self.evaluator {
                EvaluatorSpec::External {
                    early_stop_c,
                    workers,
                    timeout_secs,
                    cache,
                    ..
                } => EvaluatorSpec::External {
                    command: cmd.clone(),
                    early_stop_c: *early_stop_c,
                    workers: *workers,
                    timeout_secs: *timeout_secs,
                    cache: *cache,
                },
                EvaluatorSpec::Synthetic { .. } => EvaluatorSpec::external(cmd.clone()),
            };
        }
        self.validate()
    }

    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            refine: &'a RefineSection,
            evaluator: &'a EvaluatorSpec,
            space: crate::param_space::SpaceDocOut,
        }
        toml::to_string(&Out {
            refine: &self.refine,
            evaluator: &self.evaluator,
            space: self.space.to_doc(),
        })
        .expect("run config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Cli,
    Config,
    Entropy,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Config with `refine.seed` resolved.
    pub config: RunConfig,
    pub root_seed: u64,
    pub seed_source: SeedSource,
    pub engine_version: String,
    pub iterations_csv: String,
    pub best: String,
    pub checkpoints: String,
}

#[derive(Serialize)]
struct ManifestTable<'a> {
    engine_version: &'a str,
    root_seed: u64,
    seed_source: SeedSource,
    iterations_csv: &'a str,
    best: &'a str,
    checkpoints: &'a str,
}

impl RunManifest {
    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Tail<'a> {
            manifest: ManifestTable<'a>,
        }
        let mut text = self.config.to_toml_string();
        text.push('\n');
        text.push_str(
            &toml::to_string(&Tail {
                manifest: ManifestTable {
                    engine_version: &self.engine_version,
                    root_seed: self.root_seed,
                    seed_source: self.seed_source,
                    iterations_csv: &self.iterations_csv,
                    best: &self.best,
                    checkpoints: &self.checkpoints,
                },
            })
            .expect("manifest serializes"),
        );
        text
    }
}

/// The best candidate as a standalone document.
pub fn best_document(space: &ParamSpace, best: Option<&Candidate>) -> String {
    #[derive(Serialize)]
    struct SlotValue {
        name: String,
        value: i64,
        label: String,
    }
    #[derive(Serialize)]
    struct Doc {
        found: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        accuracy: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        params: Option<DecodedParams>,
        slots: Vec<SlotValue>,
    }
    let doc = match best {
        None => Doc {
            found: false,
            accuracy: None,
            params: None,
            slots: vec![],
        },
        Some(c) => Doc {
            found: true,
            accuracy: Some(c.accuracy),
            params: Some(c.params.clone()),
            slots: space
                .slots()
                .iter()
                .zip(c.params.as_slice())
                .map(|(s, &v)| SlotValue {
                    name: s.name().to_string(),
                    value: v,
                    label: s.label(v),
                })
                .collect(),
        },
    };
    toml::to_string(&doc).expect("best document serializes")
}
