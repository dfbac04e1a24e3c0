//! Pure synthetic objectives standing in for trained evaluator networks.
//!
//! Each objective is defined over any [`ParamSpace`] through normalized slot
//! positions: an integer slot contributes `u = (v - min) / (max - min)` in
//! `[0, 1]`, a categorical or boolean slot contributes its choice index.
//! Integer slots and categorical slots are numbered separately, in slot
//! order, and the per-slot targets below are indexed by that ordinal.
//!
//! * `ridge`: one broad Gaussian bump over the integer slots, multiplied by
//!   `0.9` for every categorical slot not set to its preferred choice.
//! * `deceptive`: a wide local bump of height 0.7 and a narrow global bump of
//!   height 1.0, same categorical multipliers.
//! * `plateau`: flat 0.6 everywhere except a single step to 0.9 in the
//!   corner where every integer slot is in its top quarter and every
//!   categorical slot picks its last choice.
//!
//! Each objective also has a small native space whose exhaustive optimum is
//! recorded in [`OptimumFixture`].

use std::collections::HashMap;

use crate::evaluation::{EvalError, Evaluator, Score};
use crate::param_space::{DecodedParams, ParamSlot, ParamSpace, ACTIVATIONS};

pub const NAMES: [&str; 3] = ["ridge", "deceptive", "plateau"];

const RIDGE_WIDTH: f64 = 0.2;
const LOCAL_WIDTH: f64 = 0.15;
const GLOBAL_WIDTH: f64 = 0.04;
const WRONG_CHOICE: f64 = 0.9;
const GOLDEN: f64 = 0.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticObjective {
    Ridge,
    Deceptive,
    Plateau,
}

/// Exhaustively computed optimum over an objective's native space. `argmax`
/// is the first maximizer in lexicographic order of the decoded vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumFixture {
    pub accuracy: f64,
    pub argmax: &'static [i64],
}

struct Features {
    positions: Vec<f64>,
    choices: Vec<(i64, usize)>,
}

fn features(space: &ParamSpace, params: &DecodedParams) -> Features {
    let mut positions = Vec::new();
    let mut choices = Vec::new();
    for (slot, &v) in space.slots().iter().zip(params.as_slice()) {
        match slot.choice_count() {
            None => {
                let (lo, hi) = slot.decoded_bounds();
                positions.push((v - lo) as f64 / (hi - lo) as f64);
            }
            Some(k) => choices.push((v, k)),
        }
    }
    Features { positions, choices }
}

fn preferred_choice(ordinal: usize, k: usize) -> i64 {
    ((ordinal + 1) % k) as i64
}

fn choice_multiplier(choices: &[(i64, usize)]) -> f64 {
    choices
        .iter()
        .enumerate()
        .map(|(ordinal, &(v, k))| {
            if v == preferred_choice(ordinal, k) {
                1.0
            } else {
                WRONG_CHOICE
            }
        })
        .product()
}

fn ridge_target(ordinal: usize) -> f64 {
    let x = (ordinal + 1) as f64 * GOLDEN;
    0.25 + 0.5 * (x - x.floor())
}

fn bump(positions: &[f64], center: impl Fn(usize) -> f64, width: f64) -> f64 {
    let d2: f64 = positions
        .iter()
        .enumerate()
        .map(|(k, &u)| (u - center(k)).powi(2))
        .sum();
    (-d2 / (2.0 * width * width)).exp()
}

impl SyntheticObjective {
    pub fn all() -> [SyntheticObjective; 3] {
        [
            SyntheticObjective::Ridge,
            SyntheticObjective::Deceptive,
            SyntheticObjective::Plateau,
        ]
    }

    pub fn from_name(name: &str) -> Result<Self, EvalError> {
        match name {
            "ridge" => Ok(SyntheticObjective::Ridge),
            "deceptive" => Ok(SyntheticObjective::Deceptive),
            "plateau" => Ok(SyntheticObjective::Plateau),
            other => Err(EvalError::UnknownObjective {
                name: other.to_string(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SyntheticObjective::Ridge => "ridge",
            SyntheticObjective::Deceptive => "deceptive",
            SyntheticObjective::Plateau => "plateau",
        }
    }

    /// Small space used by the benchmark harness and the optimum fixtures.
    pub fn native_space(self) -> ParamSpace {
        let slots = match self {
            SyntheticObjective::Ridge => vec![
                ParamSlot::integer("units_a", 1, 20).unwrap(),
                ParamSlot::integer("units_b", 1, 20).unwrap(),
                ParamSlot::activation("activation", 0.0, 4.0).unwrap(),
                ParamSlot::boolean("dropout").unwrap(),
            ],
            SyntheticObjective::Deceptive => vec![
                ParamSlot::integer("x", 0, 40).unwrap(),
                ParamSlot::integer("y", 0, 40).unwrap(),
                ParamSlot::categorical("activation", ACTIVATIONS).unwrap(),
            ],
            SyntheticObjective::Plateau => vec![
                ParamSlot::integer("a", 0, 30).unwrap(),
                ParamSlot::integer("b", 0, 30).unwrap(),
                ParamSlot::integer("c", 0, 30).unwrap(),
                ParamSlot::boolean("flag").unwrap(),
            ],
        };
        ParamSpace::new(slots).unwrap()
    }

    /// Optimum over [`SyntheticObjective::native_space`].
    pub fn optimum(self) -> OptimumFixture {
        match self {
            SyntheticObjective::Ridge => OptimumFixture {
                accuracy: RIDGE_OPTIMUM,
                argmax: &[12, 8, 1, 0],
            },
            SyntheticObjective::Deceptive => OptimumFixture {
                accuracy: 0.950_000_000_000_000_1,
                argmax: &[32, 34, 1],
            },
            SyntheticObjective::Plateau => OptimumFixture {
                accuracy: 0.9,
                argmax: &[23, 23, 23, 1],
            },
        }
    }

    /// Accuracy in `[0, 1]`. `params` must be valid for `space`.
    pub fn value(self, space: &ParamSpace, params: &DecodedParams) -> f64 {
        let f = features(space, params);
        let raw = match self {
            SyntheticObjective::Ridge => {
                let g = if f.positions.is_empty() {
                    1.0
                } else {
                    bump(&f.positions, ridge_target, RIDGE_WIDTH)
                };
                0.3 + 0.65 * g * choice_multiplier(&f.choices)
            }
            SyntheticObjective::Deceptive => {
                let local = 0.7
                    * bump(
                        &f.positions,
                        |k| if k % 2 == 0 { 0.25 } else { 0.3 },
                        LOCAL_WIDTH,
                    );
                let global = bump(
                    &f.positions,
                    |k| if k % 2 == 0 { 0.8 } else { 0.85 },
                    GLOBAL_WIDTH,
                );
                0.05 + 0.9 * local.max(global) * choice_multiplier(&f.choices)
            }
            SyntheticObjective::Plateau => {
                let ints_high = f.positions.iter().all(|&u| u >= 0.75);
                let choices_last = f.choices.iter().all(|&(v, k)| v == k as i64 - 1);
                if ints_high && choices_last {
                    0.9
                } else {
                    0.6
                }
            }
        };
        raw.clamp(0.0, 1.0)
    }
}

// Frozen from the exhaustive enumeration in tests/synthetic_oracle.rs.
const RIDGE_OPTIMUM: f64 = 0.946_779_377_004_648_2;

/// Evaluator over one synthetic objective. Scores are cached per run.
#[derive(Debug, Clone)]
pub struct SyntheticEvaluator {
    objective: SyntheticObjective,
    space: ParamSpace,
    cache: HashMap<DecodedParams, f64>,
    calls: u64,
}

impl SyntheticEvaluator {
    pub fn new(objective: SyntheticObjective, space: ParamSpace) -> Self {
        Self {
            objective,
            space,
            cache: HashMap::new(),
            calls: 0,
        }
    }

    /// Evaluator over the objective's native space.
    pub fn native(objective: SyntheticObjective) -> Self {
        Self::new(objective, objective.native_space())
    }

    pub fn objective(&self) -> SyntheticObjective {
        self.objective
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }
}

impl Evaluator for SyntheticEvaluator {
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        for p in batch {
            if self.space.decoded(p.as_slice().to_vec()).is_err() {
                return Err(EvalError::InvalidParams { params: p.clone() });
            }
        }
        let mut out = Vec::with_capacity(batch.len());
        for p in batch {
            let accuracy = match self.cache.get(p) {
                Some(&a) => a,
                None => {
                    let a = self.objective.value(&self.space, p);
                    self.cache.insert(p.clone(), a);
                    a
                }
            };
            self.calls += 1;
            out.push(Score {
                accuracy,
                cost: 1.0,
                params: p.clone(),
            });
        }
        Ok(out)
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param_space::layouts;

    #[test]
    fn names_round_trip() {
        for obj in SyntheticObjective::all() {
            assert_eq!(SyntheticObjective::from_name(obj.name()).unwrap(), obj);
        }
        assert!(SyntheticObjective::from_name("sphere").is_err());
    }

    #[test]
    fn native_spaces_are_small() {
        for obj in SyntheticObjective::all() {
            assert!(obj.native_space().total_configurations() <= 100_000);
        }
        assert!(
            SyntheticObjective::Ridge
                .native_space()
                .total_configurations()
                <= 10_000
        );
    }

    #[test]
    fn fixture_argmax_attains_fixture_value() {
        for obj in SyntheticObjective::all() {
            let space = obj.native_space();
            let fixture = obj.optimum();
            let p = space.decoded(fixture.argmax.to_vec()).unwrap();
            assert_eq!(obj.value(&space, &p), fixture.accuracy, "{}", obj.name());
        }
    }

    #[test]
    fn works_on_reference_layouts() {
        let space = layouts::modelnet40();
        let p = space
            .decoded(vec![2000, 1500, 1, 2, 3, 0, 1, 2, 1])
            .unwrap();
        for obj in SyntheticObjective::all() {
            let v = obj.value(&space, &p);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn evaluator_is_pure_and_validates() {
        let mut e = SyntheticEvaluator::native(SyntheticObjective::Ridge);
        let space = e.space().clone();
        let p = space.decoded(vec![5, 5, 2, 1]).unwrap();
        let a = e.evaluate(&p).unwrap();
        let b = e.evaluate(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(e.calls(), 2);

        let other = SyntheticObjective::Plateau.native_space();
        let bad = other.decoded(vec![30, 30, 30, 1]).unwrap();
        assert!(matches!(
            e.evaluate(&bad),
            Err(EvalError::InvalidParams { .. })
        ));
    }
}
