//! Searchable parameter spaces and the mapping from generator output space
//! `(-1, 1)^P` to concrete parameter assignments.
//!
//! A generator emits one tanh-bounded real per slot. [`ParamSpace::rescale`]
//! maps each component affinely onto `[pm_min, pm_max]` and then either
//! rounds (integer slots) or bins (categorical and boolean slots):
//!
//! ```text
//! v = raw * (pm_max - pm_min) / 2 + (pm_max + pm_min) / 2
//! integer:      round half away from zero, clamp to [pm_min, pm_max]
//! categorical:  index = floor(K * (v - pm_min) / (pm_max - pm_min)), clamp to [0, K-1]
//! ```
//!
//! Categorical cardinality always comes from the declared choice list, so a
//! four-way activation slot declared over `[0, 4]` and one declared over
//! `[0, 1]` both bin into four equal-width cells.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Activation choices in their fixed index order.
pub const ACTIVATIONS: [&str; 4] = ["Sigmoid", "Relu", "Linear", "Tanh"];

/// Labels for a boolean slot, index 0 then index 1.
pub const BOOLEAN_LABELS: [&str; 2] = ["false", "true"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("parameter space must contain at least one slot")]
    Empty,
    #[error("{}slot '{slot}': {reason}", line_prefix(*.line))]
    Slot {
        slot: String,
        line: Option<usize>,
        reason: String,
    },
    #[error("expected {expected} components, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("component {index} = {value} lies outside the open interval (-1, 1)")]
    OutOfDomain { index: usize, value: f64 },
    #[error("value {value} is not valid for slot '{slot}'")]
    InvalidValue { slot: String, value: i64 },
    #[error("config: {0}")]
    Config(String),
}

fn line_prefix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

impl SpaceError {
    fn slot(slot: &str, reason: impl Into<String>) -> Self {
        SpaceError::Slot {
            slot: slot.to_string(),
            line: None,
            reason: reason.into(),
        }
    }

    fn at_line(self, line: Option<usize>) -> Self {
        match self {
            SpaceError::Slot { slot, reason, .. } => SpaceError::Slot { slot, line, reason },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlotKind {
    IntegerRange,
    Categorical { choices: Vec<String> },
    Boolean,
}

/// One searchable parameter with its preset bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSlot {
    name: String,
    kind: SlotKind,
    pm_min: f64,
    pm_max: f64,
}

impl ParamSlot {
    pub fn integer(name: impl Into<String>, min: i64, max: i64) -> Result<Self, SpaceError> {
        Self::new(name.into(), SlotKind::IntegerRange, min as f64, max as f64)
    }

    /// Categorical slot over `[0, K]`.
    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        choices: impl IntoIterator<Item = S>,
    ) -> Result<Self, SpaceError> {
        let choices: Vec<String> = choices.into_iter().map(Into::into).collect();
        let k = choices.len() as f64;
        Self::new(name.into(), SlotKind::Categorical { choices }, 0.0, k)
    }

    pub fn categorical_with_range<S: Into<String>>(
        name: impl Into<String>,
        choices: impl IntoIterator<Item = S>,
        pm_min: f64,
        pm_max: f64,
    ) -> Result<Self, SpaceError> {
        let choices = choices.into_iter().map(Into::into).collect();
        Self::new(
            name.into(),
            SlotKind::Categorical { choices },
            pm_min,
            pm_max,
        )
    }

    /// Boolean flag over `[0, 1]`.
    pub fn boolean(name: impl Into<String>) -> Result<Self, SpaceError> {
        Self::new(name.into(), SlotKind::Boolean, 0.0, 1.0)
    }

    pub fn boolean_with_range(
        name: impl Into<String>,
        pm_min: f64,
        pm_max: f64,
    ) -> Result<Self, SpaceError> {
        Self::new(name.into(), SlotKind::Boolean, pm_min, pm_max)
    }

    /// Activation slot with the four standard choices over `[pm_min, pm_max]`.
    pub fn activation(
        name: impl Into<String>,
        pm_min: f64,
        pm_max: f64,
    ) -> Result<Self, SpaceError> {
        Self::categorical_with_range(name, ACTIVATIONS, pm_min, pm_max)
    }

    fn new(name: String, kind: SlotKind, pm_min: f64, pm_max: f64) -> Result<Self, SpaceError> {
        if name.trim().is_empty() {
            return Err(SpaceError::slot(&name, "name must not be empty"));
        }
        if !pm_min.is_finite() || !pm_max.is_finite() {
            return Err(SpaceError::slot(&name, "bounds must be finite"));
        }
        if pm_max <= pm_min {
            return Err(SpaceError::slot(
                &name,
                format!("max ({pm_max}) must exceed min ({pm_min})"),
            ));
        }
        match &kind {
            SlotKind::IntegerRange => {
                if pm_min.fract() != 0.0 || pm_max.fract() != 0.0 {
                    return Err(SpaceError::slot(
                        &name,
                        "integer slot bounds must be integers",
                    ));
                }
                if pm_min.abs() > 2f64.powi(52) || pm_max.abs() > 2f64.powi(52) {
                    return Err(SpaceError::slot(&name, "integer slot bounds exceed 2^52"));
                }
            }
            SlotKind::Categorical { choices } => {
                if choices.len() < 2 {
                    return Err(SpaceError::slot(
                        &name,
                        "categorical slot needs at least 2 choices",
                    ));
                }
                let unique: HashSet<&String> = choices.iter().collect();
                if unique.len() != choices.len() {
                    return Err(SpaceError::slot(
                        &name,
                        "categorical choices must be distinct",
                    ));
                }
            }
            SlotKind::Boolean => {}
        }
        Ok(Self {
            name,
            kind,
            pm_min,
            pm_max,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SlotKind {
        &self.kind
    }

    pub fn pm_min(&self) -> f64 {
        self.pm_min
    }

    pub fn pm_max(&self) -> f64 {
        self.pm_max
    }

    /// Number of choices for categorical/boolean slots, `None` for integers.
    pub fn choice_count(&self) -> Option<usize> {
        match &self.kind {
            SlotKind::IntegerRange => None,
            SlotKind::Categorical { choices } => Some(choices.len()),
            SlotKind::Boolean => Some(2),
        }
    }

    /// Smallest and largest decoded value.
    pub fn decoded_bounds(&self) -> (i64, i64) {
        match self.choice_count() {
            None => (self.pm_min as i64, self.pm_max as i64),
            Some(k) => (0, k as i64 - 1),
        }
    }

    /// Number of distinct decoded values.
    pub fn cardinality(&self) -> u64 {
        let (lo, hi) = self.decoded_bounds();
        (hi - lo) as u64 + 1
    }

    pub fn contains(&self, value: i64) -> bool {
        let (lo, hi) = self.decoded_bounds();
        (lo..=hi).contains(&value)
    }

    /// Affine part of the rescaling: `(-1, 1)` onto `(pm_min, pm_max)`.
    pub fn affine(&self, raw: f64) -> f64 {
        raw * (self.pm_max - self.pm_min) / 2.0 + (self.pm_max + self.pm_min) / 2.0
    }

    /// Decode one tanh-space component. The caller guarantees `raw` is finite.
    pub fn decode(&self, raw: f64) -> i64 {
        let v = self.affine(raw);
        match self.choice_count() {
            None => {
                let lo = self.pm_min;
                let hi = self.pm_max;
                // f64::round rounds half away from zero.
                v.round().clamp(lo, hi) as i64
            }
            Some(k) => {
                let position = (v - self.pm_min) / (self.pm_max - self.pm_min);
                let bin = (position * k as f64).floor();
                bin.clamp(0.0, (k - 1) as f64) as i64
            }
        }
    }

    /// Human-readable form of a decoded value.
    pub fn label(&self, value: i64) -> String {
        match &self.kind {
            SlotKind::IntegerRange => value.to_string(),
            SlotKind::Categorical { choices } => choices
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| value.to_string()),
            SlotKind::Boolean => BOOLEAN_LABELS
                .get(value as usize)
                .map(|s| s.to_string())
                .unwrap_or_else(|| value.to_string()),
        }
    }

    /// Draw a decoded value uniformly over the slot's range or choices.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let (lo, hi) = self.decoded_bounds();
        rng.random_range(lo..=hi)
    }
}

/// Ordered list of slots. `len()` is the generator output dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpace {
    slots: Vec<ParamSlot>,
}

/// Generator output in tanh space, every component strictly inside `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams(Vec<f64>);

impl RawParams {
    pub fn new(values: Vec<f64>) -> Result<Self, SpaceError> {
        check_open_interval(&values)?;
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Largest `f64` strictly below 1.
pub const OPEN_UNIT_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Pull a tanh output that rounded onto `±1.0` back inside the open interval.
pub fn to_open_interval(x: f64) -> f64 {
    x.clamp(-OPEN_UNIT_MAX, OPEN_UNIT_MAX)
}

fn check_open_interval(values: &[f64]) -> Result<(), SpaceError> {
    for (index, &value) in values.iter().enumerate() {
        if !(value > -1.0 && value < 1.0) {
            return Err(SpaceError::OutOfDomain { index, value });
        }
    }
    Ok(())
}

/// A concrete assignment: integers for integer slots, choice indices otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecodedParams(Vec<i64>);

impl DecodedParams {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DecodedParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl ParamSpace {
    pub fn new(slots: Vec<ParamSlot>) -> Result<Self, SpaceError> {
        if slots.is_empty() {
            return Err(SpaceError::Empty);
        }
        let mut seen = HashSet::new();
        for slot in &slots {
            if !seen.insert(slot.name.as_str()) {
                return Err(SpaceError::slot(&slot.name, "duplicate slot name"));
            }
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> &[ParamSlot] {
        &self.slots
    }

    /// Number of slots, `P`.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn pm_min(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.pm_min).collect()
    }

    pub fn pm_max(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.pm_max).collect()
    }

    /// Total number of distinct decoded assignments (saturating).
    pub fn total_configurations(&self) -> u64 {
        self.slots
            .iter()
            .fold(1u64, |acc, s| acc.saturating_mul(s.cardinality()))
    }

    /// Map a tanh-space vector onto a concrete assignment.
    pub fn rescale(&self, raw: &[f64]) -> Result<DecodedParams, SpaceError> {
        if raw.len() != self.len() {
            return Err(SpaceError::LengthMismatch {
                expected: self.len(),
                got: raw.len(),
            });
        }
        check_open_interval(raw)?;
        Ok(DecodedParams(
            self.slots
                .iter()
                .zip(raw)
                .map(|(s, &r)| s.decode(r))
                .collect(),
        ))
    }

    /// Validate a decoded vector built outside `rescale`.
    pub fn decoded(&self, values: Vec<i64>) -> Result<DecodedParams, SpaceError> {
        if values.len() != self.len() {
            return Err(SpaceError::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        for (slot, &v) in self.slots.iter().zip(&values) {
            if !slot.contains(v) {
                return Err(SpaceError::InvalidValue {
                    slot: slot.name.clone(),
                    value: v,
                });
            }
        }
        Ok(DecodedParams(values))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> DecodedParams {
        DecodedParams(self.slots.iter().map(|s| s.sample_uniform(rng)).collect())
    }

    /// `name=label` pairs for display.
    pub fn describe(&self, params: &DecodedParams) -> Vec<(String, String)> {
        self.slots
            .iter()
            .zip(params.as_slice())
            .map(|(s, &v)| (s.name.clone(), s.label(v)))
            .collect()
    }

    /// Parse the `space` table of a structured config document.
    pub fn from_toml_str(text: &str) -> Result<Self, SpaceError> {
        #[derive(Deserialize)]
        struct Doc {
            space: Option<SpaceDoc>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| SpaceError::Config(e.to_string()))?;
        let space = doc
            .space
            .ok_or_else(|| SpaceError::Config("missing [space] table".into()))?;
        Self::from_doc(space, Some(text))
    }

    pub(crate) fn from_doc(doc: SpaceDoc, text: Option<&str>) -> Result<Self, SpaceError> {
        let mut slots = Vec::with_capacity(doc.slots.len());
        let mut seen = HashSet::new();
        for spanned in doc.slots {
            let line = text.map(|t| line_of(t, spanned.span().start));
            let slot = spanned.into_inner();
            if !seen.insert(slot.name.clone()) {
                return Err(SpaceError::slot(&slot.name, "duplicate slot name").at_line(line));
            }
            slots.push(slot.into_slot().map_err(|e| e.at_line(line))?);
        }
        Self::new(slots)
    }

    pub(crate) fn to_doc(&self) -> SpaceDocOut {
        SpaceDocOut {
            slots: self.slots.iter().map(SlotDoc::from_slot).collect(),
        }
    }

    /// Serialize as a standalone `[space]` document.
    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc {
            space: SpaceDocOut,
        }
        toml::to_string(&Doc {
            space: self.to_doc(),
        })
        .expect("space serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    let offset = offset.min(text.len());
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SpaceDoc {
    slots: Vec<toml::Spanned<SlotDoc>>,
}

#[derive(Debug, Serialize)]
pub(crate) struct SpaceDocOut {
    slots: Vec<SlotDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Integer,
    Categorical,
    Boolean,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotDoc {
    name: String,
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    choices: Option<Vec<String>>,
}

impl SlotDoc {
    fn into_slot(self) -> Result<ParamSlot, SpaceError> {
        let name = self.name;
        match self.kind {
            KindDoc::Integer => {
                if self.choices.is_some() {
                    return Err(SpaceError::slot(&name, "integer slot takes no choices"));
                }
                let (Some(min), Some(max)) = (self.min, self.max) else {
                    return Err(SpaceError::slot(&name, "integer slot requires min and max"));
                };
                ParamSlot::new(name, SlotKind::IntegerRange, min, max)
            }
            KindDoc::Categorical => {
                let Some(choices) = self.choices else {
                    return Err(SpaceError::slot(&name, "categorical slot requires choices"));
                };
                let k = choices.len() as f64;
                let min = self.min.unwrap_or(0.0);
                let max = self.max.unwrap_or(k);
                ParamSlot::new(name, SlotKind::Categorical { choices }, min, max)
            }
            KindDoc::Boolean => {
                if self.choices.is_some() {
                    return Err(SpaceError::slot(&name, "boolean slot takes no choices"));
                }
                let min = self.min.unwrap_or(0.0);
                let max = self.max.unwrap_or(1.0);
                ParamSlot::new(name, SlotKind::Boolean, min, max)
            }
        }
    }

    fn from_slot(slot: &ParamSlot) -> Self {
        let (kind, choices) = match &slot.kind {
            SlotKind::IntegerRange => (KindDoc::Integer, None),
            SlotKind::Categorical { choices } => (KindDoc::Categorical, Some(choices.clone())),
            SlotKind::Boolean => (KindDoc::Boolean, None),
        };
        Self {
            name: slot.name.clone(),
            kind,
            min: Some(slot.pm_min),
            max: Some(slot.pm_max),
            choices,
        }
    }
}

/// The three reference layouts shipped as config fixtures under `configs/`.
pub mod layouts {
    use super::{ParamSlot, ParamSpace};

    /// 3D CNN shape classifier: two dense widths, six activations, dropout.
    pub fn modelnet40() -> ParamSpace {
        let mut slots = vec![
            ParamSlot::integer("fc1_units", 1, 4000).unwrap(),
            ParamSlot::integer("fc2_units", 1, 4000).unwrap(),
        ];
        for i in 1..=6 {
            slots.push(ParamSlot::activation(format!("activation_{i}"), 0.0, 4.0).unwrap());
        }
        slots.push(ParamSlot::boolean_with_range("dropout", 0.0, 1.0).unwrap());
        ParamSpace::new(slots).unwrap()
    }

    /// LSTM activity classifier: two dense and two recurrent widths, four
    /// activations declared over `[0, 1]`, dropout.
    pub fn uci_har() -> ParamSpace {
        let slots = vec![
            ParamSlot::integer("fc1_units", 10, 4000).unwrap(),
            ParamSlot::integer("fc2_units", 10, 4000).unwrap(),
            ParamSlot::integer("lstm1_units", 10, 2000).unwrap(),
            ParamSlot::integer("lstm2_units", 10, 2000).unwrap(),
            ParamSlot::activation("fc1_activation", 0.0, 1.0).unwrap(),
            ParamSlot::activation("fc2_activation", 0.0, 1.0).unwrap(),
            ParamSlot::activation("lstm1_activation", 0.0, 1.0).unwrap(),
            ParamSlot::activation("lstm2_activation", 0.0, 1.0).unwrap(),
            ParamSlot::boolean_with_range("dropout", 0.0, 1.0).unwrap(),
        ];
        ParamSpace::new(slots).unwrap()
    }

    /// Character CNN: two dense widths, four activations, dropout.
    pub fn chars74k() -> ParamSpace {
        let mut slots = vec![
            ParamSlot::integer("fc1_units", 10, 4000).unwrap(),
            ParamSlot::integer("fc2_units", 10, 4000).unwrap(),
        ];
        for i in 1..=4 {
            slots.push(ParamSlot::activation(format!("activation_{i}"), 0.0, 4.0).unwrap());
        }
        slots.push(ParamSlot::boolean_with_range("dropout", 0.0, 1.0).unwrap());
        ParamSpace::new(slots).unwrap()
    }

    /// All three layouts with their fixture names.
    pub fn all() -> [(&'static str, ParamSpace); 3] {
        [
            ("modelnet40", modelnet40()),
            ("uci_har", uci_har()),
            ("chars74k", chars74k()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(slot: ParamSlot) -> ParamSpace {
        ParamSpace::new(vec![slot]).unwrap()
    }

    #[test]
    fn integer_limits_and_midpoint() {
        let space = single(ParamSlot::integer("units", 1, 4000).unwrap());
        assert_eq!(space.rescale(&[OPEN_UNIT_MAX]).unwrap().as_slice(), &[4000]);
        assert_eq!(space.rescale(&[-OPEN_UNIT_MAX]).unwrap().as_slice(), &[1]);
        // 2000.5 rounds away from zero
        assert_eq!(space.rescale(&[0.0]).unwrap().as_slice(), &[2001]);
    }

    #[test]
    fn categorical_binning() {
        let space = single(ParamSlot::activation("act", 0.0, 4.0).unwrap());
        let decoded = space.rescale(&[0.2]).unwrap();
        assert_eq!(decoded.as_slice(), &[2]);
        assert_eq!(space.slots()[0].label(2), "Linear");
        assert_eq!(space.rescale(&[OPEN_UNIT_MAX]).unwrap().as_slice(), &[3]);
        assert_eq!(space.rescale(&[-OPEN_UNIT_MAX]).unwrap().as_slice(), &[0]);
    }

    #[test]
    fn narrow_categorical_range_uses_declared_cardinality() {
        let space = single(ParamSlot::activation("act", 0.0, 1.0).unwrap());
        // v = 0.6 -> position 0.6 -> bin 2
        assert_eq!(space.rescale(&[0.2]).unwrap().as_slice(), &[2]);
        assert_eq!(space.rescale(&[-0.9]).unwrap().as_slice(), &[0]);
        assert_eq!(space.rescale(&[0.9]).unwrap().as_slice(), &[3]);
    }

    #[test]
    fn boolean_threshold_at_midpoint() {
        let space = single(ParamSlot::boolean("dropout").unwrap());
        assert_eq!(space.rescale(&[-0.01]).unwrap().as_slice(), &[0]);
        assert_eq!(space.rescale(&[0.0]).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn rescale_rejects_bad_input() {
        let space = single(ParamSlot::integer("units", 1, 10).unwrap());
        assert!(matches!(
            space.rescale(&[0.0, 0.0]),
            Err(SpaceError::LengthMismatch {
                expected: 1,
                got: 2
            })
        ));
        assert!(matches!(
            space.rescale(&[1.0]),
            Err(SpaceError::OutOfDomain { .. })
        ));
        assert!(matches!(
            space.rescale(&[-1.0]),
            Err(SpaceError::OutOfDomain { .. })
        ));
        assert!(matches!(
            space.rescale(&[f64::NAN]),
            Err(SpaceError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn slot_invariants() {
        assert!(ParamSlot::integer("a", 5, 5).is_err());
        assert!(ParamSlot::integer("a", 6, 5).is_err());
        assert!(ParamSlot::categorical("c", ["only"]).is_err());
        assert!(ParamSlot::categorical("c", ["x", "x"]).is_err());
        let dup = ParamSpace::new(vec![
            ParamSlot::integer("a", 0, 1).unwrap(),
            ParamSlot::boolean("a").unwrap(),
        ]);
        assert!(matches!(dup, Err(SpaceError::Slot { .. })));
        assert_eq!(ParamSpace::new(vec![]), Err(SpaceError::Empty));
    }

    #[test]
    fn reference_layout_bounds() {
        let m = layouts::modelnet40();
        assert_eq!(
            m.pm_max(),
            vec![4000.0, 4000.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 1.0]
        );
        assert_eq!(
            m.pm_min(),
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        let u = layouts::uci_har();
        assert_eq!(
            u.pm_max(),
            vec![4000.0, 4000.0, 2000.0, 2000.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(
            u.pm_min(),
            vec![10.0, 10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        let c = layouts::chars74k();
        assert_eq!(c.pm_max(), vec![4000.0, 4000.0, 4.0, 4.0, 4.0, 4.0, 1.0]);
        assert_eq!(c.pm_min(), vec![10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn parse_single_integer_slot() {
        let text = r#"
[[space.slots]]
name = "units"
kind = "integer"
min = 1
max = 4000
"#;
        let space = ParamSpace::from_toml_str(text).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.slots()[0].decoded_bounds(), (1, 4000));
    }

    #[test]
    fn parse_errors_name_slot_and_line() {
        let text = "[[space.slots]]\nname = \"a\"\nkind = \"integer\"\nmin = 0\nmax = 3\n\n[[space.slots]]\nname = \"b\"\nkind = \"integer\"\nmin = 3\nmax = 3\n";
        let err = ParamSpace::from_toml_str(text).unwrap_err();
        match &err {
            SpaceError::Slot { slot, line, .. } => {
                assert_eq!(slot, "b");
                assert_eq!(*line, Some(7));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("line 7"));

        let unknown =
            "[[space.slots]]\nname = \"a\"\nkind = \"integer\"\nmin = 0\nmax = 3\nstep = 2\n";
        assert!(matches!(
            ParamSpace::from_toml_str(unknown),
            Err(SpaceError::Config(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        for (_, space) in layouts::all() {
            let text = space.to_toml_string();
            assert_eq!(ParamSpace::from_toml_str(&text).unwrap(), space);
        }
    }

    #[test]
    fn decoded_validation() {
        let space = layouts::chars74k();
        assert!(space.decoded(vec![10, 4000, 0, 1, 2, 3, 1]).is_ok());
        assert!(space.decoded(vec![9, 4000, 0, 1, 2, 3, 1]).is_err());
        assert!(space.decoded(vec![10, 4000, 0, 1, 2, 4, 1]).is_err());
    }
}
