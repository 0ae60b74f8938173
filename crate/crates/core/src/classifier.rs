//! Comparison of threads against per-category type models.
//!
//! A model weights script slots and individual cue rules. A thread's score
//! against a model is the weighted share of the model's features the thread
//! exhibits; every label scoring at least `tau_assign` is assigned, and a
//! thread whose best score stays below `tau_unclassifiable` goes to the
//! exception queue.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::{PresenceVector, ThreadAnnotation};
use crate::fraction::{self, Fraction};
use crate::lexicon::{Lexicon, SlotType};

pub const DEFAULT_TAU_ASSIGN: f64 = 0.5;
pub const DEFAULT_TAU_UNCLASSIFIABLE: f64 = 0.3;

named_enum! {
    /// Social-support request categories.
    pub enum SupportLabel {
        EmotionalSupport,
        ExperienceSharing,
        EvaluationRequest,
        InformationalSupport,
        Advice,
        TangibleSupport,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no model for {}", .0.iter().map(|l| l.name()).collect::<Vec<_>>().join(", "))]
    IncompleteModels(Vec<SupportLabel>),
    #[error("more than one model for {0}")]
    DuplicateLabel(SupportLabel),
    #[error("model {label}: invalid weight for `{key}`: {reason}")]
    InvalidWeight {
        label: SupportLabel,
        key: String,
        reason: String,
    },
    #[error("model {label}: unknown {kind} `{name}`")]
    InvalidReference {
        label: SupportLabel,
        kind: &'static str,
        name: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("invalid thresholds: need 0 <= tau_unclassifiable ({unclassifiable}) <= tau_assign ({assign}) <= 1")]
    InvalidThresholds { assign: f64, unclassifiable: f64 },
}

/// The feature template of one category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryModel {
    pub label: SupportLabel,
    pub slot_weights: BTreeMap<SlotType, Fraction>,
    pub cue_weights: BTreeMap<String, Fraction>,
}

impl CategoryModel {
    pub fn total_weight(&self) -> Fraction {
        self.slot_weights
            .values()
            .chain(self.cue_weights.values())
            .sum()
    }

    /// Same model with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: &Fraction) -> CategoryModel {
        CategoryModel {
            label: self.label,
            slot_weights: self
                .slot_weights
                .iter()
                .map(|(k, w)| (*k, w * factor))
                .collect(),
            cue_weights: self
                .cue_weights
                .iter()
                .map(|(k, w)| (k.clone(), w * factor))
                .collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModels {
    models: Vec<RawModel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    label: SupportLabel,
    #[serde(default)]
    slot_weights: BTreeMap<String, f64>,
    #[serde(default)]
    cue_weights: BTreeMap<String, f64>,
}

fn weight(label: SupportLabel, key: &str, w: f64) -> Result<Fraction, ModelError> {
    let invalid = |reason: &str| ModelError::InvalidWeight {
        label,
        key: key.to_string(),
        reason: reason.to_string(),
    };
    let w = fraction::from_decimal(w).ok_or_else(|| invalid("not a finite number"))?;
    if w < fraction::zero() {
        return Err(invalid("negative"));
    }
    Ok(w)
}

/// Parses a model file. Cue weights must name rules of `lexicon`. Models are
/// returned in label order.
pub fn load_models(raw: &[u8], lexicon: &Lexicon) -> Result<Vec<CategoryModel>, ModelError> {
    let file: RawModels = serde_json::from_slice(raw).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut by_label: BTreeMap<SupportLabel, CategoryModel> = BTreeMap::new();
    for m in file.models {
        let label = m.label;
        let mut slot_weights = BTreeMap::new();
        for (name, w) in &m.slot_weights {
            let slot = SlotType::from_name(name).ok_or_else(|| ModelError::InvalidReference {
                label,
                kind: "slot",
                name: name.clone(),
            })?;
            slot_weights.insert(slot, weight(label, name, *w)?);
        }
        let mut cue_weights = BTreeMap::new();
        for (rule_id, w) in &m.cue_weights {
            if lexicon.rule(rule_id).is_none() {
                return Err(ModelError::InvalidReference {
                    label,
                    kind: "rule",
                    name: rule_id.clone(),
                });
            }
            cue_weights.insert(rule_id.clone(), weight(label, rule_id, *w)?);
        }
        let model = CategoryModel {
            label,
            slot_weights,
            cue_weights,
        };
        if model.total_weight() <= fraction::zero() {
            return Err(ModelError::InvalidWeight {
                label,
                key: "*".into(),
                reason: "model needs at least one positive weight".into(),
            });
        }
        if by_label.insert(label, model).is_some() {
            return Err(ModelError::DuplicateLabel(label));
        }
    }
    let missing: Vec<SupportLabel> = SupportLabel::ALL
        .iter()
        .copied()
        .filter(|l| !by_label.contains_key(l))
        .collect();
    if !missing.is_empty() {
        return Err(ModelError::IncompleteModels(missing));
    }
    Ok(by_label.into_values().collect())
}

/// Score from a thread summary: presence vector plus the set of fired rules.
pub fn score_summary(
    presence: &PresenceVector,
    fired: &BTreeSet<&str>,
    model: &CategoryModel,
) -> Fraction {
    let total = model.total_weight();
    if total == fraction::zero() {
        return fraction::zero();
    }
    let slots: Fraction = model
        .slot_weights
        .iter()
        .filter(|(s, _)| presence.has(**s))
        .map(|(_, w)| w)
        .sum();
    let cues: Fraction = model
        .cue_weights
        .iter()
        .filter(|(c, _)| fired.contains(c.as_str()))
        .map(|(_, w)| w)
        .sum();
    (slots + cues) / total
}

pub fn score(annotation: &ThreadAnnotation, model: &CategoryModel) -> Fraction {
    score_summary(&annotation.presence, &annotation.fired_rules(), model)
}

/// Validated classification thresholds, held exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    pub assign: Fraction,
    pub unclassifiable: Fraction,
}

impl Thresholds {
    pub fn new(assign: f64, unclassifiable: f64) -> Result<Self, ClassifyError> {
        let err = ClassifyError::InvalidThresholds {
            assign,
            unclassifiable,
        };
        let (Some(a), Some(u)) = (
            fraction::from_decimal(assign),
            fraction::from_decimal(unclassifiable),
        ) else {
            return Err(err);
        };
        if !(fraction::zero() <= u && u <= a && a <= fraction::one()) {
            return Err(err);
        }
        Ok(Thresholds {
            assign: a,
            unclassifiable: u,
        })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::new(DEFAULT_TAU_ASSIGN, DEFAULT_TAU_UNCLASSIFIABLE)
            .expect("defaults are ordered")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryAssignment {
    pub thread_id: String,
    pub scores: BTreeMap<SupportLabel, Fraction>,
    /// Label order.
    pub assigned: Vec<SupportLabel>,
    pub unclassifiable: bool,
}

pub fn classify_with(
    annotation: &ThreadAnnotation,
    models: &[CategoryModel],
    thresholds: &Thresholds,
) -> CategoryAssignment {
    let fired = annotation.fired_rules();
    let scores: BTreeMap<SupportLabel, Fraction> = models
        .iter()
        .map(|m| (m.label, score_summary(&annotation.presence, &fired, m)))
        .collect();
    let best = scores
        .values()
        .max()
        .cloned()
        .unwrap_or_else(fraction::zero);
    let unclassifiable = best < thresholds.unclassifiable;
    let assigned = if unclassifiable {
        Vec::new()
    } else {
        scores
            .iter()
            .filter(|(_, s)| **s >= thresholds.assign)
            .map(|(l, _)| *l)
            .collect()
    };
    CategoryAssignment {
        thread_id: annotation.thread_id.clone(),
        scores,
        assigned,
        unclassifiable,
    }
}

pub fn classify(
    annotation: &ThreadAnnotation,
    models: &[CategoryModel],
    tau_assign: f64,
    tau_unclassifiable: f64,
) -> Result<CategoryAssignment, ClassifyError> {
    let thresholds = Thresholds::new(tau_assign, tau_unclassifiable)?;
    Ok(classify_with(annotation, models, &thresholds))
}

/// Ids of unclassifiable threads, in input order.
pub fn exceptions(assignments: &[CategoryAssignment]) -> Vec<String> {
    assignments
        .iter()
        .filter(|a| a.unclassifiable)
        .map(|a| a.thread_id.clone())
        .collect()
}

#[derive(Serialize)]
struct AssignmentOut<'a> {
    thread_id: &'a str,
    scores: BTreeMap<SupportLabel, f64>,
    assigned: &'a [SupportLabel],
    unclassifiable: bool,
}

#[derive(Serialize)]
struct AssignmentsOut<'a> {
    tau_assign: f64,
    tau_unclassifiable: f64,
    assignments: Vec<AssignmentOut<'a>>,
}

pub fn assignments_json(assignments: &[CategoryAssignment], thresholds: &Thresholds) -> String {
    let out = AssignmentsOut {
        tau_assign: fraction::to_f64(&thresholds.assign),
        tau_unclassifiable: fraction::to_f64(&thresholds.unclassifiable),
        assignments: assignments
            .iter()
            .map(|a| AssignmentOut {
                thread_id: &a.thread_id,
                scores: a
                    .scores
                    .iter()
                    .map(|(l, s)| (*l, fraction::to_f64(s)))
                    .collect(),
                assigned: &a.assigned,
                unclassifiable: a.unclassifiable,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("assignments serialize");
    s.push('\n');
    s
}

pub fn exceptions_json(assignments: &[CategoryAssignment]) -> String {
    let mut s = serde_json::to_string_pretty(&serde_json::json!({
        "exceptions": exceptions(assignments)
    }))
    .expect("exceptions serialize");
    s.push('\n');
    s
}
