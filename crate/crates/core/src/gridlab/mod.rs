//! The slot × thread cross-grid and everything induced from it.
//!
//! Columns are threads, rows are slots in canonical order. Aggregating the
//! columns by assigned label gives per-category slot support; thresholding
//! support yields prototype scripts with a mandatory and an optional tier,
//! which are then checked against further threads.

mod grid;
mod report;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::annotator::{PresenceVector, ThreadAnnotation};
use crate::classifier::{CategoryAssignment, SupportLabel};
use crate::fraction::{self, Fraction};
use crate::lexicon::SlotType;

pub use grid::{build_grid, CrossGrid};
pub use report::markdown_report;

pub const DEFAULT_THETA_MANDATORY: f64 = 0.8;
pub const DEFAULT_THETA_OPTIONAL: f64 = 0.4;
pub const DEFAULT_GAMMA: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("duplicate thread id `{0}`")]
    DuplicateId(String),
    #[error("assignment for unknown thread `{0}`")]
    UnknownThread(String),
    #[error("invalid thresholds: need 0 <= theta_optional ({optional}) <= theta_mandatory ({mandatory}) <= 1")]
    InvalidThresholds { mandatory: f64, optional: f64 },
    #[error("invalid gamma {0}: must lie in [0, 1]")]
    InvalidGamma(f64),
    #[error("no script for label {0}")]
    MissingScript(SupportLabel),
    #[error("grid CSV, line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Slot support within the threads assigned one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorySupport {
    pub label: SupportLabel,
    pub n: usize,
    /// Assigned threads realizing each slot, canonical order.
    pub counts: [usize; SlotType::COUNT],
}

impl CategorySupport {
    /// `None` when no thread carries the label.
    pub fn support(&self, slot: SlotType) -> Option<Fraction> {
        (self.n > 0).then(|| fraction::ratio(self.counts[slot.index()], self.n))
    }
}

/// One `CategorySupport` per label, in label order. A thread counts toward
/// every label it is assigned.
pub fn aggregate(
    grid: &CrossGrid,
    assignments: &[CategoryAssignment],
) -> Result<Vec<CategorySupport>, GridError> {
    let columns: HashMap<&str, &PresenceVector> = grid
        .columns()
        .iter()
        .map(|c| (c.thread_id.as_str(), c))
        .collect();
    let mut seen = HashSet::new();
    let mut supports: Vec<CategorySupport> = SupportLabel::ALL
        .iter()
        .map(|&label| CategorySupport {
            label,
            n: 0,
            counts: [0; SlotType::COUNT],
        })
        .collect();
    for a in assignments {
        let column = columns
            .get(a.thread_id.as_str())
            .ok_or_else(|| GridError::UnknownThread(a.thread_id.clone()))?;
        if !seen.insert(a.thread_id.as_str()) {
            return Err(GridError::DuplicateId(a.thread_id.clone()));
        }
        for label in &a.assigned {
            let s = &mut supports[label.index()];
            s.n += 1;
            for slot in column.present() {
                s.counts[slot.index()] += 1;
            }
        }
    }
    Ok(supports)
}

/// Induction thresholds, held exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptThresholds {
    pub mandatory: Fraction,
    pub optional: Fraction,
}

impl ScriptThresholds {
    pub fn new(mandatory: f64, optional: f64) -> Result<Self, GridError> {
        let err = GridError::InvalidThresholds {
            mandatory,
            optional,
        };
        let (Some(m), Some(o)) = (
            fraction::from_decimal(mandatory),
            fraction::from_decimal(optional),
        ) else {
            return Err(err);
        };
        if !(fraction::zero() <= o && o <= m && m <= fraction::one()) {
            return Err(err);
        }
        Ok(ScriptThresholds {
            mandatory: m,
            optional: o,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub label: SupportLabel,
    pub mandatory: Vec<SlotType>,
    pub optional: Vec<SlotType>,
    pub thresholds: ScriptThresholds,
    pub n: usize,
    /// No thread carried the label; both tiers are empty.
    pub insufficient_data: bool,
}

impl Script {
    pub fn contains(&self, slot: SlotType) -> bool {
        self.mandatory.contains(&slot) || self.optional.contains(&slot)
    }
}

pub fn induce_with(supports: &[CategorySupport], thresholds: &ScriptThresholds) -> Vec<Script> {
    supports
        .iter()
        .map(|sup| {
            let mut mandatory = Vec::new();
            let mut optional = Vec::new();
            if sup.n > 0 {
                for &slot in SlotType::ALL {
                    let s = sup.support(slot).expect("n > 0");
                    if s >= thresholds.mandatory {
                        mandatory.push(slot);
                    } else if s >= thresholds.optional {
                        optional.push(slot);
                    }
                }
            }
            Script {
                label: sup.label,
                mandatory,
                optional,
                thresholds: thresholds.clone(),
                n: sup.n,
                insufficient_data: sup.n == 0,
            }
        })
        .collect()
}

pub fn induce_scripts(
    supports: &[CategorySupport],
    theta_mandatory: f64,
    theta_optional: f64,
) -> Result<Vec<Script>, GridError> {
    let thresholds = ScriptThresholds::new(theta_mandatory, theta_optional)?;
    Ok(induce_with(supports, &thresholds))
}

/// Coverage of one held-out thread against the script of one of its labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationEntry {
    pub thread_id: String,
    pub label: SupportLabel,
    pub mandatory_present: usize,
    pub mandatory_total: usize,
    /// 1 when the script has no mandatory slot.
    pub coverage: Fraction,
    pub conforms: bool,
    /// The script has no mandatory slot; excluded from conformance rates.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelConformance {
    pub label: SupportLabel,
    pub evaluated: usize,
    pub conforming: usize,
}

impl LabelConformance {
    pub fn rate(&self) -> Option<Fraction> {
        (self.evaluated > 0).then(|| fraction::ratio(self.conforming, self.evaluated))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub gamma: Fraction,
    pub entries: Vec<ValidationEntry>,
    /// Held-out threads with no assigned label.
    pub skipped: Vec<String>,
    /// Label order.
    pub per_label: Vec<LabelConformance>,
}

pub fn validate_scripts(
    scripts: &[Script],
    holdout: &[ThreadAnnotation],
    assignments: &[CategoryAssignment],
    gamma: f64,
) -> Result<ValidationReport, GridError> {
    let gamma_exact = fraction::from_decimal(gamma)
        .filter(|g| *g >= fraction::zero() && *g <= fraction::one())
        .ok_or(GridError::InvalidGamma(gamma))?;
    let by_label: BTreeMap<SupportLabel, &Script> = scripts.iter().map(|s| (s.label, s)).collect();
    let by_thread: HashMap<&str, &CategoryAssignment> = assignments
        .iter()
        .map(|a| (a.thread_id.as_str(), a))
        .collect();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut tallies: BTreeMap<SupportLabel, (usize, usize)> = BTreeMap::new();
    for thread in holdout {
        let assignment = by_thread
            .get(thread.thread_id.as_str())
            .ok_or_else(|| GridError::UnknownThread(thread.thread_id.clone()))?;
        if assignment.assigned.is_empty() {
            skipped.push(thread.thread_id.clone());
            continue;
        }
        for &label in &assignment.assigned {
            let script = by_label
                .get(&label)
                .ok_or(GridError::MissingScript(label))?;
            let total = script.mandatory.len();
            let present = script
                .mandatory
                .iter()
                .filter(|s| thread.presence.has(**s))
                .count();
            let vacuous = total == 0;
            let coverage = if vacuous {
                fraction::one()
            } else {
                fraction::ratio(present, total)
            };
            let conforms = coverage >= gamma_exact;
            if !vacuous {
                let t = tallies.entry(label).or_default();
                t.0 += 1;
                t.1 += usize::from(conforms);
            }
            entries.push(ValidationEntry {
                thread_id: thread.thread_id.clone(),
                label,
                mandatory_present: present,
                mandatory_total: total,
                coverage,
                conforms,
                vacuous,
            });
        }
    }
    let per_label = scripts
        .iter()
        .map(|s| {
            let (evaluated, conforming) = tallies.get(&s.label).copied().unwrap_or_default();
            LabelConformance {
                label: s.label,
                evaluated,
                conforming,
            }
        })
        .collect();
    Ok(ValidationReport {
        gamma: gamma_exact,
        entries,
        skipped,
        per_label,
    })
}

#[derive(Serialize)]
struct SupportOut {
    label: SupportLabel,
    n: usize,
    support: Vec<SlotSupportOut>,
}

#[derive(Serialize)]
struct SlotSupportOut {
    slot: SlotType,
    count: usize,
    support: Option<f64>,
}

#[derive(Serialize)]
struct ScriptOut<'a> {
    label: SupportLabel,
    n: usize,
    insufficient_data: bool,
    mandatory: &'a [SlotType],
    optional: &'a [SlotType],
}

#[derive(Serialize)]
struct ScriptsOut<'a> {
    theta_mandatory: f64,
    theta_optional: f64,
    supports: Vec<SupportOut>,
    scripts: Vec<ScriptOut<'a>>,
}

/// Supports and scripts as JSON; slots listed in canonical order.
pub fn scripts_json(
    supports: &[CategorySupport],
    scripts: &[Script],
    thresholds: &ScriptThresholds,
) -> String {
    let out = ScriptsOut {
        theta_mandatory: fraction::to_f64(&thresholds.mandatory),
        theta_optional: fraction::to_f64(&thresholds.optional),
        supports: supports
            .iter()
            .map(|s| SupportOut {
                label: s.label,
                n: s.n,
                support: SlotType::ALL
                    .iter()
                    .map(|slot| SlotSupportOut {
                        slot: *slot,
                        count: s.counts[slot.index()],
                        support: s.support(*slot).map(|f| fraction::to_f64(&f)),
                    })
                    .collect(),
            })
            .collect(),
        scripts: scripts
            .iter()
            .map(|s| ScriptOut {
                label: s.label,
                n: s.n,
                insufficient_data: s.insufficient_data,
                mandatory: &s.mandatory,
                optional: &s.optional,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("scripts serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct EntryOut<'a> {
    thread_id: &'a str,
    label: SupportLabel,
    mandatory_present: usize,
    mandatory_total: usize,
    coverage: f64,
    conforms: bool,
    vacuous: bool,
}

#[derive(Serialize)]
struct ConformanceOut {
    label: SupportLabel,
    evaluated: usize,
    conforming: usize,
    rate: Option<f64>,
}

#[derive(Serialize)]
struct ValidationOut<'a> {
    gamma: f64,
    entries: Vec<EntryOut<'a>>,
    skipped: &'a [String],
    per_label: Vec<ConformanceOut>,
}

pub fn validation_json(report: &ValidationReport) -> String {
    let out = ValidationOut {
        gamma: fraction::to_f64(&report.gamma),
        entries: report
            .entries
            .iter()
            .map(|e| EntryOut {
                thread_id: &e.thread_id,
                label: e.label,
                mandatory_present: e.mandatory_present,
                mandatory_total: e.mandatory_total,
                coverage: fraction::to_f64(&e.coverage),
                conforms: e.conforms,
                vacuous: e.vacuous,
            })
            .collect(),
        skipped: &report.skipped,
        per_label: report
            .per_label
            .iter()
            .map(|c| ConformanceOut {
                label: c.label,
                evaluated: c.evaluated,
                conforming: c.conforming,
                rate: c.rate().map(|r| fraction::to_f64(&r)),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("validation serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests;
