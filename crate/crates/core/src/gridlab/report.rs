use std::fmt::Write;

use super::{CategorySupport, Script};
use crate::fraction;
use crate::lexicon::SlotType;

const SELF_PRESENTATION: [SlotType; 4] = [
    SlotType::ForumActivityDescription,
    SlotType::Identity,
    SlotType::PsychologicalState,
    SlotType::HealthState,
];
const PROBLEM: [SlotType; 2] = [SlotType::ProblemPresentation, SlotType::ResolutionFailure];

fn slot_list(out: &mut String, title: &str, slots: &[SlotType], support: &CategorySupport) {
    if slots.is_empty() {
        let _ = writeln!(out, "- {title}: none");
        return;
    }
    let items: Vec<String> = slots
        .iter()
        .map(|s| format!("`{}` ({}/{})", s, support.counts[s.index()], support.n))
        .collect();
    let _ = writeln!(out, "- {title}: {}", items.join(", "));
}

/// Per-category scripts followed by the contrasts they exhibit.
///
/// `supports` and `scripts` are parallel, one entry per label.
pub fn markdown_report(supports: &[CategorySupport], scripts: &[Script]) -> String {
    let mut out = String::new();
    let thresholds = scripts.first().map(|s| &s.thresholds);
    out.push_str("# Request scripts\n\n");
    if let Some(t) = thresholds {
        let _ = writeln!(
            out,
            "Mandatory slots have support >= {}; optional slots have support >= {}.\n",
            fraction::to_f64(&t.mandatory),
            fraction::to_f64(&t.optional)
        );
    }

    for (script, support) in scripts.iter().zip(supports) {
        let _ = writeln!(out, "## {} (n = {})\n", script.label, script.n);
        if script.insufficient_data {
            out.push_str("No thread carries this label; no script induced.\n\n");
            continue;
        }
        slot_list(&mut out, "Mandatory", &script.mandatory, support);
        slot_list(&mut out, "Optional", &script.optional, support);
        out.push('\n');
    }

    out.push_str("## Contrasts\n\n");
    let induced: Vec<&Script> = scripts.iter().filter(|s| !s.insufficient_data).collect();
    for &slot in SlotType::ALL {
        let holders: Vec<&Script> = induced
            .iter()
            .copied()
            .filter(|s| s.contains(slot))
            .collect();
        if let [only] = holders.as_slice() {
            if induced.len() > 1 {
                let _ = writeln!(
                    out,
                    "- `{}` appears only in the {} script.",
                    slot, only.label
                );
            }
        }
    }
    for script in &induced {
        let selfp = SELF_PRESENTATION
            .iter()
            .filter(|s| script.mandatory.contains(s))
            .count();
        let problem = PROBLEM
            .iter()
            .filter(|s| script.mandatory.contains(s))
            .count();
        let benefit = if script.contains(SlotType::ExpectedBenefit) {
            "describes the expected benefit"
        } else {
            "no expected benefit"
        };
        let _ = writeln!(
            out,
            "- {}: mandatory self-presentation {}/{}, mandatory problem detail {}/{}, {}.",
            script.label,
            selfp,
            SELF_PRESENTATION.len(),
            problem,
            PROBLEM.len(),
            benefit
        );
    }
    let unused: Vec<String> = SlotType::ALL
        .iter()
        .filter(|slot| supports.iter().all(|s| s.counts[slot.index()] == 0))
        .map(|s| format!("`{s}`"))
        .collect();
    if !unused.is_empty() {
        let _ = writeln!(
            out,
            "- Realized by no classified request: {}.",
            unused.join(", ")
        );
    }
    out
}
