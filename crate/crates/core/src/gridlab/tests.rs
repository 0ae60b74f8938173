use std::collections::BTreeMap;

use super::*;
use crate::annotator::SlotAnnotation;
use crate::fraction::ratio;
use SlotType::*;

fn column(id: &str, slots: &[SlotType]) -> ThreadAnnotation {
    let anns = slots
        .iter()
        .map(|s| SlotAnnotation {
            message_id: format!("{id}-req"),
            slot: *s,
            span: 0..1,
            rule_id: "r".into(),
        })
        .collect();
    ThreadAnnotation::from_parts(id, format!("{id}-req"), anns, vec![])
}

fn assignment(id: &str, labels: &[SupportLabel]) -> CategoryAssignment {
    CategoryAssignment {
        thread_id: id.into(),
        scores: BTreeMap::new(),
        assigned: labels.to_vec(),
        unclassifiable: labels.is_empty(),
    }
}

/// The experience-sharing columns of the reference table (FIL 2, 3, 4, 8).
fn experience_columns() -> Vec<ThreadAnnotation> {
    vec![
        column(
            "FIL2",
            &[
                RequestBeneficiary,
                OpeningGreeting,
                AddressTerm,
                ForumActivityDescription,
                Identity,
                ProblemPresentation,
                ResolutionFailure,
                PsychologicalState,
                RequestFormulation,
                Closing,
                VisualFormatting,
            ],
        ),
        column(
            "FIL3",
            &[
                RequestBeneficiary,
                AddressTerm,
                ProblemPresentation,
                PsychologicalState,
                HealthState,
                RequestFormulation,
                Signature,
                ProverbQuotation,
            ],
        ),
        column(
            "FIL4",
            &[
                RequestBeneficiary,
                OpeningGreeting,
                AddressTerm,
                ForumActivityDescription,
                ProblemPresentation,
                ResolutionFailure,
                PsychologicalState,
                RequestFormulation,
            ],
        ),
        column(
            "FIL8",
            &[
                RequestBeneficiary,
                OpeningGreeting,
                ProblemPresentation,
                RequestFormulation,
                AnticipatoryThanks,
                Closing,
            ],
        ),
    ]
}

const FIL1: [SlotType; 8] = [
    RequestBeneficiary,
    OpeningGreeting,
    AddressTerm,
    ForumActivityDescription,
    PsychologicalState,
    RequestFormulation,
    ExpectedBenefit,
    Signature,
];

#[test]
fn empty_grid_has_no_columns() {
    let g = build_grid(&[]).unwrap();
    assert_eq!(g.width(), 0);
    let csv = g.to_csv();
    assert_eq!(csv.lines().count(), 19);
    assert_eq!(csv.lines().next(), Some("slot"));
    assert_eq!(CrossGrid::from_csv(&csv).unwrap(), g);
}

#[test]
fn duplicate_thread_rejected() {
    let err = build_grid(&[column("a", &[]), column("a", &[Closing])]).unwrap_err();
    assert_eq!(err, GridError::DuplicateId("a".into()));
}

#[test]
fn experience_support_counts() {
    let anns = experience_columns();
    let grid = build_grid(&anns).unwrap();
    let assignments: Vec<_> = anns
        .iter()
        .map(|a| assignment(&a.thread_id, &[SupportLabel::ExperienceSharing]))
        .collect();
    let supports = aggregate(&grid, &assignments).unwrap();
    let exp = &supports[SupportLabel::ExperienceSharing.index()];
    assert_eq!(exp.n, 4);
    assert_eq!(exp.support(ProblemPresentation), Some(ratio(1, 1)));
    assert_eq!(exp.support(OpeningGreeting), Some(ratio(3, 4)));
    assert_eq!(exp.support(Identity), Some(ratio(1, 4)));
    assert_eq!(exp.support(ExpectedBenefit), Some(ratio(0, 1)));
    assert_eq!(exp.support(PsychologicalState), Some(ratio(3, 4)));

    let scripts = induce_scripts(&supports, 0.8, 0.4).unwrap();
    let s = &scripts[SupportLabel::ExperienceSharing.index()];
    assert_eq!(
        s.mandatory,
        [RequestBeneficiary, ProblemPresentation, RequestFormulation]
    );
    assert!(s.optional.contains(&PsychologicalState));
    assert!(s.optional.contains(&OpeningGreeting));
    assert!(!s.contains(Identity));
    assert!(!s.contains(ExpectedBenefit));
}

#[test]
fn single_thread_category_copies_its_column() {
    let anns = vec![column("FIL1", &FIL1)];
    let grid = build_grid(&anns).unwrap();
    let supports = aggregate(
        &grid,
        &[assignment("FIL1", &[SupportLabel::EmotionalSupport])],
    )
    .unwrap();
    let emo = &supports[0];
    assert_eq!(emo.n, 1);
    for slot in SlotType::ALL {
        let expected = usize::from(FIL1.contains(slot));
        assert_eq!(emo.support(*slot), Some(ratio(expected, 1)));
    }
    let scripts = induce_scripts(&supports, 0.8, 0.4).unwrap();
    assert_eq!(scripts[0].mandatory, FIL1);
    assert!(scripts[0].optional.is_empty());
    // FIL1 is canonical-order already; the other labels have no data.
    assert!(scripts[1..]
        .iter()
        .all(|s| s.insufficient_data && s.mandatory.is_empty()));
    assert_eq!(supports[1].support(Closing), None);
}

#[test]
fn unknown_thread_in_assignments() {
    let grid = build_grid(&[column("a", &[])]).unwrap();
    assert_eq!(
        aggregate(&grid, &[assignment("zz", &[SupportLabel::Advice])]).unwrap_err(),
        GridError::UnknownThread("zz".into())
    );
}

#[test]
fn multi_label_threads_count_for_each_label() {
    let grid = build_grid(&[column("a", &[Closing])]).unwrap();
    let supports = aggregate(
        &grid,
        &[assignment(
            "a",
            &[SupportLabel::Advice, SupportLabel::InformationalSupport],
        )],
    )
    .unwrap();
    assert_eq!(supports[SupportLabel::Advice.index()].n, 1);
    assert_eq!(supports[SupportLabel::InformationalSupport.index()].n, 1);
    assert_eq!(supports[SupportLabel::EmotionalSupport.index()].n, 0);
}

#[test]
fn degenerate_thresholds_make_everything_mandatory() {
    let grid = build_grid(&[column("a", &[Closing])]).unwrap();
    let supports = aggregate(&grid, &[assignment("a", &[SupportLabel::Advice])]).unwrap();
    let scripts = induce_scripts(&supports, 0.0, 0.0).unwrap();
    let advice = &scripts[SupportLabel::Advice.index()];
    assert_eq!(advice.mandatory, SlotType::ALL);
    assert!(advice.optional.is_empty());
}

#[test]
fn script_thresholds_validated() {
    assert!(matches!(
        induce_scripts(&[], 0.3, 0.5),
        Err(GridError::InvalidThresholds { .. })
    ));
    assert!(matches!(
        induce_scripts(&[], 1.2, 0.5),
        Err(GridError::InvalidThresholds { .. })
    ));
    assert!(induce_scripts(&[], 0.5, 0.5).is_ok());
}

fn advice_script(mandatory: &[SlotType]) -> Script {
    Script {
        label: SupportLabel::Advice,
        mandatory: mandatory.to_vec(),
        optional: vec![],
        thresholds: ScriptThresholds::new(0.8, 0.4).unwrap(),
        n: 3,
        insufficient_data: false,
    }
}

#[test]
fn coverage_full_and_empty() {
    let scripts = [advice_script(&[Closing, Identity])];
    let holdout = [
        column("full", &[Closing, Identity, Signature]),
        column("none", &[Signature]),
    ];
    let assignments = [
        assignment("full", &[SupportLabel::Advice]),
        assignment("none", &[SupportLabel::Advice]),
    ];
    let report = validate_scripts(&scripts, &holdout, &assignments, 0.8).unwrap();
    assert_eq!(report.entries[0].coverage, ratio(1, 1));
    assert!(report.entries[0].conforms);
    assert_eq!(report.entries[1].coverage, ratio(0, 1));
    assert!(!report.entries[1].conforms);
    assert_eq!(report.per_label[0].rate(), Some(ratio(1, 2)));
}

#[test]
fn partial_coverage_against_gamma() {
    let scripts = [advice_script(&[Closing, Identity, Signature, HealthState])];
    let holdout = [column("t", &[Closing, Identity, Signature])];
    let assignments = [assignment("t", &[SupportLabel::Advice])];
    let strict = validate_scripts(&scripts, &holdout, &assignments, 0.8).unwrap();
    assert_eq!(strict.entries[0].coverage, ratio(3, 4));
    assert!(!strict.entries[0].conforms);
    let lenient = validate_scripts(&scripts, &holdout, &assignments, 0.75).unwrap();
    assert!(lenient.entries[0].conforms);
}

#[test]
fn unlabelled_threads_are_skipped() {
    let report = validate_scripts(
        &[advice_script(&[Closing])],
        &[column("t", &[])],
        &[assignment("t", &[])],
        0.8,
    )
    .unwrap();
    assert!(report.entries.is_empty());
    assert_eq!(report.skipped, ["t"]);
    assert_eq!(report.per_label[0].rate(), None);
}

#[test]
fn missing_script_and_bad_gamma() {
    let holdout = [column("t", &[])];
    let assignments = [assignment("t", &[SupportLabel::TangibleSupport])];
    assert_eq!(
        validate_scripts(&[advice_script(&[])], &holdout, &assignments, 0.8).unwrap_err(),
        GridError::MissingScript(SupportLabel::TangibleSupport)
    );
    assert!(matches!(
        validate_scripts(&[], &holdout, &assignments, 1.5),
        Err(GridError::InvalidGamma(_))
    ));
}

#[test]
fn vacuous_scripts_excluded_from_rates() {
    let report = validate_scripts(
        &[advice_script(&[])],
        &[column("t", &[])],
        &[assignment("t", &[SupportLabel::Advice])],
        0.8,
    )
    .unwrap();
    assert!(report.entries[0].vacuous);
    assert_eq!(report.entries[0].coverage, ratio(1, 1));
    assert_eq!(report.per_label[0].evaluated, 0);
}

#[test]
fn csv_errors() {
    assert!(matches!(
        CrossGrid::from_csv(""),
        Err(GridError::Csv { line: 1, .. })
    ));
    let good = build_grid(&[column("a", &[Closing])]).unwrap().to_csv();
    let bad_cell = good.replacen("Closing,1", "Closing,x", 1);
    assert!(matches!(
        CrossGrid::from_csv(&bad_cell),
        Err(GridError::Csv { line: 16, .. })
    ));
    let short: String = good.lines().take(10).map(|l| format!("{l}\n")).collect();
    assert!(CrossGrid::from_csv(&short).is_err());
    let swapped = good.replacen("Identity", "Identité", 1);
    assert!(CrossGrid::from_csv(&swapped).is_err());
}

#[test]
fn report_places_slots_under_their_labels() {
    let anns = vec![
        column("FIL1", &FIL1),
        column("x", &[ProblemPresentation, RequestFormulation]),
    ];
    let grid = build_grid(&anns).unwrap();
    let assignments = [
        assignment("FIL1", &[SupportLabel::EmotionalSupport]),
        assignment("x", &[SupportLabel::Advice]),
    ];
    let supports = aggregate(&grid, &assignments).unwrap();
    let scripts = induce_scripts(&supports, 0.8, 0.4).unwrap();
    let md = markdown_report(&supports, &scripts);
    assert!(md.contains("## EmotionalSupport (n = 1)"));
    assert!(md.contains("`ExpectedBenefit` appears only in the EmotionalSupport script."));
    assert!(md.contains("## TangibleSupport (n = 0)\n\nNo thread carries this label"));
    assert!(md.contains("`ExchangeModalities`, `CounterGiftWish`"));
}
