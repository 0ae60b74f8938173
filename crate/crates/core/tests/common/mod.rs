#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::LazyLock;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use threadscript::corpus::Message;
use threadscript::*;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub fn read(path: PathBuf) -> Vec<u8> {
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

static LEXICON: LazyLock<Lexicon> =
    LazyLock::new(|| load_lexicon(&read(data("fr_default.lexicon.json"))).unwrap());
static MODELS: LazyLock<Vec<CategoryModel>> =
    LazyLock::new(|| load_models(&read(data("fr_default_models.json")), &LEXICON).unwrap());

/// The shipped lexicon, loaded once per test binary.
pub fn lexicon() -> Lexicon {
    LEXICON.clone()
}

pub fn models(_lexicon: &Lexicon) -> Vec<CategoryModel> {
    MODELS.clone()
}

pub fn grid_corpus() -> Corpus {
    parse_corpus(&read(data("doctissimo_grid.json"))).unwrap()
}

pub fn mini_corpus() -> Corpus {
    parse_corpus(&read(data("doctissimo_mini.json"))).unwrap()
}

pub fn message(id: &str, parent: Option<&str>, body: &str) -> Message {
    Message {
        message_id: id.into(),
        author: String::new(),
        parent_id: parent.map(str::to_string),
        timestamp: None,
        body: body.into(),
    }
}

/// Phrases that trigger the shipped lexicon, mixed with neutral filler.
pub const PHRASES: &[&str] = &[
    "Bonjour",
    "coucou",
    "kikou",
    "les amis",
    "chères toutes",
    "sur le forum",
    "mon premier message",
    "J'ai 33 ans",
    "je m'appelle Léa",
    "mon problème",
    "je suis dépendante",
    "j'ai tout essayé",
    "en vain",
    "je suis déprimée",
    "angoissée",
    "le moral",
    "mon médecin",
    "enceinte",
    "besoin de soutien",
    "votre expérience",
    "témoignages",
    "votre avis",
    "qu'en pensez-vous",
    "des infos",
    "des conseils",
    "un coup de main",
    "me ferait du bien",
    "en mp",
    "à charge de revanche",
    "pour moi",
    "pour m'aider",
    "mon fils",
    "comme dit le proverbe",
    ":)",
    "^^",
    "mdr",
    "bon courage",
    "tiens bon",
    "tu as tort",
    "je te conseille",
    "depuis quand",
    "moi aussi",
    "merci d'avance",
    "à bientôt",
    "bisous",
    "-- Maëlle",
    "il pleut",
    "ça fait longtemps",
    "😊 élan",
    "ŒUVRE",
    "",
];

pub fn body_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(PHRASES), 0..8).prop_map(|parts| parts.join(" "))
}

/// A request plus replies, each reply attached to an earlier message.
#[derive(Debug, Clone)]
pub struct ThreadSpec {
    pub request: String,
    /// (parent index into the message list, body), message `i + 1`.
    pub replies: Vec<(usize, String)>,
}

impl ThreadSpec {
    pub fn messages(&self, order: &[usize]) -> Vec<Message> {
        let id = |i: usize| format!("m{i}");
        let mut out = vec![message(&id(0), None, &self.request)];
        for &r in order {
            let (parent, body) = &self.replies[r];
            out.push(message(&id(r + 1), Some(&id(*parent)), body));
        }
        out
    }

    pub fn thread(&self, order: &[usize]) -> Thread {
        Thread::new("t", self.messages(order)).unwrap()
    }
}

pub fn thread_strategy() -> impl Strategy<Value = ThreadSpec> {
    (
        body_strategy(),
        prop::collection::vec((any::<prop::sample::Index>(), body_strategy()), 0..6),
    )
        .prop_map(|(request, raw)| ThreadSpec {
            request,
            replies: raw
                .into_iter()
                .enumerate()
                .map(|(i, (parent, body))| (parent.index(i + 1), body))
                .collect(),
        })
}

/// A thread together with a permutation of its replies.
pub fn permuted_thread_strategy() -> impl Strategy<Value = (ThreadSpec, Vec<usize>)> {
    thread_strategy().prop_flat_map(|spec| {
        let order: Vec<usize> = (0..spec.replies.len()).collect();
        (Just(spec), Just(order).prop_shuffle())
    })
}

/// Random corpora built directly from annotation lists.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub annotations: Vec<ThreadAnnotation>,
    pub assignments: Vec<CategoryAssignment>,
}

pub fn synthetic(seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threads = rng.gen_range(0..=12);
    let mut annotations = Vec::new();
    let mut assignments = Vec::new();
    for t in 0..threads {
        let thread_id = format!("t{t}");
        let request_id = format!("t{t}-0");
        let replies = rng.gen_range(0..4);
        let mut slots = Vec::new();
        for _ in 0..rng.gen_range(0..12) {
            let on = rng.gen_range(0..=replies);
            let slot = if on == 0 {
                *SlotType::ALL.choose(&mut rng).unwrap()
            } else {
                // Replies only carry background-frame slots.
                loop {
                    let s = *SlotType::ALL.choose(&mut rng).unwrap();
                    if s.is_background() {
                        break s;
                    }
                }
            };
            let start = rng.gen_range(0..40);
            slots.push(SlotAnnotation {
                message_id: format!("t{t}-{on}"),
                slot,
                span: start..start + rng.gen_range(1..10),
                rule_id: format!("r{}", rng.gen_range(0..5)),
            });
        }
        annotations.push(ThreadAnnotation::from_parts(
            thread_id.clone(),
            request_id,
            slots,
            vec![],
        ));
        let assigned: Vec<SupportLabel> = SupportLabel::ALL
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        assignments.push(CategoryAssignment {
            thread_id,
            scores: Default::default(),
            unclassifiable: assigned.is_empty(),
            assigned,
        });
    }
    annotations.shuffle(&mut rng);
    Synthetic {
        annotations,
        assignments,
    }
}

/// Recount of grid cells straight from the raw annotation lists.
pub fn oracle_cell(annotation: &ThreadAnnotation, slot: SlotType) -> bool {
    annotation
        .slot_annotations
        .iter()
        .any(|a| a.message_id == annotation.request_id && a.slot == slot)
}

/// `(n, count per slot)` for `label`, recounted from raw annotations.
pub fn oracle_support(s: &Synthetic, label: SupportLabel) -> (usize, Vec<usize>) {
    let members: Vec<&ThreadAnnotation> = s
        .assignments
        .iter()
        .filter(|a| a.assigned.contains(&label))
        .map(|a| {
            s.annotations
                .iter()
                .find(|t| t.thread_id == a.thread_id)
                .unwrap()
        })
        .collect();
    let counts = SlotType::ALL
        .iter()
        .map(|&slot| members.iter().filter(|t| oracle_cell(t, slot)).count())
        .collect();
    (members.len(), counts)
}

/// Number of grid cells and support entries that disagree with the oracle.
pub fn discrepancies(s: &Synthetic) -> usize {
    let grid = build_grid(&s.annotations).unwrap();
    let mut bad = 0;
    if grid.width() != s.annotations.len() {
        bad += 1;
    }
    for (col, ann) in s.annotations.iter().enumerate() {
        if grid.columns()[col].thread_id != ann.thread_id {
            bad += 1;
        }
        for &slot in SlotType::ALL {
            if grid.cell(slot, col) != oracle_cell(ann, slot) {
                bad += 1;
            }
        }
    }
    let supports = aggregate(&grid, &s.assignments).unwrap();
    for &label in SupportLabel::ALL {
        let (n, counts) = oracle_support(s, label);
        let got = &supports[label.index()];
        if got.label != label || got.n != n {
            bad += 1;
        }
        for &slot in SlotType::ALL {
            let c = counts[slot.index()];
            if got.counts[slot.index()] != c {
                bad += 1;
            }
            let expected = (n > 0).then(|| fraction::ratio(c, n));
            if got.support(slot) != expected {
                bad += 1;
            }
        }
    }
    bad
}

pub fn presence_strategy() -> impl Strategy<Value = PresenceVector> {
    prop::array::uniform18(any::<bool>()).prop_map(|bits| PresenceVector {
        thread_id: "t".into(),
        bits,
    })
}

pub fn threshold_pair() -> impl Strategy<Value = (f64, f64)> {
    (0u32..=20, 0u32..=20).prop_map(|(a, b)| {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        (f64::from(hi) / 20.0, f64::from(lo) / 20.0)
    })
}

// Check bodies shared by the property tests and the acceptance run.

pub fn check_reply_permutation(
    lexicon: &Lexicon,
    models: &[CategoryModel],
    spec: &ThreadSpec,
    order: &[usize],
) -> Result<(), TestCaseError> {
    let identity: Vec<usize> = (0..spec.replies.len()).collect();
    let a = annotate_thread(&spec.thread(&identity), lexicon);
    let b = annotate_thread(&spec.thread(order), lexicon);
    prop_assert_eq!(presence_of(&a), presence_of(&b));
    prop_assert_eq!(&a.reactions, &b.reactions);
    let t = Thresholds::default();
    let ca = classifier::classify_with(&a, models, &t);
    let cb = classifier::classify_with(&b, models, &t);
    prop_assert_eq!(ca, cb);
    Ok(())
}

pub fn check_scaling(
    models: &[CategoryModel],
    presence: &PresenceVector,
    fired: &[&str],
    numerator: usize,
    denominator: usize,
) -> Result<(), TestCaseError> {
    let fired = fired.iter().copied().collect();
    let lambda = fraction::ratio(numerator, denominator);
    for m in models {
        let scaled = m.scaled(&lambda);
        prop_assert_eq!(
            classifier::score_summary(presence, &fired, m),
            classifier::score_summary(presence, &fired, &scaled)
        );
    }
    Ok(())
}

pub fn check_support_monotonicity(
    seed: u64,
    label: SupportLabel,
    slot: SlotType,
    extra: &PresenceVector,
) -> Result<(), TestCaseError> {
    let s = synthetic(seed);
    let before = aggregate(&build_grid(&s.annotations).unwrap(), &s.assignments).unwrap();
    let mut column = extra.clone();
    column.thread_id = "added".into();
    column.bits[slot.index()] = true;
    let mut columns: Vec<PresenceVector> = s.annotations.iter().map(presence_of).collect();
    columns.push(column);
    let mut assignments = s.assignments.clone();
    assignments.push(CategoryAssignment {
        thread_id: "added".into(),
        scores: Default::default(),
        assigned: vec![label],
        unclassifiable: false,
    });
    let grid = CrossGrid::from_columns(columns).unwrap();
    let after = aggregate(&grid, &assignments).unwrap();
    let old = before[label.index()]
        .support(slot)
        .unwrap_or_else(fraction::zero);
    let new = after[label.index()].support(slot).unwrap();
    prop_assert!(new >= old, "support fell from {old} to {new}");
    Ok(())
}

pub fn check_theta_monotonicity(
    seed: u64,
    low: (f64, f64),
    high: (f64, f64),
) -> Result<(), TestCaseError> {
    let s = synthetic(seed);
    let supports = aggregate(&build_grid(&s.annotations).unwrap(), &s.assignments).unwrap();
    // Raise each threshold independently, keeping the pair ordered.
    let (m_lo, o_lo) = low;
    let m_hi = m_lo.max(high.0);
    let o_hi = o_lo.max(high.1).min(m_lo);
    let base = induce_scripts(&supports, m_lo, o_lo).unwrap();
    let raised_m = induce_scripts(&supports, m_hi, o_lo).unwrap();
    let raised_o = induce_scripts(&supports, m_lo, o_hi).unwrap();
    for ((b, rm), ro) in base.iter().zip(&raised_m).zip(&raised_o) {
        prop_assert!(rm.mandatory.iter().all(|s| b.mandatory.contains(s)));
        prop_assert!(SlotType::ALL
            .iter()
            .all(|&s| !ro.contains(s) || b.contains(s)));
    }
    Ok(())
}
