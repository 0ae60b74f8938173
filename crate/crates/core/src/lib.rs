//! Script analysis for help-seeking forum discussions.
//!
//! The pipeline mirrors how a conversation analyst works through a forum
//! sample:
//!
//! 1. [`corpus`] splits the exported interactions into threads, each a
//!    request plus its tree of replies.
//! 2. [`lexicon`] and [`annotator`] locate script slots (greeting,
//!    self-presentation, problem statement, signature, ...) on requests and
//!    reaction categories on replies.
//! 3. [`classifier`] compares each thread against per-category type models and
//!    assigns social-support labels, routing unclassifiable threads to an
//!    exception queue.
//! 4. [`gridlab`] builds the slot × thread cross-grid, aggregates slot support
//!    per category, induces prototype scripts and validates them on further
//!    threads.
//!
//! [`cli`] wires the stages together behind the `threadscript` binary.

#[macro_use]
mod names;

pub mod annotator;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod fraction;
pub mod gridlab;
pub mod lexicon;

pub use annotator::{
    annotate_corpus, annotate_thread, presence_of, PresenceVector, ReactionAnnotation,
    ReactionProfile, SlotAnnotation, ThreadAnnotation,
};
pub use classifier::{
    classify, exceptions, load_models, score, CategoryAssignment, CategoryModel, ClassifyError,
    ModelError, SupportLabel, Thresholds,
};
pub use corpus::{parse_corpus, traversal, Corpus, CorpusError, Message, Thread};
pub use gridlab::{
    aggregate, build_grid, induce_scripts, validate_scripts, CategorySupport, CrossGrid, GridError,
    Script, ScriptThresholds, ValidationReport,
};
pub use lexicon::{
    load_lexicon, match_rules, Anchor, Lexicon, LexiconError, Match, MatchKind, ReactionType, Rule,
    SlotType, Target,
};
