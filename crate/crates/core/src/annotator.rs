//! Slot annotations on requests, reaction labels on replies, and the
//! per-thread summaries derived from them.
//!
//! The request is matched against every slot rule. Replies are matched
//! against reaction rules plus the background-frame slots (address terms,
//! greetings, signatures, closings, smileys, proverbs); those reply slots are
//! kept as annotations but never feed the presence vector, which describes
//! the request alone.

use std::collections::{BTreeSet, HashSet};
use std::ops::Range;

use serde::Serialize;

use crate::corpus::{traversal, Corpus, Message, Thread};
use crate::lexicon::{match_rules, Lexicon, ReactionType, SlotType, Target};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAnnotation {
    pub message_id: String,
    pub slot: SlotType,
    pub span: Range<usize>,
    pub rule_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionAnnotation {
    pub message_id: String,
    pub reaction: ReactionType,
    pub span: Range<usize>,
    pub rule_id: String,
}

/// One column of the cross-grid: which slots the request realizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PresenceVector {
    pub thread_id: String,
    pub bits: [bool; SlotType::COUNT],
}

impl PresenceVector {
    pub fn empty(thread_id: impl Into<String>) -> Self {
        PresenceVector {
            thread_id: thread_id.into(),
            bits: [false; SlotType::COUNT],
        }
    }

    pub fn from_slots(
        thread_id: impl Into<String>,
        slots: impl IntoIterator<Item = SlotType>,
    ) -> Self {
        let mut v = Self::empty(thread_id);
        for s in slots {
            v.bits[s.index()] = true;
        }
        v
    }

    pub fn has(&self, slot: SlotType) -> bool {
        self.bits[slot.index()]
    }

    /// Present slots in canonical order.
    pub fn present(&self) -> impl Iterator<Item = SlotType> + '_ {
        SlotType::ALL.iter().copied().filter(|s| self.has(*s))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Number of replies carrying each reaction type (a reply counts once per type).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionProfile {
    pub thread_id: String,
    pub counts: [usize; ReactionType::COUNT],
}

impl ReactionProfile {
    pub fn get(&self, reaction: ReactionType) -> usize {
        self.counts[reaction.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadAnnotation {
    pub thread_id: String,
    pub request_id: String,
    /// Traversal order, then span start, then rule id.
    pub slot_annotations: Vec<SlotAnnotation>,
    pub reaction_annotations: Vec<ReactionAnnotation>,
    pub presence: PresenceVector,
    pub reactions: ReactionProfile,
}

impl ThreadAnnotation {
    /// Assembles an annotation from raw lists, deriving the presence vector
    /// and reaction profile. Lists are kept in the order given.
    pub fn from_parts(
        thread_id: impl Into<String>,
        request_id: impl Into<String>,
        slot_annotations: Vec<SlotAnnotation>,
        reaction_annotations: Vec<ReactionAnnotation>,
    ) -> Self {
        let thread_id = thread_id.into();
        let request_id = request_id.into();
        let presence = PresenceVector::from_slots(
            thread_id.clone(),
            slot_annotations
                .iter()
                .filter(|a| a.message_id == request_id)
                .map(|a| a.slot),
        );
        let mut counts = [0; ReactionType::COUNT];
        let distinct: HashSet<(&str, ReactionType)> = reaction_annotations
            .iter()
            .filter(|a| a.message_id != request_id)
            .map(|a| (a.message_id.as_str(), a.reaction))
            .collect();
        for (_, r) in distinct {
            counts[r.index()] += 1;
        }
        let reactions = ReactionProfile {
            thread_id: thread_id.clone(),
            counts,
        };
        ThreadAnnotation {
            thread_id,
            request_id,
            slot_annotations,
            reaction_annotations,
            presence,
            reactions,
        }
    }

    /// Ids of every rule that matched anywhere in the thread.
    pub fn fired_rules(&self) -> BTreeSet<&str> {
        self.slot_annotations
            .iter()
            .map(|a| a.rule_id.as_str())
            .chain(self.reaction_annotations.iter().map(|a| a.rule_id.as_str()))
            .collect()
    }
}

pub fn annotate_thread(thread: &Thread, lexicon: &Lexicon) -> ThreadAnnotation {
    let request_id = thread.request().message_id.clone();
    let mut slots = Vec::new();
    let mut reactions = Vec::new();

    for message in traversal(thread) {
        let is_request = message.message_id == request_id;
        let mut slot_here = Vec::new();
        let mut reaction_here = Vec::new();
        for m in match_rules(&message.body, lexicon) {
            match m.target {
                Target::Slot(slot) if is_request || slot.is_background() => {
                    slot_here.push(SlotAnnotation {
                        message_id: message.message_id.clone(),
                        slot,
                        span: m.span,
                        rule_id: m.rule_id,
                    })
                }
                Target::Reaction(reaction) if !is_request => {
                    reaction_here.push(ReactionAnnotation {
                        message_id: message.message_id.clone(),
                        reaction,
                        span: m.span,
                        rule_id: m.rule_id,
                    })
                }
                _ => {}
            }
        }
        slot_here.sort_by(|a, b| span_key(&a.span, &a.rule_id).cmp(&span_key(&b.span, &b.rule_id)));
        reaction_here
            .sort_by(|a, b| span_key(&a.span, &a.rule_id).cmp(&span_key(&b.span, &b.rule_id)));
        slots.extend(slot_here);
        reactions.extend(reaction_here);
    }

    ThreadAnnotation::from_parts(thread.thread_id(), request_id, slots, reactions)
}

fn span_key<'a>(span: &Range<usize>, rule_id: &'a str) -> (usize, &'a str, usize) {
    (span.start, rule_id, span.end)
}

/// Annotates every thread, in corpus order.
pub fn annotate_corpus(corpus: &Corpus, lexicon: &Lexicon) -> Vec<ThreadAnnotation> {
    corpus
        .threads()
        .iter()
        .map(|t| annotate_thread(t, lexicon))
        .collect()
}

/// OR over the request's slot annotations.
pub fn presence_of(annotation: &ThreadAnnotation) -> PresenceVector {
    annotation.presence.clone()
}

#[derive(Serialize)]
struct AnnotatedCorpusOut<'a> {
    corpus_id: &'a str,
    language: &'a str,
    threads: Vec<AnnotatedThreadOut<'a>>,
}

#[derive(Serialize)]
struct AnnotatedThreadOut<'a> {
    thread_id: &'a str,
    messages: Vec<AnnotatedMessageOut<'a>>,
}

#[derive(Serialize)]
struct AnnotatedMessageOut<'a> {
    #[serde(flatten)]
    message: &'a Message,
    annotations: Vec<AnnotationOut<'a>>,
}

#[derive(Serialize)]
struct AnnotationOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    slot: Option<SlotType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reaction: Option<ReactionType>,
    start: usize,
    end: usize,
    rule_id: &'a str,
}

/// The corpus in file format, messages in traversal order, each extended
/// with its annotations sorted by span start then rule id.
///
/// `annotations` must be `annotate_corpus(corpus, _)` or a permutation-free
/// equivalent (one entry per thread, same order).
pub fn annotated_corpus_json(corpus: &Corpus, annotations: &[ThreadAnnotation]) -> String {
    let threads = corpus
        .threads()
        .iter()
        .zip(annotations)
        .map(|(thread, ann)| {
            debug_assert_eq!(thread.thread_id(), ann.thread_id);
            let messages = traversal(thread)
                .into_iter()
                .map(|message| {
                    let mut items: Vec<AnnotationOut<'_>> = ann
                        .slot_annotations
                        .iter()
                        .filter(|a| a.message_id == message.message_id)
                        .map(|a| AnnotationOut {
                            slot: Some(a.slot),
                            reaction: None,
                            start: a.span.start,
                            end: a.span.end,
                            rule_id: &a.rule_id,
                        })
                        .chain(
                            ann.reaction_annotations
                                .iter()
                                .filter(|a| a.message_id == message.message_id)
                                .map(|a| AnnotationOut {
                                    slot: None,
                                    reaction: Some(a.reaction),
                                    start: a.span.start,
                                    end: a.span.end,
                                    rule_id: &a.rule_id,
                                }),
                        )
                        .collect();
                    items.sort_by(|a, b| {
                        (a.start, a.rule_id, a.end).cmp(&(b.start, b.rule_id, b.end))
                    });
                    AnnotatedMessageOut {
                        message,
                        annotations: items,
                    }
                })
                .collect();
            AnnotatedThreadOut {
                thread_id: thread.thread_id(),
                messages,
            }
        })
        .collect();
    let out = AnnotatedCorpusOut {
        corpus_id: &corpus.corpus_id,
        language: &corpus.language,
        threads,
    };
    let mut s = serde_json::to_string_pretty(&out).expect("annotated corpus serializes");
    s.push('\n');
    s
}
