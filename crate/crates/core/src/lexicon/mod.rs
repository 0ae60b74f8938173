//! Rule files and the cue matcher.
//!
//! A lexicon is an ordered list of rules, each locating one kind of surface
//! cue (a greeting, an age statement, a smiley, ...) in a message body.
//! Spans are half-open intervals of Unicode scalar values, never bytes.

mod matcher;
mod types;

use std::collections::HashSet;
use std::ops::Range;

use regex::{Regex, RegexBuilder};
use serde::Deserialize;
use thiserror::Error;

pub use matcher::{fold_char, fold_str};
pub use types::{ReactionType, SlotType, Target};

pub const DEFAULT_INITIAL_WINDOW: usize = 60;
pub const DEFAULT_FINAL_WINDOW: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
    #[error("invalid rule `{rule_id}`: {reason}")]
    InvalidRule { rule_id: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Keyword,
    Regex,
}

/// Where in the body a rule may match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// Within the first `window` characters.
    MessageInitial(usize),
    /// Within the last `window` characters.
    MessageFinal(usize),
    Anywhere,
}

impl Anchor {
    /// Character range of a body of `len` characters that a match must lie in.
    fn window(self, len: usize) -> Range<usize> {
        match self {
            Anchor::MessageInitial(w) => 0..w.min(len),
            Anchor::MessageFinal(w) => len.saturating_sub(w)..len,
            Anchor::Anywhere => 0..len,
        }
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    /// Folded when the rule folds case.
    Keyword(Vec<char>),
    Regex {
        find: Regex,
        whole: Regex,
    },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub rule_id: String,
    pub target: Target,
    pub match_kind: MatchKind,
    pub pattern: String,
    pub case_fold: bool,
    pub anchor: Anchor,
    compiled: Compiled,
}

impl Rule {
    pub fn new(
        rule_id: impl Into<String>,
        target: Target,
        match_kind: MatchKind,
        pattern: impl Into<String>,
        case_fold: bool,
        anchor: Anchor,
    ) -> Result<Self, LexiconError> {
        let rule_id = rule_id.into();
        let pattern = pattern.into();
        let invalid = |reason: String| LexiconError::InvalidRule {
            rule_id: rule_id.clone(),
            reason,
        };
        if pattern.is_empty() {
            return Err(invalid("empty pattern".into()));
        }
        if matches!(anchor, Anchor::MessageInitial(0) | Anchor::MessageFinal(0)) {
            return Err(invalid("anchor window must be positive".into()));
        }
        let compiled = match match_kind {
            MatchKind::Keyword => Compiled::Keyword(if case_fold {
                pattern.chars().map(fold_char).collect()
            } else {
                pattern.chars().collect()
            }),
            MatchKind::Regex => {
                let build = |src: &str| {
                    RegexBuilder::new(src)
                        .case_insensitive(case_fold)
                        .build()
                        .map_err(|e| invalid(e.to_string()))
                };
                Compiled::Regex {
                    find: build(&pattern)?,
                    whole: build(&format!(r"\A(?:{pattern})\z"))?,
                }
            }
        };
        Ok(Rule {
            rule_id,
            target,
            match_kind,
            pattern,
            case_fold,
            anchor,
            compiled,
        })
    }

    /// Character spans where this rule fires in `body`.
    fn find(&self, body: &Body<'_>) -> Vec<Range<usize>> {
        let window = self.anchor.window(body.chars.len());
        match &self.compiled {
            Compiled::Keyword(pat) => {
                let hay = if self.case_fold {
                    &body.folded
                } else {
                    &body.chars
                };
                matcher::keyword_spans(hay, pat, window)
            }
            Compiled::Regex { find, .. } => find
                .find_iter(body.text)
                .map(|m| body.char_at(m.start())..body.char_at(m.end()))
                .filter(|r| r.start < r.end && window.start <= r.start && r.end <= window.end)
                .collect(),
        }
    }

    /// Whether `text` as a whole is an instance of this rule's pattern under
    /// its folding. Used to re-check stored annotations.
    pub fn accepts(&self, text: &str) -> bool {
        match &self.compiled {
            Compiled::Keyword(pat) => {
                let chars: Vec<char> = if self.case_fold {
                    text.chars().map(fold_char).collect()
                } else {
                    text.chars().collect()
                };
                &chars == pat
            }
            Compiled::Regex { whole, .. } => whole.is_match(text),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub language: String,
    rules: Vec<Rule>,
}

impl Lexicon {
    pub fn new(language: impl Into<String>, rules: Vec<Rule>) -> Result<Self, LexiconError> {
        let mut seen = HashSet::new();
        for r in &rules {
            if !seen.insert(r.rule_id.as_str()) {
                return Err(LexiconError::DuplicateId(r.rule_id.clone()));
            }
        }
        Ok(Lexicon {
            language: language.into(),
            rules,
        })
    }

    /// Rules in file order.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, rule_id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.rule_id == rule_id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Copy keeping only the rules for which `keep` holds.
    pub fn filtered(&self, keep: impl Fn(&Rule) -> bool) -> Lexicon {
        Lexicon {
            language: self.language.clone(),
            rules: self.rules.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub rule_id: String,
    pub target: Target,
    pub span: Range<usize>,
}

/// A body prepared once for all rules.
struct Body<'a> {
    text: &'a str,
    chars: Vec<char>,
    folded: Vec<char>,
    /// Byte offset of every char, plus the total length.
    byte_offsets: Vec<usize>,
}

impl<'a> Body<'a> {
    fn new(text: &'a str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let folded = chars.iter().copied().map(fold_char).collect();
        let mut byte_offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        byte_offsets.push(text.len());
        Body {
            text,
            chars,
            folded,
            byte_offsets,
        }
    }

    fn char_at(&self, byte: usize) -> usize {
        self.byte_offsets
            .binary_search(&byte)
            .expect("regex offsets fall on char boundaries")
    }
}

/// Every match of every rule, in rule order then span start.
pub fn match_rules(body: &str, lexicon: &Lexicon) -> Vec<Match> {
    if body.is_empty() {
        return Vec::new();
    }
    let prepared = Body::new(body);
    lexicon
        .rules
        .iter()
        .flat_map(|rule| {
            rule.find(&prepared).into_iter().map(move |span| Match {
                rule_id: rule.rule_id.clone(),
                target: rule.target,
                span,
            })
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    #[serde(default = "default_language")]
    language: String,
    rules: Vec<RawRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    rule_id: String,
    target: String,
    match_kind: String,
    pattern: String,
    #[serde(default = "yes")]
    case_fold: bool,
    #[serde(default)]
    anchor: Option<RawAnchor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnchor {
    kind: String,
    #[serde(default)]
    window: Option<usize>,
}

fn default_language() -> String {
    crate::corpus::DEFAULT_LANGUAGE.to_string()
}

fn yes() -> bool {
    true
}

impl RawRule {
    fn into_rule(self) -> Result<Rule, LexiconError> {
        let invalid = |reason: String| LexiconError::InvalidRule {
            rule_id: self.rule_id.clone(),
            reason,
        };
        let target = Target::from_name(&self.target)
            .ok_or_else(|| invalid(format!("unknown target `{}`", self.target)))?;
        let match_kind = match self.match_kind.as_str() {
            "keyword" => MatchKind::Keyword,
            "regex" | "regular-expression" => MatchKind::Regex,
            other => return Err(invalid(format!("unknown match_kind `{other}`"))),
        };
        let anchor = match &self.anchor {
            None => Anchor::Anywhere,
            Some(a) => match a.kind.as_str() {
                "Anywhere" => Anchor::Anywhere,
                "MessageInitial" => {
                    Anchor::MessageInitial(a.window.unwrap_or(DEFAULT_INITIAL_WINDOW))
                }
                "MessageFinal" => Anchor::MessageFinal(a.window.unwrap_or(DEFAULT_FINAL_WINDOW)),
                other => return Err(invalid(format!("unknown anchor kind `{other}`"))),
            },
        };
        Rule::new(
            self.rule_id,
            target,
            match_kind,
            self.pattern,
            self.case_fold,
            anchor,
        )
    }
}

pub fn load_lexicon(raw: &[u8]) -> Result<Lexicon, LexiconError> {
    let file: RawLexicon = serde_json::from_slice(raw).map_err(|e| LexiconError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let rules = file
        .rules
        .into_iter()
        .map(RawRule::into_rule)
        .collect::<Result<Vec<_>, _>>()?;
    Lexicon::new(file.language, rules)
}
