//! Corpus data model and ingestion.
//!
//! A corpus file is JSON of the shape
//!
//! ```json
//! {"corpus_id": "...", "language": "fr",
//!  "threads": [{"thread_id": "...",
//!               "messages": [{"message_id": "...", "author": "...",
//!                             "parent_id": null, "timestamp": null,
//!                             "body": "..."}]}]}
//! ```
//!
//! Unknown fields are rejected. Within a thread the request is the unique
//! root. A message whose `parent_id` is explicitly `null` declares itself a
//! root; a message that omits `parent_id` altogether is the root when it comes
//! first in the thread and a direct reply to the root otherwise, so flat
//! reply lists parse as-is.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub const DEFAULT_LANGUAGE: &str = "fr";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("message `{message_id}` in thread `{thread_id}` has parent `{parent_id}`, which is not a message of that thread")]
    DanglingParent {
        thread_id: String,
        message_id: String,
        parent_id: String,
    },
    #[error("thread `{thread_id}` has more than one root message (`{first}`, `{second}`)")]
    MultipleRoots {
        thread_id: String,
        first: String,
        second: String,
    },
    #[error("thread `{thread_id}` has no root message")]
    MissingRoot { thread_id: String },
    #[error(
        "message `{message_id}` in thread `{thread_id}` does not reach the root (parent cycle)"
    )]
    Cycle {
        thread_id: String,
        message_id: String,
    },
}

impl CorpusError {
    fn from_json(err: serde_json::Error) -> Self {
        CorpusError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// A forum post. `parent_id` is always resolved: flat replies point at the
/// root after parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub message_id: String,
    pub author: String,
    pub parent_id: Option<String>,
    pub timestamp: Option<String>,
    pub body: String,
}

/// One request and the tree of replies answering it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thread {
    thread_id: String,
    /// File order.
    messages: Vec<Message>,
    root: usize,
    /// Child indices per message, in file order.
    children: Vec<Vec<usize>>,
}

impl Thread {
    /// Builds a thread from messages in file order, validating the tree.
    pub fn new(thread_id: impl Into<String>, messages: Vec<Message>) -> Result<Self, CorpusError> {
        let thread_id = thread_id.into();
        let mut index = HashMap::with_capacity(messages.len());
        for (i, m) in messages.iter().enumerate() {
            if index.insert(m.message_id.as_str(), i).is_some() {
                return Err(CorpusError::DuplicateId {
                    kind: "message",
                    id: m.message_id.clone(),
                });
            }
        }

        let mut root: Option<usize> = None;
        let mut children = vec![Vec::new(); messages.len()];
        for (i, m) in messages.iter().enumerate() {
            match &m.parent_id {
                None => {
                    if let Some(first) = root {
                        return Err(CorpusError::MultipleRoots {
                            thread_id,
                            first: messages[first].message_id.clone(),
                            second: m.message_id.clone(),
                        });
                    }
                    root = Some(i);
                }
                Some(parent) => {
                    let Some(&p) = index.get(parent.as_str()) else {
                        return Err(CorpusError::DanglingParent {
                            thread_id,
                            message_id: m.message_id.clone(),
                            parent_id: parent.clone(),
                        });
                    };
                    children[p].push(i);
                }
            }
        }
        let Some(root) = root else {
            return Err(CorpusError::MissingRoot { thread_id });
        };

        let thread = Thread {
            thread_id,
            messages,
            root,
            children,
        };
        let reached = thread.order().len();
        if reached != thread.messages.len() {
            let seen: HashSet<usize> = thread.order().into_iter().collect();
            let stray = (0..thread.messages.len())
                .find(|i| !seen.contains(i))
                .expect("unreached message exists");
            return Err(CorpusError::Cycle {
                thread_id: thread.thread_id,
                message_id: thread.messages[stray].message_id.clone(),
            });
        }
        Ok(thread)
    }

    pub fn thread_id(&self) -> &str {
        &self.thread_id
    }

    pub fn request(&self) -> &Message {
        &self.messages[self.root]
    }

    /// Messages in file order.
    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Direct replies of `message_id`, in file order.
    pub fn children_of(&self, message_id: &str) -> Vec<&Message> {
        self.messages
            .iter()
            .position(|m| m.message_id == message_id)
            .map(|i| {
                self.children[i]
                    .iter()
                    .map(|&c| &self.messages[c])
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Depth-first, parent before child, siblings in file order.
    fn order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.messages.len());
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.children[i].iter().rev());
        }
        out
    }
}

/// Request first, then each reply followed by its own sub-replies.
pub fn traversal(thread: &Thread) -> Vec<&Message> {
    thread
        .order()
        .into_iter()
        .map(|i| &thread.messages[i])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub corpus_id: String,
    pub language: String,
    threads: Vec<Thread>,
}

impl Corpus {
    pub fn new(
        corpus_id: impl Into<String>,
        language: impl Into<String>,
        threads: Vec<Thread>,
    ) -> Result<Self, CorpusError> {
        let mut thread_ids = HashSet::new();
        let mut message_ids = HashSet::new();
        for t in &threads {
            if !thread_ids.insert(t.thread_id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    kind: "thread",
                    id: t.thread_id.clone(),
                });
            }
            for m in &t.messages {
                if !message_ids.insert(m.message_id.as_str()) {
                    return Err(CorpusError::DuplicateId {
                        kind: "message",
                        id: m.message_id.clone(),
                    });
                }
            }
        }
        Ok(Corpus {
            corpus_id: corpus_id.into(),
            language: language.into(),
            threads,
        })
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn thread(&self, thread_id: &str) -> Option<&Thread> {
        self.threads.iter().find(|t| t.thread_id == thread_id)
    }

    pub fn message_count(&self) -> usize {
        self.threads.iter().map(Thread::len).sum()
    }

    /// Serializes back to the corpus file format, parent ids written
    /// explicitly. Re-parsing the output yields an equal corpus.
    pub fn to_json(&self) -> String {
        let file = CorpusOut {
            corpus_id: &self.corpus_id,
            language: &self.language,
            threads: self
                .threads
                .iter()
                .map(|t| ThreadOut {
                    thread_id: &t.thread_id,
                    messages: &t.messages,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("corpus serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct CorpusOut<'a> {
    corpus_id: &'a str,
    language: &'a str,
    threads: Vec<ThreadOut<'a>>,
}

#[derive(Serialize)]
struct ThreadOut<'a> {
    thread_id: &'a str,
    messages: &'a [Message],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    corpus_id: String,
    #[serde(default = "default_language")]
    language: String,
    threads: Vec<RawThread>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThread {
    thread_id: String,
    messages: Vec<RawMessage>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMessage {
    message_id: String,
    #[serde(default)]
    author: String,
    /// `None` = field absent, `Some(None)` = explicit null.
    #[serde(default, deserialize_with = "present")]
    parent_id: Option<Option<String>>,
    #[serde(default)]
    timestamp: Option<String>,
    body: String,
}

fn default_language() -> String {
    DEFAULT_LANGUAGE.to_string()
}

fn present<'de, D>(d: D) -> Result<Option<Option<String>>, D::Error>
where
    D: Deserializer<'de>,
{
    Option::<String>::deserialize(d).map(Some)
}

pub fn parse_corpus(raw: &[u8]) -> Result<Corpus, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let (line, column) = line_col(raw, e.valid_up_to());
        CorpusError::Parse {
            line,
            column,
            message: format!("invalid UTF-8: {e}"),
        }
    })?;
    let file: RawCorpus = serde_json::from_str(text).map_err(CorpusError::from_json)?;

    let mut threads = Vec::with_capacity(file.threads.len());
    for raw_thread in file.threads {
        let root_id = raw_thread
            .messages
            .iter()
            .enumerate()
            .find(|(i, m)| matches!(m.parent_id, Some(None)) || (*i == 0 && m.parent_id.is_none()))
            .map(|(_, m)| m.message_id.clone());
        let messages = raw_thread
            .messages
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let parent_id = match m.parent_id {
                    Some(p) => p,
                    None if i == 0 => None,
                    None => root_id.clone(),
                };
                Message {
                    message_id: m.message_id,
                    author: m.author,
                    parent_id,
                    timestamp: m.timestamp,
                    body: m.body,
                }
            })
            .collect();
        threads.push(Thread::new(raw_thread.thread_id, messages)?);
    }
    Corpus::new(file.corpus_id, file.language, threads)
}

/// 1-based line and column of byte offset `at`.
pub(crate) fn line_col(raw: &[u8], at: usize) -> (usize, usize) {
    let before = &raw[..at.min(raw.len())];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = before.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
    (line, column)
}
