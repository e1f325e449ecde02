//! Deterministic mock backend driven by a playbook file.
//!
//! Chat replies are scripted per prompt tag; unmatched tags are an error,
//! never fabricated output. Embeddings are hashed character-trigram count
//! vectors (seeded, unit-normalized) so similarity behaves plausibly for
//! tests with zero model dependency. Rerank scores are distinct-token
//! overlap with the query. With fixed seeds every call sequence is
//! byte-reproducible.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text;

use super::{ChatRequest, ModelBackend};

/// Reply text that makes the mock simulate a transport failure instead.
pub const TRANSPORT_FAULT: &str = "!transport-error";

const DEFAULT_EMBEDDING_DIM: usize = 256;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlaybookEntry {
    /// Always this reply.
    Single(String),
    /// Replies consumed in call order; the last one repeats once exhausted.
    Sequence(Vec<String>),
}

/// Scripted replies plus the embedding identity of the mock.
///
/// Entry keys are prompt tags. A key ending in `*` matches any tag with that
/// prefix; exact matches win over prefixes, longer prefixes over shorter.
#[derive(Debug, Clone, Deserialize)]
pub struct MockPlaybook {
    #[serde(default)]
    pub embedding_seed: Option<u64>,
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub entries: BTreeMap<String, PlaybookEntry>,
}

fn default_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}

impl MockPlaybook {
    pub fn new(embedding_seed: u64) -> Self {
        Self {
            embedding_seed: Some(embedding_seed),
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = crate::fsutil::read_to_string(path)?;
        serde_json::from_str(&raw).map_err(|e| Error::malformed("playbook file", e.to_string()))
    }

    pub fn entry(mut self, tag: impl Into<String>, reply: impl Into<String>) -> Self {
        self.entries
            .insert(tag.into(), PlaybookEntry::Single(reply.into()));
        self
    }

    pub fn sequence(mut self, tag: impl Into<String>, replies: Vec<String>) -> Self {
        self.entries
            .insert(tag.into(), PlaybookEntry::Sequence(replies));
        self
    }

    fn lookup(&self, tag: &str) -> Option<&PlaybookEntry> {
        if let Some(entry) = self.entries.get(tag) {
            return Some(entry);
        }
        self.entries
            .iter()
            .filter(|(key, _)| {
                key.ends_with('*') && tag.starts_with(&key[..key.len() - 1])
            })
            .max_by_key(|(key, _)| key.len())
            .map(|(_, entry)| entry)
    }
}

/// One backend call as the mock saw it.
#[derive(Debug, Clone)]
pub struct RecordedCall {
    pub tag: String,
    pub temperature: f64,
    pub prompt: String,
}

pub struct MockBackend {
    playbook: MockPlaybook,
    seed: u64,
    cursors: Mutex<HashMap<String, usize>>,
    recorded: Mutex<Vec<RecordedCall>>,
}

impl MockBackend {
    pub fn new(playbook: MockPlaybook) -> Self {
        let seed = playbook.embedding_seed.unwrap_or(17);
        Self {
            playbook,
            seed,
            cursors: Mutex::new(HashMap::new()),
            recorded: Mutex::new(Vec::new()),
        }
    }

    pub fn recorded(&self) -> Vec<RecordedCall> {
        self.recorded.lock().unwrap().clone()
    }

    fn next_reply(&self, tag: &str) -> Result<String> {
        let entry = self
            .playbook
            .lookup(tag)
            .ok_or_else(|| Error::PlaybookMiss(tag.to_string()))?;
        let reply = match entry {
            PlaybookEntry::Single(s) => s.clone(),
            PlaybookEntry::Sequence(seq) => {
                if seq.is_empty() {
                    return Err(Error::PlaybookMiss(format!("{tag} (empty sequence)")));
                }
                let mut cursors = self.cursors.lock().unwrap();
                let idx = cursors.entry(tag.to_string()).or_insert(0);
                let reply = seq[(*idx).min(seq.len() - 1)].clone();
                *idx += 1;
                reply
            }
        };
        if reply == TRANSPORT_FAULT {
            return Err(Error::Transport {
                attempts: 1,
                message: format!("scripted transport fault for `{tag}`"),
            });
        }
        Ok(reply)
    }
}

impl ModelBackend for MockBackend {
    fn chat(&self, req: &ChatRequest, temperature: f64) -> Result<String> {
        let prompt = req
            .messages
            .iter()
            .map(|m| m.text.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        self.recorded.lock().unwrap().push(RecordedCall {
            tag: req.tag.clone(),
            temperature,
            prompt,
        });
        self.next_reply(&req.tag)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts
            .iter()
            .map(|t| ngram_embedding(t, self.seed, self.playbook.embedding_dim))
            .collect())
    }

    fn rerank(&self, query: &str, candidates: &[(String, String)]) -> Result<Vec<f64>> {
        let query_tokens = text::token_set(query);
        Ok(candidates
            .iter()
            .map(|(_, candidate)| {
                let tokens = text::token_set(candidate);
                query_tokens.intersection(&tokens).count() as f64
            })
            .collect())
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

/// Hashed character-trigram count vector (not yet normalized; the gateway
/// unit-normalizes on ingestion).
pub fn ngram_embedding(text_in: &str, seed: u64, dim: usize) -> Vec<f64> {
    let mut counts = vec![0.0; dim.max(1)];
    for gram in text::char_trigrams(text_in) {
        let bucket = (fnv1a64(seed, gram.as_bytes()) % dim.max(1) as u64) as usize;
        counts[bucket] += 1.0;
    }
    counts
}

/// Seeded FNV-1a, stable across platforms and runs.
fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ChatMessage;

    fn req(tag: &str) -> ChatRequest {
        ChatRequest::new(tag, vec![ChatMessage::user("hello")])
    }

    #[test]
    fn test_exact_lookup_and_miss() {
        let backend = MockBackend::new(MockPlaybook::new(1).entry("a", "reply"));
        assert_eq!(backend.chat(&req("a"), 0.1).unwrap(), "reply");
        assert!(matches!(
            backend.chat(&req("b"), 0.1),
            Err(Error::PlaybookMiss(_))
        ));
    }

    #[test]
    fn test_prefix_match_prefers_longest() {
        let backend = MockBackend::new(
            MockPlaybook::new(1)
                .entry("phase1:*", "generic")
                .entry("phase1:medical:*", "specific"),
        );
        assert_eq!(backend.chat(&req("phase1:medical:justice"), 0.1).unwrap(), "specific");
        assert_eq!(backend.chat(&req("phase1:legal:justice"), 0.1).unwrap(), "generic");
    }

    #[test]
    fn test_sequence_repeats_last() {
        let backend = MockBackend::new(
            MockPlaybook::new(1).sequence("s", vec!["one".into(), "two".into()]),
        );
        assert_eq!(backend.chat(&req("s"), 0.1).unwrap(), "one");
        assert_eq!(backend.chat(&req("s"), 0.1).unwrap(), "two");
        assert_eq!(backend.chat(&req("s"), 0.1).unwrap(), "two");
    }

    #[test]
    fn test_embedding_deterministic() {
        let a = ngram_embedding("informed consent", 17, 64);
        let b = ngram_embedding("informed consent", 17, 64);
        assert_eq!(a, b);
    }

    #[test]
    fn test_rerank_overlap_counts() {
        let backend = MockBackend::new(MockPlaybook::new(1));
        let scores = backend
            .rerank(
                "informed consent form",
                &[
                    ("c1".into(), "the consent form is signed".into()),
                    ("c2".into(), "biosafety cabinet".into()),
                ],
            )
            .unwrap();
        assert_eq!(scores, vec![2.0, 0.0]);
    }
}
