//! Weakly-supervised corruption corpus generation for semantic fidelity
//! classification: accurate, omission, repetition, hallucination, and
//! value-error examples derived from (data, text) training tuples.

use crate::linearize::extract_values;
use crate::mr::MeaningRepresentation;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorruptError {
    #[error("need at least 2 corpus records to draw a foreign sentence")]
    CorpusTooSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Accurate,
    Omission,
    Repetition,
    Hallucination,
    ValueError,
}

impl Label {
    pub const ALL: [Label; 5] = [
        Label::Accurate,
        Label::Omission,
        Label::Repetition,
        Label::Hallucination,
        Label::ValueError,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Accurate => "accurate",
            Label::Omission => "omission",
            Label::Repetition => "repetition",
            Label::Hallucination => "hallucination",
            Label::ValueError => "value_error",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionExample {
    pub data: MeaningRepresentation,
    pub text: String,
    pub label: Label,
    pub source_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceSplit {
    pub sentences: Vec<String>,
}

impl SentenceSplit {
    pub fn join(&self) -> String {
        self.sentences.join(" ")
    }
}

/// Abbreviations whose trailing period never ends a sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "No.", "etc.", "e.g.", "i.e.", "vs.",
];

/// Rule-based sentence splitter: breaks after '.', '!', '?' followed by
/// whitespace and an uppercase letter (or end of input), unless the token
/// ending at the punctuation is a listed abbreviation. Whitespace is
/// normalized so that joining with single spaces reconstructs the text.
pub fn split_sentences_with(text: &str, abbreviations: &[&str]) -> SentenceSplit {
    let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let chars: Vec<char> = normalized.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            let at_end = i + 1 == chars.len();
            let breaks = at_end
                || (chars[i + 1].is_whitespace()
                    && chars.get(i + 2).is_some_and(|n| n.is_uppercase()));
            if breaks && c == '.' {
                // Look back for the word ending here.
                let word_start = (0..=i)
                    .rev()
                    .find(|&j| j > 0 && chars[j - 1].is_whitespace())
                    .unwrap_or(0);
                let word: String = chars[word_start..=i].iter().collect();
                if abbreviations.contains(&word.as_str()) {
                    i += 1;
                    continue;
                }
            }
            if breaks {
                let sentence: String = chars[start..=i].iter().collect();
                sentences.push(sentence.trim().to_string());
                start = i + 2;
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
    }
    if sentences.is_empty() && !normalized.is_empty() {
        sentences.push(normalized);
    }
    SentenceSplit { sentences }
}

pub fn split_sentences(text: &str) -> SentenceSplit {
    split_sentences_with(text, DEFAULT_ABBREVIATIONS)
}

/// Drop the character-shortest sentence (earliest on ties). Returns None
/// for single-sentence texts.
pub fn make_omission(text: &str) -> Option<String> {
    let split = split_sentences(text);
    if split.sentences.len() < 2 {
        return None;
    }
    let shortest = split
        .sentences
        .iter()
        .enumerate()
        .min_by_key(|(i, s)| (s.chars().count(), *i))
        .map(|(i, _)| i)
        .expect("non-empty");
    let kept: Vec<&str> = split
        .sentences
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != shortest)
        .map(|(_, s)| s.as_str())
        .collect();
    Some(kept.join(" "))
}

/// Duplicate a random sentence, inserting the copy before another random
/// sentence. Returns None for single-sentence texts.
pub fn make_repetition(text: &str, rng: &mut impl Rng) -> Option<String> {
    let split = split_sentences(text);
    let n = split.sentences.len();
    if n < 2 {
        return None;
    }
    let copied = rng.gen_range(0..n);
    let mut target = rng.gen_range(0..n - 1);
    if target >= copied {
        target += 1;
    }
    let mut sentences = split.sentences;
    let duplicate = sentences[copied].clone();
    sentences.insert(target, duplicate);
    Some(sentences.join(" "))
}

/// Insert a sentence drawn from another record's text before a random
/// sentence. Redraws up to 10 times if the drawn sentence already occurs
/// in the text, then gives up (None).
pub fn make_hallucination(
    text: &str,
    other_texts: &[&str],
    rng: &mut impl Rng,
) -> Result<Option<String>, CorruptError> {
    if other_texts.is_empty() {
        return Err(CorruptError::CorpusTooSmall);
    }
    let split = split_sentences(text);
    for _ in 0..10 {
        let other = other_texts.choose(rng).expect("non-empty");
        let foreign = split_sentences(other);
        let Some(sentence) = foreign.sentences.choose(rng) else {
            continue;
        };
        if split.sentences.contains(sentence) {
            continue;
        }
        let target = rng.gen_range(0..split.sentences.len());
        let mut sentences = split.sentences.clone();
        sentences.insert(target, sentence.clone());
        return Ok(Some(sentences.join(" ")));
    }
    Ok(None)
}

/// Case-sensitive verbatim substring search with word-boundary guards.
pub fn find_word_bounded(haystack: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    let hay = haystack.as_bytes();
    let mut from = 0;
    while let Some(rel) = haystack[from..].find(needle) {
        let at = from + rel;
        let before_ok = at == 0 || !is_word_byte(hay[at - 1]);
        let end = at + needle.len();
        let after_ok = end == hay.len() || !is_word_byte(hay[end]);
        if before_ok && after_ok {
            return Some(at);
        }
        from = at + 1;
    }
    None
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Replace one data value occurring verbatim in the text with a different
/// value from the same data. Returns None when fewer than two distinct
/// values exist or none occurs in the text.
pub fn make_value_error(
    data: &MeaningRepresentation,
    text: &str,
    rng: &mut impl Rng,
) -> Option<String> {
    let mut values = extract_values(data);
    values.dedup();
    let mut distinct: Vec<String> = Vec::new();
    for v in values {
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() < 2 {
        return None;
    }
    let present: Vec<&String> = distinct
        .iter()
        .filter(|v| find_word_bounded(text, v).is_some())
        .collect();
    if present.is_empty() {
        return None;
    }
    let x = present.choose(rng)?;
    let replacements: Vec<&String> = distinct.iter().filter(|v| v != x).collect();
    let replacement = replacements.choose(rng)?;
    let at = find_word_bounded(text, x)?;
    let mut out = String::with_capacity(text.len());
    out.push_str(&text[..at]);
    out.push_str(replacement);
    out.push_str(&text[at + x.len()..]);
    Some(out)
}

/// FNV-1a over the master seed, record id, and label name; feeds the
/// per-record, per-label ChaCha streams so generation is order-independent.
fn sub_seed(seed: u64, id: &str, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&seed.to_le_bytes());
    eat(id.as_bytes());
    eat(label.as_bytes());
    h
}

pub struct SfcRecord {
    pub id: String,
    pub data: MeaningRepresentation,
    pub text: String,
}

/// Generate the 5-class SFC corpus: per record, the accurate example plus
/// every applicable corruption. Deterministic in (records, seed).
pub fn generate_sfc_corpus(records: &[SfcRecord], seed: u64) -> Vec<CorruptionExample> {
    let mut out = Vec::new();
    for (idx, record) in records.iter().enumerate() {
        let mut emit = |label: Label, text: String| {
            out.push(CorruptionExample {
                data: record.data.clone(),
                text,
                label,
                source_id: record.id.clone(),
                seed,
            });
        };
        emit(Label::Accurate, record.text.clone());
        if let Some(t) = make_omission(&record.text) {
            emit(Label::Omission, t);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &record.id, "repetition"));
        if let Some(t) = make_repetition(&record.text, &mut rng) {
            emit(Label::Repetition, t);
        }
        let others: Vec<&str> = records
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, r)| r.text.as_str())
            .collect();
        if !others.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &record.id, "hallucination"));
            if let Ok(Some(t)) = make_hallucination(&record.text, &others, &mut rng) {
                emit(Label::Hallucination, t);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &record.id, "value_error"));
        if let Some(t) = make_value_error(&record.data, &record.text, &mut rng) {
            emit(Label::ValueError, t);
        }
    }
    out
}
