//! Trainable byte-level byte-pair-encoding tokenizer.
//!
//! Operates on raw bytes with no pre-tokenization, so any input encodes
//! without unknown tokens. Reserved special tokens are matched greedily
//! before byte-level processing and are never split or merged over.

use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BpeError {
    #[error("target vocab size {target} is below the floor of {floor} (256 bytes + specials)")]
    VocabTooSmall { target: usize, floor: usize },
    #[error("token id {0} out of range")]
    InvalidId(u32),
    #[error("malformed vocab file line {0:?}")]
    MalformedVocabLine(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenSeq {
    pub ids: Vec<u32>,
}

/// A trained vocabulary: IDs 0..=255 are the single bytes, followed by
/// the reserved specials, followed by one token per merge in learned order.
#[derive(Debug, Clone, PartialEq)]
pub struct BpeVocab {
    /// Merge pairs by token id, in application order.
    merges: Vec<(u32, u32)>,
    /// Byte string for every token id.
    token_bytes: Vec<Vec<u8>>,
    specials: Vec<String>,
    special_ids: HashMap<String, u32>,
}

impl BpeVocab {
    pub fn byte_only(specials: &[String]) -> Self {
        let mut token_bytes: Vec<Vec<u8>> = (0u16..256).map(|b| vec![b as u8]).collect();
        let mut special_ids = HashMap::new();
        for s in specials {
            special_ids.insert(s.clone(), token_bytes.len() as u32);
            token_bytes.push(s.as_bytes().to_vec());
        }
        BpeVocab {
            merges: Vec::new(),
            token_bytes,
            specials: specials.to_vec(),
            special_ids,
        }
    }

    pub fn size(&self) -> usize {
        self.token_bytes.len()
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn special_id(&self, token: &str) -> Option<u32> {
        self.special_ids.get(token).copied()
    }

    pub fn is_special(&self, id: u32) -> bool {
        let first_special = 256;
        let after_specials = 256 + self.specials.len() as u32;
        id >= first_special && id < after_specials
    }

    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        self.token_bytes.get(id as usize).map(Vec::as_slice)
    }

    /// Specials sorted longest-first for greedy left-to-right matching.
    fn specials_longest_first(&self) -> Vec<(&str, u32)> {
        let mut v: Vec<(&str, u32)> = self
            .specials
            .iter()
            .map(|s| (s.as_str(), self.special_ids[s]))
            .collect();
        v.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        v
    }
}

/// Split raw bytes into alternating plain segments and special-token ids.
enum Segment<'a> {
    Plain(&'a [u8]),
    Special(u32),
}

fn split_on_specials<'a>(bytes: &'a [u8], specials: &[(&str, u32)]) -> Vec<Segment<'a>> {
    let mut segments = Vec::new();
    let mut plain_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let mut matched = None;
        for (surface, id) in specials {
            let s = surface.as_bytes();
            if bytes[i..].starts_with(s) {
                matched = Some((s.len(), *id));
                break;
            }
        }
        if let Some((len, id)) = matched {
            if plain_start < i {
                segments.push(Segment::Plain(&bytes[plain_start..i]));
            }
            segments.push(Segment::Special(id));
            i += len;
            plain_start = i;
        } else {
            i += 1;
        }
    }
    if plain_start < bytes.len() {
        segments.push(Segment::Plain(&bytes[plain_start..]));
    }
    segments
}

/// Apply one merge rule everywhere in a token sequence, left to right.
fn apply_merge(ids: &mut Vec<u32>, pair: (u32, u32), new_id: u32) {
    let mut out = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        if i + 1 < ids.len() && ids[i] == pair.0 && ids[i + 1] == pair.1 {
            out.push(new_id);
            i += 2;
        } else {
            out.push(ids[i]);
            i += 1;
        }
    }
    *ids = out;
}

/// Train a byte-level BPE vocabulary by greedy highest-frequency pair
/// merging. Ties are broken by the lexicographically smaller merged byte
/// string. Training stops at `target_vocab_size` or when no pair occurs
/// at least twice.
pub fn train_bpe(
    corpus: &[String],
    target_vocab_size: usize,
    specials: &[String],
) -> Result<BpeVocab, BpeError> {
    let floor = 256 + specials.len();
    if target_vocab_size < floor {
        return Err(BpeError::VocabTooSmall {
            target: target_vocab_size,
            floor,
        });
    }
    let mut vocab = BpeVocab::byte_only(specials);
    let special_list = vocab.specials_longest_first();

    // Specials act as segment boundaries: merges never cross them.
    let mut streams: Vec<Vec<u32>> = corpus
        .iter()
        .flat_map(|text| {
            split_on_specials(text.as_bytes(), &special_list)
                .into_iter()
                .filter_map(|seg| match seg {
                    Segment::Plain(b) => Some(b.iter().map(|&x| x as u32).collect()),
                    Segment::Special(_) => None,
                })
        })
        .collect();

    while vocab.size() < target_vocab_size {
        let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
        for stream in &streams {
            for w in stream.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
        let merged_bytes = |pair: &(u32, u32)| {
            let mut b = vocab.token_bytes[pair.0 as usize].clone();
            b.extend_from_slice(&vocab.token_bytes[pair.1 as usize]);
            b
        };
        let best = pair_counts
            .iter()
            .filter(|(_, &c)| c >= 2)
            .filter(|(pair, _)| {
                // Never synthesize a token whose bytes contain a special.
                let b = merged_bytes(pair);
                !vocab
                    .specials
                    .iter()
                    .any(|s| b.windows(s.len()).any(|w| w == s.as_bytes()))
            })
            .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| merged_bytes(pb).cmp(&merged_bytes(pa))))
            .map(|(pair, _)| *pair);
        let Some(pair) = best else { break };
        let new_id = vocab.size() as u32;
        vocab.merges.push(pair);
        vocab.token_bytes.push(merged_bytes(&pair));
        for stream in &mut streams {
            apply_merge(stream, pair, new_id);
        }
    }
    Ok(vocab)
}

/// Encode raw bytes. Total over all inputs: unmatched bytes stay as
/// single-byte tokens.
pub fn encode_bytes(vocab: &BpeVocab, bytes: &[u8]) -> TokenSeq {
    let special_list = vocab.specials_longest_first();
    let first_merge_id = 256 + vocab.specials.len() as u32;
    let mut ids = Vec::new();
    for segment in split_on_specials(bytes, &special_list) {
        match segment {
            Segment::Special(id) => ids.push(id),
            Segment::Plain(b) => {
                let mut seg: Vec<u32> = b.iter().map(|&x| x as u32).collect();
                for (k, pair) in vocab.merges.iter().enumerate() {
                    apply_merge(&mut seg, *pair, first_merge_id + k as u32);
                }
                ids.extend(seg);
            }
        }
    }
    TokenSeq { ids }
}

pub fn encode(vocab: &BpeVocab, text: &str) -> TokenSeq {
    encode_bytes(vocab, text.as_bytes())
}

pub fn decode_bytes(vocab: &BpeVocab, seq: &TokenSeq) -> Result<Vec<u8>, BpeError> {
    let mut out = Vec::new();
    for &id in &seq.ids {
        let bytes = vocab
            .token_bytes(id)
            .ok_or(BpeError::InvalidId(id))?;
        out.extend_from_slice(bytes);
    }
    Ok(out)
}

/// Decode to a string; token bytes are expected to form valid UTF-8
/// (invalid sequences are replaced, use [`decode_bytes`] for exactness).
pub fn decode(vocab: &BpeVocab, seq: &TokenSeq) -> Result<String, BpeError> {
    Ok(String::from_utf8_lossy(&decode_bytes(vocab, seq)?).into_owned())
}

// ---------------------------------------------------------------------------
// Vocabulary file format: "#specials" section with one token per line,
// then "#merges" with one hex-encoded "left right" pair per line.
// ---------------------------------------------------------------------------

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn from_hex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len() / 2)
        .map(|i| u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok())
        .collect()
}

impl BpeVocab {
    pub fn to_file_format(&self) -> String {
        let mut out = String::from("#specials\n");
        for s in &self.specials {
            out.push_str(s);
            out.push('\n');
        }
        out.push_str("#merges\n");
        for &(l, r) in &self.merges {
            out.push_str(&to_hex(&self.token_bytes[l as usize]));
            out.push(' ');
            out.push_str(&to_hex(&self.token_bytes[r as usize]));
            out.push('\n');
        }
        out
    }

    pub fn from_file_format(text: &str) -> Result<Self, BpeError> {
        let mut specials = Vec::new();
        let mut merge_bytes: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        let mut section = "";
        for line in text.lines() {
            if line == "#specials" || line == "#merges" {
                section = line;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match section {
                "#specials" => specials.push(line.to_string()),
                "#merges" => {
                    let (l, r) = line
                        .split_once(' ')
                        .ok_or_else(|| BpeError::MalformedVocabLine(line.to_string()))?;
                    let l = from_hex(l)
                        .ok_or_else(|| BpeError::MalformedVocabLine(line.to_string()))?;
                    let r = from_hex(r)
                        .ok_or_else(|| BpeError::MalformedVocabLine(line.to_string()))?;
                    merge_bytes.push((l, r));
                }
                _ => return Err(BpeError::MalformedVocabLine(line.to_string())),
            }
        }
        let mut vocab = BpeVocab::byte_only(&specials);
        // Rebuild merge pairs by resolving byte strings to token ids; every
        // operand is either a byte or an earlier merge result.
        let mut by_bytes: HashMap<Vec<u8>, u32> = vocab
            .token_bytes
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i as u32))
            .collect();
        for (l, r) in merge_bytes {
            let lid = *by_bytes
                .get(&l)
                .ok_or_else(|| BpeError::MalformedVocabLine(to_hex(&l)))?;
            let rid = *by_bytes
                .get(&r)
                .ok_or_else(|| BpeError::MalformedVocabLine(to_hex(&r)))?;
            let new_id = vocab.size() as u32;
            let mut merged = l.clone();
            merged.extend_from_slice(&r);
            vocab.merges.push((lid, rid));
            vocab.token_bytes.push(merged.clone());
            by_bytes.insert(merged, new_id);
        }
        Ok(vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn specials(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn trains_single_merge_on_aaab() {
        let vocab = train_bpe(&["aaab".to_string()], 258, &[]).unwrap();
        // Pairs: (a,a) twice, (a,b) once -> one merge ("a","a"); afterwards
        // no pair occurs twice, so training stops below the target.
        assert_eq!(vocab.merge_count(), 1);
        assert_eq!(vocab.token_bytes(256).unwrap(), b"aa");
    }

    #[test]
    fn floor_vocab_has_no_merges() {
        let vocab = train_bpe(&["abcabc".to_string()], 256, &[]).unwrap();
        assert_eq!(vocab.merge_count(), 0);
        assert_eq!(vocab.size(), 256);
    }

    #[test]
    fn rejects_too_small_target() {
        assert_eq!(
            train_bpe(&["x".to_string()], 256, &specials(&["<data>"])),
            Err(BpeError::VocabTooSmall {
                target: 256,
                floor: 257
            })
        );
    }

    #[test]
    fn special_in_corpus_stays_atomic() {
        let sp = specials(&["<data>"]);
        let vocab = train_bpe(&["<data> abc <data> abc".to_string()], 300, &sp).unwrap();
        let seq = encode(&vocab, "<data> abc");
        assert_eq!(seq.ids[0], vocab.special_id("<data>").unwrap());
        // No merged token contains the special's surface bytes.
        for id in 256 + sp.len() as u32..vocab.size() as u32 {
            let b = vocab.token_bytes(id).unwrap();
            assert!(!b.windows(6).any(|w| w == b"<data>"));
        }
    }

    #[test]
    fn encodes_aaab_with_learned_merge() {
        let vocab = train_bpe(&["aaab".to_string()], 258, &[]).unwrap();
        let seq = encode(&vocab, "aaab");
        assert_eq!(seq.ids, vec![256, b'a' as u32, b'b' as u32]);
    }

    #[test]
    fn reserved_special_encodes_first() {
        let vocab = train_bpe(&["Aarhus".to_string()], 260, &specials(&["<data>"])).unwrap();
        let seq = encode(&vocab, "<data> Aarhus");
        assert_eq!(seq.ids[0], vocab.special_id("<data>").unwrap());
    }

    #[test]
    fn empty_sequence_decodes_to_empty() {
        let vocab = BpeVocab::byte_only(&[]);
        assert_eq!(decode(&vocab, &TokenSeq { ids: vec![] }).unwrap(), "");
    }

    #[test]
    fn invalid_id_is_an_error() {
        let vocab = BpeVocab::byte_only(&[]);
        assert_eq!(
            decode(&vocab, &TokenSeq { ids: vec![256] }),
            Err(BpeError::InvalidId(256))
        );
    }

    #[test]
    fn emoji_round_trips() {
        let vocab = train_bpe(&["hello".to_string()], 300, &[]).unwrap();
        let text = "héllo 🌍 <tags> & bytes";
        let seq = encode(&vocab, text);
        assert_eq!(decode(&vocab, &seq).unwrap(), text);
    }

    #[test]
    fn vocab_file_round_trip_is_bit_exact() {
        let sp = specials(&["<data>", "<text>", "<eos>"]);
        let vocab = train_bpe(
            &["the quick brown fox the quick".to_string(), "aaabbb".to_string()],
            300,
            &sp,
        )
        .unwrap();
        let dump = vocab.to_file_format();
        let reloaded = BpeVocab::from_file_format(&dump).unwrap();
        assert_eq!(reloaded, vocab);
        assert_eq!(reloaded.to_file_format(), dump);
    }

    proptest! {
        #[test]
        fn round_trip_random_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let vocab = train_bpe(
                &["some training text for merges".to_string()],
                280,
                &specials(&["<data>", "<text>"]),
            ).unwrap();
            let seq = encode_bytes(&vocab, &bytes);
            prop_assert_eq!(decode_bytes(&vocab, &seq).unwrap(), bytes);
        }

        #[test]
        fn more_merges_never_lengthen(text in "[ab c]{0,60}") {
            let corpus = vec!["abcabcabc ababab ccc".to_string()];
            let small = train_bpe(&corpus, 258, &[]).unwrap();
            let large = train_bpe(&corpus, 264, &[]).unwrap();
            prop_assume!(large.merge_count() > small.merge_count());
            prop_assert!(encode(&large, &text).ids.len() <= encode(&small, &text).ids.len());
        }
    }
}
