//! Desk-scale reference models behind the two decoding contracts: an
//! interpolated-backoff n-gram scorer and a feature-based 5-class
//! fidelity classifier.

use crate::corrupt::{find_word_bounded, split_sentences, CorruptionExample, Label};
use crate::decode::FidelityClassifier;
use crate::linearize::{extract_values, LinearizedData};
use crate::sequence::{AutoregressiveScorer, TrainingSequence};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ToyModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training corpus contains a single label; need at least two")]
    DegenerateCorpus,
    #[error("malformed model file line {0:?}")]
    MalformedModelLine(String),
}

// ---------------------------------------------------------------------------
// N-gram scorer
// ---------------------------------------------------------------------------

/// Interpolated-backoff n-gram model over token ids.
///
/// The conditional at each order blends the observed counts with the
/// next-lower order: P_k(w|ctx) = (c(ctx,w) + s * P_{k-1}(w|ctx')) /
/// (c(ctx) + s), grounded in an additively smoothed unigram. Every
/// distribution sums to 1 and assigns nonzero mass to every token.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramScorer {
    pub order: usize,
    pub smoothing: f64,
    vocab_size: usize,
    /// counts[k] maps a context of length k to its continuation counts.
    counts: Vec<BTreeMap<Vec<u32>, BTreeMap<u32, u64>>>,
    /// Total continuation count per context, per context length.
    totals: Vec<BTreeMap<Vec<u32>, u64>>,
}

pub const DEFAULT_NGRAM_ORDER: usize = 4;
pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// Accumulate counts over full sequences (data and text) so that text
/// generation conditions on data tokens through the n-gram window.
pub fn train_ngram(
    corpus: &[TrainingSequence],
    vocab_size: usize,
    order: usize,
    smoothing: f64,
) -> Result<NgramScorer, ToyModelError> {
    if corpus.is_empty() {
        return Err(ToyModelError::EmptyCorpus);
    }
    assert!(order >= 1, "order must be at least 1");
    let mut counts: Vec<BTreeMap<Vec<u32>, BTreeMap<u32, u64>>> =
        (0..order).map(|_| BTreeMap::new()).collect();
    let mut totals: Vec<BTreeMap<Vec<u32>, u64>> = (0..order).map(|_| BTreeMap::new()).collect();
    for seq in corpus {
        let ids = &seq.ids;
        for i in 0..ids.len() {
            for ctx_len in 0..order {
                if i < ctx_len {
                    continue;
                }
                let ctx = ids[i - ctx_len..i].to_vec();
                *counts[ctx_len]
                    .entry(ctx.clone())
                    .or_default()
                    .entry(ids[i])
                    .or_insert(0) += 1;
                *totals[ctx_len].entry(ctx).or_insert(0) += 1;
            }
        }
    }
    Ok(NgramScorer {
        order,
        smoothing,
        vocab_size,
        counts,
        totals,
    })
}

impl NgramScorer {
    fn unigram(&self) -> Vec<f64> {
        let v = self.vocab_size as f64;
        let total = *self.totals[0].get(&Vec::new()).unwrap_or(&0) as f64;
        let empty = BTreeMap::new();
        let seen = self.counts[0].get(&Vec::new()).unwrap_or(&empty);
        (0..self.vocab_size)
            .map(|w| {
                let c = *seen.get(&(w as u32)).unwrap_or(&0) as f64;
                (c + self.smoothing) / (total + self.smoothing * v)
            })
            .collect()
    }
}

impl AutoregressiveScorer for NgramScorer {
    fn next_distribution(&self, prefix: &[u32]) -> Vec<f64> {
        let mut dist = self.unigram();
        let max_ctx = (self.order - 1).min(prefix.len());
        for ctx_len in 1..=max_ctx {
            let ctx = prefix[prefix.len() - ctx_len..].to_vec();
            let total = *self.totals[ctx_len].get(&ctx).unwrap_or(&0) as f64;
            let empty = BTreeMap::new();
            let seen = self.counts[ctx_len].get(&ctx).unwrap_or(&empty);
            let denom = total + self.smoothing;
            dist = (0..self.vocab_size)
                .map(|w| {
                    let c = *seen.get(&(w as u32)).unwrap_or(&0) as f64;
                    (c + self.smoothing * dist[w]) / denom
                })
                .collect();
        }
        dist
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

impl NgramScorer {
    pub fn to_file_format(&self) -> String {
        let mut out = String::from("#ngram\n");
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "smoothing {}", self.smoothing);
        let _ = writeln!(out, "vocab {}", self.vocab_size);
        out.push_str("#counts\n");
        for (ctx_len, table) in self.counts.iter().enumerate() {
            for (ctx, conts) in table {
                for (tok, count) in conts {
                    let ctx_str = if ctx.is_empty() {
                        "-".to_string()
                    } else {
                        ctx.iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    let _ = writeln!(out, "{ctx_len} {ctx_str} {tok} {count}");
                }
            }
        }
        out
    }

    pub fn from_file_format(text: &str) -> Result<Self, ToyModelError> {
        let malformed = |l: &str| ToyModelError::MalformedModelLine(l.to_string());
        let mut order = 0usize;
        let mut smoothing = 0.0f64;
        let mut vocab_size = 0usize;
        let mut counts: Vec<BTreeMap<Vec<u32>, BTreeMap<u32, u64>>> = Vec::new();
        let mut totals: Vec<BTreeMap<Vec<u32>, u64>> = Vec::new();
        let mut in_counts = false;
        for line in text.lines() {
            match line {
                "#ngram" => continue,
                "#counts" => {
                    in_counts = true;
                    counts = (0..order).map(|_| BTreeMap::new()).collect();
                    totals = (0..order).map(|_| BTreeMap::new()).collect();
                    continue;
                }
                "" => continue,
                _ => {}
            }
            let parts: Vec<&str> = line.split(' ').collect();
            if !in_counts {
                match parts.as_slice() {
                    ["order", v] => order = v.parse().map_err(|_| malformed(line))?,
                    ["smoothing", v] => smoothing = v.parse().map_err(|_| malformed(line))?,
                    ["vocab", v] => vocab_size = v.parse().map_err(|_| malformed(line))?,
                    _ => return Err(malformed(line)),
                }
                continue;
            }
            let [ctx_len, ctx_str, tok, count] = parts.as_slice() else {
                return Err(malformed(line));
            };
            let ctx_len: usize = ctx_len.parse().map_err(|_| malformed(line))?;
            let ctx: Vec<u32> = if *ctx_str == "-" {
                Vec::new()
            } else {
                ctx_str
                    .split(',')
                    .map(|c| c.parse().map_err(|_| malformed(line)))
                    .collect::<Result<_, _>>()?
            };
            let tok: u32 = tok.parse().map_err(|_| malformed(line))?;
            let count: u64 = count.parse().map_err(|_| malformed(line))?;
            if ctx_len >= counts.len() {
                return Err(malformed(line));
            }
            *counts[ctx_len]
                .entry(ctx.clone())
                .or_default()
                .entry(tok)
                .or_insert(0) += count;
            *totals[ctx_len].entry(ctx).or_insert(0) += count;
        }
        if order == 0 || vocab_size == 0 {
            return Err(ToyModelError::MalformedModelLine("missing header".into()));
        }
        Ok(NgramScorer {
            order,
            smoothing,
            vocab_size,
            counts,
            totals,
        })
    }
}

// ---------------------------------------------------------------------------
// Feature-based fidelity classifier
// ---------------------------------------------------------------------------

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "it", "its", "in", "on", "at", "of", "and",
    "or", "to", "for", "with", "near", "by", "has", "have", "had", "be", "been", "that", "this",
    "not", "no", "you", "can", "find", "there", "also", "very",
];

pub const FEATURE_DIM: usize = 6;

/// Inputs needed to featurize one (data, text) pair.
pub struct FidelityInput<'a> {
    pub values: &'a [String],
    pub text: &'a str,
}

fn tokenize_lower(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn count_word_bounded(haystack: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    let mut count = 0;
    let mut start = 0;
    while start < haystack.len() {
        match find_word_bounded(&haystack[start..], needle) {
            Some(at) => {
                count += 1;
                start += at + needle.len();
            }
            None => break,
        }
    }
    count
}

/// Multinomial linear classifier over hand-built fidelity features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClassifierModel {
    /// One weight vector per label, FEATURE_DIM weights plus a bias.
    pub weights: Vec<Vec<f64>>,
    /// Mean sentence count of the training texts.
    pub expected_sentences: f64,
    /// Tokens common across training texts; not evidence of hallucination.
    pub lexicon: HashSet<String>,
}

impl FeatureClassifierModel {
    /// Feature vector: value coverage, duplicate-sentence flag, sentence
    /// count ratio, foreign-content share, and excess value multiplicity.
    pub fn features(&self, input: &FidelityInput) -> [f64; FEATURE_DIM] {
        let text_lower = input.text.to_lowercase();
        let values_lower: Vec<String> = input.values.iter().map(|v| v.to_lowercase()).collect();

        let covered = values_lower
            .iter()
            .filter(|v| find_word_bounded(&text_lower, v).is_some())
            .count();
        let coverage = if values_lower.is_empty() {
            1.0
        } else {
            covered as f64 / values_lower.len() as f64
        };

        let sentences = split_sentences(input.text).sentences;
        let mut seen = HashSet::new();
        let duplicate = sentences.iter().any(|s| !seen.insert(s.clone()));

        let ratio = sentences.len() as f64 / self.expected_sentences.max(1.0);

        let value_tokens: HashSet<String> = values_lower
            .iter()
            .flat_map(|v| tokenize_lower(v))
            .collect();
        let tokens = tokenize_lower(input.text);
        let content: Vec<&String> = tokens
            .iter()
            .filter(|t| t.len() >= 3 && !STOPWORDS.contains(&t.as_str()))
            .collect();
        let foreign = if content.is_empty() {
            0.0
        } else {
            content
                .iter()
                .filter(|t| !value_tokens.contains(t.as_str()) && !self.lexicon.contains(t.as_str()))
                .count() as f64
                / content.len() as f64
        };

        // A value realized more often than the data licenses it.
        let mut expected_mult: HashMap<&str, usize> = HashMap::new();
        for v in &values_lower {
            *expected_mult.entry(v.as_str()).or_insert(0) += 1;
        }
        let excess = expected_mult
            .iter()
            .map(|(v, &exp)| count_word_bounded(&text_lower, v).saturating_sub(exp))
            .max()
            .unwrap_or(0);
        let excess = (excess as f64).min(3.0) / 3.0;

        [
            coverage,
            if duplicate { 1.0 } else { 0.0 },
            ratio,
            foreign,
            excess,
            1.0, // bias
        ]
    }

    fn scores(&self, features: &[f64; FEATURE_DIM]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(features.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn classify_values(&self, values: &[String], text: &str) -> Label {
        let f = self.features(&FidelityInput { values, text });
        let scores = self.scores(&f);
        let best = scores
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.partial_cmp(b)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        Label::ALL[best]
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Train with full-batch gradient descent on the softmax cross-entropy.
/// Deterministic: zero init, fixed example order.
pub fn train_classifier(
    corpus: &[CorruptionExample],
    epochs: usize,
    learning_rate: f64,
) -> Result<FeatureClassifierModel, ToyModelError> {
    if corpus.is_empty() {
        return Err(ToyModelError::EmptyCorpus);
    }
    let labels: HashSet<Label> = corpus.iter().map(|e| e.label).collect();
    if labels.len() < 2 {
        return Err(ToyModelError::DegenerateCorpus);
    }

    let accurate: Vec<&CorruptionExample> = corpus
        .iter()
        .filter(|e| e.label == Label::Accurate)
        .collect();
    let reference = if accurate.is_empty() {
        corpus.iter().collect()
    } else {
        accurate
    };
    let expected_sentences = reference
        .iter()
        .map(|e| split_sentences(&e.text).sentences.len() as f64)
        .sum::<f64>()
        / reference.len() as f64;

    // Common lexicon: lowercased tokens appearing in at least 20% of the
    // reference texts.
    let mut doc_freq: HashMap<String, usize> = HashMap::new();
    for e in &reference {
        let uniq: HashSet<String> = tokenize_lower(&e.text).into_iter().collect();
        for t in uniq {
            *doc_freq.entry(t).or_insert(0) += 1;
        }
    }
    let threshold = (reference.len() as f64 * 0.2).ceil() as usize;
    let lexicon: HashSet<String> = doc_freq
        .into_iter()
        .filter(|(_, c)| *c >= threshold.max(2))
        .map(|(t, _)| t)
        .collect();

    let mut model = FeatureClassifierModel {
        weights: vec![vec![0.0; FEATURE_DIM]; Label::ALL.len()],
        expected_sentences,
        lexicon,
    };

    let examples: Vec<([f64; FEATURE_DIM], usize)> = corpus
        .iter()
        .map(|e| {
            let values = extract_values(&e.data);
            let f = model.features(&FidelityInput {
                values: &values,
                text: &e.text,
            });
            let y = Label::ALL.iter().position(|l| *l == e.label).expect("known label");
            (f, y)
        })
        .collect();

    let n = examples.len() as f64;
    for _ in 0..epochs {
        let mut grad = vec![vec![0.0; FEATURE_DIM]; Label::ALL.len()];
        for (f, y) in &examples {
            let probs = softmax(&model.scores(f));
            for (k, p) in probs.iter().enumerate() {
                let err = p - if k == *y { 1.0 } else { 0.0 };
                for (j, x) in f.iter().enumerate() {
                    grad[k][j] += err * x / n;
                }
            }
        }
        for (wk, gk) in model.weights.iter_mut().zip(&grad) {
            for (w, g) in wk.iter_mut().zip(gk) {
                *w -= learning_rate * g;
            }
        }
    }
    Ok(model)
}

/// Mean cross-entropy of the model on a corpus; used to check that
/// training makes progress.
pub fn classifier_loss(
    model: &FeatureClassifierModel,
    corpus: &[CorruptionExample],
) -> f64 {
    let mut loss = 0.0;
    for e in corpus {
        let values = extract_values(&e.data);
        let f = model.features(&FidelityInput {
            values: &values,
            text: &e.text,
        });
        let probs = softmax(&model.scores(&f));
        let y = Label::ALL.iter().position(|l| *l == e.label).expect("known label");
        loss -= probs[y].ln();
    }
    loss / corpus.len() as f64
}

/// Adapter implementing the decoding contract: values are extracted from
/// the linearized data's "[value]" and surface spans.
pub struct LinearizedFidelityClassifier {
    pub model: FeatureClassifierModel,
}

/// Recover data values from a linearized rendering: bracketed "[v]"
/// spans when present, otherwise the spans between special tokens.
pub fn values_from_linearized(data: &LinearizedData) -> Vec<String> {
    let mut values = Vec::new();
    let mut rest = data.text.as_str();
    while let Some(open) = rest.find('[') {
        if let Some(close) = rest[open + 1..].find(']') {
            values.push(rest[open + 1..open + 1 + close].to_string());
            rest = &rest[open + 1 + close + 1..];
        } else {
            break;
        }
    }
    if !values.is_empty() {
        return values;
    }
    // No bracketed values: take the text spans between special tokens,
    // stripped of template parentheses.
    let mut spans = Vec::new();
    let mut cursor = 0usize;
    for (offset, token) in &data.special_positions {
        if *offset > cursor {
            spans.push(data.text[cursor..*offset].to_string());
        }
        cursor = offset + token.len();
    }
    if cursor < data.text.len() {
        spans.push(data.text[cursor..].to_string());
    }
    for span in spans {
        let cleaned = span
            .trim_matches(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .to_string();
        if !cleaned.is_empty() {
            values.push(cleaned);
        }
    }
    values
}

impl FidelityClassifier for LinearizedFidelityClassifier {
    fn classify(&self, data: &LinearizedData, text: &str) -> Label {
        let values = values_from_linearized(data);
        self.model.classify_values(&values, text)
    }
}

impl FeatureClassifierModel {
    pub fn to_file_format(&self) -> String {
        let mut out = String::from("#classifier\n");
        let _ = writeln!(out, "expected_sentences {}", self.expected_sentences);
        let mut lex: Vec<&String> = self.lexicon.iter().collect();
        lex.sort();
        let _ = writeln!(
            out,
            "lexicon {}",
            lex.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
        );
        for (label, w) in Label::ALL.iter().zip(&self.weights) {
            let _ = writeln!(
                out,
                "weights {} {}",
                label,
                w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            );
        }
        out
    }

    pub fn from_file_format(text: &str) -> Result<Self, ToyModelError> {
        let malformed = |l: &str| ToyModelError::MalformedModelLine(l.to_string());
        let mut expected_sentences = 1.0;
        let mut lexicon = HashSet::new();
        let mut weights = vec![vec![0.0; FEATURE_DIM]; Label::ALL.len()];
        for line in text.lines() {
            if line == "#classifier" || line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("expected_sentences ") {
                expected_sentences = v.parse().map_err(|_| malformed(line))?;
            } else if let Some(v) = line.strip_prefix("lexicon ") {
                lexicon = v
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect();
            } else if let Some(v) = line.strip_prefix("weights ") {
                let (label, ws) = v.split_once(' ').ok_or_else(|| malformed(line))?;
                let idx = Label::ALL
                    .iter()
                    .position(|l| l.as_str() == label)
                    .ok_or_else(|| malformed(line))?;
                weights[idx] = ws
                    .split(',')
                    .map(|x| x.parse().map_err(|_| malformed(line)))
                    .collect::<Result<_, _>>()?;
                if weights[idx].len() != FEATURE_DIM {
                    return Err(malformed(line));
                }
            } else {
                return Err(malformed(line));
            }
        }
        Ok(FeatureClassifierModel {
            weights,
            expected_sentences,
            lexicon,
        })
    }
}
