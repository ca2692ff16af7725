//! Beam-search decoding over an autoregressive scorer, with text-offset
//! length normalization and final-stage semantic fidelity reranking.

use crate::bpe::{decode, BpeVocab, TokenSeq};
use crate::corrupt::Label;
use crate::linearize::{linearize, LinearizedData, SlotOrder, SpecialTokenRegistry, EOS_TOKEN};
use crate::mr::MeaningRepresentation;
use crate::sequence::{build_sequence, AutoregressiveScorer, StateMode, TrainingSequence};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("probability list is empty")]
    EmptyProbList,
    #[error("vocabulary is missing the end-of-sequence special")]
    MissingEos,
    #[error(transparent)]
    Linearize(#[from] crate::linearize::LinearizeError),
    #[error(transparent)]
    Sequence(#[from] crate::sequence::SequenceError),
    #[error(transparent)]
    Bpe(#[from] crate::bpe::BpeError),
}

/// Labels (data, text) pairs with the 5-class fidelity taxonomy.
pub trait FidelityClassifier {
    fn classify(&self, data: &LinearizedData, text: &str) -> Label;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamCandidate {
    /// Generated text token ids (prefix excluded), including <eos> when
    /// the candidate terminated naturally.
    pub ids: Vec<u32>,
    /// Sum of ln P over generated text tokens.
    pub text_logprob_sum: f64,
    /// Length-normalized log score.
    pub normalized_score: f64,
    pub complete: bool,
    /// Completion was forced by the length cap, not by <eos>.
    pub forced: bool,
}

#[derive(Debug, Clone)]
pub struct DecodeConfig {
    pub beam_width: usize,
    pub alpha: f64,
    pub max_text_tokens: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam_width: 5,
            alpha: 0.75,
            // 0 selects the data-dependent cap of 2 * data_len + 64.
            max_text_tokens: 0,
        }
    }
}

impl DecodeConfig {
    /// Default length cap: twice the data token count plus 64.
    pub fn for_data_len(data_len: usize) -> Self {
        DecodeConfig {
            max_text_tokens: 2 * data_len + 64,
            ..Default::default()
        }
    }
}

/// Length-normalized log score: ln(prod probs) - alpha * ln(max(1, n-1))
/// where n is the number of scored text tokens. The clamp keeps the
/// normalizer finite for single-token candidates.
pub fn beam_score(text_probs: &[f64], alpha: f64) -> Result<f64, DecodeError> {
    if text_probs.is_empty() {
        return Err(DecodeError::EmptyProbList);
    }
    let logprob_sum: f64 = text_probs.iter().map(|p| p.ln()).sum();
    Ok(normalize_score(logprob_sum, text_probs.len(), alpha))
}

pub fn normalize_score(logprob_sum: f64, n_text_tokens: usize, alpha: f64) -> f64 {
    let denom = (n_text_tokens.saturating_sub(1)).max(1) as f64;
    logprob_sum - alpha * denom.ln()
}

/// Beam search from a prefix ending at the <text> token. Probabilities
/// accumulate over generated text tokens only. Completed candidates are
/// frozen and do not occupy expansion slots; the search ends when
/// `beam_width` candidates have completed, the active beam empties, or
/// the length cap forces completion.
pub fn beam_search(
    prefix: &TrainingSequence,
    scorer: &dyn AutoregressiveScorer,
    eos_id: u32,
    cfg: &DecodeConfig,
) -> Vec<BeamCandidate> {
    struct Active {
        ids: Vec<u32>,
        logprob_sum: f64,
        score: f64,
    }

    let mut active = vec![Active {
        ids: Vec::new(),
        logprob_sum: 0.0,
        score: 0.0,
    }];
    let mut completed: Vec<BeamCandidate> = Vec::new();

    for _step in 0..cfg.max_text_tokens {
        if active.is_empty() || completed.len() >= cfg.beam_width {
            break;
        }
        let mut expansions: Vec<Active> = Vec::new();
        for cand in &active {
            let mut full_prefix = prefix.ids.clone();
            full_prefix.extend_from_slice(&cand.ids);
            let dist = scorer.next_distribution(&full_prefix);
            for (token, &p) in dist.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let mut ids = cand.ids.clone();
                ids.push(token as u32);
                let logprob_sum = cand.logprob_sum + p.ln();
                let score = normalize_score(logprob_sum, ids.len(), cfg.alpha);
                expansions.push(Active {
                    ids,
                    logprob_sum,
                    score,
                });
            }
        }
        // Deterministic pruning: score descending, ties by lexicographically
        // smaller token sequence.
        expansions.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.ids.cmp(&b.ids))
        });
        expansions.truncate(cfg.beam_width);

        active = Vec::new();
        for e in expansions {
            if *e.ids.last().expect("expansion is non-empty") == eos_id {
                if completed.len() < cfg.beam_width {
                    completed.push(BeamCandidate {
                        ids: e.ids,
                        text_logprob_sum: e.logprob_sum,
                        normalized_score: e.score,
                        complete: true,
                        forced: false,
                    });
                }
            } else {
                active.push(e);
            }
        }
    }

    // Length cap reached: force-complete whatever is still active.
    for e in active {
        completed.push(BeamCandidate {
            ids: e.ids,
            text_logprob_sum: e.logprob_sum,
            normalized_score: e.score,
            complete: true,
            forced: true,
        });
    }

    completed.sort_by(|a, b| {
        b.normalized_score
            .partial_cmp(&a.normalized_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.ids.cmp(&b.ids))
    });
    completed
}

/// Stable partition: accurate-labeled candidates first, original order
/// preserved within each group. Exactly one classification per candidate.
pub fn rerank(
    candidates: Vec<BeamCandidate>,
    data: &LinearizedData,
    vocab: &BpeVocab,
    clf: &dyn FidelityClassifier,
) -> (Vec<(BeamCandidate, Label)>, Vec<Label>) {
    let labeled: Vec<(BeamCandidate, Label)> = candidates
        .into_iter()
        .map(|c| {
            let text = candidate_text(&c, vocab);
            let label = clf.classify(data, &text);
            (c, label)
        })
        .collect();
    let labels: Vec<Label> = labeled.iter().map(|(_, l)| *l).collect();
    let (accurate, rest): (Vec<_>, Vec<_>) = labeled
        .into_iter()
        .partition(|(_, l)| *l == Label::Accurate);
    let mut out = accurate;
    out.extend(rest);
    (out, labels)
}

/// Decode a candidate's generated tokens to text, dropping the <eos>.
pub fn candidate_text(candidate: &BeamCandidate, vocab: &BpeVocab) -> String {
    let mut ids = candidate.ids.clone();
    if let Some(eos) = vocab.special_id(EOS_TOKEN) {
        ids.retain(|&id| id != eos);
    }
    decode(vocab, &TokenSeq { ids }).unwrap_or_default()
}

pub struct GenerationOutput {
    pub text: String,
    pub top_label: Label,
    pub candidates: Vec<(BeamCandidate, Label)>,
}

/// End-to-end generation: linearize, build the prefix, beam-search,
/// rerank, decode the top candidate.
#[allow(clippy::too_many_arguments)]
pub fn generate(
    mr: &MeaningRepresentation,
    scorer: &dyn AutoregressiveScorer,
    clf: &dyn FidelityClassifier,
    vocab: &BpeVocab,
    reg: &mut SpecialTokenRegistry,
    slot_order: SlotOrder,
    cfg: &DecodeConfig,
    rerank_enabled: bool,
) -> Result<GenerationOutput, DecodeError> {
    let lin = linearize(mr, reg, slot_order)?;
    let prefix = build_sequence(&lin, None, vocab, StateMode::Fine)?;
    let eos_id = vocab.special_id(EOS_TOKEN).ok_or(DecodeError::MissingEos)?;
    // max_text_tokens == 0 means "use the data-dependent default".
    let cfg = DecodeConfig {
        max_text_tokens: if cfg.max_text_tokens == 0 {
            2 * prefix.data_len + 64
        } else {
            cfg.max_text_tokens
        },
        ..cfg.clone()
    };
    let candidates = beam_search(&prefix, scorer, eos_id, &cfg);
    let labeled = if rerank_enabled {
        rerank(candidates, &lin, vocab, clf).0
    } else {
        candidates
            .into_iter()
            .map(|c| {
                let text = candidate_text(&c, vocab);
                let label = clf.classify(&lin, &text);
                (c, label)
            })
            .collect()
    };
    let (top, top_label) = labeled.first().cloned().unwrap_or((
        BeamCandidate {
            ids: vec![],
            text_logprob_sum: f64::NEG_INFINITY,
            normalized_score: f64::NEG_INFINITY,
            complete: true,
            forced: true,
        },
        Label::Accurate,
    ));
    Ok(GenerationOutput {
        text: candidate_text(&top, vocab),
        top_label,
        candidates: labeled,
    })
}
