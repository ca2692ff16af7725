//! Assembly of model-facing sequences: subword ids, position ids,
//! fine-grained state ids, and the loss mask for one (data, text) pair.

use crate::bpe::{encode, BpeVocab};
use crate::linearize::{LinearizedData, DATA_TOKEN, EOS_TOKEN, TEXT_TOKEN};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SequenceError {
    #[error("special token {0:?} is not reserved in the vocabulary")]
    MissingSpecial(String),
    #[error("sequence has no masked text positions")]
    EmptyText,
}

/// State granularity for the auxiliary state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMode {
    /// Only <data> and <text> states (the ablation baseline).
    Coarse,
    /// Each token's state is the last preceding special token, inclusive.
    Fine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSequence {
    pub ids: Vec<u32>,
    pub states: Vec<u32>,
    pub mask: Vec<bool>,
    /// Count of data subword tokens, excluding <data> and <text>.
    pub data_len: usize,
}

impl TrainingSequence {
    pub fn positions(&self) -> Vec<usize> {
        (0..self.ids.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Build the sequence `(<data>, d_1..d_k, <text>, t_1..t_m, <eos>)`.
///
/// With `text == None` the sequence stops at the <text> token and the
/// loss mask is all false (the generation-prefix case).
pub fn build_sequence(
    lin: &LinearizedData,
    text: Option<&str>,
    vocab: &BpeVocab,
    mode: StateMode,
) -> Result<TrainingSequence, SequenceError> {
    let data_id = vocab
        .special_id(DATA_TOKEN)
        .ok_or_else(|| SequenceError::MissingSpecial(DATA_TOKEN.into()))?;
    let text_id = vocab
        .special_id(TEXT_TOKEN)
        .ok_or_else(|| SequenceError::MissingSpecial(TEXT_TOKEN.into()))?;
    let eos_id = vocab
        .special_id(EOS_TOKEN)
        .ok_or_else(|| SequenceError::MissingSpecial(EOS_TOKEN.into()))?;

    let mut ids = vec![data_id];
    ids.extend(encode(vocab, &lin.text).ids);
    let data_len = ids.len() - 1;
    ids.push(text_id);
    if let Some(t) = text {
        ids.extend(encode(vocab, t).ids);
        ids.push(eos_id);
    }

    let states = match mode {
        StateMode::Coarse => ids
            .iter()
            .enumerate()
            .map(|(i, _)| if i <= data_len { data_id } else { text_id })
            .collect(),
        StateMode::Fine => {
            let mut states = Vec::with_capacity(ids.len());
            let mut current = data_id;
            for &id in &ids {
                if vocab.is_special(id) {
                    current = id;
                }
                states.push(current);
            }
            states
        }
    };

    let mask: Vec<bool> = (0..ids.len()).map(|i| i >= data_len + 2).collect();
    Ok(TrainingSequence {
        ids,
        states,
        mask,
        data_len,
    })
}

/// Anything that yields a next-token distribution given a prefix.
pub trait AutoregressiveScorer {
    /// Probability vector over the vocabulary; non-negative and summing
    /// to 1 within 1e-9.
    fn next_distribution(&self, prefix: &[u32]) -> Vec<f64>;

    fn vocab_size(&self) -> usize;
}

/// Negative log-likelihood summed over masked (text) positions only.
pub fn masked_nll(
    seq: &TrainingSequence,
    scorer: &dyn AutoregressiveScorer,
) -> Result<f64, SequenceError> {
    if !seq.mask.iter().any(|&m| m) {
        return Err(SequenceError::EmptyText);
    }
    let mut nll = 0.0;
    for i in 0..seq.ids.len() {
        if seq.mask[i] {
            let dist = scorer.next_distribution(&seq.ids[..i]);
            let p = dist[seq.ids[i] as usize];
            nll -= p.ln();
        }
    }
    Ok(nll)
}
