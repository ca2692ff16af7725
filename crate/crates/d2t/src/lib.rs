//! Data-to-text pipeline toolkit: meaning representation parsing,
//! linearization, byte-level BPE, training sequence construction,
//! corruption-based fidelity corpora, beam decoding with semantic
//! reranking, toy scoring models, and evaluation metrics.

pub mod bpe;
pub mod cli;
pub mod corrupt;
pub mod decode;
pub mod linearize;
pub mod metrics;
pub mod mr;
pub mod sequence;
pub mod toy;
