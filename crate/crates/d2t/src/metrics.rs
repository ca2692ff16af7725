//! Automated evaluation: BLEU, ROUGE-L, CIDEr, slot error rate with
//! heuristic accuracy labels, readability, and corpus statistics.

use crate::corrupt::split_sentences;
use crate::linearize::extract_values;
use crate::mr::MeaningRepresentation;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("evaluation pair list is empty")]
    EmptySet,
    #[error("pair {0:?} has no meaning representation attached")]
    MissingData(String),
    #[error("hypothesis and reference id sets differ")]
    IdMismatch,
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub hypothesis: String,
    pub references: Vec<String>,
    pub data: Option<MeaningRepresentation>,
}

/// Metric tokenization: lowercase, punctuation separated from words,
/// whitespace split.
pub fn tokenize_metric(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() || c == '\'' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU-4 on [0, 100]: clipped modified n-gram precisions,
/// geometric mean, brevity penalty against the closest reference length.
pub fn bleu(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let max_n = 4;
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    for pair in pairs {
        let hyp = tokenize_metric(&pair.hypothesis);
        let refs: Vec<Vec<String>> = pair.references.iter().map(|r| tokenize_metric(r)).collect();
        hyp_len += hyp.len();
        // Closest reference length; ties resolved toward the shorter.
        let closest = refs
            .iter()
            .map(|r| r.len())
            .min_by_key(|&l| (l.abs_diff(hyp.len()), l))
            .unwrap_or(0);
        ref_len += closest;
        for n in 1..=max_n {
            let hyp_counts = ngram_counts(&hyp, n);
            let mut max_ref_counts: HashMap<&[String], usize> = HashMap::new();
            for r in &refs {
                for (gram, count) in ngram_counts(r, n) {
                    let entry = max_ref_counts.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                total[n - 1] += count;
                matched[n - 1] += count.min(max_ref_counts.get(gram).unwrap_or(&0));
            }
        }
    }
    let mut log_precision_sum = 0.0;
    for n in 0..max_n {
        if matched[n] == 0 || total[n] == 0 {
            return Ok(0.0);
        }
        log_precision_sum += (matched[n] as f64 / total[n] as f64).ln();
    }
    let bp = if hyp_len >= ref_len || hyp_len == 0 {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * bp * (log_precision_sum / max_n as f64).exp())
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Mean LCS-based F-measure with the recall-favoring beta of the E2E
/// script convention (beta = 1.2). Multi-reference: best reference wins.
pub fn rouge_l(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let beta = 1.2f64;
    let mut sum = 0.0;
    for pair in pairs {
        let hyp = tokenize_metric(&pair.hypothesis);
        let mut best: f64 = 0.0;
        for r in &pair.references {
            let reference = tokenize_metric(r);
            let lcs = lcs_len(&hyp, &reference) as f64;
            if lcs == 0.0 || hyp.is_empty() || reference.is_empty() {
                continue;
            }
            let p = lcs / hyp.len() as f64;
            let rec = lcs / reference.len() as f64;
            let f = (1.0 + beta * beta) * p * rec / (rec + beta * beta * p);
            best = best.max(f);
        }
        sum += best;
    }
    Ok(sum / pairs.len() as f64)
}

fn tfidf_vector(
    tokens: &[String],
    n: usize,
    idf: &HashMap<Vec<String>, f64>,
) -> HashMap<Vec<String>, f64> {
    let mut v = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *v.entry(w.to_vec()).or_insert(0.0) += 1.0;
        }
    }
    for (gram, count) in v.iter_mut() {
        *count *= idf.get(gram).copied().unwrap_or(0.0);
    }
    v
}

fn cosine(a: &HashMap<Vec<String>, f64>, b: &HashMap<Vec<String>, f64>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(g, x)| b.get(g).map(|y| x * y))
        .sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Base CIDEr: mean over n = 1..4 of 10 x average cosine similarity
/// between TF-IDF n-gram vectors of hypothesis and each reference. The
/// IDF is computed over the reference sets (document frequency floored
/// at 1).
pub fn cider(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let total = pairs.len() as f64;
    let mut score_sum = 0.0;
    for n in 1..=4 {
        // Document frequency of each n-gram over reference sets.
        let mut df: HashMap<Vec<String>, usize> = HashMap::new();
        for pair in pairs {
            let mut seen: HashSet<Vec<String>> = HashSet::new();
            for r in &pair.references {
                let toks = tokenize_metric(r);
                if toks.len() >= n {
                    for w in toks.windows(n) {
                        seen.insert(w.to_vec());
                    }
                }
            }
            for g in seen {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let idf: HashMap<Vec<String>, f64> = df
            .into_iter()
            .map(|(g, d)| (g, (total / d.max(1) as f64).ln()))
            .collect();
        let mut pair_sum = 0.0;
        for pair in pairs {
            let hyp_vec = tfidf_vector(&tokenize_metric(&pair.hypothesis), n, &idf);
            let mut ref_sum = 0.0;
            for r in &pair.references {
                let ref_vec = tfidf_vector(&tokenize_metric(r), n, &idf);
                ref_sum += cosine(&hyp_vec, &ref_vec);
            }
            pair_sum += 10.0 * ref_sum / pair.references.len() as f64;
        }
        score_sum += pair_sum / total;
    }
    Ok(score_sum / 4.0)
}

/// Maps a value to its acceptable surface variants; verbatim identity by
/// default. File format: value<TAB>variant<TAB>variant...
#[derive(Debug, Clone, Default)]
pub struct RealizationTable {
    variants: HashMap<String, Vec<String>>,
}

impl RealizationTable {
    pub fn from_text(text: &str) -> Self {
        let mut variants = HashMap::new();
        for line in text.lines() {
            let mut parts = line.split('\t');
            if let Some(value) = parts.next() {
                if value.is_empty() {
                    continue;
                }
                variants.insert(
                    value.to_string(),
                    parts.map(str::to_string).collect::<Vec<_>>(),
                );
            }
        }
        RealizationTable { variants }
    }

    fn variants_for<'a>(&'a self, value: &'a str) -> Vec<&'a str> {
        let mut v = vec![value];
        if let Some(extra) = self.variants.get(value) {
            v.extend(extra.iter().map(String::as_str));
        }
        v
    }
}

fn count_occurrences_ci(text_lower: &str, value: &str) -> usize {
    crate::corrupt::find_word_bounded(text_lower, &value.to_lowercase())
        .map(|_| {
            // Count every bounded occurrence, not just the first.
            let needle = value.to_lowercase();
            let mut count = 0;
            let mut start = 0;
            while start < text_lower.len() {
                match crate::corrupt::find_word_bounded(&text_lower[start..], &needle) {
                    Some(at) => {
                        count += 1;
                        start += at + needle.len();
                    }
                    None => break,
                }
            }
            count
        })
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerReport {
    pub ser: f64,
    /// Per-id heuristic label: true = accurate (A_H).
    pub labels: Vec<(String, bool)>,
    /// Fraction labeled accurate.
    pub hsa: f64,
}

/// Heuristic semantic accuracy: a value is realized if any of its
/// variants occurs in the hypothesis with word boundaries. A pair is
/// accurate iff every value is realized and none occurs more often than
/// the data licenses. SER = (missed + extra) / total values.
pub fn slot_error_rate(
    pairs: &[EvalPair],
    table: &RealizationTable,
) -> Result<SerReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut missed = 0usize;
    let mut extra = 0usize;
    let mut total = 0usize;
    let mut labels = Vec::new();
    for pair in pairs {
        let data = pair
            .data
            .as_ref()
            .ok_or_else(|| MetricsError::MissingData(pair.id.clone()))?;
        let values = extract_values(data);
        let text_lower = pair.hypothesis.to_lowercase();
        let mut expected: HashMap<&str, usize> = HashMap::new();
        for v in &values {
            *expected.entry(v.as_str()).or_insert(0) += 1;
        }
        let mut pair_missed = 0usize;
        let mut pair_extra = 0usize;
        for (value, &want) in &expected {
            let found = table
                .variants_for(value)
                .iter()
                .map(|v| count_occurrences_ci(&text_lower, v))
                .max()
                .unwrap_or(0);
            if found < want {
                pair_missed += want - found;
            } else {
                pair_extra += found - want;
            }
        }
        total += values.len();
        missed += pair_missed;
        extra += pair_extra;
        labels.push((pair.id.clone(), pair_missed == 0 && pair_extra == 0));
    }
    let accurate = labels.iter().filter(|(_, a)| *a).count();
    Ok(SerReport {
        ser: if total == 0 {
            0.0
        } else {
            (missed + extra) as f64 / total as f64
        },
        hsa: accurate as f64 / labels.len() as f64,
        labels,
    })
}

/// Fraction of 5-class labels equal to accurate.
pub fn dsa(labels: &[crate::corrupt::Label]) -> Result<f64, MetricsError> {
    if labels.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let accurate = labels
        .iter()
        .filter(|l| **l == crate::corrupt::Label::Accurate)
        .count();
    Ok(accurate as f64 / labels.len() as f64)
}

/// Fraction of ids where the two binary label sources agree.
pub fn label_agreement(
    manual: &[(String, bool)],
    automatic: &[(String, bool)],
) -> Result<f64, MetricsError> {
    if manual.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let auto_map: HashMap<&str, bool> = automatic.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if manual.len() != automatic.len() {
        return Err(MetricsError::IdMismatch);
    }
    let mut matches = 0usize;
    for (id, label) in manual {
        match auto_map.get(id.as_str()) {
            Some(a) => {
                if a == label {
                    matches += 1;
                }
            }
            None => return Err(MetricsError::IdMismatch),
        }
    }
    Ok(matches as f64 / manual.len() as f64)
}

fn words_of(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// New Dale-Chall readability score:
/// 0.1579 * pct_difficult + 0.0496 * avg_sentence_length,
/// plus 3.6365 when the difficult-word percentage exceeds 5.
pub fn dale_chall(corpus: &[String], easy_words: &HashSet<String>) -> Result<f64, MetricsError> {
    let mut word_count = 0usize;
    let mut difficult = 0usize;
    let mut sentence_count = 0usize;
    for text in corpus {
        let words = words_of(text);
        if words.is_empty() {
            continue;
        }
        word_count += words.len();
        difficult += words
            .iter()
            .filter(|w| {
                let lower = w.to_lowercase();
                !easy_words.contains(&lower) && !lower.chars().all(|c| c.is_ascii_digit())
            })
            .count();
        sentence_count += split_sentences(text).sentences.len();
    }
    if word_count == 0 || sentence_count == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    let pct_difficult = 100.0 * difficult as f64 / word_count as f64;
    let avg_sentence_len = word_count as f64 / sentence_count as f64;
    let mut score = 0.1579 * pct_difficult + 0.0496 * avg_sentence_len;
    if pct_difficult > 5.0 {
        score += 3.6365;
    }
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub unique_words: usize,
    pub pct_capitalized: f64,
}

/// Counting basis for the capitalization share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatsBasis {
    #[default]
    UniqueWords,
    Tokens,
}

pub fn corpus_stats(corpus: &[String], basis: StatsBasis) -> CorpusStats {
    let mut unique: HashSet<String> = HashSet::new();
    let mut tokens = 0usize;
    let mut capitalized_tokens = 0usize;
    for text in corpus {
        for w in words_of(text) {
            tokens += 1;
            if w.chars().next().is_some_and(char::is_uppercase) {
                capitalized_tokens += 1;
            }
            unique.insert(w);
        }
    }
    let pct_capitalized = match basis {
        StatsBasis::UniqueWords => {
            let cap = unique
                .iter()
                .filter(|w| w.chars().next().is_some_and(char::is_uppercase))
                .count();
            if unique.is_empty() {
                0.0
            } else {
                100.0 * cap as f64 / unique.len() as f64
            }
        }
        StatsBasis::Tokens => {
            if tokens == 0 {
                0.0
            } else {
                100.0 * capitalized_tokens as f64 / tokens as f64
            }
        }
    };
    CorpusStats {
        unique_words: unique.len(),
        pct_capitalized,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mr::parse_slot_mr;

    fn pair(id: &str, hyp: &str, refs: &[&str]) -> EvalPair {
        EvalPair {
            id: id.to_string(),
            hypothesis: hyp.to_string(),
            references: refs.iter().map(|r| r.to_string()).collect(),
            data: None,
        }
    }

    #[test]
    fn bleu_perfect_match_is_100() {
        let pairs = vec![
            pair("1", "The cat sat on the mat today", &["The cat sat on the mat today"]),
            pair("2", "A dog ran far away from home", &["A dog ran far away from home"]),
        ];
        let b = bleu(&pairs).unwrap();
        assert!((b - 100.0).abs() < 1e-9, "got {b}");
    }

    #[test]
    fn bleu_clipped_unigram_precision() {
        // "the the the the" vs "the cat": unigram matches clipped to 1.
        let pairs = vec![pair("1", "the the the the", &["the cat"])];
        let hyp = tokenize_metric("the the the the");
        let counts = ngram_counts(&hyp, 1);
        let the = vec!["the".to_string()];
        assert_eq!(counts[the.as_slice()], 4);
        // Clipping is observable through the full metric: with only
        // unigrams matching, higher orders zero the geometric mean.
        assert_eq!(bleu(&pairs).unwrap(), 0.0);
    }

    #[test]
    fn bleu_brevity_penalty_hand_check() {
        // hyp 4 tokens, ref 5 tokens, all 4-grams of hyp in ref:
        // precisions all 1, BP = exp(1 - 5/4).
        let pairs = vec![pair("1", "a b c d", &["a b c d e"])];
        let expected = 100.0 * (1.0f64 - 5.0 / 4.0).exp();
        let b = bleu(&pairs).unwrap();
        assert!((b - expected).abs() < 1e-6, "got {b}, want {expected}");
    }

    #[test]
    fn rouge_identical_is_one() {
        let pairs = vec![pair("1", "a b c", &["a b c"])];
        assert!((rouge_l(&pairs).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_disjoint_is_zero() {
        let pairs = vec![pair("1", "a b c", &["x y z"])];
        assert_eq!(rouge_l(&pairs).unwrap(), 0.0);
    }

    #[test]
    fn rouge_hand_lcs() {
        // hyp "a b c d", ref "a c d e": LCS = 3, P = R = 3/4.
        let pairs = vec![pair("1", "a b c d", &["a c d e"])];
        let beta: f64 = 1.2;
        let p = 0.75;
        let r = 0.75;
        let expected = (1.0 + beta * beta) * p * r / (r + beta * beta * p);
        assert!((rouge_l(&pairs).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cider_identity_is_ten() {
        let pairs = vec![
            pair("1", "the cat sat on the mat", &["the cat sat on the mat"]),
            pair("2", "a dog ran far away home", &["a dog ran far away home"]),
        ];
        let c = cider(&pairs).unwrap();
        assert!((c - 10.0).abs() < 1e-9, "got {c}");
    }

    #[test]
    fn cider_disjoint_is_zero() {
        let pairs = vec![
            pair("1", "p q r s t", &["the cat sat on mats"]),
            pair("2", "u v w x y", &["a dog ran far away"]),
        ];
        assert_eq!(cider(&pairs).unwrap(), 0.0);
    }

    #[test]
    fn ser_zizzi_text_is_accurate() {
        let data = MeaningRepresentation::Slots(
            parse_slot_mr("name[Zizzi], eatType[coffee shop], area[riverside]").unwrap(),
        );
        let pairs = vec![EvalPair {
            id: "1".into(),
            hypothesis: "You can find a coffee shop named Zizzi in the riverside area.".into(),
            references: vec![String::new()],
            data: Some(data),
        }];
        let report = slot_error_rate(&pairs, &RealizationTable::default()).unwrap();
        assert_eq!(report.ser, 0.0);
        assert_eq!(report.hsa, 1.0);
        assert!(report.labels[0].1);
    }

    #[test]
    fn ser_misses_unlisted_paraphrase_but_table_recovers_it() {
        let data =
            MeaningRepresentation::Slots(parse_slot_mr("country[United Kingdom]").unwrap());
        let pairs = vec![EvalPair {
            id: "1".into(),
            hypothesis: "It is located in the UK.".into(),
            references: vec![String::new()],
            data: Some(data),
        }];
        let plain = slot_error_rate(&pairs, &RealizationTable::default()).unwrap();
        assert_eq!(plain.ser, 1.0);
        assert!(!plain.labels[0].1);
        let table = RealizationTable::from_text("United Kingdom\tUK");
        let with_table = slot_error_rate(&pairs, &table).unwrap();
        assert_eq!(with_table.ser, 0.0);
        assert!(with_table.labels[0].1);
    }

    #[test]
    fn ser_empty_hypothesis_misses_everything() {
        let data = MeaningRepresentation::Slots(parse_slot_mr("a[foo], b[bar]").unwrap());
        let pairs = vec![EvalPair {
            id: "1".into(),
            hypothesis: String::new(),
            references: vec![String::new()],
            data: Some(data),
        }];
        let report = slot_error_rate(&pairs, &RealizationTable::default()).unwrap();
        assert_eq!(report.ser, 1.0);
        assert_eq!(report.hsa, 0.0);
    }

    #[test]
    fn ser_zero_iff_accurate() {
        // Extra occurrence: value realized twice while licensed once.
        let data = MeaningRepresentation::Slots(parse_slot_mr("a[foo]").unwrap());
        let pairs = vec![EvalPair {
            id: "1".into(),
            hypothesis: "foo and foo again.".into(),
            references: vec![String::new()],
            data: Some(data),
        }];
        let report = slot_error_rate(&pairs, &RealizationTable::default()).unwrap();
        assert!(report.ser > 0.0);
        assert!(!report.labels[0].1);
    }

    #[test]
    fn dsa_fractions() {
        use crate::corrupt::Label::*;
        assert_eq!(dsa(&[Accurate, Accurate]).unwrap(), 1.0);
        assert_eq!(dsa(&[Accurate, Accurate, Accurate, ValueError]).unwrap(), 0.75);
        assert_eq!(dsa(&[]).unwrap_err(), MetricsError::EmptySet);
    }

    #[test]
    fn agreement_identical_and_complementary() {
        let a: Vec<(String, bool)> = (0..4).map(|i| (i.to_string(), i % 2 == 0)).collect();
        let b = a.clone();
        assert_eq!(label_agreement(&a, &b).unwrap(), 1.0);
        let c: Vec<(String, bool)> = a.iter().map(|(id, l)| (id.clone(), !l)).collect();
        assert_eq!(label_agreement(&a, &c).unwrap(), 0.0);
    }

    #[test]
    fn agreement_fraction() {
        let manual: Vec<(String, bool)> = (0..120).map(|i| (i.to_string(), true)).collect();
        let auto: Vec<(String, bool)> = (0..120)
            .map(|i| (i.to_string(), i >= 10))
            .collect();
        let q = label_agreement(&manual, &auto).unwrap();
        assert!((q - 110.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn agreement_id_mismatch() {
        let a = vec![("1".to_string(), true)];
        let b = vec![("2".to_string(), true)];
        assert_eq!(label_agreement(&a, &b).unwrap_err(), MetricsError::IdMismatch);
    }

    fn easy(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn dale_chall_all_easy() {
        let corpus = vec!["one two three four five six seven eight nine ten.".to_string()];
        let list = easy(&[
            "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        ]);
        let score = dale_chall(&corpus, &list).unwrap();
        assert!((score - 0.496).abs() < 1e-9, "got {score}");
    }

    #[test]
    fn dale_chall_with_adjustment() {
        let corpus =
            vec!["one two three four five six seven eight xylophone quixotic.".to_string()];
        let list = easy(&["one", "two", "three", "four", "five", "six", "seven", "eight"]);
        let score = dale_chall(&corpus, &list).unwrap();
        let expected = 0.1579 * 20.0 + 0.496 + 3.6365;
        assert!((score - expected).abs() < 1e-9, "got {score}");
    }

    #[test]
    fn dale_chall_empty_corpus() {
        assert_eq!(
            dale_chall(&[], &HashSet::new()).unwrap_err(),
            MetricsError::EmptyCorpus
        );
    }

    #[test]
    fn corpus_stats_counts_unique_case_sensitive() {
        let stats = corpus_stats(&["The cat the Cat".to_string()], StatsBasis::UniqueWords);
        assert_eq!(stats.unique_words, 4);
        assert!((stats.pct_capitalized - 50.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_stats_single_lowercase_word() {
        let stats = corpus_stats(&["word".to_string()], StatsBasis::UniqueWords);
        assert_eq!(stats.unique_words, 1);
        assert_eq!(stats.pct_capitalized, 0.0);
    }

    #[test]
    fn corpus_stats_ignores_empty_entries() {
        let stats = corpus_stats(
            &["".to_string(), "word".to_string(), "  ".to_string()],
            StatsBasis::UniqueWords,
        );
        assert_eq!(stats.unique_words, 1);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let mut pairs = vec![
            pair("1", "the cat sat on mats", &["the cat sat on a mat"]),
            pair("2", "a dog ran far away", &["the dog ran away fast"]),
            pair("3", "birds fly very high up", &["birds fly high in the sky"]),
        ];
        let b1 = bleu(&pairs).unwrap();
        let r1 = rouge_l(&pairs).unwrap();
        let c1 = cider(&pairs).unwrap();
        pairs.reverse();
        assert!((bleu(&pairs).unwrap() - b1).abs() < 1e-12);
        assert!((rouge_l(&pairs).unwrap() - r1).abs() < 1e-12);
        assert!((cider(&pairs).unwrap() - c1).abs() < 1e-12);
    }
}
