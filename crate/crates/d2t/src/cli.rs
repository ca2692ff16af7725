//! Batch pipeline commands over JSONL corpora: linearize, corrupt,
//! train, generate, evaluate, stats.

use crate::bpe::{train_bpe, BpeVocab};
use crate::corrupt::{generate_sfc_corpus, Label, SfcRecord};
use crate::decode::{generate, DecodeConfig};
use crate::linearize::{linearize, SlotOrder, SpecialTokenRegistry};
use crate::metrics::{
    bleu, cider, corpus_stats, dale_chall, dsa, rouge_l, slot_error_rate, EvalPair,
    RealizationTable, StatsBasis,
};
use crate::mr::{
    parse_mr, serialize_amr, serialize_dialogue_act, serialize_slot_mr, serialize_triples,
    MeaningRepresentation,
};
use crate::sequence::{build_sequence, StateMode};
use crate::toy::{
    train_classifier, train_ngram, FeatureClassifierModel, LinearizedFidelityClassifier,
    NgramScorer, DEFAULT_NGRAM_ORDER, DEFAULT_SMOOTHING,
};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Easy-word list for the Dale-Chall readability score, shipped with the
/// binary; overridable with --easy-words.
const EASY_WORDS: &str = include_str!("../data/dale_chall_easy_words.txt");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Model(m) => write!(f, "model error: {m}"),
        }
    }
}

fn data_err(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn model_err(e: impl fmt::Display) -> CliError {
    CliError::Model(e.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub mr_type: String,
    pub mr_raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_linearized: Option<String>,
}

impl CorpusRecord {
    pub fn parse_data(&self) -> Result<MeaningRepresentation, CliError> {
        parse_mr(&self.mr_type, &self.mr_raw)
            .map_err(|e| CliError::Data(format!("record {}: {e}", self.id)))
    }
}

pub fn serialize_mr(mr: &MeaningRepresentation) -> (&'static str, String) {
    match mr {
        MeaningRepresentation::Triples(t) => ("triples", serialize_triples(t)),
        MeaningRepresentation::Amr(g) => ("amr", serialize_amr(g)),
        MeaningRepresentation::Slots(s) => ("slots", serialize_slot_mr(s)),
        MeaningRepresentation::DialogueAct(d) => ("dialogue_act", serialize_dialogue_act(d)),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct PipelineConfig {
    pub registry: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub lm: Option<PathBuf>,
    pub classifier: Option<PathBuf>,
    pub seed: Option<u64>,
    pub beam_width: Option<usize>,
    pub alpha: Option<f64>,
    pub max_text_tokens: Option<usize>,
    pub slot_order: Option<String>,
}

#[derive(Debug, Parser)]
#[command(name = "d2t", version, about = "Data-to-text pipeline toolkit")]
pub struct Cli {
    /// Pipeline config file (JSON); flags override config values.
    #[arg(long, global = true, env = "D2T_CONFIG")]
    pub config: Option<PathBuf>,
    /// RNG seed; mandatory for corrupt, train, and generate.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fail on the first malformed record instead of skipping it.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Beam width for generation.
    #[arg(long, global = true)]
    pub beam: Option<usize>,
    /// Length-normalization exponent for beam scoring.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Maximum generated text tokens (0 = data-dependent default).
    #[arg(long = "max-tokens", global = true)]
    pub max_tokens: Option<usize>,
    /// Slot ordering: "source" or "name-first-alphabetical".
    #[arg(long = "slot-order", global = true)]
    pub slot_order: Option<String>,
    /// Output the raw beam top candidate without semantic reranking.
    #[arg(long = "no-rerank", global = true)]
    pub no_rerank: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse each record's MR and attach its linearized form.
    Linearize {
        #[arg(long)]
        input: PathBuf,
        /// Output JSONL path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Emit the 5-label corruption corpus for classifier training.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train a model artifact (reloadable bit-exactly).
    Train {
        #[command(subcommand)]
        kind: TrainKind,
    },
    /// Generate text for each record's MR with beam search + reranking.
    Generate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        lm: Option<PathBuf>,
        #[arg(long)]
        classifier: Option<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Score hypotheses against references (and data, when provided).
    Evaluate {
        #[arg(long)]
        hypotheses: PathBuf,
        #[arg(long)]
        references: PathBuf,
        /// Corpus JSONL supplying the MR per id; enables SER/HSA.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Fidelity classifier model; with --data, enables DSA.
        #[arg(long)]
        classifier: Option<PathBuf>,
        /// Override the built-in Dale-Chall easy-word list.
        #[arg(long = "easy-words")]
        easy_words: Option<PathBuf>,
        /// Treat words from capitalized data values as easy.
        #[arg(long = "easy-proper-nouns")]
        easy_proper_nouns: bool,
        /// Value -> surface-variant table for SER (tab-separated).
        #[arg(long = "realization-table")]
        realization_table: Option<PathBuf>,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report unique-word count and capitalization share over texts.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Capitalization basis: "unique-words" (default) or "tokens".
        #[arg(long, default_value = "unique-words")]
        basis: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum TrainKind {
    /// Byte-level BPE vocabulary over linearized data and texts.
    Bpe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long = "vocab-size", default_value_t = 512)]
        vocab_size: usize,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Interpolated-backoff n-gram language model over training sequences.
    Lm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NGRAM_ORDER)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
    },
    /// Semantic fidelity classifier on the corruption corpus.
    Sfc {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 300)]
        epochs: usize,
        #[arg(long = "learning-rate", default_value_t = 0.5)]
        learning_rate: f64,
    },
}

/// Resolved settings: flag > config > default.
struct Settings {
    config: PipelineConfig,
    seed: Option<u64>,
    strict: bool,
    decode: DecodeConfig,
    slot_order: SlotOrder,
    rerank: bool,
}

impl Settings {
    fn resolve(cli: &Cli) -> Result<Settings, CliError> {
        let config: PipelineConfig = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        let defaults = DecodeConfig::default();
        let decode = DecodeConfig {
            beam_width: cli.beam.or(config.beam_width).unwrap_or(defaults.beam_width),
            alpha: cli.alpha.or(config.alpha).unwrap_or(defaults.alpha),
            max_text_tokens: cli
                .max_tokens
                .or(config.max_text_tokens)
                .unwrap_or(defaults.max_text_tokens),
        };
        let slot_order = cli
            .slot_order
            .as_deref()
            .or(config.slot_order.as_deref())
            .map(|s| s.parse::<SlotOrder>().map_err(CliError::Usage))
            .transpose()?
            .unwrap_or(SlotOrder::Source);
        Ok(Settings {
            seed: cli.seed.or(config.seed),
            strict: cli.strict,
            decode,
            slot_order,
            rerank: !cli.no_rerank,
            config,
        })
    }

    fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("--seed is required for this command".into()))
    }

    fn path(&self, flag: &Option<PathBuf>, from_config: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| from_config.clone())
            .ok_or_else(|| CliError::Usage(format!("--{name} (or config field) is required")))
    }
}

fn load_registry(path: &Option<PathBuf>) -> Result<SpecialTokenRegistry, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(model_err)?;
            SpecialTokenRegistry::from_config(&text).map_err(model_err)
        }
        None => Ok(SpecialTokenRegistry::standard()),
    }
}

fn read_records(path: &Path) -> Result<Vec<(usize, CorpusRecord)>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(data_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        out.push((lineno + 1, record));
    }
    Ok(out)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        ))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn emit_line(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, value).map_err(data_err)?;
    out.write_all(b"\n").map_err(data_err)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli)?;
    match cli.command {
        Command::Linearize {
            input,
            output,
            registry,
        } => cmd_linearize(&settings, &input, &output, &registry),
        Command::Corrupt { input, output } => cmd_corrupt(&settings, &input, &output),
        Command::Train { kind } => cmd_train(&settings, kind),
        Command::Generate {
            input,
            output,
            vocab,
            lm,
            classifier,
            registry,
        } => cmd_generate(&settings, &input, &output, &vocab, &lm, &classifier, &registry),
        Command::Evaluate {
            hypotheses,
            references,
            data,
            classifier,
            easy_words,
            easy_proper_nouns,
            realization_table,
            output,
        } => cmd_evaluate(
            &settings,
            &hypotheses,
            &references,
            &data,
            &classifier,
            &easy_words,
            easy_proper_nouns,
            &realization_table,
            &output,
        ),
        Command::Stats { input, basis } => cmd_stats(&input, &basis),
    }
}

fn cmd_linearize(
    settings: &Settings,
    input: &Path,
    output: &Option<PathBuf>,
    registry: &Option<PathBuf>,
) -> Result<(), CliError> {
    let reg_path = registry.clone().or_else(|| settings.config.registry.clone());
    let mut reg = load_registry(&reg_path)?;
    let mut out = open_output(output)?;
    let mut failures: Vec<String> = Vec::new();
    for (_, mut record) in read_records(input)? {
        let processed = record
            .parse_data()
            .and_then(|mr| {
                linearize(&mr, &mut reg, settings.slot_order)
                    .map_err(|e| CliError::Data(format!("record {}: {e}", record.id)))
            });
        match processed {
            Ok(lin) => {
                record.data_linearized = Some(lin.text);
                emit_line(out.as_mut(), &record)?;
            }
            Err(e) => {
                if settings.strict {
                    return Err(e);
                }
                eprintln!("warning: skipping {e}");
                failures.push(record.id.clone());
            }
        }
    }
    out.flush().map_err(data_err)?;
    if !failures.is_empty() {
        eprintln!("{} record(s) failed: {}", failures.len(), failures.join(", "));
    }
    Ok(())
}

#[derive(Serialize)]
struct CorruptionRow<'a> {
    id: String,
    source_id: &'a str,
    label: Label,
    mr_type: &'static str,
    mr_raw: String,
    data_linearized: String,
    text: &'a str,
    seed: u64,
}

fn cmd_corrupt(
    settings: &Settings,
    input: &Path,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    let seed = settings.require_seed()?;
    let mut records = Vec::new();
    for (_, record) in read_records(input)? {
        let Some(text) = record.text.clone() else {
            eprintln!("warning: record {} has no text; skipped", record.id);
            continue;
        };
        let data = match record.parse_data() {
            Ok(d) => d,
            Err(e) => {
                if settings.strict {
                    return Err(e);
                }
                eprintln!("warning: skipping {e}");
                continue;
            }
        };
        records.push(SfcRecord {
            id: record.id,
            data,
            text,
        });
    }
    let mut reg = SpecialTokenRegistry::standard();
    let mut out = open_output(output)?;
    for example in generate_sfc_corpus(&records, seed) {
        let (mr_type, mr_raw) = serialize_mr(&example.data);
        let lin = linearize(&example.data, &mut reg, settings.slot_order)
            .map_err(data_err)?;
        emit_line(
            out.as_mut(),
            &CorruptionRow {
                id: format!("{}#{}", example.source_id, example.label.as_str()),
                source_id: &example.source_id,
                label: example.label,
                mr_type,
                mr_raw,
                data_linearized: lin.text,
                text: &example.text,
                seed,
            },
        )?;
    }
    out.flush().map_err(data_err)
}

fn cmd_train(settings: &Settings, kind: TrainKind) -> Result<(), CliError> {
    match kind {
        TrainKind::Bpe {
            input,
            output,
            vocab_size,
            registry,
        } => {
            let reg_path = registry.or_else(|| settings.config.registry.clone());
            let mut reg = load_registry(&reg_path)?;
            let mut texts = Vec::new();
            for (_, record) in read_records(&input)? {
                let mr = record.parse_data()?;
                let lin = linearize(&mr, &mut reg, settings.slot_order).map_err(data_err)?;
                texts.push(lin.text);
                if let Some(t) = record.text {
                    texts.push(t);
                }
            }
            let mut specials = reg.tokens();
            specials.sort();
            let vocab = train_bpe(&texts, vocab_size, &specials).map_err(data_err)?;
            fs::write(&output, vocab.to_file_format()).map_err(data_err)?;
            eprintln!("wrote vocab ({} tokens) to {}", vocab.size(), output.display());
        }
        TrainKind::Lm {
            input,
            output,
            vocab,
            registry,
            order,
            smoothing,
        } => {
            let vocab_path = settings.path(&vocab, &settings.config.vocab, "vocab")?;
            let vocab = load_vocab(&vocab_path)?;
            let reg_path = registry.or_else(|| settings.config.registry.clone());
            let mut reg = load_registry(&reg_path)?;
            let mut sequences = Vec::new();
            for (_, record) in read_records(&input)? {
                let Some(text) = record.text.clone() else {
                    eprintln!("warning: record {} has no text; skipped", record.id);
                    continue;
                };
                let mr = record.parse_data()?;
                let lin = linearize(&mr, &mut reg, settings.slot_order).map_err(data_err)?;
                let seq = build_sequence(&lin, Some(&text), &vocab, StateMode::Fine)
                    .map_err(data_err)?;
                sequences.push(seq);
            }
            let model =
                train_ngram(&sequences, vocab.size(), order, smoothing).map_err(data_err)?;
            fs::write(&output, model.to_file_format()).map_err(data_err)?;
            eprintln!("wrote {}-gram model to {}", order, output.display());
        }
        TrainKind::Sfc {
            input,
            output,
            epochs,
            learning_rate,
        } => {
            let seed = settings.require_seed()?;
            let mut records = Vec::new();
            for (_, record) in read_records(&input)? {
                let Some(text) = record.text.clone() else {
                    eprintln!("warning: record {} has no text; skipped", record.id);
                    continue;
                };
                let data = record.parse_data()?;
                records.push(SfcRecord {
                    id: record.id,
                    data,
                    text,
                });
            }
            let corpus = generate_sfc_corpus(&records, seed);
            let model = train_classifier(&corpus, epochs, learning_rate).map_err(data_err)?;
            fs::write(&output, model.to_file_format()).map_err(data_err)?;
            eprintln!(
                "wrote classifier ({} training examples) to {}",
                corpus.len(),
                output.display()
            );
        }
    }
    Ok(())
}

fn load_vocab(path: &Path) -> Result<BpeVocab, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
    BpeVocab::from_file_format(&text)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct CandidateRow {
    text: String,
    log_score: f64,
    label: Label,
}

#[derive(Serialize)]
struct GenerationRow {
    id: String,
    text: String,
    top_label: Label,
    candidates: Vec<CandidateRow>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    settings: &Settings,
    input: &Path,
    output: &Option<PathBuf>,
    vocab: &Option<PathBuf>,
    lm: &Option<PathBuf>,
    classifier: &Option<PathBuf>,
    registry: &Option<PathBuf>,
) -> Result<(), CliError> {
    let vocab = load_vocab(&settings.path(vocab, &settings.config.vocab, "vocab")?)?;
    let lm_path = settings.path(lm, &settings.config.lm, "lm")?;
    let lm_text = fs::read_to_string(&lm_path)
        .map_err(|e| CliError::Model(format!("{}: {e}", lm_path.display())))?;
    let scorer = NgramScorer::from_file_format(&lm_text)
        .map_err(|e| CliError::Model(format!("{}: {e}", lm_path.display())))?;
    let clf_path = settings.path(classifier, &settings.config.classifier, "classifier")?;
    let clf_text = fs::read_to_string(&clf_path)
        .map_err(|e| CliError::Model(format!("{}: {e}", clf_path.display())))?;
    let clf = LinearizedFidelityClassifier {
        model: FeatureClassifierModel::from_file_format(&clf_text)
            .map_err(|e| CliError::Model(format!("{}: {e}", clf_path.display())))?,
    };
    let reg_path = registry.clone().or_else(|| settings.config.registry.clone());
    let mut reg = load_registry(&reg_path)?;
    let mut out = open_output(output)?;
    for (_, record) in read_records(input)? {
        let result = record.parse_data().and_then(|mr| {
            generate(
                &mr,
                &scorer,
                &clf,
                &vocab,
                &mut reg,
                settings.slot_order,
                &settings.decode,
                settings.rerank,
            )
            .map_err(|e| CliError::Data(format!("record {}: {e}", record.id)))
        });
        match result {
            Ok(gen) => {
                let candidates = gen
                    .candidates
                    .iter()
                    .map(|(c, label)| CandidateRow {
                        text: crate::decode::candidate_text(c, &vocab),
                        log_score: c.normalized_score,
                        label: *label,
                    })
                    .collect();
                emit_line(
                    out.as_mut(),
                    &GenerationRow {
                        id: record.id,
                        text: gen.text,
                        top_label: gen.top_label,
                        candidates,
                    },
                )?;
            }
            Err(e) => {
                if settings.strict {
                    return Err(e);
                }
                eprintln!("warning: skipping {e}");
            }
        }
    }
    out.flush().map_err(data_err)
}

#[derive(Debug, Deserialize)]
struct TextRecord {
    id: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    references: Option<Vec<String>>,
}

fn read_text_records(path: &Path) -> Result<Vec<TextRecord>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(data_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TextRecord = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub rouge_l: f64,
    pub cider: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ser: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hsa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dsa: Option<f64>,
    pub dale_chall: f64,
    pub unique_words: usize,
    pub pct_capitalized: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    settings: &Settings,
    hypotheses: &Path,
    references: &Path,
    data: &Option<PathBuf>,
    classifier: &Option<PathBuf>,
    easy_words: &Option<PathBuf>,
    easy_proper_nouns: bool,
    realization_table: &Option<PathBuf>,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    let hyps = read_text_records(hypotheses)?;
    let mut ref_map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in read_text_records(references)? {
        let refs = match (r.references, r.text) {
            (Some(list), _) if !list.is_empty() => list,
            (_, Some(text)) => vec![text],
            _ => {
                return Err(CliError::Data(format!(
                    "reference record {} has neither text nor references",
                    r.id
                )))
            }
        };
        ref_map.insert(r.id, refs);
    }
    let data_map: BTreeMap<String, MeaningRepresentation> = match data {
        Some(path) => {
            let mut m = BTreeMap::new();
            for (_, record) in read_records(path)? {
                let mr = record.parse_data()?;
                m.insert(record.id, mr);
            }
            m
        }
        None => BTreeMap::new(),
    };

    let mut pairs = Vec::new();
    for h in &hyps {
        let text = h.text.clone().ok_or_else(|| {
            CliError::Data(format!("hypothesis record {} has no text", h.id))
        })?;
        let refs = ref_map.get(&h.id).cloned().ok_or_else(|| {
            CliError::Data(format!("id mismatch: no reference for {}", h.id))
        })?;
        let mr = data_map.get(&h.id).cloned();
        if data.is_some() && mr.is_none() {
            return Err(CliError::Data(format!("id mismatch: no data for {}", h.id)));
        }
        pairs.push(EvalPair {
            id: h.id.clone(),
            hypothesis: text,
            references: refs,
            data: mr,
        });
    }
    if ref_map.len() != pairs.len() {
        return Err(CliError::Data(
            "id mismatch: reference ids not covered by hypotheses".into(),
        ));
    }

    let bleu_score = bleu(&pairs).map_err(data_err)?;
    let rouge_score = rouge_l(&pairs).map_err(data_err)?;
    let cider_score = cider(&pairs).map_err(data_err)?;

    let (ser, hsa) = if data.is_some() {
        let table = match realization_table {
            Some(p) => RealizationTable::from_text(
                &fs::read_to_string(p).map_err(data_err)?,
            ),
            None => RealizationTable::default(),
        };
        let report = slot_error_rate(&pairs, &table).map_err(data_err)?;
        (Some(report.ser), Some(report.hsa))
    } else {
        (None, None)
    };

    let dsa_score = match (classifier, data.is_some()) {
        (Some(path), true) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
            let model = FeatureClassifierModel::from_file_format(&text)
                .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
            let mut reg = load_registry(&settings.config.registry)?;
            let mut labels = Vec::new();
            for pair in &pairs {
                let mr = pair.data.as_ref().expect("data present");
                let lin = linearize(mr, &mut reg, settings.slot_order).map_err(data_err)?;
                let values = crate::toy::values_from_linearized(&lin);
                labels.push(model.classify_values(&values, &pair.hypothesis));
            }
            Some(dsa(&labels).map_err(data_err)?)
        }
        _ => None,
    };

    let mut easy: HashSet<String> = match easy_words {
        Some(p) => fs::read_to_string(p).map_err(data_err)?,
        None => EASY_WORDS.to_string(),
    }
    .split_whitespace()
    .map(|w| w.to_lowercase())
    .collect();
    if easy_proper_nouns {
        for mr in data_map.values() {
            for value in crate::linearize::extract_values(mr) {
                for word in value.split_whitespace() {
                    if word.chars().next().is_some_and(char::is_uppercase) {
                        easy.insert(word.to_lowercase());
                    }
                }
            }
        }
    }
    let texts: Vec<String> = pairs.iter().map(|p| p.hypothesis.clone()).collect();
    let dc = dale_chall(&texts, &easy).map_err(data_err)?;
    let stats = corpus_stats(&texts, StatsBasis::UniqueWords);

    let report = EvalReport {
        bleu: bleu_score,
        rouge_l: rouge_score,
        cider: cider_score,
        ser,
        hsa,
        dsa: dsa_score,
        dale_chall: dc,
        unique_words: stats.unique_words,
        pct_capitalized: stats.pct_capitalized,
    };

    // Human-readable table on stdout; JSON summary last (or to a file).
    println!("metric            value");
    println!("----------------  ----------");
    println!("BLEU              {:.4}", report.bleu);
    println!("ROUGE-L           {:.4}", report.rouge_l);
    println!("CIDEr             {:.4}", report.cider);
    if let Some(v) = report.ser {
        println!("SER               {v:.4}");
    }
    if let Some(v) = report.hsa {
        println!("HSA               {v:.4}");
    }
    if let Some(v) = report.dsa {
        println!("DSA               {v:.4}");
    }
    println!("Dale-Chall        {:.4}", report.dale_chall);
    println!("unique words      {}", report.unique_words);
    println!("% capitalized     {:.2}", report.pct_capitalized);
    let json = serde_json::to_string(&report).map_err(data_err)?;
    match output {
        Some(p) => fs::write(p, json + "\n").map_err(data_err)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_stats(input: &Path, basis: &str) -> Result<(), CliError> {
    let basis = match basis {
        "unique-words" => StatsBasis::UniqueWords,
        "tokens" => StatsBasis::Tokens,
        other => {
            return Err(CliError::Usage(format!(
                "unknown basis {other:?}; expected unique-words or tokens"
            )))
        }
    };
    let mut texts = Vec::new();
    for r in read_text_records(input)? {
        if let Some(t) = r.text {
            texts.push(t);
        }
    }
    if texts.is_empty() {
        return Err(CliError::Data("no text fields in input".into()));
    }
    let stats = corpus_stats(&texts, basis);
    println!(
        "{}",
        serde_json::json!({
            "unique_words": stats.unique_words,
            "pct_capitalized": stats.pct_capitalized,
        })
    );
    Ok(())
}

pub fn main_entry() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return std::process::ExitCode::SUCCESS;
            }
            let _ = e.print();
            return std::process::ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
