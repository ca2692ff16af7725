//! End-to-end runs of the `d2t` binary over temp files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn d2t(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2t"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_corpus(path: &Path) {
    let lines = [
        r#"{"id":"w1","mr_type":"triples","mr_raw":"Aarhus | leaderName | Jacob_Bundsgaard","text":"The leader of Aarhus is Jacob Bundsgaard."}"#,
        r#"{"id":"e1","mr_type":"slots","mr_raw":"name[Zizzi], eatType[coffee shop], area[riverside]","text":"Zizzi is a coffee shop in riverside."}"#,
        r#"{"id":"e2","mr_type":"slots","mr_raw":"name[Wildwood], eatType[pub], area[city centre]","text":"Wildwood is a pub in city centre."}"#,
        r#"{"id":"v1","mr_type":"dialogue_act","mr_raw":"request(developer[EA Canada], specifier[favorite])","text":"What is your favorite game by EA Canada?"}"#,
    ];
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn linearize_adds_golden_string() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    let output = dir.path().join("lin.jsonl");
    write_corpus(&input);
    let out = d2t(&[
        "linearize",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&output).unwrap();
    assert!(text
        .contains("<subject> Aarhus <predicate> leader name <object> Jacob Bundsgaard"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn strict_mode_fails_with_data_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.jsonl");
    fs::write(
        &input,
        r#"{"id":"x","mr_type":"triples","mr_raw":"no pipes here"}"#,
    )
    .unwrap();
    let lenient = d2t(&["linearize", "--input", input.to_str().unwrap()]);
    assert!(lenient.status.success());
    let strict = d2t(&["--strict", "linearize", "--input", input.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("x"));
}

#[test]
fn corrupt_requires_seed_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&input);
    let no_seed = d2t(&["corrupt", "--input", input.to_str().unwrap()]);
    assert_eq!(no_seed.status.code(), Some(1));

    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out_path in [&a, &b] {
        let out = d2t(&[
            "--seed",
            "11",
            "corrupt",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.contains("\"label\":\"accurate\""));
    assert!(text.contains("\"label\":\"value_error\""));
}

#[test]
fn full_pipeline_train_generate_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&input);
    let vocab = dir.path().join("vocab.txt");
    let lm = dir.path().join("lm.txt");
    let clf = dir.path().join("clf.txt");

    let out = d2t(&[
        "train",
        "bpe",
        "--input",
        input.to_str().unwrap(),
        "--output",
        vocab.to_str().unwrap(),
        "--vocab-size",
        "360",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = d2t(&[
        "train",
        "lm",
        "--input",
        input.to_str().unwrap(),
        "--output",
        lm.to_str().unwrap(),
        "--vocab",
        vocab.to_str().unwrap(),
        "--order",
        "6",
        "--smoothing",
        "0.01",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = d2t(&[
        "--seed",
        "3",
        "train",
        "sfc",
        "--input",
        input.to_str().unwrap(),
        "--output",
        clf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Retraining reproduces identical model files.
    let vocab2 = dir.path().join("vocab2.txt");
    let out = d2t(&[
        "train",
        "bpe",
        "--input",
        input.to_str().unwrap(),
        "--output",
        vocab2.to_str().unwrap(),
        "--vocab-size",
        "360",
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read(&vocab).unwrap(), fs::read(&vocab2).unwrap());

    let gen = dir.path().join("gen.jsonl");
    let out = d2t(&[
        "generate",
        "--input",
        input.to_str().unwrap(),
        "--output",
        gen.to_str().unwrap(),
        "--vocab",
        vocab.to_str().unwrap(),
        "--lm",
        lm.to_str().unwrap(),
        "--classifier",
        clf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gen_text = fs::read_to_string(&gen).unwrap();
    assert_eq!(gen_text.lines().count(), 4);
    assert!(gen_text.contains("\"top_label\""));

    // Hypotheses = references: BLEU 100.
    let hyps = dir.path().join("hyps.jsonl");
    let mut lines = Vec::new();
    for (id, text) in [
        ("w1", "The leader of Aarhus is Jacob Bundsgaard."),
        ("e1", "Zizzi is a coffee shop in riverside."),
        ("e2", "Wildwood is a pub in city centre."),
        ("v1", "What is your favorite game by EA Canada?"),
    ] {
        lines.push(format!(r#"{{"id":"{id}","text":"{text}"}}"#));
    }
    fs::write(&hyps, lines.join("\n")).unwrap();
    let report = dir.path().join("report.json");
    let out = d2t(&[
        "evaluate",
        "--hypotheses",
        hyps.to_str().unwrap(),
        "--references",
        hyps.to_str().unwrap(),
        "--data",
        input.to_str().unwrap(),
        "--classifier",
        clf.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!((json["bleu"].as_f64().unwrap() - 100.0).abs() < 1e-6);
    assert!((json["rouge_l"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((json["cider"].as_f64().unwrap() - 10.0).abs() < 1e-6);
    assert!(json["dsa"].is_number());
    assert!(json["hsa"].is_number());
}

#[test]
fn evaluate_reports_id_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let hyps = dir.path().join("h.jsonl");
    let refs = dir.path().join("r.jsonl");
    fs::write(&hyps, r#"{"id":"1","text":"a"}"#).unwrap();
    fs::write(&refs, r#"{"id":"2","text":"a"}"#).unwrap();
    let out = d2t(&[
        "evaluate",
        "--hypotheses",
        hyps.to_str().unwrap(),
        "--references",
        refs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn generate_with_missing_model_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&input);
    let out = d2t(&[
        "generate",
        "--input",
        input.to_str().unwrap(),
        "--vocab",
        dir.path().join("missing.txt").to_str().unwrap(),
        "--lm",
        dir.path().join("missing.txt").to_str().unwrap(),
        "--classifier",
        dir.path().join("missing.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stats_reports_unique_words() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("texts.jsonl");
    fs::write(&input, r#"{"id":"1","text":"The cat the Cat"}"#).unwrap();
    let out = d2t(&["stats", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["unique_words"], 4);
    assert!((json["pct_capitalized"].as_f64().unwrap() - 50.0).abs() < 1e-9);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&input);
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"seed": 11}"#).unwrap();
    // Seed comes from the config, so corrupt no longer needs --seed.
    let out = d2t(&[
        "--config",
        config.to_str().unwrap(),
        "corrupt",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("c.jsonl").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
