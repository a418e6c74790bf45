//! End-to-end tests of the `dupaudit` binary: fixtures from the module
//! contracts, exit-code conventions, and the full tokenize → detect →
//! stats/dedup/bias pipeline.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dupaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dupaudit"))
        .args(args)
        .output()
        .expect("spawn dupaudit")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

/// A document of `n` tokens drawn from a private vocabulary.
fn doc_line(id: &str, prefix: &str, n: usize) -> String {
    let tokens: Vec<String> = (0..n).map(|i| format!("\"{prefix}{i}\"")).collect();
    format!(
        "{{\"filename\":\"{id}\",\"tokens\":[{}]}}",
        tokens.join(",")
    )
}

fn write_lines(path: &Path, lines: &[String]) {
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn usage_errors_exit_two() {
    let out = dupaudit(&[
        "tokenize", "--lang", "cobol", "--input", "x", "--output", "y",
    ]);
    assert_eq!(exit_code(&out), 2);
    let msg = stderr(&out);
    assert!(
        msg.contains("java"),
        "supported languages not listed: {msg}"
    );

    let out = dupaudit(&["detect", "--tokens", "x", "--output", "y", "--t0", "1.5"]);
    assert_eq!(exit_code(&out), 2);

    let out = dupaudit(&["detect", "--tokens", "x", "--output", "y", "--jobs", "0"]);
    assert_eq!(exit_code(&out), 2);

    let out = dupaudit(&[
        "stats",
        "--tokens",
        "x",
        "--clusters",
        "y",
        "--train-fraction",
        "1.0",
    ]);
    assert_eq!(exit_code(&out), 2);

    let out = dupaudit(&["detect"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn data_errors_exit_one_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("bad.jsonl");
    fs::write(&tokens, "{\"filename\":\"a\",\"tokens\":[]}\nnot json\n").unwrap();
    let out = dupaudit(&[
        "detect",
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        dir.path().join("c.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn tokenize_writes_corpus_and_reports_skips() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir_all(&src).unwrap();
    fs::write(src.join("A.java"), "class A { int a = 1; }").unwrap();
    fs::write(src.join("B.java"), "class B { int b = 2; }").unwrap();
    let out_path = dir.path().join("toks.jsonl");

    let out = dupaudit(&[
        "tokenize",
        "--lang",
        "java",
        "--input",
        src.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let written = fs::read_to_string(&out_path).unwrap();
    assert_eq!(written.lines().count(), 2);
    assert!(written.contains("\"A.java\""));
    assert!(stderr(&out).contains("tokenized 2"));
}

#[test]
fn tokenize_of_only_unparseable_files_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir_all(&src).unwrap();
    fs::write(src.join("broken.java"), "String s = \"open").unwrap();
    let out = dupaudit(&[
        "tokenize",
        "--lang",
        "java",
        "--input",
        src.to_str().unwrap(),
        "--output",
        dir.path().join("t.jsonl").to_str().unwrap(),
        "--verbose",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(
        stderr(&out).contains("broken.java"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn detect_groups_exact_copies() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("tokens.jsonl");
    // Three exact copies and one unrelated file, all ≥ 20 tokens.
    let copy: Vec<String> = (0..25).map(|i| format!("\"t{i}\"")).collect();
    let copy = copy.join(",");
    write_lines(
        &tokens,
        &[
            format!("{{\"filename\":\"c1\",\"tokens\":[{copy}]}}"),
            format!("{{\"filename\":\"c2\",\"tokens\":[{copy}]}}"),
            format!("{{\"filename\":\"c3\",\"tokens\":[{copy}]}}"),
            doc_line("other", "z", 25),
        ],
    );
    let clusters = dir.path().join("clusters.json");
    let out = dupaudit(&[
        "detect",
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        clusters.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(
        fs::read_to_string(&clusters).unwrap(),
        "[\n  [\"c1\",\"c2\",\"c3\"]\n]\n"
    );
    assert!(stderr(&out).contains("1 duplicate group"));
}

#[test]
fn detect_at_unit_thresholds_keeps_only_exact_fingerprint_copies() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("tokens.jsonl");
    let base: Vec<String> = (0..40).map(|i| format!("t{i}")).collect();
    let mut near = base.clone();
    near[0] = "replaced".into();
    let as_line = |id: &str, toks: &[String]| {
        let quoted: Vec<String> = toks.iter().map(|t| format!("\"{t}\"")).collect();
        format!(
            "{{\"filename\":\"{id}\",\"tokens\":[{}]}}",
            quoted.join(",")
        )
    };
    write_lines(
        &tokens,
        &[
            as_line("a", &base),
            as_line("b", &base),
            as_line("near", &near),
        ],
    );
    let clusters = dir.path().join("clusters.json");
    let out = dupaudit(&[
        "detect",
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        clusters.to_str().unwrap(),
        "--t0",
        "1.0",
        "--t1",
        "1.0",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        fs::read_to_string(&clusters).unwrap(),
        "[\n  [\"a\",\"b\"]\n]\n"
    );
}

#[test]
fn stats_reports_the_duplication_factor() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("tokens.jsonl");
    // 10 admitted files with groups of sizes 3 and 2: d = 0.3.
    let mut lines: Vec<String> = Vec::new();
    for i in 0..10 {
        lines.push(doc_line(&format!("f{i}"), &format!("v{i}_"), 25));
    }
    write_lines(&tokens, &lines);
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[[\"f0\",\"f1\",\"f2\"],[\"f3\",\"f4\"]]").unwrap();

    let out = dupaudit(&[
        "stats",
        "--tokens",
        tokens.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["num_files"], 10);
    assert_eq!(json["num_groups"], 2);
    assert_eq!(json["duplication_factor"], 0.3);
    assert_eq!(json["group_size_median"], 2.0);
    // One group of 3 and one of 2 at p = 0.6:
    // (3·(1−0.4²) + 2·(1−0.4)) / 10 = 0.372.
    let expected = (3.0 * (1.0 - 0.16) + 2.0 * 0.6) / 10.0;
    let got = json["expected_cross_set_fraction"].as_f64().unwrap();
    assert!((got - expected).abs() < 1e-12);
}

#[test]
fn dedup_writes_lexicographic_keep_list() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("tokens.jsonl");
    write_lines(
        &tokens,
        &[
            doc_line("b", "x", 25),
            doc_line("a", "x", 25),
            doc_line("c", "y", 25),
        ],
    );
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[[\"b\",\"a\"]]").unwrap();
    let keep = dir.path().join("keep.txt");
    let out = dupaudit(&[
        "dedup",
        "--clusters",
        clusters.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        keep.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(fs::read_to_string(&keep).unwrap(), "a\nc\n");
}

#[test]
fn bias_decomposes_the_copy_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("metrics.jsonl");
    write_lines(
        &metrics,
        &[
            "{\"filename\":\"a1\",\"value\":1.0}".into(),
            "{\"filename\":\"a2\",\"value\":1.0}".into(),
            "{\"filename\":\"a3\",\"value\":1.0}".into(),
            "{\"filename\":\"b\",\"value\":0.0}".into(),
        ],
    );
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[[\"a1\",\"a2\",\"a3\"]]").unwrap();

    let out = dupaudit(&[
        "bias",
        "--metrics",
        metrics.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["d"], 0.5);
    assert_eq!(json["f_hat"], 0.75);
    assert_eq!(json["f_bar"], 0.5);
    assert_eq!(json["beta"], 1.0);
}

#[test]
fn bias_without_duplicates_reports_null_beta() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("metrics.jsonl");
    write_lines(
        &metrics,
        &[
            "{\"filename\":\"a\",\"value\":0.25}".into(),
            "{\"filename\":\"b\",\"value\":0.75}".into(),
        ],
    );
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[]").unwrap();
    let out = dupaudit(&[
        "bias",
        "--metrics",
        metrics.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["beta"].is_null());
    assert_eq!(json["d"], 0.0);
}

#[test]
fn bias_id_mismatch_lists_offenders_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("metrics.jsonl");
    write_lines(&metrics, &["{\"filename\":\"a\",\"value\":1.0}".into()]);
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[[\"a\",\"ghost1\"],[\"ghost2\",\"ghost3\"]]").unwrap();
    let out = dupaudit(&[
        "bias",
        "--metrics",
        metrics.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    let msg = stderr(&out);
    assert!(
        msg.contains("ghost1") && msg.contains("ghost3"),
        "stderr: {msg}"
    );
}

#[test]
fn weights_cover_group_members_and_optionally_singletons() {
    let dir = tempfile::tempdir().unwrap();
    let clusters = dir.path().join("clusters.json");
    fs::write(
        &clusters,
        "[[\"p1\",\"p2\"],[\"q1\",\"q2\",\"q3\",\"q4\",\"q5\"]]",
    )
    .unwrap();
    let weights = dir.path().join("weights.jsonl");
    let out = dupaudit(&[
        "weights",
        "--clusters",
        clusters.to_str().unwrap(),
        "--output",
        weights.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let body = fs::read_to_string(&weights).unwrap();
    assert_eq!(body.lines().count(), 7);
    assert!(body.contains("{\"filename\":\"p1\",\"weight\":0.5}"));
    assert!(body.contains("{\"filename\":\"q5\",\"weight\":0.2}"));

    // With a token corpus, singletons appear too.
    let tokens = dir.path().join("tokens.jsonl");
    let mut lines: Vec<String> = ["p1", "p2", "q1", "q2", "q3", "q4", "q5"]
        .iter()
        .enumerate()
        .map(|(i, id)| doc_line(id, &format!("w{i}_"), 25))
        .collect();
    lines.push(doc_line("solo", "s", 25));
    write_lines(&tokens, &lines);
    let out = dupaudit(&[
        "weights",
        "--clusters",
        clusters.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        weights.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let body = fs::read_to_string(&weights).unwrap();
    assert_eq!(body.lines().count(), 8);
    assert!(body.contains("{\"filename\":\"solo\",\"weight\":1.0}"));
}

#[test]
fn audit_classifies_cross_set_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let clusters = dir.path().join("clusters.json");
    fs::write(&clusters, "[[\"a1\",\"a2\"]]").unwrap();
    let split = dir.path().join("split.jsonl");
    write_lines(
        &split,
        &[
            "{\"filename\":\"a1\",\"fold\":\"train\"}".into(),
            "{\"filename\":\"a2\",\"fold\":\"test\"}".into(),
            "{\"filename\":\"c\",\"fold\":\"test\"}".into(),
        ],
    );
    let out = dupaudit(&[
        "audit",
        "--clusters",
        clusters.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["cross_set"], serde_json::json!(["a2"]));
    assert_eq!(json["in_train"], serde_json::json!([]));
    assert_eq!(json["test_cross_set_fraction"], 0.5);
}

#[test]
fn lab_emits_result_json() {
    let out = dupaudit(&[
        "lab",
        "--seed",
        "3",
        "--n-base",
        "60",
        "--dup-rate",
        "0.4",
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in [
        "fully_unbiased_acc",
        "unbiased_test_acc",
        "cross_set_biased_acc",
        "fully_biased_acc",
        "d",
    ] {
        let v = json[key].as_f64().unwrap_or(-1.0);
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
    // --quiet silences the table.
    assert!(stderr(&out).is_empty());
}

#[test]
fn full_pipeline_from_sources_to_bias() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir_all(src.join("pkg")).unwrap();

    // Two Java files differing only in comments and whitespace, plus one
    // unrelated file; each lexes to at least 20 tokens.
    let body_a = r#"
class Widget {
    int total(int[] values) {
        int sum = 0;
        for (int v : values) { sum += v; }
        helperOne(sum); helperTwo(sum); helperThree(sum);
        return sum * FACTOR + OFFSET + BASE + SCALE + LIMIT;
    }
}
"#;
    let body_b = body_a.replace("int sum = 0;", "int  sum = 0; // accumulator");
    let unrelated = r#"
class Parser {
    String read(String name) {
        log(name); open(name); scan(name); close(name); validate(name);
        return PREFIX + name + SUFFIX + VERSION + ENCODING + CHARSET;
    }
}
"#;
    fs::write(src.join("Widget.java"), body_a).unwrap();
    fs::write(src.join("pkg/WidgetCopy.java"), &body_b).unwrap();
    fs::write(src.join("Parser.java"), unrelated).unwrap();

    let tokens = dir.path().join("tokens.jsonl");
    let out = dupaudit(&[
        "tokenize",
        "--lang",
        "java",
        "--input",
        src.to_str().unwrap(),
        "--output",
        tokens.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let clusters = dir.path().join("clusters.json");
    let out = dupaudit(&[
        "detect",
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        clusters.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(
        fs::read_to_string(&clusters).unwrap(),
        "[\n  [\"Widget.java\",\"pkg/WidgetCopy.java\"]\n]\n"
    );

    let keep = dir.path().join("keep.txt");
    let out = dupaudit(&[
        "dedup",
        "--clusters",
        clusters.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--output",
        keep.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        fs::read_to_string(&keep).unwrap(),
        "Parser.java\nWidget.java\n"
    );
}
