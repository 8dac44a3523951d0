//! End-to-end tests of the `mspr` binary: indexing, batch runs, resumption,
//! scoring and configuration precedence.

use mspr::llm::{Script, StageTag};
use mspr::trace::deserialize_trace;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mspr"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/golden")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn write_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"doc_id\":\"d1\",\"title\":\"One\",\"text\":\"alpha beta gamma\"}\n",
            "{\"doc_id\":\"d2\",\"title\":\"Two\",\"text\":\"delta epsilon\"}\n",
            "{\"doc_id\":\"d3\",\"title\":\"Three\",\"text\":\"alpha alpha\"}\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn index_reports_doc_count_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out_a = dir.path().join("a.idx");
    let out_b = dir.path().join("b.idx");

    let output = run_ok(
        bin()
            .args(["index", "--corpus"])
            .arg(&corpus)
            .arg("--out")
            .arg(&out_a),
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("indexed 3 docs"), "stdout: {stdout}");

    run_ok(
        bin()
            .args(["index", "--corpus"])
            .arg(&corpus)
            .arg("--out")
            .arg(&out_b),
    );
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
}

#[test]
fn indexing_an_empty_corpus_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    fs::write(&corpus, "").unwrap();
    let output = bin()
        .args(["index", "--corpus"])
        .arg(&corpus)
        .arg("--out")
        .arg(dir.path().join("x.idx"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("empty"));
}

#[test]
fn unknown_flags_are_a_usage_error() {
    let output = bin()
        .args(["run", "--definitely-not-a-flag"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn nor_run_answers_every_example_with_zero_retrievals() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        concat!(
            "{\"id\":\"q1\",\"question\":\"first?\",\"answers\":[\"a\"]}\n",
            "{\"id\":\"q2\",\"question\":\"second?\",\"answers\":[\"b\"]}\n"
        ),
    )
    .unwrap();

    let script_path = dir.path().join("script.jsonl");
    let mut script = Script::new();
    script
        .add("q1", StageTag::Nor, "a")
        .add("q2", StageTag::Nor, "b");
    script.save(&script_path).unwrap();

    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--method", "nor", "--llm-backend", "scripted"])
            .arg("--dataset")
            .arg(&dataset)
            .arg("--script")
            .arg(&script_path)
            .arg("--out")
            .arg(&out),
    );

    let predictions = fs::read_to_string(out.join("predictions.jsonl")).unwrap();
    let lines: Vec<Value> = predictions
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    for line in &lines {
        assert_eq!(line["llm_calls"], 1);
        assert_eq!(line["local_retrievals"], 0);
        assert_eq!(line["web_retrievals"], 0);
    }
    // trace lines exist and parse, one per example
    let traces = fs::read_to_string(out.join("trace.jsonl")).unwrap();
    assert_eq!(traces.lines().count(), 2);
    for line in traces.lines() {
        deserialize_trace(line).unwrap();
    }
}

#[test]
fn scripted_mspr_run_matches_the_golden_trace() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = dir.path().join("corpus.idx");
    run_ok(
        bin()
            .args(["index", "--corpus"])
            .arg(fixture("corpus.jsonl"))
            .arg("--out")
            .arg(&snapshot),
    );

    let cache = dir.path().join("cache");
    fs::create_dir_all(&cache).unwrap();
    fs::copy(fixture("web_replay.jsonl"), cache.join("web_replay.jsonl")).unwrap();

    let out = dir.path().join("out");
    run_ok(
        bin()
            .args([
                "run",
                "--method",
                "mspr",
                "--llm-backend",
                "scripted",
                "--web-backend",
                "replay",
            ])
            .arg("--dataset")
            .arg(fixture("dataset.jsonl"))
            .arg("--script")
            .arg(fixture("script.jsonl"))
            .arg("--corpus-snapshot")
            .arg(&snapshot)
            .arg("--cache-dir")
            .arg(&cache)
            .arg("--out")
            .arg(&out),
    );

    assert_eq!(
        fs::read_to_string(out.join("trace.jsonl")).unwrap(),
        fs::read_to_string(fixture("trace.golden.jsonl")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(out.join("predictions.jsonl")).unwrap(),
        fs::read_to_string(fixture("predictions.golden.jsonl")).unwrap()
    );
}

#[test]
fn interrupted_runs_resume_without_duplicate_ids() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        concat!(
            "{\"id\":\"q1\",\"question\":\"first?\",\"answers\":[\"a\"]}\n",
            "{\"id\":\"q2\",\"question\":\"second?\",\"answers\":[\"b\"]}\n",
            "{\"id\":\"q3\",\"question\":\"third?\",\"answers\":[\"c\"]}\n"
        ),
    )
    .unwrap();

    // first pass: the script only covers q1 and q3, so q2 fails
    let partial = dir.path().join("partial.jsonl");
    let mut script = Script::new();
    script
        .add("q1", StageTag::Nor, "a")
        .add("q3", StageTag::Nor, "c");
    script.save(&partial).unwrap();

    let out = dir.path().join("out");
    let output = bin()
        .args(["run", "--method", "nor", "--llm-backend", "scripted"])
        .arg("--dataset")
        .arg(&dataset)
        .arg("--script")
        .arg(&partial)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "partial failure exit code");
    assert!(String::from_utf8_lossy(&output.stderr).contains("q2"));

    // second pass with the full script picks up only the missing example
    let full = dir.path().join("full.jsonl");
    let mut script = Script::new();
    script
        .add("q1", StageTag::Nor, "a")
        .add("q2", StageTag::Nor, "b")
        .add("q3", StageTag::Nor, "c");
    script.save(&full).unwrap();

    let output = run_ok(
        bin()
            .args(["run", "--method", "nor", "--llm-backend", "scripted"])
            .arg("--dataset")
            .arg(&dataset)
            .arg("--script")
            .arg(&full)
            .arg("--out")
            .arg(&out),
    );
    assert!(String::from_utf8_lossy(&output.stdout).contains("resuming"));

    let predictions = fs::read_to_string(out.join("predictions.jsonl")).unwrap();
    let mut ids: Vec<String> = predictions
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    ids.sort();
    assert_eq!(ids, vec!["q1", "q2", "q3"]);
}

#[test]
fn eval_scores_perfect_predictions_at_one_hundred() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        concat!(
            "{\"id\":\"q1\",\"question\":\"first?\",\"answers\":[\"Barack Obama\"]}\n",
            "{\"id\":\"q2\",\"question\":\"second?\",\"answers\":[\"Paris\"]}\n"
        ),
    )
    .unwrap();
    let predictions = dir.path().join("predictions.jsonl");
    fs::write(
        &predictions,
        concat!(
            "{\"id\":\"q1\",\"prediction\":\"barack obama.\"}\n",
            "{\"id\":\"q2\",\"prediction\":\"Paris\"}\n"
        ),
    )
    .unwrap();

    let output = run_ok(
        bin()
            .args(["eval"])
            .arg("--predictions")
            .arg(&predictions)
            .arg("--dataset")
            .arg(&dataset),
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("100.0"), "stdout: {stdout}");
}

#[test]
fn eval_rejects_empty_predictions_and_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        "{\"id\":\"q1\",\"question\":\"first?\",\"answers\":[\"a\"]}\n",
    )
    .unwrap();

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let output = bin()
        .args(["eval"])
        .arg("--predictions")
        .arg(&empty)
        .arg("--dataset")
        .arg(&dataset)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    let unknown = dir.path().join("unknown.jsonl");
    fs::write(&unknown, "{\"id\":\"zz\",\"prediction\":\"a\"}\n").unwrap();
    let output = bin()
        .args(["eval"])
        .arg("--predictions")
        .arg(&unknown)
        .arg("--dataset")
        .arg(&dataset)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("zz"));
}

#[test]
fn eval_aggregates_match_hand_computed_means() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        concat!(
            "{\"id\":\"q1\",\"question\":\"one?\",\"answers\":[\"cat sat down\"]}\n",
            "{\"id\":\"q2\",\"question\":\"two?\",\"answers\":[\"Paris\"]}\n",
            "{\"id\":\"q3\",\"question\":\"three?\",\"answers\":[\"London\"]}\n",
            "{\"id\":\"q4\",\"question\":\"four?\",\"answers\":[\"the Nile\",\"Nile\"]}\n"
        ),
    )
    .unwrap();
    // hand-scored: f1 = [0.8, 1.0, 0.0, 1.0], em = [0, 1, 0, 1]
    // means: f1 = 0.7 -> 70.0, em = 0.5 -> 50.0
    let predictions = dir.path().join("predictions.jsonl");
    fs::write(
        &predictions,
        concat!(
            "{\"id\":\"q1\",\"prediction\":\"the cat sat\"}\n",
            "{\"id\":\"q2\",\"prediction\":\"paris\"}\n",
            "{\"id\":\"q3\",\"prediction\":\"Madrid\"}\n",
            "{\"id\":\"q4\",\"prediction\":\"Nile\"}\n"
        ),
    )
    .unwrap();

    let out = dir.path().join("report");
    run_ok(
        bin()
            .args(["eval"])
            .arg("--predictions")
            .arg(&predictions)
            .arg("--dataset")
            .arg(&dataset)
            .arg("--out")
            .arg(&out),
    );
    let tsv = fs::read_to_string(out.join("report.tsv")).unwrap();
    assert!(tsv.contains("q1\t0\t0.800000"));
    assert!(tsv.ends_with("__aggregate__\t50.0\t70.0\n"), "tsv: {tsv}");
    let text = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.contains("70.0") && text.contains("50.0"));
}

/// Flags override the config file, which overrides the built-in defaults.
/// Observable through the step budget: an always-retrieving script stops at
/// exactly `awi` steps.
#[test]
fn config_precedence_is_defaults_then_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let snapshot = dir.path().join("c.idx");
    run_ok(
        bin()
            .args(["index", "--corpus"])
            .arg(&corpus)
            .arg("--out")
            .arg(&snapshot),
    );

    let dataset = dir.path().join("dataset.jsonl");
    fs::write(
        &dataset,
        "{\"id\":\"q1\",\"question\":\"about alpha?\",\"answers\":[\"x\"]}\n",
    )
    .unwrap();

    let script_path = dir.path().join("script.jsonl");
    let mut script = Script::new();
    for i in 0..6 {
        script.add(
            "q1",
            StageTag::ReasonAct,
            format!("Thought: more\nAction: Search Local\nAction Input: alpha {i}"),
        );
        script.add("q1", StageTag::PrsLabel, "True");
    }
    script.add("q1", StageTag::FinalAnswer, "best effort");
    script.add(
        "q1",
        StageTag::CarReview,
        "Effectiveness: True\nCompleteness: True\nCorrectness: True\nRationale: ok",
    );
    script.save(&script_path).unwrap();

    let config_path = dir.path().join("config.toml");
    fs::write(&config_path, "awi = 2\n").unwrap();

    let steps_of = |out: &Path| -> usize {
        let trace = fs::read_to_string(out.join("trace.jsonl")).unwrap();
        let (ctx, _) = deserialize_trace(trace.lines().next().unwrap()).unwrap();
        ctx.steps.len()
    };

    // built-in default: awi = 5
    let out_default = dir.path().join("out_default");
    run_ok(
        bin()
            .args(["run", "--method", "mspr", "--llm-backend", "scripted"])
            .arg("--dataset")
            .arg(&dataset)
            .arg("--script")
            .arg(&script_path)
            .arg("--corpus-snapshot")
            .arg(&snapshot)
            .arg("--out")
            .arg(&out_default),
    );
    assert_eq!(steps_of(&out_default), 5);

    // config file lowers it to 2
    let out_file = dir.path().join("out_file");
    run_ok(
        bin()
            .args(["run", "--method", "mspr", "--llm-backend", "scripted"])
            .arg("--dataset")
            .arg(&dataset)
            .arg("--script")
            .arg(&script_path)
            .arg("--corpus-snapshot")
            .arg(&snapshot)
            .arg("--config")
            .arg(&config_path)
            .arg("--out")
            .arg(&out_file),
    );
    assert_eq!(steps_of(&out_file), 2);

    // the flag wins over the file
    let out_flag = dir.path().join("out_flag");
    run_ok(
        bin()
            .args([
                "run",
                "--method",
                "mspr",
                "--llm-backend",
                "scripted",
                "--awi",
                "3",
            ])
            .arg("--dataset")
            .arg(&dataset)
            .arg("--script")
            .arg(&script_path)
            .arg("--corpus-snapshot")
            .arg(&snapshot)
            .arg("--config")
            .arg(&config_path)
            .arg("--out")
            .arg(&out_flag),
    );
    assert_eq!(steps_of(&out_flag), 3);
}

#[test]
fn jobs_flag_preserves_dataset_output_order() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.jsonl");
    let mut dataset_lines = String::new();
    let mut script = Script::new();
    for i in 0..8 {
        dataset_lines.push_str(&format!(
            "{{\"id\":\"q{i}\",\"question\":\"number {i}?\",\"answers\":[\"{i}\"]}}\n"
        ));
        script.add(format!("q{i}"), StageTag::Nor, format!("{i}"));
    }
    fs::write(&dataset, dataset_lines).unwrap();
    let script_path = dir.path().join("script.jsonl");
    script.save(&script_path).unwrap();

    let out_serial = dir.path().join("serial");
    let out_parallel = dir.path().join("parallel");
    for (out, jobs) in [(&out_serial, "1"), (&out_parallel, "4")] {
        run_ok(
            bin()
                .args([
                    "run",
                    "--method",
                    "nor",
                    "--llm-backend",
                    "scripted",
                    "--jobs",
                    jobs,
                ])
                .arg("--dataset")
                .arg(&dataset)
                .arg("--script")
                .arg(&script_path)
                .arg("--out")
                .arg(out),
        );
    }
    assert_eq!(
        fs::read(out_serial.join("predictions.jsonl")).unwrap(),
        fs::read(out_parallel.join("predictions.jsonl")).unwrap()
    );
    assert_eq!(
        fs::read(out_serial.join("trace.jsonl")).unwrap(),
        fs::read(out_parallel.join("trace.jsonl")).unwrap()
    );
}
