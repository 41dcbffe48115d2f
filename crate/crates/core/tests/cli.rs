mod common;

use std::path::Path;
use std::process::Command;

use common::fixture;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gsm-panayi"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_job(cmd: &str, job: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec![cmd, "--job", job.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, stdout, stderr) = run(&args);
    let doc = serde_json::from_str(&stdout)
        .unwrap_or_else(|_| panic!("stdout not JSON; stderr: {stderr}"));
    (code, doc)
}

fn write_temp(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gsm-panayi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn roots_of_x2_minus_6() {
    let (code, doc) = run_job("roots", &fixture("q5_x2_minus_6_roots.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["count"], 2);
    assert_eq!(doc["roots"].as_array().unwrap().len(), 2);
}

#[test]
fn roots_of_linear_polynomial() {
    let job = write_temp(
        "linear.json",
        r#"{"version": 1, "p": "5", "precision": 20, "field": {"defining": ["0", "1"]}, "roots": {"polynomial": ["-7", "1"]}}"#,
    );
    let (code, doc) = run_job("roots", &job, &[]);
    assert_eq!((code, doc["count"].as_u64()), (0, Some(1)));
}

#[test]
fn d5_candidates_have_roots_in_their_fields() {
    for name in ["d5_a", "d5_b", "d5_c"] {
        let (code, doc) = run_job("roots", &fixture(&format!("{name}_roots.json")), &[]);
        assert_eq!(code, 0);
        assert!(doc["count"].as_u64().unwrap() >= 1, "{name}");
    }
}

#[test]
fn d5_checks_pass() {
    for name in ["d5_a", "d5_b", "d5_c"] {
        let (code, doc) = run_job("check", &fixture(&format!("{name}_check.json")), &[]);
        assert_eq!(code, 0);
        assert_eq!(doc["local_gsm"], true, "{name}");
    }
}

#[test]
fn swapped_candidate_fails_check() {
    let job = write_temp(
        "swapped.json",
        r#"{"version": 1, "p": "5", "precision": 120, "field": {"defining": ["5", "0", "15", "0", "0", "1"]},
            "check": {"candidate": ["18", "5", "295", "-10", "15", "1"]}}"#,
    );
    let (code, doc) = run_job("check", &job, &[]);
    assert_eq!((code, &doc["local_gsm"]), (0, &Value::Bool(false)));
}

#[test]
fn d5_search_finds_three_and_is_deterministic() {
    let out = std::env::temp_dir().join(format!("gsm-panayi-out-{}.json", std::process::id()));
    let job = fixture("d5_a_search.json");
    let (code, _, _) = run(&[
        "search",
        "--job",
        job.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let first = std::fs::read(&out).unwrap();
    let (code, second, _) = run(&["search", "--job", job.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(code, 0);
    assert_eq!(first, second.as_bytes());
    let doc: Value = serde_json::from_slice(&first).unwrap();
    let result = &doc["results"][0];
    assert_eq!(result["field_defining"][0], "3");
    let b = result["branches"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["reconstruction"] == "3")
        .unwrap();
    assert_eq!(
        b["specialized"],
        serde_json::json!(["3", "5", "-5", "5", "0", "1"])
    );
    assert_eq!(b["defines_field"], true);
}

#[test]
fn zero_digit_bound_is_inconclusive() {
    let job = write_temp(
        "bound0.json",
        r#"{"version": 1, "p": "5", "precision": 60, "field": {"defining": ["5", "0", "15", "0", "0", "1"]},
            "search": {"generic": "D5", "fixed_params": [["5"]], "digit_bound": 0}}"#,
    );
    let (code, doc) = run_job("search", &job, &[]);
    assert_eq!(code, 2);
    let branches = doc["results"][0]["branches"].as_array().unwrap();
    assert!(!branches.is_empty());
    assert!(branches.iter().all(|b| b["status"] == "bound-hit"));
}

#[test]
fn candidate_lists_run_one_search_each() {
    let job = write_temp(
        "candidates.json",
        r#"{"version": 1, "p": "5", "precision": 60, "field": {"defining": ["5", "0", "15", "0", "0", "1"]},
            "search": {"generic": "D5", "fixed_param_candidates": [[["5"]], [["10"]]], "digit_bound": 2}}"#,
    );
    let (code, doc) = run_job("search", &job, &["--precision", "80"]);
    assert_eq!(code, 0);
    assert_eq!(doc["precision"], 80);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[1]["fixed_params"], serde_json::json!([["10"]]));
}

#[test]
fn catalog_file_and_inline_generic() {
    let catalog = write_temp(
        "catalog.json",
        r#"[{"name": "Quad", "group": "C2", "arity": 1, "template": [[0, 1], [0], [1]]}]"#,
    );
    // x^2 + t over Q_5: -t must be a square
    let job = write_temp(
        "quad.json",
        r#"{"version": 1, "p": "5", "precision": 40, "field": {"defining": ["0", "1"]},
            "search": {"generic": "Quad", "digit_bound": 2}}"#,
    );
    let (code, doc) = run_job("search", &job, &["--catalog", catalog.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(doc["results"][0]["counts"]["root-found"].as_u64().unwrap() > 0);

    let inline = write_temp(
        "inline.json",
        r#"{"version": 1, "p": "5", "precision": 40, "field": {"defining": ["0", "1"]},
            "search": {"generic": {"name": "Quad", "arity": 1, "template": [[0, 1], [0], [1]]}, "digit_bound": 2}}"#,
    );
    let (code2, doc2) = run_job("search", &inline, &[]);
    assert_eq!(code2, 0);
    assert_eq!(doc2["results"], doc["results"]);
}

#[test]
fn input_errors_exit_1() {
    let malformed = write_temp("malformed.json", "{ not json");
    let (code, _, stderr) = run(&["roots", "--job", malformed.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!stderr.is_empty());

    let unknown = write_temp(
        "unknown.json",
        r#"{"version": 1, "p": "5", "precision": 40, "field": {"defining": ["0", "1"]},
            "search": {"generic": "NoSuchGroup", "digit_bound": 2}}"#,
    );
    assert_eq!(run(&["search", "--job", unknown.to_str().unwrap()]).0, 1);
    assert_eq!(run(&["roots"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
}

#[test]
fn non_squarefree_roots_job_is_input_error() {
    let job = write_temp(
        "square.json",
        r#"{"version": 1, "p": "5", "precision": 40, "field": {"defining": ["0", "1"]}, "roots": {"polynomial": ["1", "2", "1"]}}"#,
    );
    assert_eq!(run(&["roots", "--job", job.to_str().unwrap()]).0, 1);
}
