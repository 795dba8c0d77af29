use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimguard"))
        .args(args)
        .env_remove("CG_GENERATOR_URL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("claimguard-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn verify(response: &str, extra: &[&str]) -> Output {
    let kb = fixture("einstein.tsv");
    let rules = fixture("einstein.rules");
    let mut args = vec!["verify", "--kb", &kb, "--rules", &rules, "--context", "Where was Einstein born?", "--response", response];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn verify_accepts_supported_response() {
    let o = verify("Einstein was born in Ulm.", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("verdict: accept"));
}

#[test]
fn verify_rejects_contradiction_with_evidence() {
    let o = verify("Einstein was born in Paris.", &["--format", "canonical"]);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "reject");
    assert_eq!(report["claims"][0]["status"], "contradicted");
    assert_eq!(report["claims"][0]["evidence"][0]["object"], "ulm");
}

#[test]
fn verify_flags_mixed_response() {
    let o = verify("Einstein was born in Paris. Einstein was born in the year 1879.", &["--explain"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("score decomposition"));
}

#[test]
fn threshold_flag_moves_the_reject_boundary() {
    let o = verify("Einstein was born in Paris. Einstein was born in the year 1879.", &["--threshold", "0.4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_reads_response_file() {
    let path = tmp("response.txt");
    std::fs::write(&path, "@claim(einstein, born_in, ulm)\n").unwrap();
    let kb = fixture("einstein.tsv");
    let o = run(&["verify", "--kb", &kb, "--context", "Einstein", "--response-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_kb_names_the_path() {
    let o = run(&["verify", "--kb", "/no/such/kb.tsv", "--response", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/kb.tsv"));
}

#[test]
fn prove_prints_trace() {
    let o = run(&["prove", "--kb", &fixture("einstein.tsv"), "--rules", &fixture("einstein.rules"), "born_in_country(einstein, germany)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("negated_goal: ~born_in_country(einstein, germany)"));
}

#[test]
fn prove_unknown_predicate_saturates() {
    let o = run(&["prove", "--kb", &fixture("einstein.tsv"), "likes(einstein, music)"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "no proof (saturated)\n");
}

#[test]
fn prove_reports_parse_errors_with_caret() {
    let o = run(&["prove", "--kb", &fixture("einstein.tsv"), "born_in("]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("born_in(\n") && err.contains('^'), "{err}");
}

#[test]
fn bench_without_positives_omits_recall() {
    let o = run(&["bench", "--n", "10", "--rate", "0", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(m.get("recall").is_none());
    assert_eq!(m["counts"]["tn"], 10);
}

#[test]
fn bench_rejects_empty_corpus() {
    assert_eq!(run(&["bench", "--n", "0"]).status.code(), Some(1));
}

#[test]
fn fit_then_verify_with_weights() {
    let features = tmp("features.txt");
    let o = run(&["bench", "--n", "40", "--seed", "2", "--features-out", features.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let weights = tmp("weights.txt");
    let o = run(&["fit", "--examples-file", features.to_str().unwrap(), "--out", weights.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy: 1.000000"));
    let o = verify("Einstein was born in Ulm.", &["--weights", weights.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn fit_rejects_one_class() {
    let path = tmp("one-class.txt");
    std::fs::write(&path, "0.1 0.9 0.0 1\n0.2 0.8 0.1 1\n").unwrap();
    let o = run(&["fit", "--examples-file", path.to_str().unwrap(), "--out", tmp("never.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degenerate"));
}

#[test]
fn config_file_supplies_paths_and_format() {
    let dir = tmp("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("claimguard.toml");
    std::fs::write(
        &config,
        format!("kb_path = {:?}\nrules_path = {:?}\nformat = \"canonical\"\n", fixture("einstein.tsv"), fixture("einstein.rules")),
    )
    .unwrap();
    let o = run(&["verify", "--config", config.to_str().unwrap(), "--context", "Einstein", "--response", "Einstein was born in Paris."]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("{\n"));
    let o = run(&["verify", "--config", config.to_str().unwrap(), "--format", "text", "--response", "Einstein was born in Ulm."]);
    assert!(stdout(&o).starts_with("verdict:"));
}

#[test]
fn config_with_missing_file_fails() {
    let config = tmp("bad.toml");
    std::fs::write(&config, "kb_path = \"/no/such/file.tsv\"\n").unwrap();
    let o = run(&["verify", "--config", config.to_str().unwrap(), "--response", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/file.tsv"));
}

#[test]
fn unreachable_generator_is_an_operational_error() {
    let kb = fixture("einstein.tsv");
    let o = Command::new(env!("CARGO_BIN_EXE_claimguard"))
        .args(["verify", "--kb", &kb, "--context", "Einstein", "--response", "Einstein was born in Ulm."])
        .env("CG_GENERATOR_URL", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("generator unavailable"));
}
