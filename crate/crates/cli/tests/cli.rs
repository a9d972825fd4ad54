use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hopsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn walkthrough_prints_the_four_transitions() {
    let o = hopsim(&["replay-fig5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for line in [
        "-> d1=[(a2,PLAY)] d2=[(a1,PLAY),(a3,DUCK)] d3=[(a4,PLAY)] hop=(d1,a1,d2)",
        "-> d1=[(a1,PLAY),(a2,DUCK)] d2=[(a3,PLAY)] d3=[(a4,PLAY)] hop=none",
        "-> d1=[(a1,PLAY),(a2,DUCK)] d2=[(a4,PLAY),(a3,PAUSE_RESUME)] d3=[] hop=(d3,a4,d2)",
    ] {
        assert!(text.contains(line), "missing {line} in\n{text}");
    }
    assert_eq!(text.matches("->").count(), 4);
}

#[test]
fn injected_campaign_exits_one_with_a_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert_eq!(code(&hopsim(&["gen-corpus", "--out", p(&corpus)])), 0);
    assert!(corpus.join("injections.json").exists());

    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    let o = hopsim(&["campaign", "--corpus", p(&corpus), "--out", p(&r1), "--seed", "7"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("unique:"));
    assert_eq!(code(&hopsim(&["campaign", "--corpus", p(&corpus), "--out", p(&r2), "--seed", "7"])), 1);
    let a = fs::read(&r1).unwrap();
    assert_eq!(a, fs::read(&r2).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(report["unique"].as_u64().unwrap() > 0);
    assert_eq!(report["by_op"].get("END_HOP").map(|c| c["total"].as_u64()), Some(Some(74)));
}

#[test]
fn fault_free_campaign_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("clean");
    assert_eq!(code(&hopsim(&["gen-corpus", "--out", p(&corpus), "--fault-free"])), 0);
    let out = dir.path().join("r.json");
    let o = hopsim(&["campaign", "--corpus", p(&corpus), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out).unwrap()).unwrap();
    assert_eq!(report["total"], 0);
}

#[test]
fn config_file_supplies_corpus_and_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("clean");
    hopsim(&["gen-corpus", "--out", p(&corpus), "--fault-free"]);
    let cfg = dir.path().join("campaign.toml");
    fs::write(&cfg, "corpus = \"clean\"\nrepetitions = 2\ndevices = [\"a\", \"b\"]\n").unwrap();
    let out = dir.path().join("r.json");
    let o = hopsim(&["campaign", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out).unwrap()).unwrap();
    assert_eq!(report["executions"].as_u64(), report["test_cases"].as_u64().map(|n| n * 2));

    fs::write(&cfg, "repetitions = 0\n").unwrap();
    assert_eq!(code(&hopsim(&["campaign", "--config", p(&cfg)])), 2);
}

#[test]
fn staged_pipeline_matches_the_one_shot_generation() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let explored = dir.path().join("explored");
    let enhanced = dir.path().join("enhanced");
    hopsim(&["gen-corpus", "--out", p(&corpus), "--fault-free"]);
    assert_eq!(code(&hopsim(&["explore", "--corpus", p(&corpus), "--out", p(&explored)])), 0);
    let o = hopsim(&["enhance", "--corpus", p(&corpus), "--graphs", p(&explored), "--out", p(&enhanced)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 8);

    let staged = dir.path().join("staged.jsonl");
    let direct = dir.path().join("direct.jsonl");
    let args = ["generate", "--corpus", p(&corpus), "--out"];
    assert_eq!(code(&hopsim(&[&args[..], &[p(&staged), "--graphs", p(&enhanced)]].concat())), 0);
    assert_eq!(code(&hopsim(&[&args[..], &[p(&direct)]].concat())), 0);
    assert_eq!(fs::read(&staged).unwrap(), fs::read(&direct).unwrap());

    let baselines = dir.path().join("baselines.jsonl");
    let o = hopsim(&["baseline", "--corpus", p(&corpus), "--graphs", p(&enhanced), "--out", p(&baselines)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&baselines).unwrap().lines().count(), 8 * 7);
}

#[test]
fn stale_graph_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let explored = dir.path().join("explored");
    hopsim(&["gen-corpus", "--out", p(&corpus), "--fault-free"]);
    hopsim(&["explore", "--corpus", p(&corpus), "--out", p(&explored)]);
    let other = fs::read_to_string(explored.join("v5.json")).unwrap();
    fs::write(explored.join("m5.json"), other.replace("\"v5\"", "\"m5\"")).unwrap();
    let o = hopsim(&["enhance", "--corpus", p(&corpus), "--graphs", p(&explored), "--out", p(&dir.path().join("e"))]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&hopsim(&["campaign", "--corpus", "/definitely/not/here"])), 2);
    assert_eq!(code(&hopsim(&["campaign", "--bogus"])), 2);
    assert_eq!(code(&hopsim(&["validate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    hopsim(&["gen-corpus", "--out", p(dir.path()), "--random", "3"]);
    let o = hopsim(&["explore", "--corpus", p(dir.path()), "--out", p(&dir.path().join("g")), "--policy", "llm"]);
    assert_eq!(code(&o), 2);
    let o = hopsim(&[
        "explore", "--corpus", p(dir.path()), "--out", p(&dir.path().join("g")),
        "--policy", "llm", "--endpoint-url", "http://127.0.0.1:9", "--model", "m",
        "--key-env", "HOPSIM_TEST_KEY_THAT_IS_NOT_SET",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("HOPSIM_TEST_KEY_THAT_IS_NOT_SET"));
}

#[test]
fn validate_reports_broken_specs() {
    let dir = tempfile::tempdir().unwrap();
    hopsim(&["gen-corpus", "--out", p(dir.path()), "--random", "4", "--seed", "3"]);
    assert_eq!(code(&hopsim(&["validate", "--corpus", p(dir.path())])), 0);
    fs::write(dir.path().join("r2.toml"), "id = \"r2\"\n").unwrap();
    let o = hopsim(&["validate", "--corpus", p(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("r2.toml"));
}
