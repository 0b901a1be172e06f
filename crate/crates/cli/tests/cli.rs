use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn maps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maps")).args(args).env_remove("MAPS_SERVER").output().expect("maps runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_wait_episode(out: &Path) -> String {
    let o = maps(&["run", "--layout", "ribs", "--difficulty", "easy", "--seed", "7", "--policy", "wait", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let trace = manifest["episodes"][0]["trace"].as_str().unwrap();
    out.join(trace).to_str().unwrap().to_string()
}

#[test]
fn run_writes_a_report_that_replays() {
    let dir = tempfile::tempdir().unwrap();
    let trace = run_wait_episode(dir.path());
    assert!(dir.path().join("scores.csv").exists());
    assert!(dir.path().join("service/index.jsonl").exists(), "the embedded service persisted the session");
    let o = maps(&["replay", &trace]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("days replayed: 50"));
    assert!(stdout(&o).contains("every observation matches"));
}

#[test]
fn replay_flags_a_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = run_wait_episode(dir.path());
    let text = fs::read_to_string(&trace).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 3 { l.replacen("\\\"money\\\": ", "\\\"money\\\": 9", 1) } else { l.to_string() })
        .collect();
    assert_ne!(tampered.join("\n") + "\n", text, "the tamper edit applied");
    fs::write(&trace, tampered.join("\n") + "\n").unwrap();
    let o = maps(&["replay", &trace]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("mismatched days: [3]"), "{}", stdout(&o));
}

#[test]
fn cv_reads_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = run_wait_episode(dir.path());
    let out = dir.path().join("cv");
    let o = maps(&["cv", "--trajectory", &trace, "--n", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("3 runs kept, 0 discarded"));
    assert_eq!(fs::read_to_string(out.join("cv.csv")).unwrap().lines().count(), 51);
}

#[test]
fn react_plays_from_a_recorded_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let exchange = r#"{"messages":[],"completion":{"text":"Thought: rest\nAction: wait\nAction Input:"}}"#;
    let transcript = dir.path().join("t.jsonl");
    fs::write(&transcript, format!("{exchange}\n").repeat(50)).unwrap();
    let out = dir.path().join("out");
    let o = maps(&[
        "run", "--layout", "zig_zag", "--policy", "react", "--replay-transcript", transcript.to_str().unwrap(),
        "--out", out.to_str().unwrap(), "--player", "replayer",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("invalid 0"));
    assert!(stdout(&o).contains("leaderboard: replayer"));
    let log = fs::read_to_string(out.join("transcripts/zig_zag-easy-0.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 50);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = maps(&["run", "--layout", "ribs", "--policy", "telepathy", "--out", out]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown policy"));
    let o = maps(&["run", "--layout", "atlantis", "--policy", "wait", "--out", out]);
    assert!(!o.status.success());
    let o = maps(&["cv", "--trajectory", "/nonexistent", "--n", "3"]);
    assert!(!o.status.success());
}
