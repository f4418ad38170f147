//! The binary's exit-code contract and report shapes, checked through a
//! subprocess.

use std::process::{Command, Output};

fn dqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn nonlocal_cnot_report() {
    let out = dqc(&["verify", "nonlocal-cnot", "--branches", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let r = &doc[0];
    assert_eq!(r["protocol"], "nonlocal-cnot");
    assert_eq!(
        (r["ebits"].as_u64(), r["cbits"].as_u64()),
        (Some(1), Some(2))
    );
    assert_eq!(r["counts"]["distinct_branches"], 4);
    assert_eq!(r["verified"], true);
    let log = r["message_log"].as_array().unwrap();
    assert_eq!(log.len(), 2);
    for m in log {
        let keys: Vec<_> = m.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["bit", "from", "tag", "to"]);
        assert!(m["to"].is_array());
    }
}

#[test]
fn qft_report_counts() {
    let out = dqc(&["verify", "qft", "--n", "4", "--m", "2", "--branches", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc[0]["counts"]["nonlocal_controlled"], 4);
    assert_eq!(doc[0]["counts"]["total_controlled"], 6);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "bogus"][..],
        &["verify", "teleport", "--branches", "0"],
        &["verify", "teleport", "--branches", "lots"],
        &["qft", "--n", "5", "--m", "2"],
        &["frobnicate"],
        &[],
    ] {
        let out = dqc(args);
        assert_eq!(out.status.code(), Some(2), "dqc {args:?}");
        assert!(out.stdout.is_empty(), "dqc {args:?} printed a report");
    }
}

#[test]
fn unwritable_output_is_an_error() {
    let out = dqc(&[
        "verify",
        "teleport",
        "--output",
        "/nonexistent/dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write"));
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("dqc-report-{}.json", std::process::id()));
    let to_file = dqc(&["verify", "swap", "--output", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, dqc(&["verify", "swap"]).stdout);
}

#[test]
fn text_table_carries_the_same_numbers() {
    let out = dqc(&["verify", "teleport", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<_> = lines.next().unwrap().split_whitespace().collect();
    let row: Vec<_> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header.len(), row.len());
    let field = |name| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("ebits"), "1");
    assert_eq!(field("cbits"), "2");
    assert_eq!(field("verified"), "yes");
}

#[test]
fn demo_prints_messages() {
    let out = dqc(&["demo", "nonlocal-cnot", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cat-entangle-r"));
    assert!(text.contains("disentangle-r"));
}

#[test]
fn sampled_reports_repeat_for_a_seed() {
    let a = dqc(&["verify", "mcx", "--branches", "2", "--seed", "1"]);
    let b = dqc(&["verify", "mcx", "--branches", "2", "--seed", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
