//! Command plumbing behind the `dqc` binary: run harnesses, render reports.
//!
//! Report document (JSON): a top-level array with one object per protocol:
//!
//! ```text
//! protocol, branches_tested, ebits, cbits, qubits_transported, rounds,
//! max_infidelity, verified,
//! sections:    [{ name, ebits, cbits, qubits_transported, rounds }],
//! counts:      { name: value },
//! notes:       [text],
//! failures:    [text],
//! message_log: [{ from, to: [node], bit, tag }]
//! ```
//!
//! Field names and order are fixed, so identical configurations produce
//! byte-identical documents.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::protocols::verify::{not_verified, verify, BranchMode, VerifyOptions, PROTOCOLS};
use crate::protocols::{LoggedMessage, ProtocolReport};
use crate::qft::build_qft_plan;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Full harness for one protocol (or `all`).
    Verify,
    /// One seeded branch per input, with the message log in text output.
    Demo,
    /// The QFT harness for the configured `n` and `m`.
    Qft,
    /// Every harness, one combined document.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub protocol: Option<String>,
    pub seed: u64,
    pub branches: BranchMode,
    pub n: usize,
    pub m: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = VerifyOptions::default();
        RunConfig {
            command: Command::Verify,
            protocol: None,
            seed: d.seed,
            branches: d.branches,
            n: d.n,
            m: d.m,
            output: None,
            format: Format::Json,
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: u8,
    pub reports: Vec<ProtocolReport>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn protocols_for(config: &RunConfig) -> Result<Vec<&'static str>, UsageError> {
    match config.command {
        Command::Qft => Ok(vec!["qft"]),
        Command::Report => Ok(PROTOCOLS.to_vec()),
        Command::Verify | Command::Demo => match config.protocol.as_deref() {
            None => Err(UsageError("missing protocol name".into())),
            Some("all") => Ok(PROTOCOLS.to_vec()),
            Some(name) => PROTOCOLS
                .iter()
                .find(|&&p| p == name)
                .map(|&p| vec![p])
                .ok_or_else(|| {
                    UsageError(format!(
                        "unknown protocol '{name}'; expected one of: all, {}",
                        PROTOCOLS.join(", ")
                    ))
                }),
        },
    }
}

/// Runs every harness the configuration asks for. Exit code 0 iff all of
/// them verified.
pub fn run_verify(config: &RunConfig) -> Result<Outcome, UsageError> {
    let names = protocols_for(config)?;
    let opts = VerifyOptions {
        branches: match config.command {
            Command::Demo => BranchMode::Sampled(1),
            _ => config.branches,
        },
        seed: config.seed,
        n: config.n,
        m: config.m,
    };
    if let BranchMode::Sampled(0) = opts.branches {
        return Err(UsageError(
            "--branches must be 'exhaustive' or a positive count".into(),
        ));
    }
    if names.contains(&"qft") {
        build_qft_plan(config.n, config.m)
            .and_then(|plan| plan.network(2))
            .map_err(|e| UsageError(format!("--n {} --m {}: {e}", config.n, config.m)))?;
    }
    let reports: Vec<ProtocolReport> = names
        .iter()
        .map(
            |name| match verify(name, &opts).expect("name was validated") {
                Ok(report) => report,
                Err(err) => not_verified(name, &err),
            },
        )
        .collect();
    let exit_code = if reports.iter().all(|r| r.verified) {
        EXIT_OK
    } else {
        EXIT_FAILED
    };
    Ok(Outcome { exit_code, reports })
}

#[derive(Serialize)]
struct SectionDoc<'a> {
    name: &'a str,
    ebits: u64,
    cbits: u64,
    qubits_transported: u64,
    rounds: u64,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    protocol: &'a str,
    branches_tested: usize,
    ebits: u64,
    cbits: u64,
    qubits_transported: u64,
    rounds: u64,
    max_infidelity: f64,
    verified: bool,
    sections: Vec<SectionDoc<'a>>,
    counts: serde_json::Map<String, serde_json::Value>,
    notes: &'a [String],
    failures: &'a [String],
    message_log: &'a [LoggedMessage],
}

fn to_doc(r: &ProtocolReport) -> ReportDoc<'_> {
    ReportDoc {
        protocol: &r.name,
        branches_tested: r.branches_tested,
        ebits: r.ledger.ebits_consumed,
        cbits: r.ledger.cbits_sent,
        qubits_transported: r.ledger.qubits_transported,
        rounds: r.rounds,
        max_infidelity: r.max_infidelity,
        verified: r.verified,
        sections: r
            .sections
            .iter()
            .map(|s| SectionDoc {
                name: &s.name,
                ebits: s.ledger.ebits_consumed,
                cbits: s.ledger.cbits_sent,
                qubits_transported: s.ledger.qubits_transported,
                rounds: s.ledger.rounds,
            })
            .collect(),
        counts: r
            .counts
            .iter()
            .map(|c| (c.name.clone(), serde_json::Value::from(c.value)))
            .collect(),
        notes: &r.notes,
        failures: &r.failures,
        message_log: &r.message_log,
    }
}

/// Renders reports. Text output is an aligned table followed by per-report
/// details; `with_messages` adds the classical message logs.
pub fn emit_report(reports: &[ProtocolReport], format: Format, with_messages: bool) -> String {
    match format {
        Format::Json => {
            let docs: Vec<ReportDoc> = reports.iter().map(to_doc).collect();
            let mut s = serde_json::to_string_pretty(&docs).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(reports, with_messages),
    }
}

fn render_text(reports: &[ProtocolReport], with_messages: bool) -> String {
    let mut out = String::new();
    let header = [
        "protocol",
        "branches",
        "ebits",
        "cbits",
        "transported",
        "rounds",
        "max_infidelity",
        "verified",
    ];
    let rows: Vec<[String; 8]> = reports
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.branches_tested.to_string(),
                r.ledger.ebits_consumed.to_string(),
                r.ledger.cbits_sent.to_string(),
                r.ledger.qubits_transported.to_string(),
                r.rounds.to_string(),
                format!("{:.3e}", r.max_infidelity),
                if r.verified { "yes" } else { "NO" }.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[&str]| {
        let mut l = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}");
            } else {
                let _ = write!(l, "  {cell:>w$}");
            }
        }
        l.push('\n');
        l
    };
    out.push_str(&line(&header));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        out.push_str(&line(&cells));
    }

    for r in reports {
        let details = !r.sections.is_empty()
            || !r.counts.is_empty()
            || !r.notes.is_empty()
            || !r.failures.is_empty()
            || (with_messages && !r.message_log.is_empty());
        if !details {
            continue;
        }
        let _ = writeln!(out, "\n[{}]", r.name);
        for s in &r.sections {
            let l = s.ledger;
            let _ = writeln!(
                out,
                "  section {:<24} ebits {:>3}  cbits {:>3}  transported {:>3}  rounds {:>4}",
                s.name, l.ebits_consumed, l.cbits_sent, l.qubits_transported, l.rounds
            );
        }
        for c in &r.counts {
            let _ = writeln!(out, "  count   {:<30} {}", c.name, c.value);
        }
        for n in &r.notes {
            let _ = writeln!(out, "  note    {n}");
        }
        for f in &r.failures {
            let _ = writeln!(out, "  FAIL    {f}");
        }
        if with_messages {
            for m in &r.message_log {
                let _ = writeln!(
                    out,
                    "  msg     {} -> {}  bit {}  {}",
                    m.from,
                    m.to.join(","),
                    m.bit,
                    m.tag
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_an_empty_array() {
        assert_eq!(emit_report(&[], Format::Json, false), "[]\n");
    }

    #[test]
    fn unknown_protocol_is_a_usage_error() {
        let config = RunConfig {
            protocol: Some("bogus".into()),
            ..Default::default()
        };
        assert!(run_verify(&config).is_err());
    }

    #[test]
    fn teleport_document() {
        let config = RunConfig {
            protocol: Some("teleport".into()),
            ..Default::default()
        };
        let outcome = run_verify(&config).unwrap();
        assert_eq!(outcome.exit_code, EXIT_OK);
        let doc: serde_json::Value =
            serde_json::from_str(&emit_report(&outcome.reports, Format::Json, false)).unwrap();
        let t = &doc[0];
        assert_eq!(t["protocol"], "teleport");
        assert_eq!(t["ebits"], 1);
        assert_eq!(t["cbits"], 2);
        assert_eq!(t["verified"], true);
        assert_eq!(t["message_log"].as_array().unwrap().len(), 2);

        let text = emit_report(&outcome.reports, Format::Text, true);
        let row = text.lines().nth(1).unwrap();
        let cells: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(&cells[..4], &["teleport", "160", "1", "2"]);
    }
}
