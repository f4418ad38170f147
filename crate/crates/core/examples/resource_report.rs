//! Verifies every protocol over all measurement branches and prints the
//! resource table; pass `json` for the machine-readable document.

use dqc::cli::{emit_report, run_verify, Command, Format, RunConfig};
use dqc::protocols::verify::BranchMode;

fn main() {
    let format = match std::env::args().nth(1).as_deref() {
        Some("json") => Format::Json,
        _ => Format::Text,
    };
    let config = RunConfig {
        command: Command::Report,
        // Sampling keeps the QFT row quick; `dqc report` runs it exhaustively.
        branches: BranchMode::Sampled(8),
        format,
        ..Default::default()
    };
    let outcome = run_verify(&config).expect("valid configuration");
    print!("{}", emit_report(&outcome.reports, format, false));
    std::process::exit(i32::from(outcome.exit_code));
}
