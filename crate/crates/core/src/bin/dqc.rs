use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dqc::cli::{emit_report, run_verify, Command, Format, RunConfig, EXIT_USAGE};
use dqc::protocols::verify::{BranchMode, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "dqc",
    version,
    about = "Distributed quantum circuit simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify one protocol (or `all`) over every measurement branch.
    Verify {
        protocol: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run one seeded branch per input and show the classical messages.
    Demo {
        protocol: String,
        #[command(flatten)]
        common: Common,
    },
    /// Verify the distributed QFT for `--n` qubits over `--m` machines.
    Qft {
        #[command(flatten)]
        common: Common,
    },
    /// Verify every protocol and emit one combined report.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// `exhaustive`, or a number of seeded samples per input.
    #[arg(long, default_value = "exhaustive", value_parser = parse_branches)]
    branches: BranchMode,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = VerifyOptions::default().n)]
    n: usize,
    #[arg(long, default_value_t = VerifyOptions::default().m)]
    m: usize,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_branches(s: &str) -> Result<BranchMode, String> {
    if s == "exhaustive" {
        return Ok(BranchMode::Exhaustive);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!(
            "expected 'exhaustive' or a positive count, got '{s}'"
        )),
        Ok(k) => Ok(BranchMode::Sampled(k)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, protocol, common) = match cli.command {
        Cmd::Verify { protocol, common } => (Command::Verify, Some(protocol), common),
        Cmd::Demo { protocol, common } => (Command::Demo, Some(protocol), common),
        Cmd::Qft { common } => (Command::Qft, None, common),
        Cmd::Report { common } => (Command::Report, None, common),
    };
    // Demo output is meant for reading; everything else defaults to JSON.
    let format = match (common.format, command) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Text), _) | (None, Command::Demo) => Format::Text,
        (None, _) => Format::Json,
    };
    let config = RunConfig {
        command,
        protocol,
        seed: common.seed,
        branches: common.branches,
        n: common.n,
        m: common.m,
        output: common.output,
        format,
    };

    let outcome = match run_verify(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let text = emit_report(&outcome.reports, config.format, command == Command::Demo);
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.exit_code)
}
