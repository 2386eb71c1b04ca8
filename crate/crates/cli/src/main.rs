use std::process::ExitCode;

use clap::Parser;
use permgram_cli::{exit_code_for, render, run, timestamp, Cli, RunConfig, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let config = RunConfig::resolve(cli.command, &cli.options);
    if config.cap_override {
        eprintln!("warning: --cap-override lifts every resource cap; large inputs may exhaust memory or time");
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    let text = render(&report, cli.options.format, &timestamp());
    match &cli.options.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{text}"),
    }
    let summary = report.summary();
    eprintln!(
        "{}: {} rows, {} passed, {} failed, payload sha256 {}",
        config.subcommand.name(),
        summary.rows,
        summary.passed,
        summary.failed,
        report.payload_sha256()
    );
    ExitCode::from(if report.all_pass() { EXIT_OK } else { EXIT_ASSERTION } as u8)
}
