//! Experiment runner behind the `permgram` binary.
//!
//! [`run`] executes one subcommand and returns a [`Report`]; the binary only
//! parses arguments, writes the rendered report and maps the outcome to an
//! exit code.

pub mod commands;
pub mod config;
pub mod report;

use commands::Env;
pub use config::{Cli, Command, Format, Options, RunConfig};
use permgram::{Error, Limits};
pub use report::{Report, Row, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ResourceLimit { .. } => EXIT_RESOURCE,
        _ => EXIT_PRECONDITION,
    }
}

pub fn env_for(config: &RunConfig) -> Env {
    Env {
        limits: if config.cap_override { Limits::unbounded() } else { Limits::default() },
        threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

pub fn run(config: &RunConfig) -> Result<Report, Error> {
    let env = env_for(config);
    let c = config;
    let rows = match c.subcommand {
        Command::Gram => commands::gram(c.n, c.d, &env)?,
        Command::Spectrum => commands::spectrum(c.n, c.d, &env)?,
        Command::Weingarten => commands::weingarten(c.n, c.d, c.samples, c.seed, &env)?,
        Command::Norms => commands::norms(c.n, c.d, c.seed)?,
        Command::States => commands::states(c.n, c.d, c.samples, c.seed)?,
        Command::Boson => commands::boson(c.n, c.t, c.m, c.samples, c.seed, &env)?,
        Command::Pt => commands::pt(c.n, c.d, c.seed)?,
        Command::Maxcut => commands::maxcut(c.n, c.samples, c.seed)?,
        Command::Hiding => commands::hiding(c.n, c.d, &env)?,
        Command::ProductTest => commands::product_test(c.n, c.d)?,
        Command::Setpart => commands::setpart(c.n, c.d, &env)?,
        Command::Verify => commands::verify(c.quick, c.samples, c.seed, &env)?,
    };
    Ok(Report::new(config.clone(), rows))
}

/// Seconds since the Unix epoch, as recorded in report metadata.
pub fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("unix:{secs}")
}

pub fn render(report: &Report, format: Format, timestamp: &str) -> String {
    match format {
        Format::Json => report.to_json(timestamp),
        Format::Csv => report.to_csv(timestamp),
    }
}
