use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "permgram", version, about = "Permutation-operator Gram matrices: experiments and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact Gram matrix, extremal eigenvalues, row sums and the antisymmetric witness.
    Gram,
    /// Numeric spectra against the closed form over the grid 2..=n by 2..=d.
    Spectrum,
    /// Exact Weingarten matrix, leading-order asymptotics and Haar/Ginibre moments.
    Weingarten,
    /// Norm windows for combinations of permutation operators.
    Norms,
    /// Block coefficients of random-state and random-maximally-entangled moments.
    States,
    /// Haar versus Gaussian permanent moments.
    Boson,
    /// Partial-transpose singular values and PPT coefficient bounds.
    Pt,
    /// Leg subsets cutting many cycles.
    Maxcut,
    /// Two-copy hiding demonstration and the hiding bias chain.
    Hiding,
    /// Product-test bias chain.
    ProductTest,
    /// Set-partition Gram matrices.
    Setpart,
    /// Run the full invariant suite (or a small one with --quick).
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gram => "gram",
            Command::Spectrum => "spectrum",
            Command::Weingarten => "weingarten",
            Command::Norms => "norms",
            Command::States => "states",
            Command::Boson => "boson",
            Command::Pt => "pt",
            Command::Maxcut => "maxcut",
            Command::Hiding => "hiding",
            Command::ProductTest => "product-test",
            Command::Setpart => "setpart",
            Command::Verify => "verify",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Options {
    /// Number of tensor legs (or photons for `boson`).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Local dimension.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Number of modes for `boson`.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Moment order for `boson`.
    #[arg(long, global = true)]
    pub t: Option<usize>,
    /// Monte Carlo samples (instances for `maxcut`).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Small parameters for `verify`.
    #[arg(long, global = true)]
    pub quick: bool,
    /// Lift every resource cap.
    #[arg(long, global = true)]
    pub cap_override: bool,
}

/// Fully resolved run parameters; this is what the report records and hashes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub subcommand: Command,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub t: usize,
    pub samples: usize,
    pub seed: u64,
    pub quick: bool,
    pub cap_override: bool,
}

struct Defaults {
    n: usize,
    d: usize,
    m: usize,
    t: usize,
    samples: usize,
}

fn defaults(command: Command, quick: bool) -> Defaults {
    let base = Defaults {
        n: 3,
        d: 3,
        m: 64,
        t: 1,
        samples: 0,
    };
    match command {
        Command::Gram => base,
        Command::Spectrum if quick => base,
        Command::Spectrum => Defaults { n: 5, d: 8, ..base },
        Command::Weingarten => Defaults { samples: 10_000, ..base },
        Command::Norms => Defaults { n: 2, d: 8, ..base },
        Command::States => Defaults {
            n: 2,
            d: 4,
            samples: 10_000,
            ..base
        },
        Command::Boson => Defaults {
            n: 2,
            t: 2,
            samples: 100_000,
            ..base
        },
        Command::Pt => Defaults { d: 2, ..base },
        Command::Maxcut => Defaults {
            n: 6,
            samples: 100,
            ..base
        },
        Command::Hiding => Defaults { n: 2, d: 16, ..base },
        Command::ProductTest => Defaults { n: 2, d: 256, ..base },
        Command::Setpart => Defaults { n: 5, d: 4, ..base },
        Command::Verify => Defaults {
            samples: if quick { 10_000 } else { 100_000 },
            ..base
        },
    }
}

impl RunConfig {
    pub fn resolve(command: Command, options: &Options) -> Self {
        let def = defaults(command, options.quick);
        RunConfig {
            subcommand: command,
            n: options.n.unwrap_or(def.n),
            d: options.d.unwrap_or(def.d),
            m: options.m.unwrap_or(def.m),
            t: options.t.unwrap_or(def.t),
            samples: options.samples.unwrap_or(def.samples),
            seed: options.seed,
            quick: options.quick,
            cap_override: options.cap_override,
        }
    }

    /// Defaults for `command` with the given seed.
    pub fn default_for(command: Command, quick: bool, seed: u64) -> Self {
        Self::resolve(
            command,
            &Options {
                quick,
                seed,
                ..Options::default()
            },
        )
    }
}
