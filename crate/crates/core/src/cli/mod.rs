//! Command-line experiment runner.
//!
//! Settings resolve as flags > config file > defaults. The default output
//! directory comes from `GROUPNET_OUT`, else `./groupnet-out`. Exit codes:
//! 0 when every check passes, 1 on a property or runtime failure, 2 on a
//! usage error.

mod config;
mod output;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{CommandKind, ExperimentConfig, FileConfig, DEFAULT_FOURIER_BATTERY};
pub use run::{run, Outcome};

use crate::netlib::Exponent;

pub const OUT_DIR_ENV: &str = "GROUPNET_OUT";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "groupnet", version, about = "Density and discrimination experiments for group neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Rank and annihilator of each (group, family, activation) cell.
    Density(Flags),
    /// Least-squares fit of a random target for each cell.
    Approx(Flags),
    /// Character, transform, convolution and duality checks.
    FourierCheck(Flags),
    /// List every member of a map family.
    Enumerate(Flags),
    /// Search small groups for non-discriminatory activations.
    Counterexample(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Group specs such as `Z4`, `Z2xZ6`, `T1@16`, `W1@4`; comma lists and
    /// ranges `Z2..Z8` are expanded. Repeatable.
    #[arg(long = "group", value_name = "SPEC")]
    groups: Vec<String>,
    /// Family spec (`aut`, `end`, `affine-end`, `affine-aut`,
    /// `translations`, `hom:<group>`, `torus-linear:K=<k>`,
    /// `affine-torus:K=<k>`). Repeatable.
    #[arg(long = "family", value_name = "SPEC")]
    families: Vec<String>,
    /// Activation spec (`logistic`, `tanh`, `cos-char`, `char:c=..`,
    /// `delta0`, `relu`, `leaky-relu`, `table:..`, `const:..`). Repeatable.
    #[arg(long = "activation", value_name = "SPEC")]
    activations: Vec<String>,
    /// Dictionary size; families this small or smaller are enumerated.
    #[arg(long = "terms")]
    n_terms: Option<usize>,
    /// Reported L^p exponent, `>= 1` or `inf`.
    #[arg(long, value_parser = parse_exponent)]
    p: Option<Exponent>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_order: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Largest family enumerated exhaustively.
    #[arg(long)]
    budget: Option<usize>,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

/// Why argument parsing stopped.
#[derive(Debug)]
pub enum CliError {
    /// Help or version text was requested.
    Info(String),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Info(s) | CliError::Usage(s) => write!(f, "{s}"),
        }
    }
}

/// Resolves the effective configuration for one invocation. `argv[0]` is
/// the program name.
pub fn parse_args<I, S>(argv: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let (kind, flags) = match cli.command {
        Cmd::Density(f) => (CommandKind::Density, f),
        Cmd::Approx(f) => (CommandKind::Approx, f),
        Cmd::FourierCheck(f) => (CommandKind::FourierCheck, f),
        Cmd::Enumerate(f) => (CommandKind::Enumerate, f),
        Cmd::Counterexample(f) => (CommandKind::Counterexample, f),
    };
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            FileConfig::from_json(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let overrides = FileConfig {
        command: None,
        groups: non_empty(flags.groups),
        families: non_empty(flags.families),
        activations: non_empty(flags.activations),
        n_terms: flags.n_terms,
        max_order: flags.max_order,
        trials: flags.trials,
        budget: flags.budget,
        p: flags.p,
        seed: flags.seed,
        tol: flags.tol,
        out: flags.out,
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    ExperimentConfig::resolve(kind, file, overrides, env_out).map_err(|e| CliError::Usage(e.to_string()))
}

fn non_empty(v: Vec<String>) -> Option<Vec<String>> {
    (!v.is_empty()).then_some(v)
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return EXIT_PASS;
        }
        Err(CliError::Usage(text)) => {
            eprintln!("{}", text.trim_end());
            return EXIT_USAGE;
        }
    };
    match run(&config) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("{}", outcome.summary);
            if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig, CliError> {
        parse_args(std::iter::once("groupnet").chain(args.iter().copied()))
    }

    #[test]
    fn one_cell_density() {
        let c = parse(&["density", "--group", "Z4", "--family", "translations", "--activation", "delta0"]).unwrap();
        assert_eq!(c.command, CommandKind::Density);
        assert_eq!((c.groups.len(), c.families.len(), c.activations.len()), (1, 1, 1));
    }

    #[test]
    fn repeated_seed_is_a_usage_error() {
        assert!(matches!(parse(&["density", "--group", "Z4", "--seed", "7", "--seed", "7"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn flag_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"groups": ["Z8"], "p": 1.5, "seed": 3}"#).unwrap();
        let c = parse(&["approx", "--config", path.to_str().unwrap(), "--p", "3"]).unwrap();
        assert_eq!(c.p.value(), 3.0);
        assert_eq!(c.seed, 3);
        assert_eq!(c.groups, vec!["Z8".to_string()]);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        assert!(matches!(parse(&["density", "--group", "Q4"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["density", "--group", "Z4", "--p", "0.5"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["density"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["frobnicate"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["--help"]), Err(CliError::Info(_))));
    }
}
