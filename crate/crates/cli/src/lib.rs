//! Command-line front end for `cbpv-quant-core`.
//!
//! [`run`] takes the argument list and a stdin handle and returns the full
//! report, so the binary and the tests share one code path.

pub mod config;
pub mod corpus;
mod commands;
mod json;

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cbpv_quant_core::lang::{parse_program, ComType, Comp, TypeChecker, TypeError};
use cbpv_quant_core::EffectSignature;

pub use config::{ConfigError, FileConfig, RunConfig, CONFIG_FILE};

#[derive(Debug, Parser)]
#[command(name = "cbpv-quant", version, about = "Quantitative logic and behavioural preorders for CBPV programs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub verb: Verb,
}

/// Options shared by every verb. They override the configuration file.
#[derive(Debug, Default, Args)]
pub struct Common {
    /// Configuration file; by default `cbpv-quant.toml` next to the first
    /// program or in the working directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Effect signature, e.g. `prob+nondet` or `store+error`.
    #[arg(long, global = true)]
    pub signature: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub locations: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub value_bound: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub errors: Option<Vec<String>>,
    /// `auto` or `bool`.
    #[arg(long, global = true)]
    pub truth_space: Option<String>,
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub explore_width: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Type-check a program.
    Typecheck { program: String },
    /// Print the fuel-bounded effect tree of a program.
    Eval { program: String },
    /// Evaluate a formula on a program. The formula is a file or inline text.
    Sat {
        program: String,
        formula: String,
        /// Double the fuel until the value is exact or `--cap` is reached.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Check the left program against the right on all basic formulas up to a size.
    Compare {
        left: String,
        right: String,
        #[arg(long)]
        suite_size: Option<usize>,
        /// Check both directions.
        #[arg(long)]
        both: bool,
    },
    /// Search for the smallest formula separating two programs.
    Distinguish {
        left: String,
        right: String,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Bounded check that the left program is simulated by the right.
    Simulate {
        left: String,
        right: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Randomized law suites for modalities.
    Laws {
        /// Comma-separated modality names, e.g. `E,Eopt,C`.
        #[arg(long, value_delimiter = ',')]
        modality: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Also check the relator laws over Boolean carriers up to this size.
        #[arg(long)]
        relator: Option<usize>,
        /// Also run this many congruence trials in the configured logic.
        #[arg(long)]
        congruence: Option<usize>,
    },
}

/// Exit code: nothing found.
pub const EXIT_OK: i32 = 0;
/// Exit code: distinguished or refuted.
pub const EXIT_FOUND: i32 = 1;
/// Exit code: inconclusive results only, or an error.
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// What a run prints and how it exits.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("stdin can only be read once")]
    StdinTwice,
    #[error("{0}:{1}")]
    Parse(String, String),
    #[error("{0}: type error {1}")]
    Type(String, Box<TypeError>),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    fn rule(&self) -> Option<&'static str> {
        match self {
            CliError::Type(_, e) => Some(e.rule()),
            _ => None,
        }
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_INCONCLUSIVE };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Report { stdout: text, stderr: String::new(), code }
            } else {
                Report { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let json = cli.common.json;
    match execute(&cli, stdin) {
        Ok(out) => Report {
            stdout: if json { format!("{:#}\n", out.json) } else { out.text },
            stderr: String::new(),
            code: out.code,
        },
        Err(e) => {
            if json {
                let mut doc = serde_json::json!({ "error": e.to_string() });
                if let Some(rule) = e.rule() {
                    doc["rule"] = rule.into();
                }
                Report { stdout: format!("{:#}\n", doc), stderr: String::new(), code: EXIT_INCONCLUSIVE }
            } else {
                Report { stdout: String::new(), stderr: format!("error: {}\n", e), code: EXIT_INCONCLUSIVE }
            }
        }
    }
}

/// A finished verb before formatting.
pub(crate) struct Outcome {
    pub text: String,
    pub json: serde_json::Value,
    pub code: i32,
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome, CliError> {
    let first = match &cli.verb {
        Verb::Typecheck { program } | Verb::Eval { program } | Verb::Sat { program, .. } => Some(program.as_str()),
        Verb::Compare { left, .. } | Verb::Distinguish { left, .. } | Verb::Simulate { left, .. } => {
            Some(left.as_str())
        }
        Verb::Laws { .. } => None,
    };
    let file = match &cli.common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::discover(first.filter(|p| *p != "-").map(Path::new))?,
    };
    let file = file.overlay(flags(cli));
    let cfg = RunConfig::resolve(&file)?;
    let mut inputs = Inputs { stdin, stdin_used: false };
    commands::dispatch(&cli.verb, &cfg, &mut inputs)
}

fn flags(cli: &Cli) -> FileConfig {
    let c = &cli.common;
    let mut f = FileConfig {
        signature: c.signature.clone(),
        locations: c.locations.clone(),
        value_bound: c.value_bound,
        errors: c.errors.clone(),
        truth_space: c.truth_space.clone(),
        fuel: c.fuel,
        seed: c.seed,
        tolerance: c.tolerance,
        explore_width: c.explore_width,
        ..FileConfig::default()
    };
    match &cli.verb {
        Verb::Compare { suite_size, .. } => f.suite_size = *suite_size,
        Verb::Distinguish { max_size, .. } => f.max_size = *max_size,
        Verb::Simulate { depth, .. } => f.depth = *depth,
        Verb::Laws { samples, depth, .. } => {
            f.samples = *samples;
            f.depth = *depth;
        }
        _ => {}
    }
    f
}

/// Reads program and formula text, with `-` for stdin.
pub(crate) struct Inputs<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Inputs<'_> {
    pub fn read(&mut self, path: &str) -> Result<String, CliError> {
        if path == "-" {
            if self.stdin_used {
                return Err(CliError::StdinTwice);
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| CliError::Io("stdin".into(), e))?;
            return Ok(s);
        }
        std::fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))
    }

    /// Formula text: the file if `arg` names one, otherwise `arg` itself.
    pub fn formula(&mut self, arg: &str) -> Result<String, CliError> {
        if arg == "-" || Path::new(arg).is_file() {
            self.read(arg)
        } else {
            Ok(arg.to_string())
        }
    }

    /// A parsed, type-checked program and its type.
    pub fn program(&mut self, path: &str, sig: &EffectSignature) -> Result<(Comp, ComType), CliError> {
        let text = self.read(path)?;
        load_program(path, &text, sig)
    }
}

/// Parses and type-checks program text; `name` labels diagnostics.
pub fn load_program(name: &str, text: &str, sig: &EffectSignature) -> Result<(Comp, ComType), CliError> {
    let p = parse_program(text, Some(sig)).map_err(|e| CliError::Parse(name.into(), e.to_string()))?;
    let ty = TypeChecker::new(sig).check_program(&p).map_err(|e| CliError::Type(name.into(), Box::new(e)))?;
    Ok((p.term, ty))
}
