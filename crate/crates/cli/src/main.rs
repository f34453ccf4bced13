mod commands;
mod input;
mod verify;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "cofwb", version, about = "Finite-stage builders for cofinitary groups and mad families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// One cofinitary generator over a group, respecting scheduled words
    BuildGenerator,
    /// Pointer-chain coding of a bit string
    EncodeVm,
    /// Read back the bits of an encode-vm artifact
    DecodeVm,
    /// Two-mode coding of a real into a generator over <h>
    EncodeCfg,
    /// Read back the bits of every coded word in an encode-cfg artifact
    DecodeCfg,
    /// Crossing map, orbit tree (JSON and DOT) and fixed-point witnesses
    OrbitTree,
    /// Group with prescribed finite and infinite orbits
    FiniteOrbits,
    /// Interval partition and h for a bound f
    Ksigma,
    /// Cofinitary action of a presented group
    Embed,
    /// Greedy slalom localizing a list of reals
    Localize,
    /// Guessing steps that keep |p| <= 3s
    GuessStep,
    /// Witness set for very good extensions
    WitnessSet,
    /// Run the property suite
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::BuildGenerator => "build-generator",
            Command::EncodeVm => "encode-vm",
            Command::DecodeVm => "decode-vm",
            Command::EncodeCfg => "encode-cfg",
            Command::DecodeCfg => "decode-cfg",
            Command::OrbitTree => "orbit-tree",
            Command::FiniteOrbits => "finite-orbits",
            Command::Ksigma => "ksigma",
            Command::Embed => "embed",
            Command::Localize => "localize",
            Command::GuessStep => "guess-step",
            Command::WitnessSet => "witness-set",
            Command::Verify => "verify",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// size of the window [0, W)
    #[arg(long, global = true, default_value_t = 256)]
    pub window: u64,
    /// counts up to this value are read as finite
    #[arg(long, global = true, default_value_t = 8)]
    pub threshold: u64,
    #[arg(long, global = true, default_value_t = 20)]
    pub stages: usize,
    #[arg(long, global = true, env = "COFWB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 12)]
    pub sub_window: u64,
    #[arg(long, global = true, default_value_t = 2000)]
    pub sample_budget: usize,
    /// cap on candidate values in extension searches (default: the window)
    #[arg(long, global = true)]
    pub search_bound: Option<u64>,
    /// input JSON file, `-` for stdin
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// A failure with the phase it happened in. `usage` failures exit with 2.
#[derive(Debug)]
pub struct Failure {
    pub phase: String,
    pub cause: String,
    pub context: Value,
    pub usage: bool,
}

impl Failure {
    pub fn usage(phase: &str, cause: impl ToString) -> Self {
        Failure { phase: phase.into(), cause: cause.to_string(), context: Value::Null, usage: true }
    }

    pub fn run(phase: &str, cause: impl ToString) -> Self {
        Failure { phase: phase.into(), cause: cause.to_string(), context: Value::Null, usage: false }
    }

    pub fn with(mut self, context: Value) -> Self {
        self.context = context;
        self
    }
}

impl From<cofwb::Error> for Failure {
    fn from(e: cofwb::Error) -> Self {
        let usage = matches!(e, cofwb::Error::Parse(_));
        Failure { phase: "run".into(), cause: e.to_string(), context: Value::Null, usage }
    }
}

pub type Outcome = Result<(Value, bool), Failure>;

impl RunConfig {
    fn validate(&self) -> Result<cofwb::Window, Failure> {
        if self.sub_window == 0 || self.sub_window > self.window {
            return Err(Failure::usage("config", "sub-window must lie in [1, window]"));
        }
        if self.search_bound == Some(0) {
            return Err(Failure::usage("config", "search-bound must be positive"));
        }
        cofwb::Window::new(self.window, self.threshold).map_err(|e| Failure::usage("config", e))
    }

    pub fn read_input(&self) -> Result<Value, Failure> {
        let text = match &self.input {
            None => return Err(Failure::usage("input", "this command needs --in")),
            Some(p) if p.as_os_str() == "-" => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::usage("input", e))?;
                s
            }
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Failure::usage("input", e).with(json!({ "path": p.display().to_string() })))?,
        };
        serde_json::from_str(&text).map_err(|e| Failure::usage("parse", e))
    }
}

fn emit(config: &RunConfig, doc: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("json value serializes") + "\n";
    match &config.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::run("output", e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::run("output", e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let result = cli.config.validate().and_then(|window| commands::run(cli.command, &cli.config, window));
    let result = result.and_then(|(value, ok)| {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": name,
            "config": cli.config,
            "result": value,
        });
        emit(&cli.config, &doc).map(|()| ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": name,
                "error": { "phase": f.phase, "cause": f.cause, "context": f.context },
            });
            eprintln!("{}", serde_json::to_string_pretty(&doc).expect("json value serializes"));
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}
