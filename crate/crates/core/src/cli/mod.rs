//! Command-line scenario runner.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure (bad config,
//! violated precondition, failed check or refused replay), 3 numeric failure.

pub mod commands;
pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::validation::{invariant_suite, run_criterion, CheckOutcome};
use config::{config_hash, ScenarioConfig, ValidateConfig};
use output::{io_err, read_csv_header, ScenarioResult, VERSION};

#[derive(Debug, Parser)]
#[command(name = "nlo-quanta", version, about = "Quantum nonlinear-optics scenarios and validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML scenario file with one table per command
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps
    #[arg(long, global = true, env = "NLO_QUANTA_THREADS")]
    pub threads: Option<usize>,
    /// Run only the quick invariant checks (validate)
    #[arg(long, global = true)]
    pub fast: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parametric squeezing and its pump-noise limit
    Squeeze,
    /// Entanglement sum over the two-photon pair family
    Entangle,
    /// Kerr mean amplitude and the beam-splitter number-squeezing scheme
    Kerr,
    /// Degenerate parametric oscillator threshold sweep
    Oscillator,
    /// N-photon down conversion from a coherent pump
    Nphoton,
    /// Two-level susceptibilities and frequency mixing
    Medium,
    /// Dispersion branches and mode normalization
    Dispersion,
    /// Down-conversion pair-correlation kernel
    Downconv,
    /// Soliton propagation and mean-field phase diffusion
    Soliton,
    /// Invariant suite and closed-form cross checks
    Validate {
        /// Re-run the scenarios behind the CSV files in DIR and compare bytes
        #[arg(long, value_name = "DIR")]
        replay: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Squeeze => "squeeze",
            Command::Entangle => "entangle",
            Command::Kerr => "kerr",
            Command::Oscillator => "oscillator",
            Command::Nphoton => "nphoton",
            Command::Medium => "medium",
            Command::Dispersion => "dispersion",
            Command::Downconv => "downconv",
            Command::Soliton => "soliton",
            Command::Validate { .. } => "validate",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "squeeze" => Command::Squeeze,
            "entangle" => Command::Entangle,
            "kerr" => Command::Kerr,
            "oscillator" => Command::Oscillator,
            "nphoton" => Command::Nphoton,
            "medium" => Command::Medium,
            "dispersion" => Command::Dispersion,
            "downconv" => Command::Downconv,
            "soliton" => Command::Soliton,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

/// Reads `--config`. A missing flag means all defaults; a file with no
/// settings at all is a usage error.
pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    let Some(path) = path else { return Ok(ScenarioConfig::default()) };
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let cfg = ScenarioConfig::parse(&text)?;
    if cfg.is_empty() {
        return Err(CliError::Usage(format!("{} is empty", path.display())));
    }
    Ok(cfg)
}

fn section<T: Clone + Default>(s: &Option<T>) -> T {
    s.clone().unwrap_or_default()
}

macro_rules! scenario {
    ($cfg:expr, $field:ident, $name:literal, $run:path) => {{
        let c = section(&$cfg.$field);
        c.validate()?;
        let hash = config_hash($name, $cfg.seed, &c);
        let echo = serde_json::to_value(&c).map_err(|e| Error::Numeric(e.to_string()))?;
        let start = Instant::now();
        let out = $run(&c)?;
        ScenarioResult {
            command: $name.into(),
            module: out.module.into(),
            version: VERSION.into(),
            config_hash: hash,
            seed: $cfg.seed,
            config: echo,
            wall_seconds: start.elapsed().as_secs_f64(),
            notes: out.notes,
            tables: out.tables,
        }
    }};
}

/// Validates the command's section, then runs it.
pub fn run_scenario(command: &Command, cfg: &ScenarioConfig) -> Result<ScenarioResult, CliError> {
    Ok(match command {
        Command::Squeeze => scenario!(cfg, squeeze, "squeeze", commands::squeeze),
        Command::Entangle => scenario!(cfg, entangle, "entangle", commands::entangle),
        Command::Kerr => scenario!(cfg, kerr, "kerr", commands::kerr),
        Command::Oscillator => scenario!(cfg, oscillator, "oscillator", commands::oscillator),
        Command::Nphoton => scenario!(cfg, nphoton, "nphoton", commands::nphoton),
        Command::Medium => scenario!(cfg, medium, "medium", commands::medium),
        Command::Dispersion => scenario!(cfg, dispersion, "dispersion", commands::dispersion),
        Command::Downconv => scenario!(cfg, downconv, "downconv", commands::downconv),
        Command::Soliton => scenario!(cfg, soliton, "soliton", commands::soliton),
        Command::Validate { .. } => return Err(CliError::Usage("validate is not a scenario".into())),
    })
}

/// Current config hash for `command`, as [`run_scenario`] would stamp it.
pub fn scenario_hash(command: &Command, cfg: &ScenarioConfig) -> Option<String> {
    let seed = cfg.seed;
    Some(match command {
        Command::Squeeze => config_hash("squeeze", seed, &section(&cfg.squeeze)),
        Command::Entangle => config_hash("entangle", seed, &section(&cfg.entangle)),
        Command::Kerr => config_hash("kerr", seed, &section(&cfg.kerr)),
        Command::Oscillator => config_hash("oscillator", seed, &section(&cfg.oscillator)),
        Command::Nphoton => config_hash("nphoton", seed, &section(&cfg.nphoton)),
        Command::Medium => config_hash("medium", seed, &section(&cfg.medium)),
        Command::Dispersion => config_hash("dispersion", seed, &section(&cfg.dispersion)),
        Command::Downconv => config_hash("downconv", seed, &section(&cfg.downconv)),
        Command::Soliton => config_hash("soliton", seed, &section(&cfg.soliton)),
        Command::Validate { .. } => return None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationMatrix {
    pub version: String,
    pub config_hash: String,
    pub fast: bool,
    pub all_passed: bool,
    pub seconds: f64,
    pub outcomes: Vec<CheckOutcome>,
}

/// Invariant suite plus the selected criteria; prints one line per check.
pub fn run_validate(cfg: &ScenarioConfig, fast: bool, out: &Path) -> Result<ValidationMatrix, CliError> {
    let mut v: ValidateConfig = section(&cfg.validate);
    v.fast |= fast;
    v.validate()?;
    let start = Instant::now();
    let mut outcomes = Vec::new();
    for o in invariant_suite() {
        println!("{}", o.summary());
        outcomes.push(o);
    }
    if !v.fast {
        for &id in &v.criteria {
            let o = run_criterion(id);
            println!("{}", o.summary());
            outcomes.push(o);
        }
    }
    let matrix = ValidationMatrix {
        version: VERSION.into(),
        config_hash: config_hash("validate", cfg.seed, &v),
        fast: v.fast,
        all_passed: outcomes.iter().all(|o| o.passed),
        seconds: start.elapsed().as_secs_f64(),
        outcomes,
    };
    fs::create_dir_all(out).map_err(|e| CliError::Usage(io_err(out, e).to_string()))?;
    let path = out.join("validation_report.json");
    let json = serde_json::to_string_pretty(&matrix).map_err(|e| CliError::Numeric(e.to_string()))?;
    fs::write(&path, json).map_err(|e| CliError::Usage(io_err(&path, e).to_string()))?;
    let passed = matrix.outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} checks passed in {:.1} s; report {}", matrix.outcomes.len(), matrix.seconds, path.display());
    Ok(matrix)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub file: PathBuf,
    pub identical: bool,
}

/// Regenerates every CSV in `dir` from `cfg` and compares bytes. A file whose
/// embedded hash differs from the current config's is refused outright.
pub fn replay(dir: &Path, cfg: &ScenarioConfig) -> Result<Vec<ReplayOutcome>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no CSV files in {}", dir.display())));
    }
    let mut cache: Vec<(String, ScenarioResult)> = Vec::new();
    let mut outcomes = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| CliError::Usage(format!("{}: {e}", f.display())))?;
        let (name, hash) = read_csv_header(&text)
            .ok_or_else(|| CliError::Validation(format!("{}: no replay header", f.display())))?;
        let command = Command::from_name(&name)
            .ok_or_else(|| CliError::Validation(format!("{}: unknown command {name}", f.display())))?;
        if scenario_hash(&command, cfg).as_deref() != Some(hash.as_str()) {
            return Err(CliError::Validation(format!(
                "refusing replay of {}: config hash {hash} does not match the current config",
                f.display()
            )));
        }
        if !cache.iter().any(|(n, _)| *n == name) {
            cache.push((name.clone(), run_scenario(&command, cfg)?));
        }
        let result = &cache.iter().find(|(n, _)| *n == name).expect("cached").1;
        let identical = result.tables.iter().any(|t| {
            f.file_name().is_some_and(|n| n.to_string_lossy() == result.csv_name(t)) && result.render_csv(t) == text
        });
        println!("[{}] replay {}", if identical { "PASS" } else { "FAIL" }, f.display());
        outcomes.push(ReplayOutcome { file: f, identical });
    }
    Ok(outcomes)
}

fn configure_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call (e.g. in-process tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads)?;
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Validate { replay: Some(dir) } => {
            let outcomes = replay(dir, &cfg)?;
            if outcomes.iter().all(|o| o.identical) {
                Ok(())
            } else {
                Err(CliError::Validation("replayed output differs".into()))
            }
        }
        Command::Validate { replay: None } => {
            let m = run_validate(&cfg, cli.fast, &cli.out)?;
            if m.all_passed {
                Ok(())
            } else {
                let failed: Vec<&str> = m.outcomes.iter().filter(|o| !o.passed).map(|o| o.id.as_str()).collect();
                Err(CliError::Validation(format!("failed checks: {}", failed.join(", "))))
            }
        }
        command => {
            let result = run_scenario(command, &cfg)?;
            for note in &result.notes {
                eprintln!("note: {note}");
            }
            for p in result.write(&cli.out).map_err(|e| CliError::Usage(e.to_string()))? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_command_is_usage() {
        assert_eq!(main_with_args(["nlo-quanta", "frobnicate"]), 1);
        assert_eq!(main_with_args(["nlo-quanta"]), 1);
    }

    #[test]
    fn empty_config_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("empty.toml");
        fs::write(&cfg, "").unwrap();
        let out = dir.path().join("out");
        let code = main_with_args(["nlo-quanta", "squeeze", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 1);
    }

    #[test]
    fn bad_parameters_are_validation_failures() {
        let cfg = ScenarioConfig::parse("[squeeze]\nnp = [0.0]\n").unwrap();
        assert_eq!(run_scenario(&Command::Squeeze, &cfg).unwrap_err().exit_code(), 2);
        let cfg = ScenarioConfig::parse("[squeeze]\nnpp = [1.0]\n");
        assert!(cfg.is_err());
    }

    #[test]
    fn replay_detects_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::parse("[entangle]\npoints = 5\n").unwrap();
        run_scenario(&Command::Entangle, &cfg).unwrap().write(dir.path()).unwrap();
        assert!(replay(dir.path(), &cfg).unwrap().iter().all(|o| o.identical));
        let other = ScenarioConfig::parse("[entangle]\npoints = 7\n").unwrap();
        assert_eq!(replay(dir.path(), &other).unwrap_err().exit_code(), 2);
    }
}
