//! Runner behind the `gv` binary. A [`RunConfig`] names one subcommand plus
//! its parameters; [`execute`] produces the CSV body and JSON summary, and
//! [`run`] writes them out and maps failures onto exit codes.

mod commands;
pub mod grid;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use commands::{allowed_keys, SUBCOMMANDS};
pub use report::{Check, Report};

pub const SCHEMA_VERSION: u64 = 1;
pub const CACHE_ENV: &str = "GV_CACHE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COVERAGE: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub subcommand: String,
    /// Flag name (without dashes) to raw value.
    pub params: BTreeMap<String, String>,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Exit with [`EXIT_CHECK`] if any built-in check fails.
    pub check: bool,
}

impl RunConfig {
    pub fn new(subcommand: impl Into<String>) -> Self {
        Self {
            subcommand: subcommand.into(),
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// `--cache`, unless `GV_CACHE` is set.
    pub fn effective_cache_dir(&self) -> Option<PathBuf> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => self.cache_dir.clone(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Coverage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Coverage(_) => EXIT_COVERAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Coverage(m) => write!(f, "table coverage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gv_core::Error> for CliError {
    fn from(e: gv_core::Error) -> Self {
        use gv_core::Error as E;
        match e {
            E::TableTooShort { .. } => CliError::Coverage(e.to_string()),
            E::InvalidArgument(_) | E::GuardExceeded(_) | E::RankDeficient { .. } => {
                CliError::Config(e.to_string())
            }
            E::Overflow { .. } | E::Cache(_) | E::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

/// Runs the subcommand without touching stdout/stderr; cache files may be
/// read or written.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let allowed = allowed_keys(&config.subcommand)
        .ok_or_else(|| CliError::Config(format!("unknown subcommand `{}`", config.subcommand)))?;
    if let Some(bad) = config.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Config(format!(
            "`{}` does not take --{bad} (accepted: {})",
            config.subcommand,
            if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
        )));
    }
    commands::dispatch(config)
}

/// Sibling `.json` path of the CSV output.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Executes, writes CSV to `--out` (or `stdout`) and the JSON summary next
/// to it (or to `stderr`), and returns the process exit code.
pub fn run_with(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let report = match execute(config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return e.exit_code();
        }
    };
    let json = report.summary_json(config);
    let written = match &config.output {
        Some(path) => fs::write(path, &report.csv)
            .and_then(|_| fs::write(summary_path(path), json.as_bytes()))
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(&report.csv)
            .and_then(|_| stderr.write_all(json.as_bytes()))
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_RUNTIME;
    }
    if config.check && !report.all_pass() {
        for c in report.checks.iter().filter(|c| !c.pass) {
            let _ = writeln!(stderr, "check failed: {}", c.name);
        }
        return EXIT_CHECK;
    }
    EXIT_OK
}

pub fn run(config: &RunConfig) -> i32 {
    run_with(config, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
