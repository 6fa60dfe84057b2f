//! The `wavemap` command line: config loading, dispatch, manifests and exit
//! codes.
//!
//! Exit status 0 means the pipeline ran and wrote its manifest. Status 2 is a
//! usage or configuration error, with one message per offending field.
//! Status 3 is a numerical or I/O failure inside a pipeline. Failures print a
//! one-line JSON [`ErrorRecord`] on stderr.

pub mod config;
pub mod manifest;
pub mod pipelines;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

pub use config::RunConfig;
pub use manifest::{Artifacts, Manifest, MANIFEST_NAME};

use crate::error::{Error, Result};
use crate::io::sha256_hex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wavemap", version, about = "Wave-map blow-up laboratory")]
pub struct Cli {
    /// TOML run configuration (JSON when the name ends in .json).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Approximate solution u_k at t0, with v1 and the second correction.
    Profile,
    /// Connection coefficient a(xi), spectral density rho(xi), unitarity corpus.
    Spectral,
    /// Symbol bound sample and the zeroth iterate of the parametrix.
    Parametrix,
    /// One PDE run from profile data, with the rate fit.
    Simulate,
    /// Rate fits for several nu against the exponent 1 + nu.
    VerifyRate,
    /// Every pipeline above, one subdirectory each.
    TestAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectral => "spectral",
            Command::Parametrix => "parametrix",
            Command::Simulate => "simulate",
            Command::VerifyRate => "verify-rate",
            Command::TestAll => "test-all",
        }
    }
}

/// Machine-readable failure report.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub exit_code: i32,
    pub kind: String,
    pub messages: Vec<String>,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let exit_code = match e {
            Error::Config(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        let messages = match e {
            Error::Config(m) => m.clone(),
            other => vec![other.to_string()],
        };
        Self {
            status: "error",
            exit_code,
            kind: e.kind().to_owned(),
            messages,
        }
    }
}

/// Hash of the command and the config, excluding the output directory.
pub fn inputs_hash(command: Command, cfg: &RunConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.out = PathBuf::new();
    let mut bytes = command.name().as_bytes().to_vec();
    bytes.extend(serde_json::to_vec(&c)?);
    Ok(sha256_hex(&bytes))
}

/// Validate, run one pipeline into `out`, and write its manifest. Returns the
/// manifest path.
pub fn dispatch(command: Command, cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let start = Instant::now();
    let mut art = Artifacts::new(out)?;
    let results = match command {
        Command::Profile => pipelines::profile(cfg, &mut art)?,
        Command::Spectral => pipelines::spectral(cfg, &mut art)?,
        Command::Parametrix => pipelines::parametrix(cfg, &mut art)?,
        Command::Simulate => pipelines::simulate_one(cfg, &mut art)?,
        Command::VerifyRate => pipelines::verify_rate(cfg, &mut art)?,
        Command::TestAll => {
            let mut subs = serde_json::Map::new();
            for sub in [
                Command::Profile,
                Command::Spectral,
                Command::Parametrix,
                Command::VerifyRate,
            ] {
                let name = sub.name();
                let path = dispatch(sub, cfg, &out.join(name))?;
                art.file(Path::new(name).join(MANIFEST_NAME));
                let sub_manifest: serde_json::Value =
                    serde_json::from_slice(&std::fs::read(&path).map_err(|e| Error::io(&path, e))?)?;
                subs.insert(name.to_owned(), sub_manifest["results"].clone());
            }
            json!(subs)
        }
    };
    log::info!("{} finished in {:.1} s", command.name(), start.elapsed().as_secs_f64());
    art.finish(
        command.name(),
        &inputs_hash(command, cfg)?,
        cfg.seed,
        serde_json::to_value(cfg)?,
        results,
        start.elapsed().as_secs_f64(),
    )
}

/// Config from `--config` (or defaults) with the flag overrides applied.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn report(record: &ErrorRecord) -> i32 {
    eprintln!("{}", serde_json::to_string(record).unwrap_or_default());
    record.exit_code
}

/// Full command-line entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            return report(&ErrorRecord {
                status: "error",
                exit_code: EXIT_CONFIG,
                kind: "usage".into(),
                messages: vec![e.to_string().trim().to_owned()],
            })
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let outcome = load_config(&cli).and_then(|cfg| dispatch(cli.command, &cfg, &cfg.out));
    match outcome {
        Ok(manifest) => {
            println!("{}", manifest.display());
            EXIT_OK
        }
        Err(e) => report(&ErrorRecord::from_error(&e)),
    }
}
