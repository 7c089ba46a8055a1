//! The `mixdiff` batch front end.
//!
//! Verbs: `sample`, `train-toy`, `eval`, `sweep`, `export-frames`. Config
//! files are JSON; any field can be overridden with `--dotted.key=value`
//! (the value is parsed as JSON, falling back to a string). Exit status is
//! 0 on success, 1 on a runtime failure, 2 on invalid input.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

pub use commands::{
    cmd_eval, cmd_export_frames, cmd_sample, cmd_sweep, cmd_train_toy, ChainOutput, RunManifest, TrainManifest,
    ARTIFACT_VERSION,
};
pub use config::{DenoiserSource, PolicyPreset, PolicySpec, SamplerConfig, Seeds, SweepSpec, TargetConfig, TrainToyConfig};

use crate::error::Error;

/// Default output directory when `--out` is absent.
pub const OUTPUT_DIR_ENV: &str = "MIXDIFF_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input at `{path}`: {reason}")]
    Invalid { path: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mixdiff", version, about = "Mixture-of-denoisers diffusion sampling")]
pub struct Cli {
    /// Output directory (default: $MIXDIFF_OUTPUT_DIR, else ./mixdiff-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for concurrent chains.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run sampling chains.
    Sample {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Re-run the config recorded in a previous run's manifest.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Train the toy MLP denoiser.
    TrainToy {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute metrics over `.lvt` files.
    Eval {
        /// Glob of input files.
        #[arg(long)]
        inputs: String,
        /// JSON file with `mean` and `covariance` of the reference Gaussian.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
    },
    /// Run a cartesian sweep of sample configs.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Write one PGM per frame of an `.lvt` channel.
    ExportFrames {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        channel: usize,
    },
}

const FLAGS: &[&str] = &[
    "out", "jobs", "config", "manifest", "inputs", "target", "metrics", "spec", "input", "channel", "help", "version",
];

/// Splits `--key=value` config overrides from the flags clap knows.
pub fn split_overrides(args: Vec<OsString>) -> (Vec<OsString>, Vec<(String, Value)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        let parsed = a
            .to_str()
            .and_then(|s| s.strip_prefix("--"))
            .and_then(|s| s.split_once('='))
            .filter(|(k, _)| !FLAGS.contains(k));
        match parsed {
            Some((k, v)) => overrides.push((k.to_string(), config::parse_value(v))),
            None => rest.push(a),
        }
    }
    (rest, overrides)
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mixdiff-out"))
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit status. Errors go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let (rest, overrides) = split_overrides(args.into_iter().map(Into::into).collect());
    let cli = match Cli::try_parse_from(rest) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, &overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, overrides: &[(String, Value)]) -> Result<(), CliError> {
    let out = output_dir(cli.out);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::invalid("jobs", "must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let no_overrides = |verb: &str| {
        if overrides.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{verb} takes no config overrides")))
        }
    };
    pool.install(|| match cli.command {
        Command::Sample { config, manifest } => {
            let cfg = match manifest {
                Some(m) => {
                    let mut doc = config::read_json(&m)?;
                    let cfg = doc
                        .get_mut("config")
                        .map(Value::take)
                        .ok_or_else(|| CliError::invalid("config", "manifest has no config"))?;
                    config::layered::<SamplerConfig>(Some(cfg), overrides)?
                }
                None => load_config(config, overrides)?,
            };
            cmd_sample(&cfg, &out).map(drop)
        }
        Command::TrainToy { config } => {
            let cfg: TrainToyConfig = load_config(config, overrides)?;
            cmd_train_toy(&cfg, &out).map(drop)
        }
        Command::Eval {
            inputs,
            target,
            metrics,
        } => {
            no_overrides("eval")?;
            cmd_eval(&inputs, target.as_deref(), &metrics, &out).map(drop)
        }
        Command::Sweep { spec } => {
            let mut doc = config::read_json(&spec)?;
            if !overrides.is_empty() {
                let base = doc
                    .as_object_mut()
                    .ok_or_else(|| CliError::invalid("", "sweep spec must be a JSON object"))?
                    .entry("base")
                    .or_insert(Value::Object(Default::default()));
                for (k, v) in overrides {
                    config::set_path(base, k, v.clone())?;
                }
            }
            let spec: SweepSpec = config::from_value(doc)?;
            cmd_sweep(&spec, &out).map(drop)
        }
        Command::ExportFrames { input, channel } => {
            no_overrides("export-frames")?;
            cmd_export_frames(&input, channel, &out).map(drop)
        }
    })
}

fn load_config<T>(path: Option<PathBuf>, overrides: &[(String, Value)]) -> Result<T, CliError>
where
    T: Default + serde::Serialize + serde::de::DeserializeOwned + Anchor,
{
    let file = path.as_deref().map(config::read_json).transpose()?;
    let mut cfg: T = config::layered(file, overrides)?;
    if let Some(dir) = path.as_deref().and_then(|p| p.parent()) {
        cfg.anchor(dir);
    }
    Ok(cfg)
}

/// Resolves relative paths inside a config against the config file's dir.
trait Anchor {
    fn anchor(&mut self, _dir: &std::path::Path) {}
}

impl Anchor for SamplerConfig {
    fn anchor(&mut self, dir: &std::path::Path) {
        self.anchor_paths(dir);
    }
}

impl Anchor for TrainToyConfig {}
