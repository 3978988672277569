mod commands;
mod run;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use emergence_core::config::{Config, ConfigError};

use run::RunDir;

#[derive(Parser)]
#[command(
    name = "emergence",
    version,
    about = "Type-constrained language corpora and percolation analysis"
)]
struct Cli {
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config entry, e.g. `--set seed=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Type graph and vocabulary.
    GenGraph(Common),
    /// Type graph, vocabulary and a JSONL corpus of task examples.
    GenCorpus(Common),
    /// Probe request files, one per family.
    Probes(Common),
    /// Score generation and probe-response files into a metric CSV.
    Eval(Common),
    /// Bond-percolation curve.
    Percolate {
        #[command(flatten)]
        common: Common,
        /// Complete bipartite base with this many left and right nodes.
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        complete: Option<Vec<usize>>,
        /// Log-spaced dilution grid `start:end:points`.
        #[arg(long)]
        pgrid: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Predicted transition iterations, optionally against observed metric curves.
    Bridge {
        #[command(flatten)]
        common: Common,
        /// Metric CSVs labelled with their descriptor count.
        observed: Vec<PathBuf>,
    },
    /// Fits and scaling analysis of metric CSVs.
    #[command(subcommand)]
    Analyze(Analysis),
}

#[derive(Subcommand)]
enum Analysis {
    /// Hinge fit of each curve in log iterations.
    Bilinear {
        #[command(flatten)]
        common: Common,
        files: Vec<PathBuf>,
    },
    /// Power law of breakpoint against label.
    Powerlaw {
        #[command(flatten)]
        common: Common,
        files: Vec<PathBuf>,
    },
    /// Exponent scan for curve collapse.
    Collapse {
        #[command(flatten)]
        common: Common,
        /// Exponent grid `start:end:step` for iterations.
        #[arg(long)]
        alpha: Option<String>,
        /// Exponent grid `start:end:step` for the metric.
        #[arg(long)]
        beta: Option<String>,
        files: Vec<PathBuf>,
    },
}

/// Config problems that are not tied to a key.
#[derive(Debug)]
struct ConfigFileError(String);

impl fmt::Display for ConfigFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigFileError {}

fn load_config(common: &Common, flags: &[(&str, Option<String>)]) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigFileError(format!("reading config {}: {e}", path.display())))?;
            Config::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Config::new(),
    };
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v.as_str());
        }
    }
    for o in &common.overrides {
        cfg.set_assignment(o)
            .map_err(|e| ConfigFileError(format!("--set: {e}")))?;
    }
    Ok(cfg)
}

fn execute(
    name: &str,
    common: &Common,
    flags: &[(&str, Option<String>)],
    body: impl FnOnce(&Config, &mut RunDir) -> Result<()>,
) -> Result<()> {
    let cfg = load_config(common, flags)?;
    commands::check_keys(&cfg)?;
    let seed = settings::seed(&cfg)?;
    let mut run = RunDir::create(&common.out)?;
    body(&cfg, &mut run)?;
    let manifest = run.finish(name, &cfg, seed)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    match cli.command {
        Command::GenGraph(c) => execute("gen-graph", &c, &[], commands::gen_graph),
        Command::GenCorpus(c) => execute("gen-corpus", &c, &[], commands::gen_corpus),
        Command::Probes(c) => execute("probes", &c, &[], commands::probes),
        Command::Eval(c) => execute("eval", &c, &[], commands::eval),
        Command::Percolate {
            common,
            complete,
            pgrid,
            trials,
        } => {
            let (base, left, right) = match complete {
                Some(v) => (
                    Some("complete".to_string()),
                    Some(v[0].to_string()),
                    Some(v[1].to_string()),
                ),
                None => (None, None, None),
            };
            let flags = [
                ("base", base),
                ("n_left", left),
                ("n_right", right),
                ("p_grid", pgrid),
                ("trials", trials.map(|t| t.to_string())),
            ];
            execute("percolate", &common, &flags, commands::percolate)
        }
        Command::Bridge { common, observed } => execute("bridge", &common, &[], |cfg, run| {
            commands::bridge(cfg, run, &observed)
        }),
        Command::Analyze(Analysis::Bilinear { common, files }) => {
            execute("analyze-bilinear", &common, &[], |cfg, run| {
                commands::bilinear(cfg, run, &files)
            })
        }
        Command::Analyze(Analysis::Powerlaw { common, files }) => {
            execute("analyze-powerlaw", &common, &[], |cfg, run| {
                commands::powerlaw(cfg, run, &files)
            })
        }
        Command::Analyze(Analysis::Collapse {
            common,
            alpha,
            beta,
            files,
        }) => {
            let flags = [("alpha_grid", alpha), ("beta_grid", beta)];
            execute("analyze-collapse", &common, &flags, |cfg, run| {
                commands::collapse(cfg, run, &files)
            })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some()
                || e.downcast_ref::<ConfigFileError>().is_some()
            {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
