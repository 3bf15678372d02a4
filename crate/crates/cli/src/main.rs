//! Command-line front end: benchmark runs, shape optimization, one-off
//! morphs, and resuming interrupted runs.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;

#[derive(Parser)]
#[command(
    name = "morphopt",
    about = "Shape optimization by baseline morphing with batch Bayesian search",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Run-configuration file (flat TOML; unknown keys rejected).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $MORPHOPT_OUT or ./morphopt-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Objective name (overrides the config file).
    #[arg(long)]
    objective: Option<String>,
    /// External evaluator command (implies objective = external).
    #[arg(long)]
    evaluator: Option<String>,
    /// Epochs (overrides the config file).
    #[arg(long)]
    epochs: Option<usize>,
    /// Batch size Q (overrides the config file).
    #[arg(long)]
    batch: Option<usize>,
    /// Initial random samples (overrides the config file).
    #[arg(long)]
    init: Option<usize>,
    /// Extra key=value overrides applied to the config.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl CommonOpts {
    fn load_config(&self) -> Result<ConfigFile> {
        let mut overrides: Vec<String> = Vec::new();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(objective) = &self.objective {
            overrides.push(format!("objective={objective}"));
        }
        if let Some(evaluator) = &self.evaluator {
            overrides.push("objective=external".into());
            overrides.push(format!("evaluator_cmd={evaluator}"));
        }
        if let Some(epochs) = self.epochs {
            overrides.push(format!("epochs={epochs}"));
        }
        if let Some(batch) = self.batch {
            overrides.push(format!("batch={batch}"));
        }
        if let Some(init) = self.init {
            overrides.push(format!("n_init={init}"));
        }
        overrides.extend(self.overrides.iter().cloned());
        match &self.config {
            Some(path) => ConfigFile::load(path, &overrides),
            None => ConfigFile::from_text("", &overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark function several times and emit reward traces.
    Bench {
        /// spherical | rastrigin | styblinski_tang | amalgamated
        function: String,
        /// Problem dimension.
        #[arg(long, default_value_t = 6)]
        dim: usize,
        /// Number of independent seeded runs.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Optimize the morphed shape against the proxy objective or an
    /// external evaluator.
    Optimize {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Resume an interrupted `optimize` run from its ledger.
    Resume {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Morph the generated baselines under six weights and export geometry.
    Morph {
        /// w1 w2 w3 w4 w5 alpha1
        #[arg(num_args = 6, allow_negative_numbers = true)]
        weights: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Bench {
            function,
            dim,
            seeds,
            common,
        } => {
            let config = common.load_config()?;
            let out = commands::resolve_out(common.out);
            commands::cmd_bench(&function, dim, &config, seeds, &out)
        }
        Command::Optimize { common } => {
            let config = common.load_config()?;
            let out = commands::resolve_out(common.out);
            commands::cmd_optimize(&config, &out)
        }
        Command::Resume { common } => {
            let config = common.load_config()?;
            let out = commands::resolve_out(common.out);
            commands::cmd_resume(&config, &out)
        }
        Command::Morph { weights, common } => {
            let config = common.load_config()?;
            let out = commands::resolve_out(common.out);
            commands::cmd_morph(&weights, &config, &out)
        }
    }
}
