//! Flat run-configuration file with command-line overrides.
//!
//! The file is TOML with one level of keys mirroring the run settings;
//! unknown keys are rejected so typos cannot silently change a run.
//! Overrides are `key=value` pairs applied on top of the file before
//! validation, so the effective configuration always comes from one place.

use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use morphopt::acquisition::{AcquisitionKind, GaConfig};
use morphopt::morph::BaselineGenSpec;
use morphopt::objectives::{BenchmarkFn, BenchmarkKind, EvaluatorBinding};
use morphopt::optimizer::{RunConfig, SearchSpace};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "default_objective")]
    pub objective: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub latin_hypercube: bool,
    #[serde(default = "default_ucb_kappa")]
    pub ucb_kappa: f64,
    #[serde(default = "default_xi")]
    pub ei_xi: f64,
    #[serde(default = "default_xi")]
    pub pi_xi: f64,
    #[serde(default = "default_smc_draws")]
    pub smc_draws: usize,
    #[serde(default = "default_ga_population")]
    pub ga_population: usize,
    #[serde(default = "default_ga_generations")]
    pub ga_generations: usize,
    #[serde(default = "default_ga_crossover")]
    pub ga_crossover: f64,
    #[serde(default = "default_ga_mutation_scale")]
    pub ga_mutation_scale: f64,
    #[serde(default = "default_ga_elitism")]
    pub ga_elitism: usize,
    #[serde(default = "default_duplicate_tol")]
    pub duplicate_tol: f64,
    #[serde(default = "default_fit_starts")]
    pub fit_starts: usize,
    #[serde(default = "default_fit_max_evals")]
    pub fit_max_evals: usize,
    #[serde(default = "default_proxy_n_s")]
    pub proxy_n_s: usize,
    #[serde(default = "default_proxy_n_phi")]
    pub proxy_n_phi: usize,
    #[serde(default = "default_proxy_inlet_diameter")]
    pub proxy_inlet_diameter: f64,
    #[serde(default = "default_proxy_outlet_aspect")]
    pub proxy_outlet_aspect: f64,
    #[serde(default)]
    pub evaluator_cmd: String,
    /// Array in the file; a bare string (one argument) in overrides.
    #[serde(default, deserialize_with = "string_or_seq")]
    pub evaluator_args: Vec<String>,
    #[serde(default = "default_evaluator_timeout_ms")]
    pub evaluator_timeout_ms: u64,
}

fn default_objective() -> String {
    "proxy".into()
}
fn default_dimension() -> usize {
    6
}
fn default_n_init() -> usize {
    50
}
fn default_epochs() -> usize {
    75
}
fn default_batch() -> usize {
    5
}
fn default_beta() -> f64 {
    1.0
}
fn default_eta() -> f64 {
    1.0
}
fn default_ucb_kappa() -> f64 {
    2.0
}
fn default_xi() -> f64 {
    0.01
}
fn default_smc_draws() -> usize {
    1
}
fn default_ga_population() -> usize {
    64
}
fn default_ga_generations() -> usize {
    60
}
fn default_ga_crossover() -> f64 {
    0.9
}
fn default_ga_mutation_scale() -> f64 {
    0.1
}
fn default_ga_elitism() -> usize {
    2
}
fn default_duplicate_tol() -> f64 {
    1e-3
}
fn default_fit_starts() -> usize {
    8
}
fn default_fit_max_evals() -> usize {
    32
}
fn default_proxy_n_s() -> usize {
    64
}
fn default_proxy_n_phi() -> usize {
    72
}
fn default_proxy_inlet_diameter() -> f64 {
    1.0
}
fn default_proxy_outlet_aspect() -> f64 {
    1.6
}
fn default_evaluator_timeout_ms() -> u64 {
    10_000
}

impl Default for ConfigFile {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

/// What the run optimizes over.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Benchmark(BenchmarkKind),
    Proxy,
    External,
}

impl ConfigFile {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_text(&text, overrides)
    }

    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().context("parsing config file")?;
        for pair in overrides {
            let (key, value) = pair
                .split_once('=')
                .with_context(|| format!("override {pair:?} is not key=value"))?;
            table.insert(key.trim().to_string(), parse_toml_value(value.trim()));
        }
        let config: ConfigFile = table.try_into().context("invalid configuration")?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        if self.objective_spec().is_none() {
            bail!(
                "unknown objective {:?} (expected spherical, rastrigin, styblinski_tang, \
                 amalgamated, proxy, or external)",
                self.objective
            );
        }
        if self.objective == "external" && self.evaluator_cmd.is_empty() {
            bail!("objective = \"external\" needs evaluator_cmd");
        }
        Ok(())
    }

    pub fn objective_spec(&self) -> Option<ObjectiveSpec> {
        match self.objective.as_str() {
            "proxy" => Some(ObjectiveSpec::Proxy),
            "external" => Some(ObjectiveSpec::External),
            name => BenchmarkKind::parse(name).map(ObjectiveSpec::Benchmark),
        }
    }

    pub fn baseline_spec(&self) -> BaselineGenSpec {
        BaselineGenSpec {
            n_s: self.proxy_n_s,
            n_phi: self.proxy_n_phi,
            inlet_diameter: self.proxy_inlet_diameter,
            outlet_aspect: self.proxy_outlet_aspect,
        }
    }

    pub fn evaluator_binding(&self) -> EvaluatorBinding {
        EvaluatorBinding {
            program: self.evaluator_cmd.clone(),
            args: self.evaluator_args.clone(),
            response_timeout: Duration::from_millis(self.evaluator_timeout_ms),
        }
    }

    /// Builds the optimizer config for the selected objective's space.
    pub fn run_config(&self) -> Result<RunConfig> {
        let space = match self.objective_spec().expect("checked at load") {
            ObjectiveSpec::Benchmark(kind) => {
                BenchmarkFn::new(kind, self.dimension)?.search_space()
            }
            ObjectiveSpec::Proxy | ObjectiveSpec::External => SearchSpace::dbm(),
        };
        let mut cfg = RunConfig::new(space);
        cfg.n_init = self.n_init;
        cfg.epochs = self.epochs;
        cfg.batch = self.batch;
        cfg.beta = self.beta;
        cfg.eta = self.eta;
        cfg.seed = self.seed;
        cfg.latin_hypercube = self.latin_hypercube;
        cfg.acquisitions = AcquisitionKind::default_portfolio(self.ucb_kappa, self.ei_xi, self.smc_draws);
        if self.pi_xi != self.ei_xi {
            cfg.acquisitions[2] = AcquisitionKind::Pi { xi: self.pi_xi };
        }
        cfg.ga = GaConfig {
            population: self.ga_population,
            generations: self.ga_generations,
            crossover_rate: self.ga_crossover,
            mutation_scale: self.ga_mutation_scale,
            elitism: self.ga_elitism,
            duplicate_tol: self.duplicate_tol,
            seed: 0,
        };
        cfg.duplicate_tol = self.duplicate_tol;
        cfg.fit_starts = self.fit_starts;
        cfg.fit_max_evals = self.fit_max_evals;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn string_or_seq<'de, D>(deserializer: D) -> Result<Vec<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

fn parse_toml_value(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.trim_matches('"').to_string())
}
