//! The batch Bayesian optimization outer loop.
//!
//! One run: draw an initial random sample, then for each epoch fit the
//! surrogate, let every acquisition function nominate a Q-batch, mutate
//! near-duplicate nominees, hedge among the functions using re-scored
//! historical nominations, evaluate the selected batch, and append it to
//! the data set. Every random draw is seeded from the master seed, the
//! epoch index, and the consumer's role, so runs are bit-reproducible and
//! a truncated run can be replayed to the same trajectory.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::acquisition::{mutate_batch, propose, AcquisitionKind, GaConfig};
use crate::gp::{self, FitConfig, GpError, KernelParams};
use crate::hedge::{self, HedgeState};

#[derive(Debug, Error)]
pub enum OptError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("surrogate fit failed: {0}")]
    Gp(#[from] GpError),
    #[error("evaluator failed: {message} (partial ledger preserved)")]
    EvaluatorFailure {
        message: String,
        partial: Box<RunLedger>,
    },
    #[error("resume mismatch at record {index}: ledger does not match this config/seed")]
    ResumeMismatch { index: usize },
    #[error("ledger parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("global optimum equals the random-sampling optimum; normalized reward undefined")]
    DegenerateDenominator,
    #[error("io error: {0}")]
    Io(String),
}

/// Failure reported by an objective while evaluating a batch.
#[derive(Debug, Clone, Error)]
#[error("{message}")]
pub struct EvalError {
    pub message: String,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

/// A black-box objective. Each design evaluates to an objective value and
/// a validity flag; invalid designs are recorded with objective exactly 0.
pub trait Objective {
    fn evaluate_batch(&mut self, designs: &[Vec<f64>]) -> Result<Vec<(f64, bool)>, EvalError>;
}

/// A bounded rectangular search domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    bounds: Vec<(f64, f64)>,
}

impl SearchSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, OptError> {
        if bounds.is_empty() {
            return Err(OptError::Config("search space has no dimensions".into()));
        }
        for &(lo, hi) in &bounds {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(OptError::Config(format!(
                    "bad bounds ({lo}, {hi}): need finite lower < upper"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The six-dimensional morph-weight box: five tube weights and the
    /// first hub weight, all in [-0.5, 1].
    pub fn dbm() -> Self {
        Self {
            bounds: vec![(crate::morph::WEIGHT_MIN, crate::morph::WEIGHT_MAX); 6],
        }
    }

    pub fn unit_box(dim: usize) -> Self {
        Self {
            bounds: vec![(0.0, 1.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w.iter()
                .zip(&self.bounds)
                .all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    pub fn to_unit(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.bounds)
            .map(|(&x, &(lo, hi))| (x - lo) / (hi - lo))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.bounds)
            .map(|(&x, &(lo, hi))| lo + x * (hi - lo))
            .collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect()
    }

    /// Euclidean distance after rescaling both points into the unit box.
    pub fn unit_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.bounds)
            .map(|((&x, &y), &(lo, hi))| {
                let d = (x - y) / (hi - lo);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Who produced an evaluated design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Initial random sampling.
    Random,
    /// Nominated by the acquisition function at this portfolio index.
    Nominated { function: usize, name: String },
}

impl Source {
    pub fn label(&self) -> &str {
        match self {
            Source::Random => "random",
            Source::Nominated { name, .. } => name,
        }
    }
}

/// One black-box call. `order` is the logical timestamp: the global,
/// deterministic evaluation index used in the persisted ledger (wall-clock
/// time lives only in the run summary so byte-identical reruns stay
/// byte-identical). `wall_secs` is the measured duration, kept in memory
/// and deliberately excluded from equality.
#[derive(Debug, Clone)]
pub struct EvaluationRecord {
    pub epoch: usize,
    pub source: Source,
    pub design: Vec<f64>,
    pub objective: f64,
    pub valid: bool,
    pub order: usize,
    pub wall_secs: f64,
}

impl PartialEq for EvaluationRecord {
    fn eq(&self, other: &Self) -> bool {
        self.epoch == other.epoch
            && self.source == other.source
            && self.design == other.design
            && self.objective == other.objective
            && self.valid == other.valid
            && self.order == other.order
    }
}

/// Per-epoch hedge bookkeeping kept in the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub phi: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Source function index per batch slot.
    pub sources: Vec<usize>,
    /// Post-mutation nominees per function, original coordinates.
    pub nominees: Vec<Vec<Vec<f64>>>,
}

/// Full optimization trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLedger {
    pub records: Vec<EvaluationRecord>,
    pub epochs: Vec<EpochSummary>,
    /// `incumbents[0]` is the best of the initial sample; entry `e` is the
    /// best objective observed through epoch `e`.
    pub incumbents: Vec<f64>,
    pub config_lines: Vec<(String, String)>,
}

impl RunLedger {
    pub fn incumbent_record(&self) -> Option<&EvaluationRecord> {
        self.records
            .iter()
            .max_by(|a, b| a.objective.total_cmp(&b.objective).then(b.order.cmp(&a.order)))
    }

    /// The best `n` records with pairwise-distinct designs, best first.
    pub fn top_designs(&self, n: usize) -> Vec<&EvaluationRecord> {
        let mut order: Vec<&EvaluationRecord> = self.records.iter().collect();
        order.sort_by(|a, b| b.objective.total_cmp(&a.objective).then(a.order.cmp(&b.order)));
        let mut out: Vec<&EvaluationRecord> = Vec::new();
        for r in order {
            if out.len() == n {
                break;
            }
            if out.iter().all(|p| p.design != r.design) {
                out.push(r);
            }
        }
        out
    }

    /// Records serialized one evaluation per line, tab-separated:
    /// `epoch  source  w_1 .. w_D  objective  valid  order`.
    /// Numbers print with full round-trip precision; `valid` is 1 or 0.
    pub fn records_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}", record_line(r));
        }
        out
    }

    /// Deterministic run-summary document: config snapshot, per-epoch hedge
    /// state, the incumbent trace, and the top three designs. Field order
    /// is stable; the CLI appends its own timestamp field.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config_lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "records = {}", self.records.len());
        if let Some(first) = self.incumbents.first() {
            let _ = writeln!(out, "incumbent_initial = {first}");
        }
        if let Some(last) = self.incumbents.last() {
            let _ = writeln!(out, "incumbent_final = {last}");
        }
        for e in &self.epochs {
            let join = |v: &[f64]| {
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let sources = e
                .sources
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(
                out,
                "epoch {}\tphi=({})\tp=({})\tsources=({})\tincumbent={}",
                e.epoch,
                join(&e.phi),
                join(&e.probabilities),
                sources,
                self.incumbents[e.epoch]
            );
        }
        for (rank, r) in self.top_designs(3).iter().enumerate() {
            let design = r
                .design
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("\t");
            let _ = writeln!(
                out,
                "top{}\tepoch={}\tsource={}\t{design}\tobjective={}",
                rank + 1,
                r.epoch,
                r.source.label(),
                r.objective
            );
        }
        out
    }

    /// Parses a records file written by [`RunLedger::records_tsv`]. Partial
    /// trailing epochs are kept; [`resume`] trims them.
    pub fn parse_records_tsv(text: &str) -> Result<Vec<EvaluationRecord>, OptError> {
        let mut records = Vec::new();
        let mut last_epoch = 0usize;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 6 {
                return Err(OptError::Parse {
                    line: idx + 1,
                    message: format!("expected at least 6 fields, got {}", fields.len()),
                });
            }
            let parse_f = |s: &str, what: &str| -> Result<f64, OptError> {
                s.parse::<f64>().map_err(|e| OptError::Parse {
                    line: idx + 1,
                    message: format!("{what}: {e}"),
                })
            };
            let epoch: usize = fields[0].parse().map_err(|e| OptError::Parse {
                line: idx + 1,
                message: format!("epoch: {e}"),
            })?;
            if epoch < last_epoch {
                return Err(OptError::Parse {
                    line: idx + 1,
                    message: "epoch decreased".into(),
                });
            }
            last_epoch = epoch;
            let dim = fields.len() - 5;
            let mut design = Vec::with_capacity(dim);
            for f in &fields[2..2 + dim] {
                design.push(parse_f(f, "weight")?);
            }
            let objective = parse_f(fields[2 + dim], "objective")?;
            let valid = match fields[3 + dim] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(OptError::Parse {
                        line: idx + 1,
                        message: format!("validity must be 0 or 1, got {other}"),
                    })
                }
            };
            let order: usize = fields[4 + dim].parse().map_err(|e| OptError::Parse {
                line: idx + 1,
                message: format!("order: {e}"),
            })?;
            let source = if fields[1] == "random" {
                Source::Random
            } else {
                Source::Nominated {
                    function: usize::MAX,
                    name: fields[1].to_string(),
                }
            };
            records.push(EvaluationRecord {
                epoch,
                source,
                design,
                objective,
                valid,
                order,
                wall_secs: 0.0,
            });
        }
        Ok(records)
    }
}

fn record_line(r: &EvaluationRecord) -> String {
    let design = r
        .design
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("\t");
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        r.epoch,
        r.source.label(),
        design,
        r.objective,
        if r.valid { 1 } else { 0 },
        r.order
    )
}

/// Run settings. `fit_starts`/`fit_max_evals` bound the per-epoch surrogate
/// fit; acquisition GA settings come from `ga` (its seed field is ignored,
/// seeds are derived per epoch and function).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space: SearchSpace,
    pub n_init: usize,
    pub epochs: usize,
    pub batch: usize,
    pub beta: f64,
    pub eta: f64,
    pub seed: u64,
    pub latin_hypercube: bool,
    pub acquisitions: Vec<AcquisitionKind>,
    pub ga: GaConfig,
    pub duplicate_tol: f64,
    pub fit_starts: usize,
    pub fit_max_evals: usize,
    /// When set, records are appended here after the initial sample and
    /// after every epoch, so a crashed run can resume.
    pub ledger_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(space: SearchSpace) -> Self {
        Self {
            space,
            n_init: 50,
            epochs: 75,
            batch: 5,
            beta: 1.0,
            eta: 1.0,
            seed: 0,
            latin_hypercube: false,
            acquisitions: AcquisitionKind::default_portfolio(2.0, 0.01, 1),
            ga: GaConfig::default(),
            duplicate_tol: 1e-3,
            fit_starts: 8,
            fit_max_evals: 40,
            ledger_path: None,
        }
    }

    pub fn validate(&self) -> Result<(), OptError> {
        if self.n_init < 2 {
            return Err(OptError::Config(format!(
                "n_init = {}, need >= 2",
                self.n_init
            )));
        }
        if self.batch < 1 {
            return Err(OptError::Config("batch must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(OptError::Config(format!(
                "beta = {}, need in [0, 1]",
                self.beta
            )));
        }
        if !(self.eta > 0.0) {
            return Err(OptError::Config(format!("eta = {}, need > 0", self.eta)));
        }
        if self.acquisitions.is_empty() {
            return Err(OptError::Config("empty acquisition portfolio".into()));
        }
        for a in &self.acquisitions {
            a.validate().map_err(OptError::Config)?;
        }
        if self.fit_starts < 1 || self.fit_max_evals < 10 {
            return Err(OptError::Config(
                "fit needs at least 1 start and 10 evaluations".into(),
            ));
        }
        Ok(())
    }

    fn config_lines(&self) -> Vec<(String, String)> {
        let bounds = self
            .space
            .bounds()
            .iter()
            .map(|(lo, hi)| format!("{lo}..{hi}"))
            .collect::<Vec<_>>()
            .join(";");
        let acquisitions = self
            .acquisitions
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("dim".into(), self.space.dim().to_string()),
            ("bounds".into(), bounds),
            ("n_init".into(), self.n_init.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("batch".into(), self.batch.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("eta".into(), self.eta.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("latin_hypercube".into(), self.latin_hypercube.to_string()),
            ("acquisitions".into(), acquisitions),
            ("ga_population".into(), self.ga.population.to_string()),
            ("ga_generations".into(), self.ga.generations.to_string()),
            ("ga_crossover".into(), self.ga.crossover_rate.to_string()),
            ("ga_mutation_scale".into(), self.ga.mutation_scale.to_string()),
            ("ga_elitism".into(), self.ga.elitism.to_string()),
            ("duplicate_tol".into(), self.duplicate_tol.to_string()),
            ("fit_starts".into(), self.fit_starts.to_string()),
            ("fit_max_evals".into(), self.fit_max_evals.to_string()),
        ]
    }
}

// Seed derivation: splitmix64 over (master, role, epoch, index) so every
// consumer gets an independent, reproducible stream.
const ROLE_INIT: u64 = 1;
const ROLE_FIT: u64 = 2;
const ROLE_GA: u64 = 3;
const ROLE_MUTATE: u64 = 4;
const ROLE_SELECT: u64 = 5;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn derive_seed(master: u64, role: u64, epoch: u64, index: u64) -> u64 {
    let mut s = splitmix(master ^ 0x6d6f727068u64);
    s = splitmix(s ^ role);
    s = splitmix(s ^ epoch);
    splitmix(s ^ index)
}

fn latin_hypercube(space: &SearchSpace, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let dim = space.dim();
    let mut strata: Vec<Vec<usize>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        strata.push(perm);
    }
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let (lo, hi) = space.bounds()[d];
                    let cell = strata[d][i] as f64;
                    let u: f64 = rng.gen();
                    lo + (cell + u) / n as f64 * (hi - lo)
                })
                .collect()
        })
        .collect()
}

struct LedgerWriter {
    file: Option<std::fs::File>,
}

impl LedgerWriter {
    fn create(path: Option<&Path>) -> Result<Self, OptError> {
        let file = match path {
            Some(p) => {
                if let Some(parent) = p.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent).map_err(|e| OptError::Io(e.to_string()))?;
                    }
                }
                Some(
                    std::fs::File::create(p).map_err(|e| OptError::Io(e.to_string()))?,
                )
            }
            None => None,
        };
        Ok(Self { file })
    }

    fn append(&mut self, records: &[EvaluationRecord]) -> Result<(), OptError> {
        if let Some(f) = &mut self.file {
            let mut text = String::new();
            for r in records {
                let _ = writeln!(text, "{}", record_line(r));
            }
            f.write_all(text.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| OptError::Io(e.to_string()))?;
        }
        Ok(())
    }
}

/// Evaluates a batch, replaying recorded results while they last. Replay
/// checks that the regenerated designs match the recorded ones bit-exactly,
/// which catches resuming with the wrong config or seed.
fn evaluate_or_replay(
    objective: &mut dyn Objective,
    designs: &[Vec<f64>],
    replay: &mut VecDeque<EvaluationRecord>,
    consumed: &mut usize,
) -> Result<Vec<(f64, bool, f64)>, ReplayOrEvalError> {
    if replay.is_empty() {
        let t0 = Instant::now();
        let evals = objective
            .evaluate_batch(designs)
            .map_err(ReplayOrEvalError::Eval)?;
        let wall = t0.elapsed().as_secs_f64() / designs.len().max(1) as f64;
        return Ok(evals.into_iter().map(|(o, v)| (o, v, wall)).collect());
    }
    let mut out = Vec::with_capacity(designs.len());
    for design in designs {
        match replay.pop_front() {
            Some(r) => {
                if &r.design != design {
                    return Err(ReplayOrEvalError::Mismatch { index: *consumed });
                }
                *consumed += 1;
                out.push((r.objective, r.valid, r.wall_secs));
            }
            None => {
                // A ledger should only be truncated on batch boundaries;
                // treat a ragged tail as a mismatch.
                return Err(ReplayOrEvalError::Mismatch { index: *consumed });
            }
        }
    }
    Ok(out)
}

enum ReplayOrEvalError {
    Eval(EvalError),
    Mismatch { index: usize },
}

/// Runs the full loop. See the module docs for the epoch structure.
pub fn run(config: &RunConfig, objective: &mut dyn Objective) -> Result<RunLedger, OptError> {
    run_with_history(config, objective, Vec::new())
}

/// Resumes a run from previously persisted records: completed epochs are
/// replayed without calling the objective, then the loop continues. The
/// final ledger is identical to an uninterrupted run with the same config.
pub fn resume(
    config: &RunConfig,
    objective: &mut dyn Objective,
    mut prior: Vec<EvaluationRecord>,
) -> Result<RunLedger, OptError> {
    // Keep only whole batches: the initial sample, then complete epochs.
    prior.sort_by_key(|r| r.order);
    if prior.len() < config.n_init {
        prior.clear();
    } else {
        let extra = prior.len() - config.n_init;
        prior.truncate(config.n_init + (extra / config.batch) * config.batch);
    }
    run_with_history(config, objective, prior)
}

fn run_with_history(
    config: &RunConfig,
    objective: &mut dyn Objective,
    prior: Vec<EvaluationRecord>,
) -> Result<RunLedger, OptError> {
    config.validate()?;
    let space = &config.space;
    let master = config.seed;
    let q = config.batch;
    let l_count = config.acquisitions.len();

    let mut replay: VecDeque<EvaluationRecord> = prior.into();
    let mut replay_consumed = 0usize;
    let mut writer = LedgerWriter::create(config.ledger_path.as_deref())?;

    let mut ledger = RunLedger {
        records: Vec::with_capacity(config.n_init + q * config.epochs),
        epochs: Vec::with_capacity(config.epochs),
        incumbents: Vec::with_capacity(config.epochs + 1),
        config_lines: config.config_lines(),
    };

    // Initial sample (epoch 0).
    let init_designs: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, ROLE_INIT, 0, 0));
        if config.latin_hypercube {
            latin_hypercube(space, config.n_init, &mut rng)
        } else {
            (0..config.n_init).map(|_| space.sample(&mut rng)).collect()
        }
    };
    let evals = match evaluate_or_replay(objective, &init_designs, &mut replay, &mut replay_consumed)
    {
        Ok(e) => e,
        Err(e) => return Err(finish_eval_error(e, ledger)),
    };
    for (design, (obj, valid, wall)) in init_designs.into_iter().zip(evals) {
        let order = ledger.records.len();
        ledger.records.push(EvaluationRecord {
            epoch: 0,
            source: Source::Random,
            design,
            objective: if valid { obj } else { 0.0 },
            valid,
            order,
            wall_secs: wall,
        });
    }
    writer.append(&ledger.records)?;
    ledger
        .incumbents
        .push(best_objective(&ledger.records).expect("n_init >= 2"));

    let mut hedge_state = HedgeState::new(config.eta);
    let mut warm: Option<KernelParams> = None;

    for epoch in 1..=config.epochs {
        // Fit the surrogate on everything observed so far.
        let inputs: Vec<Vec<f64>> = ledger
            .records
            .iter()
            .map(|r| space.to_unit(&r.design))
            .collect();
        let targets: Vec<f64> = ledger.records.iter().map(|r| r.objective).collect();
        let fit_cfg = FitConfig {
            n_starts: config.fit_starts,
            max_evals_per_start: config.fit_max_evals,
            seed: derive_seed(master, ROLE_FIT, epoch as u64, 0),
            warm_start: warm.take(),
        };
        let g = gp::fit(&inputs, &targets, &fit_cfg)?;

        // Per-function Q-batch nominations, in parallel with independent
        // seed streams, merged by portfolio index.
        let nominees: Vec<Vec<Vec<f64>>> = config
            .acquisitions
            .par_iter()
            .enumerate()
            .map(|(l, kind)| {
                let ga = GaConfig {
                    seed: derive_seed(master, ROLE_GA, epoch as u64, l as u64),
                    duplicate_tol: config.duplicate_tol,
                    ..config.ga.clone()
                };
                propose(kind, &g, space, q, &ga)
            })
            .collect();

        // Mutate near-duplicates across the whole nominee pool.
        let flat: Vec<Vec<f64>> = nominees.iter().flatten().cloned().collect();
        let mutated = mutate_batch(
            &flat,
            space,
            config.beta,
            config.duplicate_tol,
            derive_seed(master, ROLE_MUTATE, epoch as u64, 0),
        );
        let nominees: Vec<Vec<Vec<f64>>> = mutated.chunks(q).map(|c| c.to_vec()).collect();

        // Hedge: re-score history under the current surrogate, then select.
        hedge_state = hedge::compute_rewards(&g, hedge_state);
        let phi = full_phi(&hedge_state, l_count);
        let probabilities = hedge::selection_probabilities(&phi, config.eta);
        let selected = hedge::select_batch(
            &nominees,
            &phi,
            config.eta,
            q,
            derive_seed(master, ROLE_SELECT, epoch as u64, 0),
        );

        // Record this epoch's nominees for future rewards (unit coords).
        hedge_state.push_epoch(
            nominees
                .iter()
                .map(|per_l| per_l.iter().map(|p| space.to_unit(p)).collect())
                .collect(),
        );

        let designs: Vec<Vec<f64>> = selected.iter().map(|(p, _)| p.clone()).collect();
        let sources: Vec<usize> = selected.iter().map(|(_, l)| *l).collect();
        let evals =
            match evaluate_or_replay(objective, &designs, &mut replay, &mut replay_consumed) {
                Ok(e) => e,
                Err(e) => return Err(finish_eval_error(e, ledger)),
            };

        let first_new = ledger.records.len();
        for (slot, (design, (obj, valid, wall))) in designs.into_iter().zip(evals).enumerate() {
            let order = ledger.records.len();
            ledger.records.push(EvaluationRecord {
                epoch,
                source: Source::Nominated {
                    function: sources[slot],
                    name: config.acquisitions[sources[slot]].name().to_string(),
                },
                design,
                objective: if valid { obj } else { 0.0 },
                valid,
                order,
                wall_secs: wall,
            });
        }
        writer.append(&ledger.records[first_new..])?;

        ledger.epochs.push(EpochSummary {
            epoch,
            phi,
            probabilities,
            sources,
            nominees,
        });
        let best = best_objective(&ledger.records).expect("records nonempty");
        ledger.incumbents.push(best);
        warm = Some(g.params().clone());
    }

    debug_assert_eq!(
        ledger.records.len(),
        config.n_init + config.batch * config.epochs
    );
    Ok(ledger)
}

fn finish_eval_error(e: ReplayOrEvalError, partial: RunLedger) -> OptError {
    match e {
        ReplayOrEvalError::Eval(err) => OptError::EvaluatorFailure {
            message: err.message,
            partial: Box::new(partial),
        },
        ReplayOrEvalError::Mismatch { index } => OptError::ResumeMismatch { index },
    }
}

fn full_phi(state: &HedgeState, l_count: usize) -> Vec<f64> {
    let mut phi = hedge::normalize_rewards(state);
    phi.resize(l_count, 0.0);
    phi
}

fn best_objective(records: &[EvaluationRecord]) -> Option<f64> {
    records
        .iter()
        .map(|r| r.objective)
        .max_by(f64::total_cmp)
}

/// Per-epoch progress toward a known global optimum:
/// `(incumbent - random best) / (global optimum - random best)`, where the
/// random best is the best of the initial sample. One value per epoch.
pub fn normalized_reward(ledger: &RunLedger, global_opt: f64) -> Result<Vec<f64>, OptError> {
    let random_best = *ledger
        .incumbents
        .first()
        .ok_or_else(|| OptError::Config("ledger has no initial sample".into()))?;
    let denom = global_opt - random_best;
    if denom.abs() < 1e-300 {
        return Err(OptError::DegenerateDenominator);
    }
    Ok(ledger.incumbents[1..]
        .iter()
        .map(|inc| (inc - random_best) / denom)
        .collect())
}

/// Per-epoch objective trace rescaled between a reference design's value
/// (0) and a best value (1).
pub fn normalized_objective(
    ledger: &RunLedger,
    reference: f64,
    best: f64,
) -> Result<Vec<f64>, OptError> {
    let denom = best - reference;
    if denom.abs() < 1e-300 {
        return Err(OptError::DegenerateDenominator);
    }
    Ok(ledger.incumbents[1..]
        .iter()
        .map(|inc| (inc - reference) / denom)
        .collect())
}
