//! Subcommand implementations and their file outputs.
//!
//! Every output is deterministic for a fixed seed and config; the only
//! wall-clock value is the single `generated_unix_ms` line appended to a
//! run summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use morphopt::morph::{
    generate_baselines, morph_design, project_to_3d, validate_shape, MorphWeights,
};
use morphopt::objectives::{
    baseline_proxy_values, BenchmarkFn, BenchmarkKind, BenchmarkObjective, ExternalObjective,
    ProxyObjective, ProxyParams,
};
use morphopt::optimizer::{self, normalized_reward, Objective, RunLedger};

use crate::config::{ConfigFile, ObjectiveSpec};

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn timestamp_line() -> String {
    let ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    format!("generated_unix_ms = {ms}\n")
}

/// Runs the named benchmark `seeds` times and writes per-seed ledgers, the
/// normalized-reward trace table (epoch, mean, std), and a summary with the
/// 0.2-standard-deviation bands.
pub fn cmd_bench(
    function: &str,
    dim: usize,
    config: &ConfigFile,
    seeds: u64,
    out: &Path,
) -> Result<()> {
    let kind = BenchmarkKind::parse(function)
        .with_context(|| format!("unknown benchmark function {function:?}"))?;
    if seeds == 0 {
        bail!("need at least one seed");
    }
    let bench = BenchmarkFn::new(kind, dim)?;
    let (_, global_opt) = bench.optimum();

    let runs: Vec<(u64, optimizer::RunLedger, Vec<f64>)> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<(u64, optimizer::RunLedger, Vec<f64>)> {
            let seed = config.seed + s;
            let mut run_cfg = config.run_config()?;
            run_cfg.seed = seed;
            run_cfg.space = bench.search_space();
            run_cfg.ledger_path = Some(out.join(format!("{}_seed{seed}.ledger.tsv", kind.name())));
            let mut objective = BenchmarkObjective::new(bench.clone());
            let ledger = optimizer::run(&run_cfg, &mut objective)?;
            let trace = normalized_reward(&ledger, global_opt)?;
            Ok((seed, ledger, trace))
        })
        .collect::<Result<Vec<_>>>()?;

    let epochs = config.epochs;
    let mut trace_table = String::new();
    let mut bands = String::new();
    for e in 0..epochs {
        let values: Vec<f64> = runs.iter().map(|(_, _, t)| t[e]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / values.len() as f64;
        let std = var.sqrt();
        let _ = writeln!(trace_table, "{}\t{}\t{}", e + 1, mean, std);
        let _ = writeln!(
            bands,
            "band\t{}\t{}\t{}",
            e + 1,
            mean - 0.2 * std,
            mean + 0.2 * std
        );
    }
    write_file(&out.join(format!("{}_trace.tsv", kind.name())), &trace_table)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "function = {}", kind.name());
    let _ = writeln!(summary, "dimension = {dim}");
    let _ = writeln!(summary, "global_optimum = {global_opt}");
    let _ = writeln!(summary, "seeds = {seeds}");
    let _ = writeln!(summary, "base_seed = {}", config.seed);
    let _ = writeln!(summary, "n_init = {}", config.n_init);
    let _ = writeln!(summary, "epochs = {epochs}");
    let _ = writeln!(summary, "batch = {}", config.batch);
    for (seed, ledger, trace) in &runs {
        let _ = writeln!(
            summary,
            "seed {seed}\trecords={}\tinitial_best={}\tfinal_incumbent={}\tfinal_reward={}",
            ledger.records.len(),
            ledger.incumbents.first().unwrap(),
            ledger.incumbents.last().unwrap(),
            trace.last().copied().unwrap_or(0.0)
        );
    }
    summary.push_str(&bands);
    summary.push_str(&timestamp_line());
    write_file(&out.join(format!("{}_summary.txt", kind.name())), &summary)?;
    Ok(())
}

fn build_objective(config: &ConfigFile) -> Result<Box<dyn Objective>> {
    Ok(match config.objective_spec().expect("checked at load") {
        ObjectiveSpec::Proxy => {
            let baselines = generate_baselines(&config.baseline_spec())?;
            Box::new(ProxyObjective::new(baselines))
        }
        ObjectiveSpec::External => {
            Box::new(ExternalObjective::spawn(&config.evaluator_binding())?)
        }
        ObjectiveSpec::Benchmark(_) => {
            bail!("`optimize` runs the shape loop; use `bench` for test functions")
        }
    })
}

/// Shared tail of `optimize` and `resume`: summary, top-3 table, and the
/// incumbent's geometry exports.
fn write_run_outputs(config: &ConfigFile, ledger: &RunLedger, out: &Path) -> Result<()> {
    let mut summary = ledger.summary_text();
    let baselines = generate_baselines(&config.baseline_spec())?;
    let params = ProxyParams::for_baselines(&baselines);
    if config.objective == "proxy" {
        let values = baseline_proxy_values(&baselines, &params);
        let best = values
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        for (label, value) in &values {
            let _ = writeln!(summary, "baseline\t{label}\t{value}");
        }
        let _ = writeln!(summary, "baseline_best = {best}");
    }
    summary.push_str(&timestamp_line());
    write_file(&out.join("run_summary.txt"), &summary)?;

    let mut top3 = String::new();
    for (rank, r) in ledger.top_designs(3).iter().enumerate() {
        let design = r
            .design
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("\t");
        let _ = writeln!(
            top3,
            "{}\t{}\t{}\t{design}\t{}",
            rank + 1,
            r.epoch,
            r.source.label(),
            r.objective
        );
    }
    write_file(&out.join("top3.tsv"), &top3)?;

    if let Some(best) = ledger.incumbent_record() {
        if let Ok(w) = MorphWeights::from_vector(&best.design) {
            let (tube, hub) = morph_design(&baselines, &w)?;
            let tube_cloud = project_to_3d(&tube, baselines.tube_curve(), params.r_min)?;
            let hub_cloud = project_to_3d(&hub, baselines.hub_curve(), params.r_min)?;
            write_file(&out.join("best_tube.obj"), &tube_cloud.to_obj())?;
            write_file(&out.join("best_hub.obj"), &hub_cloud.to_obj())?;
        }
    }
    Ok(())
}

/// Runs the shape loop (proxy or external objective) and exports the
/// incumbent's geometry plus a ranked design table.
pub fn cmd_optimize(config: &ConfigFile, out: &Path) -> Result<()> {
    let mut run_cfg = config.run_config()?;
    run_cfg.ledger_path = Some(out.join("run.ledger.tsv"));
    let mut objective = build_objective(config)?;
    let ledger = match optimizer::run(&run_cfg, objective.as_mut()) {
        Ok(l) => l,
        Err(e @ optimizer::OptError::EvaluatorFailure { .. }) => {
            bail!("{e}\nresume with: morphopt resume --config <same config> --out {}", out.display());
        }
        Err(e) => return Err(e.into()),
    };
    write_run_outputs(config, &ledger, out)?;
    println!(
        "finished: {} evaluations, incumbent objective {}",
        ledger.records.len(),
        ledger.incumbents.last().unwrap()
    );
    Ok(())
}

/// Continues a crashed or truncated run from its persisted ledger; the
/// completed epochs are replayed without re-evaluating the objective.
pub fn cmd_resume(config: &ConfigFile, out: &Path) -> Result<()> {
    let ledger_path = out.join("run.ledger.tsv");
    let text = std::fs::read_to_string(&ledger_path)
        .with_context(|| format!("reading {}", ledger_path.display()))?;
    let prior = RunLedger::parse_records_tsv(&text)?;
    let mut run_cfg = config.run_config()?;
    run_cfg.ledger_path = Some(ledger_path);
    let mut objective = build_objective(config)?;
    let ledger = optimizer::resume(&run_cfg, objective.as_mut(), prior)?;
    write_run_outputs(config, &ledger, out)?;
    println!(
        "resumed to completion: {} evaluations, incumbent objective {}",
        ledger.records.len(),
        ledger.incumbents.last().unwrap()
    );
    Ok(())
}

/// Morphs the generated baselines under six weights, validates the result,
/// and writes the geometry plus the phi = 0 boundary profile table.
pub fn cmd_morph(weights: &[f64], config: &ConfigFile, out: &Path) -> Result<()> {
    let w = MorphWeights::from_vector(weights)?;
    let baselines = generate_baselines(&config.baseline_spec())?;
    let params = ProxyParams::for_baselines(&baselines);
    let (tube, hub) = morph_design(&baselines, &w)?;

    let tube_report = validate_shape(&tube, baselines.tube_curve(), params.r_min);
    let hub_report = validate_shape(&hub, baselines.hub_curve(), params.r_min);
    if !tube_report.valid || !hub_report.valid {
        bail!(
            "morphed shape rejected: tube {:?}, hub {:?}",
            tube_report.failure,
            hub_report.failure
        );
    }

    let tube_cloud = project_to_3d(&tube, baselines.tube_curve(), params.r_min)?;
    let hub_cloud = project_to_3d(&hub, baselines.hub_curve(), params.r_min)?;
    write_file(&out.join("morph_tube.obj"), &tube_cloud.to_obj())?;
    write_file(&out.join("morph_hub.obj"), &hub_cloud.to_obj())?;

    let mut profile = String::new();
    for j in 0..tube.grid().n_s() {
        let _ = writeln!(
            profile,
            "{j}\t{}\t{}",
            tube.grid().arc_position(j),
            tube.radius(0, j)
        );
    }
    write_file(&out.join("top_profile.tsv"), &profile)?;
    Ok(())
}

/// Default output root: --out wins, then the environment variable
/// `MORPHOPT_OUT`, then ./morphopt-out.
pub fn resolve_out(out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| std::env::var_os("MORPHOPT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("morphopt-out"))
}
