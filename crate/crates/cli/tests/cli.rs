//! End-to-end tests of the command-line interface: file outputs,
//! determinism, resume, and the external-evaluator path.

use std::io::Write as _;
use std::path::Path;
use std::process::Command;

fn morphopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morphopt"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Tiny-but-complete run settings so each invocation stays fast.
const SMALL: &[&str] = &[
    "n_init=6",
    "epochs=2",
    "batch=2",
    "ga_population=12",
    "ga_generations=6",
    "fit_starts=3",
    "fit_max_evals=20",
    "proxy_n_s=16",
    "proxy_n_phi=12",
];

fn strip_timestamp(s: &str) -> String {
    s.lines()
        .filter(|l| !l.starts_with("generated_unix_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bench_is_deterministic_and_counts_records() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = morphopt()
            .args(["bench", "spherical", "--dim", "2", "--seeds", "2", "--seed", "7"])
            .arg("--out")
            .arg(out)
            .args(SMALL)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let trace_a = read(&out_a.join("spherical_trace.tsv"));
    let trace_b = read(&out_b.join("spherical_trace.tsv"));
    assert_eq!(trace_a, trace_b, "trace tables must be byte-identical");
    assert_eq!(trace_a.lines().count(), 2, "one row per epoch");

    // Summaries agree except for the single timestamp field.
    let sum_a = read(&out_a.join("spherical_summary.txt"));
    let sum_b = read(&out_b.join("spherical_summary.txt"));
    assert_eq!(strip_timestamp(&sum_a), strip_timestamp(&sum_b));
    assert_eq!(
        sum_a.lines().filter(|l| l.starts_with("generated_unix_ms")).count(),
        1
    );

    for seed in [7u64, 8] {
        let ledger = read(&out_a.join(format!("spherical_seed{seed}.ledger.tsv")));
        assert_eq!(ledger.lines().count(), 6 + 2 * 2);
    }
}

#[test]
fn bench_zero_epochs_gives_empty_trace_and_reports_initial_best() {
    let dir = tempfile::tempdir().unwrap();
    let status = morphopt()
        .args(["bench", "rastrigin", "--dim", "2", "--seeds", "1", "--epochs", "0"])
        .arg("--out")
        .arg(dir.path())
        .args(["n_init=5", "batch=2", "ga_population=12", "ga_generations=4", "fit_starts=2", "fit_max_evals=20"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&dir.path().join("rastrigin_trace.tsv")), "");
    let summary = read(&dir.path().join("rastrigin_summary.txt"));
    assert!(summary.contains("initial_best="), "{summary}");
}

#[test]
fn bench_rejects_unknown_functions_and_keys() {
    let status = morphopt()
        .args(["bench", "rosenbrock"])
        .status()
        .unwrap();
    assert!(!status.success());
    let output = morphopt()
        .args(["bench", "spherical", "bogus_key=1"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("bogus_key"));
}

#[test]
fn morph_identity_exports_baseline_one_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let status = morphopt()
        .args(["morph", "1", "0", "0", "0", "0", "0.5"])
        .arg("--out")
        .arg(dir.path())
        .args(["proxy_n_s=16", "proxy_n_phi=12"])
        .status()
        .unwrap();
    assert!(status.success());

    // The identity morph must reproduce the first baseline exactly.
    use morphopt::morph::{generate_baselines, project_to_3d, BaselineGenSpec};
    let set = generate_baselines(&BaselineGenSpec {
        n_s: 16,
        n_phi: 12,
        ..Default::default()
    })
    .unwrap();
    let expect = project_to_3d(&set.tube()[0], set.tube_curve(), set.default_r_min())
        .unwrap()
        .to_obj();
    assert_eq!(read(&dir.path().join("morph_tube.obj")), expect);

    let profile = read(&dir.path().join("top_profile.tsv"));
    assert_eq!(profile.lines().count(), 16);
    let first = profile.lines().next().unwrap();
    assert_eq!(first.split('\t').nth(2).unwrap(), "0.5");
}

#[test]
fn morph_rejects_zero_weight_sum() {
    let output = morphopt()
        .args(["morph", "0", "0", "0", "0", "0", "0.5"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("weight sum"), "{stderr}");
}

#[test]
fn optimize_writes_ledger_summary_top3_and_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let status = morphopt()
        .args(["optimize", "--seed", "3"])
        .arg("--out")
        .arg(dir.path())
        .args(SMALL)
        .status()
        .unwrap();
    assert!(status.success());

    let ledger = read(&dir.path().join("run.ledger.tsv"));
    assert_eq!(ledger.lines().count(), 6 + 2 * 2);

    let top3 = read(&dir.path().join("top3.tsv"));
    let objectives: Vec<f64> = top3
        .lines()
        .map(|l| l.split('\t').next_back().unwrap().parse().unwrap())
        .collect();
    assert_eq!(objectives.len(), 3);
    assert!(objectives[0] >= objectives[1] && objectives[1] >= objectives[2]);

    let summary = read(&dir.path().join("run_summary.txt"));
    assert!(summary.contains("baseline_best ="), "{summary}");
    assert!(dir.path().join("best_tube.obj").exists());
    assert!(dir.path().join("best_hub.obj").exists());
}

#[test]
fn resume_from_truncated_ledger_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let full_out = dir.path().join("full");
    let resumed_out = dir.path().join("resumed");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "objective = \"proxy\"\nseed = 11\nn_init = 6\nepochs = 3\nbatch = 2\n\
         ga_population = 12\nga_generations = 6\nfit_starts = 3\nfit_max_evals = 20\n\
         proxy_n_s = 16\nproxy_n_phi = 12\n",
    )
    .unwrap();

    let status = morphopt()
        .args(["optimize", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&full_out)
        .status()
        .unwrap();
    assert!(status.success());
    let full_ledger = read(&full_out.join("run.ledger.tsv"));

    // Keep the initial sample plus one complete epoch, then resume.
    std::fs::create_dir_all(&resumed_out).unwrap();
    let truncated: String = full_ledger
        .lines()
        .take(6 + 2)
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(resumed_out.join("run.ledger.tsv"), truncated).unwrap();

    let status = morphopt()
        .args(["resume", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&resumed_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&resumed_out.join("run.ledger.tsv")), full_ledger);
    let full_summary = strip_timestamp(&read(&full_out.join("run_summary.txt")));
    let resumed_summary = strip_timestamp(&read(&resumed_out.join("run_summary.txt")));
    assert_eq!(full_summary, resumed_summary);
}

#[test]
fn optimize_against_the_echo_evaluator_maximizes_w1() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("echo_eval.py");
    let mut f = std::fs::File::create(&script).unwrap();
    writeln!(f, "import json, sys").unwrap();
    writeln!(f, "for line in sys.stdin:").unwrap();
    writeln!(f, "    req = json.loads(line)").unwrap();
    writeln!(
        f,
        "    print(json.dumps({{\"id\": req[\"id\"], \"objective\": req[\"weights\"][0], \"valid\": True}}), flush=True)"
    )
    .unwrap();
    drop(f);

    let out = dir.path().join("run");
    let status = morphopt()
        .args(["optimize", "--seed", "5", "--objective", "external"])
        .args([
            "evaluator_cmd=python3",
            &format!("evaluator_args={}", script.display()),
        ])
        .arg("--out")
        .arg(&out)
        .args([
            "n_init=14",
            "epochs=8",
            "batch=3",
            "ga_population=24",
            "ga_generations=12",
            "fit_starts=4",
            "fit_max_evals=24",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let top3 = read(&out.join("top3.tsv"));
    let best_w1: f64 = top3
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!(best_w1 >= 0.9, "optimizer should push w1 near 1.0, got {best_w1}");
}
