use std::path::Path;
use std::process::Command;

use gexp_cli::config::OutputFormat;
use gexp_cli::{emit_report, run_experiment, ExperimentConfig, ReportBundle, CATALOG};

const INTERVAL: &str = r#"{"kind": "interval", "sigma_lo_sq": 0.25, "sigma_hi_sq": 1.0}"#;
const CONFORMAL: &str = r#"{"kind": "conformal", "sigma_lo_sq": 0.25, "sigma_hi_sq": 1.0}"#;

fn config(id: &str, sigma: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        r#"{{"experiment_id": "{id}", "sigma_spec": {sigma},
            "mc": {{"dt": 0.01, "n_steps": 100, "n_paths": 800, "seed": 9, "controls": ["constants", "bang-bang"]}}}}"#
    ))
    .unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gexp"))
}

#[test]
fn config_round_trips_through_json() {
    let c = config("qv-distribution", INTERVAL);
    let back = ExperimentConfig::parse(&c.to_json()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn parse_errors_name_field_and_line() {
    let text = "{\n  \"experiment_id\": \"axioms\",\n  \"sigma_spec\": {\"kind\": \"interval\", \"sigma_lo_sq\": 0.25, \"sigma_hi_sq\": 1.0},\n  \"mc\": {\"dt\": \"fast\"}\n}";
    let e = ExperimentConfig::parse(text).unwrap_err();
    assert_eq!(e.field, "mc.dt");
    assert_eq!(e.line, Some(4));
    assert!(e.to_string().starts_with("line 4, mc.dt:"), "{e}");

    let unknown = "{\n  \"experiment_id\": \"axioms\",\n  \"sigma_spec\": {\"kind\": \"interval\", \"sigma_lo_sq\": 0.25, \"sigma_hi_sq\": 1.0},\n  \"colour\": 1\n}";
    let e = ExperimentConfig::parse(unknown).unwrap_err();
    assert!(e.message.contains("colour"), "{e}");
}

#[test]
fn unknown_experiment_and_bad_sigma_are_rejected() {
    let text = format!("{{\n\"experiment_id\": \"nope\",\n\"sigma_spec\": {INTERVAL}\n}}");
    let e = ExperimentConfig::parse(&text).unwrap_err();
    assert_eq!(e.field, "experiment_id");
    assert_eq!(e.line, Some(2));
    for (id, _) in CATALOG {
        assert!(e.message.contains(id));
    }

    let inverted = r#"{"experiment_id": "axioms", "sigma_spec": {"kind": "interval", "sigma_lo_sq": 2.0, "sigma_hi_sq": 1.0}}"#;
    assert_eq!(ExperimentConfig::parse(inverted).unwrap_err().field, "sigma_spec");
}

#[test]
fn experiments_reject_the_wrong_dimension() {
    assert!(run_experiment(&config("conformal-suite", INTERVAL)).is_err());
    assert!(run_experiment(&config("counterexample", CONFORMAL)).is_err());
}

#[test]
fn seed_override_replaces_the_seed() {
    let mut c = config("qv-distribution", INTERVAL);
    c.apply_seed_override(None).unwrap();
    assert_eq!(c.mc.seed, 9);
    c.apply_seed_override(Some(" 42 ")).unwrap();
    assert_eq!(c.mc.seed, 42);
    assert_eq!(c.apply_seed_override(Some("x")).unwrap_err().field, "GEXP_SEED");
}

#[test]
fn every_experiment_runs_and_passes_on_small_grids() {
    let cases = [
        ("gnormal-moments", INTERVAL),
        ("qv-distribution", INTERVAL),
        ("ito-bounds", INTERVAL),
        ("ito-bounds", CONFORMAL),
        ("complex-ito", CONFORMAL),
        ("conformal-suite", CONFORMAL),
        ("counterexample", INTERVAL),
        ("axioms", INTERVAL),
        ("axioms", CONFORMAL),
    ];
    for (id, sigma) in cases {
        let bundle = run_experiment(&config(id, sigma)).unwrap();
        assert!(!bundle.checks.is_empty(), "{id}");
        let failed: Vec<_> = bundle.checks.iter().filter(|c| !c.passed()).collect();
        assert!(failed.is_empty(), "{id}: {failed:?}");
        assert_eq!(bundle.tables[0].name, "checks");
        assert_eq!(bundle.tables[0].rows.len(), bundle.checks.len());
    }
}

fn read_tree(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let mut text = std::fs::read_to_string(&p).unwrap();
            if p.file_name().unwrap() == "summary.json" {
                let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
                v["wall_time_s"] = 0.into();
                text = v.to_string();
            }
            (p.file_name().unwrap().to_string_lossy().into_owned(), text)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let c = config("qv-distribution", INTERVAL);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let bundle = run_experiment(&c).unwrap();
        emit_report(&bundle, &c, 0.5, d.path()).unwrap();
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    assert_eq!(a, b);
    assert!(a.iter().any(|(n, _)| n == "controls.csv"));
}

#[test]
fn empty_bundle_writes_a_passing_summary() {
    let mut c = config("axioms", INTERVAL);
    c.output.format = OutputFormat::Json;
    let dir = tempfile::tempdir().unwrap();
    let summary = emit_report(&ReportBundle::empty("axioms"), &c, 0.0, dir.path()).unwrap();
    assert!(summary.all_passed && summary.checks.is_empty());
    assert_eq!(summary.config_hash.len(), 64);
    assert_eq!(read_tree(dir.path()).len(), 1);
}

#[test]
fn config_hash_tracks_the_effective_config() {
    let c = config("qv-distribution", INTERVAL);
    let mut seeded = c.clone();
    seeded.apply_seed_override(Some("10")).unwrap();
    let h = gexp_cli::report::config_hash;
    assert_eq!(h(&c), h(&c.clone()));
    assert_ne!(h(&c), h(&seeded));
}

#[test]
fn binary_lists_experiments() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (id, _) in CATALOG {
        assert!(text.contains(id));
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, config("gnormal-moments", INTERVAL).to_json()).unwrap();
    let out_dir = dir.path().join("out");

    let ok = bin().args(["run", good.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]).status().unwrap();
    assert_eq!(ok.code(), Some(0));
    assert!(out_dir.join("good").join("summary.json").exists());

    // a 1% tolerance cannot hold on this grid
    let failing = dir.path().join("coarse.json");
    let mut coarse = config("gnormal-moments", INTERVAL);
    coarse.solver = Some(serde_json::from_str(r#"{"L": 4.0, "dx": 0.8, "dt": 0.1, "t": 1.0, "boundary": "clamp"}"#).unwrap());
    std::fs::write(&failing, coarse.to_json()).unwrap();
    let fail = bin().args(["run", failing.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]).status().unwrap();
    assert_eq!(fail.code(), Some(1));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"experiment_id\": 3\n}").unwrap();
    let out = bin().args(["run", broken.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2") && stderr.contains("experiment_id"), "{stderr}");
}

#[test]
fn seed_env_var_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qv.json");
    std::fs::write(&cfg, config("qv-distribution", INTERVAL).to_json()).unwrap();
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let status = bin()
            .env("GEXP_SEED", seed)
            .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--parallel", "1"])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("qv").join("summary.json")).unwrap()).unwrap();
        v
    };
    let (a, b) = (run("5", "a"), run("6", "b"));
    assert_eq!(a["seed"], 5);
    assert_eq!(b["seed"], 6);
    assert_ne!(a["checks"][0]["estimate"], b["checks"][0]["estimate"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
}
