use std::path::Path;
use std::process::{Command, Output};

use ftflow_cli::{dispatch, load_config, RunConfig, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};
use ftflow_core::circuit::render_circuit;
use ftflow_core::synth::random_circuit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("ftflow").chain(args.iter().copied()))
}

fn bin(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ftflow"));
    cmd.args(args).env_remove("FTFLOW_CATALOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transpile_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed as usize % 4);
        let gc = random_circuit(&mut rng, n, 25);
        let qc = dir.path().join(format!("c{seed}.qc"));
        let js = dir.path().join(format!("c{seed}.json"));
        std::fs::write(&qc, render_circuit(&gc)).unwrap();
        assert_eq!(run(&["transpile", s(&qc), "-o", s(&js)]), EXIT_OK);
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
        assert_eq!(doc["metrics"]["t_count"], gc.t_count());
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(run(&["verify", s(&qc), s(&js)]), EXIT_OK);
    }
}

#[test]
fn verify_rejects_mismatched_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, js) = (dir.path().join("a.qc"), dir.path().join("b.qc"), dir.path().join("a.json"));
    std::fs::write(&a, "qubits 1\nh 0\nt 0\n").unwrap();
    std::fs::write(&b, "qubits 1\nt 0\nh 0\n").unwrap();
    assert_eq!(run(&["transpile", s(&a), "-o", s(&js)]), EXIT_OK);
    assert_eq!(run(&["verify", s(&b), s(&js)]), EXIT_VERIFY_FAILED);
}

#[test]
fn optimize_outputs_valid_layering() {
    let dir = tempfile::tempdir().unwrap();
    let (qc, js) = (dir.path().join("c.qc"), dir.path().join("c.json"));
    let gc = random_circuit(&mut ChaCha8Rng::seed_from_u64(5), 3, 60);
    std::fs::write(&qc, render_circuit(&gc)).unwrap();
    assert_eq!(run(&["transpile", s(&qc), "-o", s(&js)]), EXIT_OK);
    for method in ["greedy", "ga"] {
        let out = bin(&["optimize", s(&js), "--method", method, "--seed", "3", "-o", "-"], &[]);
        let doc = json_stdout(&out);
        let layering: ftflow_core::Layering = serde_json::from_value(doc["layering"].clone()).unwrap();
        assert_eq!(layering.rotations().len(), gc.t_count());
        assert_eq!(doc["report"]["final_t_depth"], layering.depth());
        // Deterministic for a fixed seed.
        assert_eq!(json_stdout(&bin(&["optimize", s(&js), "--method", method, "--seed", "3", "-o", "-"], &[])), doc);
    }
}

#[test]
fn schedule_dp_default_catalog() {
    let doc = json_stdout(&bin(&["schedule", "--algo", "dp", "-M", "4", "-o", "-"], &[]));
    assert_eq!(doc["schedule"]["rounds"], serde_json::json!(["20-to-4"]));
    assert_eq!(doc["schedule"]["metrics"]["tile_time"], 238);
}

#[test]
fn schedule_catalog_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("cat.toml");
    std::fs::write(
        &cat,
        "[[protocol]]\nname = \"solo\"\ntiles = 3\nsteps = 5\noutputs = 2\nraw_inputs = 4\nerror_coeff = 1.0\nerror_exp = 2\n",
    )
    .unwrap();
    let doc = json_stdout(&bin(&["schedule", "--algo", "brute", "-M", "3", "-o", "-"], &[("FTFLOW_CATALOG", &cat)]));
    assert_eq!(doc["schedule"]["rounds"], serde_json::json!(["solo", "solo"]));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&["schedule", "--algo", "brute", "-M", "40"]), EXIT_INFEASIBLE);
    assert_eq!(run(&["schedule", "--algo", "dp", "-M", "9", "-L", "2"]), EXIT_INFEASIBLE);
    assert_eq!(run(&["verify", "/nonexistent.qc", "/nonexistent.json"]), EXIT_USAGE);
    assert_eq!(run(&["decode", "--code", "rep3", "--p", "0.1", "--shots", "1000"]), EXIT_OK);
    let out = bin(&["schedule"], &[]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn decode_and_estimate_json() {
    let a = json_stdout(&bin(&["decode", "--code", "rep3", "--p", "0.1", "--shots", "30000", "--seed", "9", "--workers", "1", "-o", "-"], &[]));
    let b = json_stdout(&bin(&["decode", "--code", "rep3", "--p", "0.1", "--shots", "30000", "--seed", "9", "--workers", "4", "-o", "-"], &[]));
    assert_eq!(a, b);
    assert_eq!(a["result"]["counts"]["success"].as_u64().unwrap() + a["result"]["counts"]["logical_error"].as_u64().unwrap(), 30000);
    let e = json_stdout(&bin(&["estimate", "--t-count", "1000000", "--t-depth", "1000000", "--distance", "27", "-o", "-"], &[]));
    assert_eq!(e["physical_qubits"], 1457);
    assert_eq!(e["recommendation"]["protocol"], "15-to-1");
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    assert_eq!(load_config(&write("empty.toml", "")).unwrap(), RunConfig::default());
    assert_eq!(load_config(&write("seed.toml", "seed = 42\n")).unwrap().seed, 42);
    assert!(load_config(&write("elite.toml", "elite_k = -1\n")).is_err());
    let err = load_config(&write("unknown.toml", "seed = 1\n\ncolour = \"red\"\n")).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
    let err = load_config(&write("syntax.toml", "seed = 1\nbeta = \n")).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");

    // Flags override file values.
    let cfg = load_config(&write("ga.toml", "seed = 7\npopulation_size = 12\nbeta = 0.25\n")).unwrap();
    let ga = cfg.ga_config(Some(99), None).unwrap();
    assert_eq!((ga.seed, ga.population_size, ga.beta), (99, 12, 0.25));
    let path = write("latency.toml", "objective = \"latency\"\n");
    let doc = json_stdout(&bin(&["schedule", "--config", s(&path), "-M", "4", "-o", "-"], &[]));
    assert_eq!(doc["objective"]["kind"], "latency");
}
