use std::fs;

use pecshadow::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"{
    "experiment": "all-local-paulis",
    "name": "det",
    "hamiltonian": {"kind": "spin-ring", "n_qubits": 4, "seed": 3},
    "layers": 2,
    "noise": {"p_mean": 0.01, "seed": 5},
    "readout_alpha": 0.01,
    "schedule": [200, 2000],
    "locality": 2,
    "seed": 42
}"#;

fn run_in_pool(threads: usize) -> (Vec<u8>, serde_json::Value) {
    let cfg = ExperimentConfig::from_json_str(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let out = pool.install(|| run_experiment(&cfg, dir.path())).unwrap();
    let csv = fs::read(&out.csv_path).unwrap();
    let mut manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out.manifest_path).unwrap()).unwrap();
    manifest.as_object_mut().unwrap().remove("created_unix");
    (csv, manifest)
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let (a, ma) = run_in_pool(1);
    let (b, mb) = run_in_pool(1);
    let (c, mc) = run_in_pool(3);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(ma, mb);
    assert_eq!(ma, mc);
    assert!(String::from_utf8(a).unwrap().lines().count() > 100);
}

#[test]
fn seed_changes_the_output() {
    let mut cfg = ExperimentConfig::from_json_str(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(run_experiment(&cfg, dir.path()).unwrap().csv_path).unwrap();
    cfg.seed = 43;
    let b = fs::read(run_experiment(&cfg, dir.path()).unwrap().csv_path).unwrap();
    assert_ne!(a, b);
}
