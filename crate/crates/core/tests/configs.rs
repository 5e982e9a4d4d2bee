//! The sample configs under `configs/` stay valid.

use std::fs;
use std::path::PathBuf;

use pecshadow::experiment::{prepare, run_rows, ExperimentConfig, ExperimentKind};

#[test]
fn shipped_configs_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_json_str(&fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(path.file_stem().unwrap().to_str().unwrap(), cfg.file_stem());
        if cfg.experiment != ExperimentKind::BudgetReport {
            prepare(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
        seen.push(cfg.experiment);
    }
    assert_eq!(seen.len(), 5);
}

#[test]
fn budget_report_headline() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = ExperimentConfig::from_json_str(&fs::read_to_string(dir.join("budget-report.json")).unwrap()).unwrap();
    let (rows, _) = run_rows(&cfg).unwrap();
    let get = |name: &str| rows.iter().find(|r| r.observable == name).unwrap().value;
    assert_eq!(get("M"), 5940.0);
    assert_eq!(get("K"), 125.0);
    assert!((get("shadow_norm_sq") - 30.4795).abs() < 1e-4);
}
