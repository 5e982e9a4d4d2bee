//! The checked-in fuzz seeds are valid inputs for their parsers.

use std::fs;
use std::path::PathBuf;

use pecshadow::experiment::ExperimentConfig;
use pecshadow::noise::NoiseSpec;
use pecshadow::shadow::io::{parse_header_line, read_shadow_from};
use pecshadow::shadow::ShadowReader;
use pecshadow::{Circuit, PauliString};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn text_and_json_seeds_parse() {
    for (p, b) in seeds("pauli_string") {
        let n = (b[0] % 64) as usize + 1;
        PauliString::parse(text(&b[1..]), n).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("circuit_json") {
        Circuit::from_json_str(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("noise_spec_json") {
        NoiseSpec::from_json_str(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("experiment_config") {
        ExperimentConfig::from_json_str(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn shadow_seeds_parse() {
    for (p, b) in seeds("shadow_header") {
        parse_header_line(text(&b).trim_end()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("shadow_file") {
        let set = read_shadow_from(ShadowReader::new(&b[..]).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(!set.is_empty());
    }
    assert_eq!(seeds("shadow_line").len(), 2);
}
