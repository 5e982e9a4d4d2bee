use std::fs;

use pecshadow::estimators::{estimate_pauli, estimate_pauli_lightcone, MomConfig};
use pecshadow::noise::{GateNoise, NoiseSpec};
use pecshadow::shadow::{read_shadow, write_shadow, ShadowSampler};
use pecshadow::{Circuit, Error, GateKind, PauliString};

fn sampled() -> (Circuit, pecshadow::shadow::ShadowSet) {
    let c = Circuit::new(3)
        .with(GateKind::H, &[0])
        .with(GateKind::Cnot, &[0, 1])
        .with(GateKind::Ry(0.2), &[2]);
    let noise = NoiseSpec::uniform(&c, GateNoise::biased_pauli(0.05, 0.9), false);
    let set = ShadowSampler::pec(&c, &noise, 1).unwrap().sample_set(5000);
    (c, set)
}

#[test]
fn round_trip_preserves_estimates() {
    let (c, set) = sampled();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    write_shadow(&set, &path).unwrap();
    let back = read_shadow(&path).unwrap();
    assert_eq!(back.header(), set.header());
    assert_eq!(back.len(), set.len());
    let cfg = MomConfig::new(5).unwrap();
    let p = PauliString::parse("X0 X1", 3).unwrap();
    assert_eq!(estimate_pauli(&back, &p, &cfg).unwrap(), estimate_pauli(&set, &p, &cfg).unwrap());
    assert_eq!(
        estimate_pauli_lightcone(&back, &p, &c, &cfg).unwrap(),
        estimate_pauli_lightcone(&set, &p, &c, &cfg).unwrap()
    );
}

#[test]
fn damaged_files_are_rejected() {
    let (_, set) = sampled();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    write_shadow(&set, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    // truncated: trailer missing
    let cut = dir.path().join("cut.jsonl");
    fs::write(&cut, lines[..lines.len() - 1].join("\n") + "\n").unwrap();
    assert!(matches!(read_shadow(&cut), Err(Error::Checksum)));

    // one record dropped
    let mut dropped = lines.clone();
    dropped.remove(10);
    let p = dir.path().join("dropped.jsonl");
    fs::write(&p, dropped.join("\n") + "\n").unwrap();
    assert!(matches!(read_shadow(&p), Err(Error::Checksum)));

    // unknown format version
    let p = dir.path().join("version.jsonl");
    fs::write(&p, text.replacen("pecshadow/1", "pecshadow/9", 1)).unwrap();
    assert!(matches!(read_shadow(&p), Err(Error::Version(_))));

    // trailing garbage
    let p = dir.path().join("garbage.jsonl");
    fs::write(&p, text.clone() + "{}\n").unwrap();
    assert!(read_shadow(&p).is_err());
}
