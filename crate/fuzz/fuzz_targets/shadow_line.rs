#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::shadow::io::parse_snapshot_line;
use pecshadow::shadow::{ShadowHeader, ShadowMode};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let mut pec = ShadowHeader::new(3, ShadowMode::Pec);
    pec.gate_norms = vec![1.1, 1.0, 1.3];
    pec.g_norm = 1.43;
    pec.gate_log = true;
    for h in [pec, ShadowHeader::new(3, ShadowMode::Conventional)] {
        if let Ok(snap) = parse_snapshot_line(s, &h) {
            assert_eq!(snap.n_qubits(), 3);
            assert!(snap.validate(&h).is_ok());
        }
    }
});
