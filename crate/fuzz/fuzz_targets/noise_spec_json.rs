#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::noise::NoiseSpec;
use pecshadow::{Circuit, GateKind};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = NoiseSpec::from_json_str(s) {
        let again = NoiseSpec::from_json_str(&spec.to_json_string()).expect("round trip");
        assert_eq!(again, spec);
        // resolution may reject the spec but must not panic
        let c = Circuit::new(2).with(GateKind::H, &[0]).with(GateKind::Cnot, &[0, 1]);
        let _ = spec.resolve(&c);
    }
});
