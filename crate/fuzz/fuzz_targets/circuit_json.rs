#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::Circuit;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = Circuit::from_json_str(s) {
            let again = Circuit::from_json_str(&c.to_json_string()).expect("round trip");
            assert_eq!(again, c);
        }
    }
});
