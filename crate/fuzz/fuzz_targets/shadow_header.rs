#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::shadow::io::parse_header_line;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(h) = parse_header_line(s) {
            let line = serde_json::to_string(&h).unwrap();
            assert_eq!(parse_header_line(&line).expect("round trip"), h);
        }
    }
});
