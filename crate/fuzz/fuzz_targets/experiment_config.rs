#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::experiment::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_json_str(s) {
            let again = ExperimentConfig::from_json_str(&cfg.to_json_string()).expect("round trip");
            assert_eq!(again.to_json_string(), cfg.to_json_string());
        }
    }
});
