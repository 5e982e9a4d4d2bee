#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::shadow::io::read_shadow_from;
use pecshadow::shadow::ShadowReader;

fuzz_target!(|data: &[u8]| {
    if let Ok(reader) = ShadowReader::new(data) {
        if let Ok(set) = read_shadow_from(reader) {
            assert_eq!(set.len() as u64, set.header().n_snapshots);
        }
    }
});
