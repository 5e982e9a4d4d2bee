#![no_main]

use libfuzzer_sys::fuzz_target;
use pecshadow::PauliString;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let n = (n % 64) as usize + 1;
    if let Ok(s) = std::str::from_utf8(rest) {
        if let Ok(p) = PauliString::parse(s, n) {
            let back = PauliString::parse(&p.to_string(), n).expect("display output parses");
            assert_eq!(back, p);
            let sparse = PauliString::parse(&p.sparse_label(), n).expect("sparse label parses");
            assert_eq!(sparse, p.unsigned());
        }
    }
});
