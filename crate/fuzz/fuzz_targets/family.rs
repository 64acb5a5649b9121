#![no_main]

use libfuzzer_sys::fuzz_target;
use thermograph::graph::{parse_family, standard_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_family(s) {
        assert_eq!(parse_family(&f.to_string()).expect("display parses"), f);
        let _ = standard_graph(&f);
    }
});
