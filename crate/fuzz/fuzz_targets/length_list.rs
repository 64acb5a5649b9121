#![no_main]

use libfuzzer_sys::fuzz_target;
use thermograph::experiments::{parse_number_list, parse_tmax};
use thermograph::graph::format::parse_length_list;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_length_list(s) {
        assert!(v.iter().all(|x| *x >= 0.0));
    }
    if let Ok(v) = parse_number_list(s) {
        assert!(v.iter().all(|x| x.is_finite()));
    }
    let _ = parse_tmax(s);
});
