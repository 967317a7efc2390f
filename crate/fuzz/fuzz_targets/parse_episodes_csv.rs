#![no_main]

use libfuzzer_sys::fuzz_target;
use riskwarn::harness::{episodes_csv, parse_episodes_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(results) = parse_episodes_csv(text) {
        let written = episodes_csv(&results).unwrap();
        let _ = parse_episodes_csv(&written).unwrap();
    }
});
