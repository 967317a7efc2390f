#![no_main]

use libfuzzer_sys::fuzz_target;
use riskwarn::scenarios::ScenarioFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = ScenarioFile::from_toml_str(text) {
        let _ = file.compile();
    }
});
