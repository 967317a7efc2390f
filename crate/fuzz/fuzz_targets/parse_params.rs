#![no_main]

use libfuzzer_sys::fuzz_target;
use riskwarn::personalization::ModelParameters;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ModelParameters::from_toml_str(text) {
        if p.validate().is_ok() {
            let again = ModelParameters::from_toml_str(&p.to_toml_string()).unwrap();
            assert_eq!(again.to_toml_string(), p.to_toml_string());
        }
    }
});
