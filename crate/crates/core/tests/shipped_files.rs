use std::path::PathBuf;

use riskwarn::harness::{calibrate_threshold, threshold_grid};
use riskwarn::personalization::{ModelParameters, DEFAULT_THETA};
use riskwarn::scenarios::{builtin_file, ScenarioCatalog, ScenarioFile, ScenarioName};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn scenario_files_match_builtin_set() {
    for name in ScenarioName::ALL {
        let path = repo_root().join("scenarios").join(format!("{name}.toml"));
        let text = std::fs::read_to_string(&path).unwrap();
        let file = ScenarioFile::from_toml_str(&text).unwrap();
        assert_eq!(file, builtin_file(name), "{}", path.display());
    }
    let from_dir = ScenarioCatalog::from_dir(&repo_root().join("scenarios")).unwrap();
    let builtin = ScenarioCatalog::builtin();
    assert_eq!(from_dir.len(), 18);
    for (a, b) in from_dir.iter().zip(builtin.iter()) {
        assert_eq!(a, b);
    }
}

#[test]
fn default_parameter_file_matches_defaults() {
    let p = ModelParameters::load(&repo_root().join("params/default.toml")).unwrap();
    assert_eq!(p, ModelParameters::default());
}

#[test]
fn default_threshold_is_the_calibrated_grid_point() {
    assert_eq!(DEFAULT_THETA, threshold_grid()[58]);
    let c = calibrate_threshold(&ScenarioCatalog::builtin(), &ModelParameters::default()).unwrap();
    assert_eq!(c.theta, DEFAULT_THETA);
    assert!(c.defensive_peak < c.theta);
    assert!(c.confident_fp < c.baseline_fp);
}
