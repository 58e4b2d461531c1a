#![no_main]

use holevo_core::cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

// One override per line, applied in order to the default config.
fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let mut config = ExperimentConfig::default();
    for line in text.lines() {
        if config.apply_override(line).is_err() {
            return;
        }
    }
    if config.validate().is_ok() {
        let again = ExperimentConfig::from_json_str(&config.to_json().to_string())
            .expect("serialized config parses");
        assert_eq!(again, config);
    }
});
