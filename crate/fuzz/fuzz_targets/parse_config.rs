#![no_main]

use holevo_core::cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ExperimentConfig::from_json_str(text) {
        let _ = config.validate();
        let again = ExperimentConfig::from_json_str(&config.to_json().to_string())
            .expect("serialized config parses");
        assert_eq!(again, config);
    }
});
