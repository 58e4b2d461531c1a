#![no_main]

use holevo_core::cli::parse_angle;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let token = String::from_utf8_lossy(data);
    if let Ok(v) = parse_angle(&token) {
        assert!(v.is_finite());
    }
});
