#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_cli::parse_step_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(hs) = parse_step_list(text) {
        assert!(hs.iter().all(|h| *h > 0.0 && h.is_finite()));
    }
});
