#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_core::conditions::{evaluate_all, DEFAULT_TOLERANCE};
use srk_core::tableau::CoefficientTableau;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CoefficientTableau::from_json(text) {
        let _ = evaluate_all(&t, DEFAULT_TOLERANCE);
    }
});
