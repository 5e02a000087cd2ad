#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_core::tableau::CoefficientTableau;

// Anything that parses must serialize and parse back to the same tableau.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(t) = CoefficientTableau::from_json(text) else { return };
    let json = t.to_json().expect("parsed tableau serializes");
    let back = CoefficientTableau::from_json(&json).expect("serialized tableau parses");
    assert_eq!(back, t);
});
