#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_core::estimator::Scheme;
use srk_core::families::{FamilyId, NamedScheme};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = text.parse::<NamedScheme>();
    let _ = text.parse::<FamilyId>();
    if let Ok(s) = text.parse::<Scheme>() {
        let _ = s.name();
    }
});
