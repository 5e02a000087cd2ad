#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_core::tableau::OrderClaim;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = text.parse::<OrderClaim>() {
        let back: OrderClaim = c.to_string().parse().expect("displayed claim parses");
        assert_eq!(back, c);
    }
});
