#![no_main]

use libfuzzer_sys::fuzz_target;
use srk_core::problems::problem_by_name;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = problem_by_name(text) {
        let _ = p.exact(p.t_eval);
        let _ = (p.f)(&p.problem.x0);
    }
});
