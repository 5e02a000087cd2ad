#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srk_core::error::Error;
use srk_core::families::{make_family, Branch, FamilyId, FamilyParams, Param};
use srk_core::integrator::SdeProblem;
use srk_core::tableau::CoefficientTableau;

/// Entries beyond this size come from draws close to an excluded set,
/// where the tableau is too ill-conditioned for a 1e-9 residual check.
pub const ENTRY_CAP: f64 = 20.0;

pub fn max_entry(t: &CoefficientTableau) -> f64 {
    t.coefficients().iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
}

/// A uniform draw on [-2, 2] for every free parameter of `family`.
pub fn random_params(family: FamilyId, rng: &mut ChaCha8Rng) -> FamilyParams {
    let mut p = FamilyParams::new(family).c1(if rng.random::<bool>() { 1.0 } else { -1.0 });
    for param in family.parameters() {
        p = match *param {
            Param::C(i) => p.c(i, rng.random_range(-2.0..2.0)),
            Param::Lambda => p.lambda(rng.random_range(-2.0..2.0)),
            Param::Branch => p.branch(if rng.random::<bool>() { Branch::Upper } else { Branch::Lower }),
        };
    }
    if family == FamilyId::Ord21 {
        // c4·c10 = 0 and c6·c11 = 0 hold structurally
        let (z1, z2) = (if rng.random::<bool>() { 4 } else { 10 }, if rng.random::<bool>() { 6 } else { 11 });
        p = p.c(z1, 0.0).c(z2, 0.0);
    }
    p
}

/// `count` admissible members of `family` with bounded entries, from a
/// fixed seed. Rejected draws must fail with a named constraint.
pub fn admissible_members(family: FamilyId, count: usize, seed: u64) -> Vec<(FamilyParams, CoefficientTableau)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 200 * count, "{family}: too few admissible draws");
        let p = random_params(family, &mut rng);
        match make_family(&p) {
            Ok(t) if max_entry(&t) <= ENTRY_CAP => out.push((p, t)),
            Ok(_) => {}
            Err(Error::ConstraintViolation { .. }) => {}
            Err(e) => panic!("{family}: unexpected error {e} for {p:?}"),
        }
    }
    out
}

/// Call counters shared with an instrumented problem.
#[derive(Debug, Default)]
pub struct Counters {
    pub drift: AtomicUsize,
    pub diffusion: AtomicUsize,
}

impl Counters {
    pub fn take(&self) -> (usize, usize) {
        (self.drift.swap(0, Ordering::SeqCst), self.diffusion.swap(0, Ordering::SeqCst))
    }
}

/// A nonlinear d = 2 problem with m noise columns whose drift and diffusion
/// calls are counted.
pub fn instrumented_problem(m: usize) -> (SdeProblem, Arc<Counters>) {
    let counters = Arc::new(Counters::default());
    let (c1, c2) = (counters.clone(), counters.clone());
    let p = SdeProblem::new(
        m,
        vec![0.3, -0.2],
        0.0,
        1.0,
        move |t, x, out| {
            c1.drift.fetch_add(1, Ordering::SeqCst);
            out[0] = x[1].sin() + t;
            out[1] = -x[0] * x[1];
        },
        move |_, x, j, out| {
            c2.diffusion.fetch_add(1, Ordering::SeqCst);
            let s = 1.0 + j as f64;
            out[0] = (s * x[0]).cos();
            out[1] = 0.5 * s * x[0] * x[1];
        },
    )
    .unwrap();
    (p, counters)
}

/// Ordinary least-squares slope of log2 |err| against log2 h.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    srk_core::fit_order(points).unwrap()
}
