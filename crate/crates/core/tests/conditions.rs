mod common;

use common::admissible_members;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srk_core::conditions::{evaluate, evaluate_all, ConditionId};
use srk_core::families::{named_scheme, FamilyId, NamedScheme};
use srk_core::tableau::CoefficientTableau;

#[test]
fn rational_tableau_residuals_are_tiny() {
    // PL1WM has c3 = c4 = 1, so every entry is a dyadic rational
    let t = named_scheme(NamedScheme::Pl1wm);
    for &id in ConditionId::weak() {
        assert!(evaluate(&t, id).abs() <= 1e-13, "{id}: {:e}", evaluate(&t, id));
    }
    let em = named_scheme(NamedScheme::Em);
    for &id in ConditionId::weak_order_one() {
        assert_eq!(evaluate(&em, id), 0.0, "{id}");
    }
}

#[test]
fn perturbing_rdi2wm_breaks_a_weak_condition() {
    let base = named_scheme(NamedScheme::Rdi2wm);
    let mut checked = 0;
    for (which, v) in base.coefficients() {
        if v == 0.0 {
            continue;
        }
        let mut t = base.clone();
        t.set_coefficient(which, v + 1e-3);
        let worst = ConditionId::weak()
            .iter()
            .map(|&id| evaluate(&t, id).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-4, "{which:?}: max residual {worst:e}");
        checked += 1;
    }
    assert!(checked >= 15, "{checked}");
}

#[test]
fn inferred_orders_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tableaux: Vec<CoefficientTableau> = NamedScheme::ALL.iter().map(|&s| named_scheme(s)).collect();
    for fam in FamilyId::ALL {
        tableaux.extend(admissible_members(fam, 20, 99).into_iter().map(|(_, t)| t));
    }
    // random perturbations land in every order class
    for _ in 0..200 {
        let mut t = named_scheme(NamedScheme::Rdi3wm);
        let coeffs = t.coefficients();
        let (which, v) = coeffs[rng.random_range(0..coeffs.len())];
        t.set_coefficient(which, v + rng.random_range(-0.5..0.5));
        tableaux.push(t);
    }
    for t in &tableaux {
        let r = evaluate_all(t, 1e-9).unwrap();
        let (pd, ps) = (r.inferred.deterministic, r.inferred.stochastic);
        assert!(pd >= ps, "p_D = {pd} < p_S = {ps}");
        if ps == 2 {
            assert!(ConditionId::weak().iter().all(|&id| r.is_satisfied(id)));
        }
        if ps >= 1 {
            assert!(ConditionId::weak_order_one().iter().all(|&id| r.is_satisfied(id)));
        }
        if pd == 3 {
            assert!([ConditionId::D3A, ConditionId::D3B, ConditionId::W8].iter().all(|&id| r.is_satisfied(id)));
        }
    }
}

#[test]
fn report_formats() {
    let r = evaluate_all(&named_scheme(NamedScheme::Rdi2wm), 1e-12).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,residual,satisfied"));
    assert_eq!(lines.count(), 57);
    let text = r.to_text_table();
    assert!(text.contains("W50"));
    assert!(text.contains("(2,2)"));
    assert!(evaluate_all(&named_scheme(NamedScheme::Em), 0.0).is_err());
}
