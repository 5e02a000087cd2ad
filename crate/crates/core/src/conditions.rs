//! Order conditions for the explicit SRK class.
//!
//! `W1..W50` are the weak order one (`W1..W7`) and order two (`W8..W50`)
//! conditions. `D3A`/`D3B` are the classical deterministic order three
//! conditions, `D4A`/`D4B`/`D4C` deterministic order four conditions, and
//! `T1`/`T2` two stochastic order three tree conditions used to pick optimal
//! coefficients. Every condition is a short expression over the helpers in
//! [`crate::linalg`]; residuals are `lhs - rhs`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dot, hadamard, matvec, ones, pow, sum, Matrix};
use crate::tableau::{CoefficientTableau, OrderClaim};

/// Default residual tolerance for tableaux with irrational entries.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

macro_rules! condition_ids {
    ($($id:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum ConditionId { $($id),* }

        impl ConditionId {
            pub const ALL: &'static [ConditionId] = &[$(ConditionId::$id),*];

            pub fn as_str(&self) -> &'static str {
                match self { $(ConditionId::$id => stringify!($id)),* }
            }
        }
    };
}

condition_ids!(
    W1, W2, W3, W4, W5, W6, W7, W8, W9, W10, W11, W12, W13, W14, W15, W16, W17, W18, W19, W20,
    W21, W22, W23, W24, W25, W26, W27, W28, W29, W30, W31, W32, W33, W34, W35, W36, W37, W38,
    W39, W40, W41, W42, W43, W44, W45, W46, W47, W48, W49, W50, D3A, D3B, D4A, D4B, D4C, T1, T2,
);

impl ConditionId {
    /// Weak order conditions `W1..=W50` in order.
    pub fn weak() -> &'static [ConditionId] {
        &Self::ALL[..50]
    }

    /// The order-one subset `W1..=W7`.
    pub fn weak_order_one() -> &'static [ConditionId] {
        &Self::ALL[..7]
    }

    /// Index `n` of `Wn`, if this is a weak condition.
    pub fn weak_index(&self) -> Option<usize> {
        let pos = Self::ALL.iter().position(|c| c == self)?;
        (pos < 50).then_some(pos + 1)
    }

    /// `Wn` for `n` in `1..=50`.
    pub fn w(n: usize) -> ConditionId {
        assert!((1..=50).contains(&n), "no weak condition W{n}");
        Self::ALL[n - 1]
    }

    pub fn definition(&self) -> &'static ConditionDef {
        &REGISTRY[Self::ALL.iter().position(|c| c == self).expect("registered")]
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown condition id {s:?}")))
    }
}

/// Precomputed quantities shared by the condition expressions.
pub struct Terms<'a> {
    t: &'a CoefficientTableau,
    e: Vec<f64>,
}

impl<'a> Terms<'a> {
    pub fn new(t: &'a CoefficientTableau) -> Self {
        Terms {
            e: ones(t.stages()),
            t,
        }
    }

    fn alpha(&self) -> &[f64] {
        self.t.alpha()
    }

    fn b1(&self) -> &[f64] {
        self.t.beta(1)
    }

    fn b2(&self) -> &[f64] {
        self.t.beta(2)
    }

    fn b3(&self) -> &[f64] {
        self.t.beta(3)
    }

    fn b4(&self) -> &[f64] {
        self.t.beta(4)
    }

    fn a(&self, q: usize) -> &Matrix {
        self.t.a(q)
    }

    fn b(&self, q: usize) -> &Matrix {
        self.t.b(q)
    }

    /// `A(q) e`
    fn ae(&self, q: usize) -> Vec<f64> {
        matvec(self.a(q), &self.e)
    }

    /// `B(q) e`
    fn be(&self, q: usize) -> Vec<f64> {
        matvec(self.b(q), &self.e)
    }
}

/// One registered order condition: `lhs(tableau) = rhs`.
pub struct ConditionDef {
    pub id: ConditionId,
    /// Human-readable left-hand side.
    pub expression: &'static str,
    pub rhs: f64,
    lhs: fn(&Terms) -> f64,
}

impl ConditionDef {
    pub fn lhs(&self, terms: &Terms) -> f64 {
        (self.lhs)(terms)
    }
}

use ConditionId::*;

macro_rules! def {
    ($id:ident, $expr:literal, $rhs:expr, $lhs:expr) => {
        ConditionDef {
            id: $id,
            expression: $expr,
            rhs: $rhs,
            lhs: $lhs,
        }
    };
}

static REGISTRY: [ConditionDef; 57] = [
    def!(W1, "alpha^T e", 1.0, |x| sum(x.alpha())),
    def!(W2, "beta4^T e", 0.0, |x| sum(x.b4())),
    def!(W3, "beta3^T e", 0.0, |x| sum(x.b3())),
    def!(W4, "(beta1^T e)^2", 1.0, |x| sum(x.b1()).powi(2)),
    def!(W5, "beta2^T e", 0.0, |x| sum(x.b2())),
    def!(W6, "beta1^T B1 e", 0.0, |x| dot(x.b1(), &x.be(1))),
    def!(W7, "beta3^T B2 e", 0.0, |x| dot(x.b3(), &x.be(2))),
    def!(W8, "alpha^T A0 e", 0.5, |x| dot(x.alpha(), &x.ae(0))),
    def!(W9, "alpha^T (B0 e)^2", 0.5, |x| dot(x.alpha(), &pow(&x.be(0), 2))),
    def!(W10, "(beta1^T e)(alpha^T B0 e)", 0.5, |x| sum(x.b1())
        * dot(x.alpha(), &x.be(0))),
    def!(W11, "(beta1^T e)(beta1^T A1 e)", 0.5, |x| sum(x.b1())
        * dot(x.b1(), &x.ae(1))),
    def!(W12, "beta3^T A2 e", 0.0, |x| dot(x.b3(), &x.ae(2))),
    def!(W13, "beta2^T B1 e", 1.0, |x| dot(x.b2(), &x.be(1))),
    def!(W14, "beta4^T B2 e", 1.0, |x| dot(x.b4(), &x.be(2))),
    def!(W15, "(beta1^T e)(beta1^T (B1 e)^2)", 0.5, |x| sum(x.b1())
        * dot(x.b1(), &pow(&x.be(1), 2))),
    def!(W16, "(beta1^T e)(beta3^T (B2 e)^2)", 0.5, |x| sum(x.b1())
        * dot(x.b3(), &pow(&x.be(2), 2))),
    def!(W17, "beta1^T (B1 (B1 e))", 0.0, |x| dot(x.b1(), &matvec(x.b(1), &x.be(1)))),
    def!(W18, "beta3^T (B2 (B1 e))", 0.0, |x| dot(x.b3(), &matvec(x.b(2), &x.be(1)))),
    def!(W19, "beta3^T (A2 (B0 e))", 0.0, |x| dot(x.b3(), &matvec(x.a(2), &x.be(0)))),
    def!(W20, "beta1^T (A1 (B0 e))", 0.0, |x| dot(x.b1(), &matvec(x.a(1), &x.be(0)))),
    def!(W21, "alpha^T (B0 (B1 e))", 0.0, |x| dot(x.alpha(), &matvec(x.b(0), &x.be(1)))),
    def!(W22, "beta2^T A1 e", 0.0, |x| dot(x.b2(), &x.ae(1))),
    def!(W23, "beta4^T A2 e", 0.0, |x| dot(x.b4(), &x.ae(2))),
    def!(W24, "beta1^T ((A1 e)(B1 e))", 0.0, |x| dot(
        x.b1(),
        &hadamard(&x.ae(1), &x.be(1))
    )),
    def!(W25, "beta3^T ((A2 e)(B2 e))", 0.0, |x| dot(
        x.b3(),
        &hadamard(&x.ae(2), &x.be(2))
    )),
    def!(W26, "beta4^T (A2 (B0 e))", 0.0, |x| dot(x.b4(), &matvec(x.a(2), &x.be(0)))),
    def!(W27, "beta2^T (A1 (B0 e))", 0.0, |x| dot(x.b2(), &matvec(x.a(1), &x.be(0)))),
    def!(W28, "beta2^T (A1 (B0 e)^2)", 0.0, |x| dot(
        x.b2(),
        &matvec(x.a(1), &pow(&x.be(0), 2))
    )),
    def!(W29, "beta4^T (A2 (B0 e)^2)", 0.0, |x| dot(
        x.b4(),
        &matvec(x.a(2), &pow(&x.be(0), 2))
    )),
    def!(W30, "beta3^T (B2 (A1 e))", 0.0, |x| dot(x.b3(), &matvec(x.b(2), &x.ae(1)))),
    def!(W31, "beta1^T (B1 (A1 e))", 0.0, |x| dot(x.b1(), &matvec(x.b(1), &x.ae(1)))),
    def!(W32, "beta2^T (B1 e)^2", 0.0, |x| dot(x.b2(), &pow(&x.be(1), 2))),
    def!(W33, "beta4^T (B2 e)^2", 0.0, |x| dot(x.b4(), &pow(&x.be(2), 2))),
    def!(W34, "beta4^T (B2 (B1 e))", 0.0, |x| dot(x.b4(), &matvec(x.b(2), &x.be(1)))),
    def!(W35, "beta2^T (B1 (B1 e))", 0.0, |x| dot(x.b2(), &matvec(x.b(1), &x.be(1)))),
    def!(W36, "beta1^T (B1 e)^3", 0.0, |x| dot(x.b1(), &pow(&x.be(1), 3))),
    def!(W37, "beta3^T (B2 e)^3", 0.0, |x| dot(x.b3(), &pow(&x.be(2), 3))),
    def!(W38, "beta1^T (B1 (B1 e)^2)", 0.0, |x| dot(
        x.b1(),
        &matvec(x.b(1), &pow(&x.be(1), 2))
    )),
    def!(W39, "beta3^T (B2 (B1 e)^2)", 0.0, |x| dot(
        x.b3(),
        &matvec(x.b(2), &pow(&x.be(1), 2))
    )),
    def!(W40, "alpha^T ((B0 e)(B0 (B1 e)))", 0.0, |x| dot(
        x.alpha(),
        &hadamard(&x.be(0), &matvec(x.b(0), &x.be(1)))
    )),
    def!(W41, "beta1^T ((A1 (B0 e))(B1 e))", 0.0, |x| dot(
        x.b1(),
        &hadamard(&matvec(x.a(1), &x.be(0)), &x.be(1))
    )),
    def!(W42, "beta3^T ((A2 (B0 e))(B2 e))", 0.0, |x| dot(
        x.b3(),
        &hadamard(&matvec(x.a(2), &x.be(0)), &x.be(2))
    )),
    def!(W43, "beta1^T (A1 (B0 (B1 e)))", 0.0, |x| dot(
        x.b1(),
        &matvec(x.a(1), &matvec(x.b(0), &x.be(1)))
    )),
    def!(W44, "beta3^T (A2 (B0 (B1 e)))", 0.0, |x| dot(
        x.b3(),
        &matvec(x.a(2), &matvec(x.b(0), &x.be(1)))
    )),
    def!(W45, "beta1^T (B1 (A1 (B0 e)))", 0.0, |x| dot(
        x.b1(),
        &matvec(x.b(1), &matvec(x.a(1), &x.be(0)))
    )),
    def!(W46, "beta3^T (B2 (A1 (B0 e)))", 0.0, |x| dot(
        x.b3(),
        &matvec(x.b(2), &matvec(x.a(1), &x.be(0)))
    )),
    def!(W47, "beta1^T ((B1 e)(B1 (B1 e)))", 0.0, |x| dot(
        x.b1(),
        &hadamard(&x.be(1), &matvec(x.b(1), &x.be(1)))
    )),
    def!(W48, "beta3^T ((B2 e)(B2 (B1 e)))", 0.0, |x| dot(
        x.b3(),
        &hadamard(&x.be(2), &matvec(x.b(2), &x.be(1)))
    )),
    def!(W49, "beta1^T (B1 (B1 (B1 e)))", 0.0, |x| dot(
        x.b1(),
        &matvec(x.b(1), &matvec(x.b(1), &x.be(1)))
    )),
    def!(W50, "beta3^T (B2 (B1 (B1 e)))", 0.0, |x| dot(
        x.b3(),
        &matvec(x.b(2), &matvec(x.b(1), &x.be(1)))
    )),
    def!(D3A, "alpha^T (A0 e)^2", 1.0 / 3.0, |x| dot(x.alpha(), &pow(&x.ae(0), 2))),
    def!(D3B, "alpha^T (A0 (A0 e))", 1.0 / 6.0, |x| dot(
        x.alpha(),
        &matvec(x.a(0), &x.ae(0))
    )),
    def!(D4A, "alpha^T (A0 (A0 e)^2)", 1.0 / 12.0, |x| dot(
        x.alpha(),
        &matvec(x.a(0), &pow(&x.ae(0), 2))
    )),
    def!(D4B, "alpha^T ((A0 e)(A0 (A0 e)))", 1.0 / 8.0, |x| dot(
        x.alpha(),
        &hadamard(&x.ae(0), &matvec(x.a(0), &x.ae(0)))
    )),
    def!(D4C, "alpha^T (A0 e)^3", 0.25, |x| dot(x.alpha(), &pow(&x.ae(0), 3))),
    def!(T1, "beta2^T ((A1 e)(B1 e)) (beta1^T e)^2", 2.0 / 3.0, |x| dot(
        x.b2(),
        &hadamard(&x.ae(1), &x.be(1))
    ) * sum(x.b1()).powi(2)),
    def!(T2, "(beta1^T e)(beta3^T (B2 e)^4)", 1.0, |x| sum(x.b1())
        * dot(x.b3(), &pow(&x.be(2), 4))),
];

/// Residual `lhs - rhs` of one condition.
pub fn evaluate(t: &CoefficientTableau, id: ConditionId) -> f64 {
    let def = id.definition();
    def.lhs(&Terms::new(t)) - def.rhs
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub residuals: BTreeMap<ConditionId, f64>,
    pub satisfied: BTreeMap<ConditionId, bool>,
    pub inferred: OrderClaim,
}

/// Evaluates every registered condition and infers `(p_D, p_S)`.
///
/// `p_S` is 2 when `W1..W50` hold, 1 when `W1..W7` hold, else 0. `p_D` only
/// looks at conditions in `alpha` and `A0`: 3 for `{W1, W8, D3A, D3B}`, 2
/// for `{W1, W8}`, 1 for `{W1}`. The order four conditions are reported but
/// never raise `p_D` above 3.
pub fn evaluate_all(t: &CoefficientTableau, tol: f64) -> Result<ConditionReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let terms = Terms::new(t);
    let residuals: BTreeMap<_, _> = REGISTRY
        .iter()
        .map(|d| (d.id, d.lhs(&terms) - d.rhs))
        .collect();
    let satisfied: BTreeMap<_, _> = residuals
        .iter()
        .map(|(&id, r)| (id, r.abs() <= tol))
        .collect();
    let all = |ids: &[ConditionId]| ids.iter().all(|id| satisfied[id]);

    let stochastic = if all(ConditionId::weak()) {
        2
    } else if all(ConditionId::weak_order_one()) {
        1
    } else {
        0
    };
    let deterministic = if all(&[W1, W8, D3A, D3B]) {
        3
    } else if all(&[W1, W8]) {
        2
    } else if all(&[W1]) {
        1
    } else {
        0
    };
    Ok(ConditionReport {
        tolerance: tol,
        residuals,
        satisfied,
        inferred: OrderClaim {
            deterministic,
            stochastic,
        },
    })
}

impl ConditionReport {
    pub fn is_satisfied(&self, id: ConditionId) -> bool {
        self.satisfied[&id]
    }

    pub fn residual(&self, id: ConditionId) -> f64 {
        self.residuals[&id]
    }

    /// Ids among `ids` that fail at the report tolerance.
    pub fn failing<'a>(&'a self, ids: &'a [ConditionId]) -> impl Iterator<Item = ConditionId> + 'a {
        ids.iter().copied().filter(|id| !self.satisfied[id])
    }

    pub fn to_text_table(&self) -> String {
        let mut out = format!("{:<5} {:>24}  {}\n", "id", "residual", "status");
        for (id, r) in &self.residuals {
            let status = if self.satisfied[id] { "pass" } else { "FAIL" };
            out.push_str(&format!("{:<5} {:>24.16e}  {}\n", id.as_str(), r, status));
        }
        out.push_str(&format!(
            "inferred (p_D,p_S) = {} at tol {:e}\n",
            self.inferred, self.tolerance
        ));
        out
    }

    /// CSV with header `id,residual,satisfied`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,residual,satisfied\n");
        for (id, r) in &self.residuals {
            out.push_str(&format!("{},{:e},{}\n", id.as_str(), r, self.satisfied[id]));
        }
        out
    }
}
