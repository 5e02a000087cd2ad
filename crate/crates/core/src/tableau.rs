//! Coefficient tableaux of explicit s-stage SRK methods.
//!
//! A tableau carries the drift weights `alpha`, the four diffusion weight
//! vectors `beta1..beta4`, and three pairs of strictly lower-triangular stage
//! matrices `A(q)`/`B(q)` for the drift stage (`q = 0`), the diagonal
//! diffusion stages (`q = 1`) and the cross diffusion stages (`q = 2`).
//! The node vectors `c(q) = A(q) e` are derived and never stored
//! independently of the matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matvec, ones, Matrix};

/// Largest stage count accepted by the dense representation.
pub const MAX_STAGES: usize = 16;

/// Absolute tolerance on `c(q) - A(q) e` used by [`CoefficientTableau::validate`].
pub const NODE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTableau {
    name: Option<String>,
    alpha: Vec<f64>,
    beta: [Vec<f64>; 4],
    a: [Matrix; 3],
    b: [Matrix; 3],
    c: [Vec<f64>; 3],
}

/// Which stage matrix family an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageMatrix {
    A,
    B,
}

impl fmt::Display for StageMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageMatrix::A => f.write_str("A"),
            StageMatrix::B => f.write_str("B"),
        }
    }
}

/// A structural defect found by [`CoefficientTableau::validate`].
///
/// Stage indices `i`, `j` are 1-based, matching the usual tableau notation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    StageCount {
        s: usize,
    },
    NotExplicit {
        matrix: StageMatrix,
        q: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    NodeMismatch {
        q: usize,
        i: usize,
        stored: f64,
        expected: f64,
    },
    NonFinite {
        field: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StageCount { s } => {
                write!(f, "stage count {s} outside 1..={MAX_STAGES}")
            }
            Violation::NotExplicit {
                matrix,
                q,
                i,
                j,
                value,
            } => write!(
                f,
                "{matrix}{q}[{i}][{j}] = {value} on or above the diagonal"
            ),
            Violation::NodeMismatch {
                q,
                i,
                stored,
                expected,
            } => write!(f, "c{q}[{i}] = {stored} but row sum of A{q} is {expected}"),
            Violation::NonFinite { field } => write!(f, "{field} has a non-finite entry"),
        }
    }
}

impl CoefficientTableau {
    /// Builds and validates a tableau. `beta`, `a` and `b` are indexed
    /// `[beta1, beta2, beta3, beta4]`, `[A0, A1, A2]` and `[B0, B1, B2]`.
    pub fn new(alpha: Vec<f64>, beta: [Vec<f64>; 4], a: [Matrix; 3], b: [Matrix; 3]) -> Result<Self> {
        let t = Self::unchecked(alpha, beta, a, b)?;
        let violations = t.validate();
        if violations.is_empty() {
            Ok(t)
        } else {
            Err(Error::InvalidTableau(join_violations(&violations)))
        }
    }

    /// Builds a tableau checking only that every array has the shape implied
    /// by `alpha.len()`. Explicitness and finiteness are left to
    /// [`validate`](Self::validate).
    pub fn unchecked(alpha: Vec<f64>, beta: [Vec<f64>; 4], a: [Matrix; 3], b: [Matrix; 3]) -> Result<Self> {
        let s = alpha.len();
        for (k, v) in beta.iter().enumerate() {
            if v.len() != s {
                return Err(Error::Shape {
                    field: format!("beta{}", k + 1),
                    detail: format!("expected length {s}, found {}", v.len()),
                });
            }
        }
        for (label, ms) in [("A", &a), ("B", &b)] {
            for (q, m) in ms.iter().enumerate() {
                if m.dim() != s {
                    return Err(Error::Shape {
                        field: format!("{label}{q}"),
                        detail: format!("expected {s}x{s}, found {0}x{0}", m.dim()),
                    });
                }
            }
        }
        let c = node_vectors(&a);
        Ok(CoefficientTableau {
            name: None,
            alpha,
            beta,
            a,
            b,
            c,
        })
    }

    /// All-zero tableau with `s` stages.
    pub fn zeros(s: usize) -> Self {
        let z = || Matrix::zeros(s);
        Self::unchecked(
            vec![0.0; s],
            [vec![0.0; s], vec![0.0; s], vec![0.0; s], vec![0.0; s]],
            [z(), z(), z()],
            [z(), z(), z()],
        )
        .expect("consistent shapes")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Diffusion weights `beta(k)` for `k` in `1..=4`.
    pub fn beta(&self, k: usize) -> &[f64] {
        assert!((1..=4).contains(&k), "beta index {k} not in 1..=4");
        &self.beta[k - 1]
    }

    pub fn a(&self, q: usize) -> &Matrix {
        &self.a[q]
    }

    pub fn b(&self, q: usize) -> &Matrix {
        &self.b[q]
    }

    /// Node vector `c(q) = A(q) e`.
    pub fn c(&self, q: usize) -> &[f64] {
        &self.c[q]
    }

    pub fn set_alpha(&mut self, i: usize, v: f64) {
        self.alpha[i] = v;
    }

    pub fn set_beta(&mut self, k: usize, i: usize, v: f64) {
        assert!((1..=4).contains(&k), "beta index {k} not in 1..=4");
        self.beta[k - 1][i] = v;
    }

    /// Sets `A(q)[i][j]` (0-based) and refreshes `c(q)`.
    pub fn set_a(&mut self, q: usize, i: usize, j: usize, v: f64) {
        self.a[q].set(i, j, v);
        self.c[q] = matvec(&self.a[q], &ones(self.stages()));
    }

    /// Sets `B(q)[i][j]` (0-based).
    pub fn set_b(&mut self, q: usize, i: usize, j: usize, v: f64) {
        self.b[q].set(i, j, v);
    }

    /// Every coefficient of the tableau together with a setter address,
    /// in a fixed order. Used for perturbation studies.
    pub fn coefficients(&self) -> Vec<(Coefficient, f64)> {
        let s = self.stages();
        let mut out = Vec::new();
        for i in 0..s {
            out.push((Coefficient::Alpha(i), self.alpha[i]));
        }
        for k in 1..=4 {
            for i in 0..s {
                out.push((Coefficient::Beta(k, i), self.beta[k - 1][i]));
            }
        }
        for q in 0..3 {
            for i in 0..s {
                for j in 0..i {
                    out.push((Coefficient::A(q, i, j), self.a[q].get(i, j)));
                    out.push((Coefficient::B(q, i, j), self.b[q].get(i, j)));
                }
            }
        }
        out
    }

    pub fn set_coefficient(&mut self, which: Coefficient, v: f64) {
        match which {
            Coefficient::Alpha(i) => self.set_alpha(i, v),
            Coefficient::Beta(k, i) => self.set_beta(k, i, v),
            Coefficient::A(q, i, j) => self.set_a(q, i, j, v),
            Coefficient::B(q, i, j) => self.set_b(q, i, j, v),
        }
    }

    /// Structural check: stage count, finiteness, explicitness and node
    /// consistency. An empty list means the tableau is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let s = self.stages();
        let mut out = Vec::new();
        if s == 0 || s > MAX_STAGES {
            out.push(Violation::StageCount { s });
        }
        let mut finite = |field: String, vals: &mut dyn Iterator<Item = f64>| {
            for v in vals {
                if !v.is_finite() {
                    out.push(Violation::NonFinite { field });
                    break;
                }
            }
        };
        finite("alpha".into(), &mut self.alpha.iter().copied());
        for k in 0..4 {
            finite(format!("beta{}", k + 1), &mut self.beta[k].iter().copied());
        }
        for q in 0..3 {
            finite(format!("A{q}"), &mut self.a[q].iter());
            finite(format!("B{q}"), &mut self.b[q].iter());
        }
        for q in 0..3 {
            for (kind, m) in [(StageMatrix::A, &self.a[q]), (StageMatrix::B, &self.b[q])] {
                for i in 0..s {
                    for j in i..s {
                        let value = m.get(i, j);
                        if value != 0.0 {
                            out.push(Violation::NotExplicit {
                                matrix: kind,
                                q,
                                i: i + 1,
                                j: j + 1,
                                value,
                            });
                        }
                    }
                }
            }
        }
        let expected = node_vectors(&self.a);
        for q in 0..3 {
            for i in 0..s {
                let (stored, exp) = (self.c[q][i], expected[q][i]);
                if !((stored - exp).abs() <= NODE_TOLERANCE) {
                    out.push(Violation::NodeMismatch {
                        q,
                        i: i + 1,
                        stored,
                        expected: exp,
                    });
                }
            }
        }
        out
    }

    /// JSON document in the tableau file format.
    pub fn to_json(&self) -> Result<String> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidTableau(join_violations(&violations)));
        }
        let doc = TableauDoc {
            name: self.name.clone(),
            s: self.stages(),
            alpha: self.alpha.clone(),
            beta1: self.beta[0].clone(),
            beta2: self.beta[1].clone(),
            beta3: self.beta[2].clone(),
            beta4: self.beta[3].clone(),
            a0: self.a[0].rows(),
            a1: self.a[1].rows(),
            a2: self.a[2].rows(),
            b0: self.b[0].rows(),
            b1: self.b[1].rows(),
            b2: self.b[2].rows(),
            c0: None,
            c1: None,
            c2: None,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses and validates a tableau document. Node vectors, when present,
    /// are compared against the recomputed `A(q) e` and otherwise ignored.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableauDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let s = doc.s;
        if s == 0 || s > MAX_STAGES {
            return Err(Error::Shape {
                field: "s".into(),
                detail: format!("stage count {s} outside 1..={MAX_STAGES}"),
            });
        }
        let vector = |field: &str, v: Vec<f64>| -> Result<Vec<f64>> {
            if v.len() != s {
                return Err(Error::Shape {
                    field: field.into(),
                    detail: format!("expected length {s}, found {}", v.len()),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(field.into()));
            }
            Ok(v)
        };
        let matrix = |field: &str, rows: Vec<Vec<f64>>| -> Result<Matrix> {
            let cols = rows.iter().map(Vec::len).find(|&n| n != s);
            if rows.len() != s || cols.is_some() {
                return Err(Error::Shape {
                    field: field.into(),
                    detail: format!(
                        "expected {s}x{s}, found {} rows{}",
                        rows.len(),
                        cols.map(|n| format!(" with a row of length {n}")).unwrap_or_default()
                    ),
                });
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(field.into()));
            }
            Ok(Matrix::from_rows(&rows).expect("shape checked"))
        };
        let mut t = Self::unchecked(
            vector("alpha", doc.alpha)?,
            [
                vector("beta1", doc.beta1)?,
                vector("beta2", doc.beta2)?,
                vector("beta3", doc.beta3)?,
                vector("beta4", doc.beta4)?,
            ],
            [matrix("A0", doc.a0)?, matrix("A1", doc.a1)?, matrix("A2", doc.a2)?],
            [matrix("B0", doc.b0)?, matrix("B1", doc.b1)?, matrix("B2", doc.b2)?],
        )?;
        for (q, stored) in [doc.c0, doc.c1, doc.c2].into_iter().enumerate() {
            let Some(stored) = stored else { continue };
            let field = format!("c{q}");
            let stored = vector(&field, stored)?;
            for (i, (&x, &y)) in stored.iter().zip(&t.c[q]).enumerate() {
                if (x - y).abs() > NODE_TOLERANCE {
                    return Err(Error::InvalidTableau(
                        Violation::NodeMismatch {
                            q,
                            i: i + 1,
                            stored: x,
                            expected: y,
                        }
                        .to_string(),
                    ));
                }
            }
        }
        let violations = t.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidTableau(join_violations(&violations)));
        }
        t.name = doc.name;
        Ok(t)
    }
}

/// Address of a single tableau coefficient (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    Alpha(usize),
    /// `beta(k)[i]`, `k` in `1..=4`.
    Beta(usize, usize),
    A(usize, usize, usize),
    B(usize, usize, usize),
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Coefficient::Alpha(i) => write!(f, "alpha[{}]", i + 1),
            Coefficient::Beta(k, i) => write!(f, "beta{k}[{}]", i + 1),
            Coefficient::A(q, i, j) => write!(f, "A{q}[{}][{}]", i + 1, j + 1),
            Coefficient::B(q, i, j) => write!(f, "B{q}[{}][{}]", i + 1, j + 1),
        }
    }
}

fn node_vectors(a: &[Matrix; 3]) -> [Vec<f64>; 3] {
    let e = ones(a[0].dim());
    [matvec(&a[0], &e), matvec(&a[1], &e), matvec(&a[2], &e)]
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableauDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    s: usize,
    alpha: Vec<f64>,
    beta1: Vec<f64>,
    beta2: Vec<f64>,
    beta3: Vec<f64>,
    beta4: Vec<f64>,
    #[serde(rename = "A0")]
    a0: Vec<Vec<f64>>,
    #[serde(rename = "A1")]
    a1: Vec<Vec<f64>>,
    #[serde(rename = "A2")]
    a2: Vec<Vec<f64>>,
    #[serde(rename = "B0")]
    b0: Vec<Vec<f64>>,
    #[serde(rename = "B1")]
    b1: Vec<Vec<f64>>,
    #[serde(rename = "B2")]
    b2: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2: Option<Vec<f64>>,
}

/// Claimed or inferred `(p_D, p_S)` pair: deterministic and stochastic
/// weak order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderClaim {
    pub deterministic: u32,
    pub stochastic: u32,
}

impl OrderClaim {
    pub fn new(deterministic: u32, stochastic: u32) -> Result<Self> {
        if deterministic < stochastic {
            return Err(Error::invalid(format!(
                "order claim ({deterministic},{stochastic}) has p_D < p_S"
            )));
        }
        Ok(OrderClaim {
            deterministic,
            stochastic,
        })
    }

    /// True if `self` is at least as strong as `claim` in both components.
    pub fn meets(&self, claim: &OrderClaim) -> bool {
        self.deterministic >= claim.deterministic && self.stochastic >= claim.stochastic
    }
}

impl fmt::Display for OrderClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.deterministic, self.stochastic)
    }
}

/// Parses `"pD,pS"`, optionally wrapped in parentheses.
impl FromStr for OrderClaim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(t);
        let mut parts = t.split(',');
        let (Some(d), Some(st), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::invalid(format!("order claim {s:?} is not of the form pD,pS")));
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("order claim {s:?}: {x:?} is not an order")))
        };
        OrderClaim::new(parse(d)?, parse(st)?)
    }
}
