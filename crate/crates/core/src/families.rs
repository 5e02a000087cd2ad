//! Parameter families of explicit SRK schemes and the named optimal schemes.
//!
//! * `Ord11`: s = 1, order (1,1); the Euler-Maruyama scheme.
//! * `Ord21`: s = 2, order (2,1), parameters `c1..c11`.
//! * `CaseA`, `Case211`, `Case212`, `Case221`, `Case222`, `Case223`: the six
//!   s = 3 families of order (2,2). They share the diffusion block built from
//!   `c1..c5` and differ in `alpha`, `A0` and `B0`.
//! * `Ord32_*`: specializations of the s = 3 families that also satisfy the
//!   deterministic order three conditions, order (3,2).
//!
//! Parameters not used by a family are ignored; missing ones are an error.

use std::fmt;
use std::str::FromStr;

use crate::conditions::ConditionId;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tableau::CoefficientTableau;

/// Distance below which an excluded parameter value counts as hit.
pub const EXCLUSION_TOLERANCE: f64 = 1e-12;

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    Ord11,
    Ord21,
    CaseA,
    Case211,
    Case212,
    Case221,
    Case222,
    Case223,
    Ord32_212,
    Ord32_221A,
    Ord32_221B,
    Ord32_221C,
    Ord32_223A,
    Ord32_223C,
}

impl FamilyId {
    pub const ALL: [FamilyId; 14] = [
        FamilyId::Ord11,
        FamilyId::Ord21,
        FamilyId::CaseA,
        FamilyId::Case211,
        FamilyId::Case212,
        FamilyId::Case221,
        FamilyId::Case222,
        FamilyId::Case223,
        FamilyId::Ord32_212,
        FamilyId::Ord32_221A,
        FamilyId::Ord32_221B,
        FamilyId::Ord32_221C,
        FamilyId::Ord32_223A,
        FamilyId::Ord32_223C,
    ];

    /// Command-line spelling, e.g. `ord32-221c`.
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyId::Ord11 => "ord11",
            FamilyId::Ord21 => "ord21",
            FamilyId::CaseA => "case-a",
            FamilyId::Case211 => "case-211",
            FamilyId::Case212 => "case-212",
            FamilyId::Case221 => "case-221",
            FamilyId::Case222 => "case-222",
            FamilyId::Case223 => "case-223",
            FamilyId::Ord32_212 => "ord32-212",
            FamilyId::Ord32_221A => "ord32-221a",
            FamilyId::Ord32_221B => "ord32-221b",
            FamilyId::Ord32_221C => "ord32-221c",
            FamilyId::Ord32_223A => "ord32-223a",
            FamilyId::Ord32_223C => "ord32-223c",
        }
    }

    pub fn stages(&self) -> usize {
        match self {
            FamilyId::Ord11 => 1,
            FamilyId::Ord21 => 2,
            _ => 3,
        }
    }

    /// Free parameters read by [`make_family`], besides `c1`.
    pub fn parameters(&self) -> &'static [Param] {
        use Param::*;
        match self {
            FamilyId::Ord11 => &[],
            FamilyId::Ord21 => &[C(2), C(3), C(4), C(5), C(6), C(7), C(8), C(9), C(10), C(11)],
            FamilyId::CaseA => &[C(3), C(4)],
            FamilyId::Case211 => &[C(2), C(3), C(4), C(5), C(6), C(7)],
            FamilyId::Case212 => &[C(2), C(3), C(4), C(5), C(6), C(7), C(8)],
            FamilyId::Case221 => &[C(3), C(4), C(6), C(7), C(8), C(9), Branch],
            FamilyId::Case222 => &[C(3), C(4), C(6), C(7), C(8)],
            FamilyId::Case223 => &[C(3), C(4), C(6), C(7), C(8)],
            FamilyId::Ord32_212 => &[C(2), C(3), C(4), C(5), C(6), Branch],
            FamilyId::Ord32_221A => &[C(3), C(4), C(7), Branch],
            FamilyId::Ord32_221B => &[C(3), C(4), C(9), Branch],
            FamilyId::Ord32_221C => &[C(3), C(4), Lambda, C(8), Branch],
            FamilyId::Ord32_223A => &[C(3), C(4)],
            FamilyId::Ord32_223C => &[C(3), C(4), C(7)],
        }
    }

    /// The conditions every member of the family satisfies.
    pub fn classified_conditions(&self) -> Vec<ConditionId> {
        let mut ids = match self {
            FamilyId::Ord11 => ConditionId::weak_order_one().to_vec(),
            FamilyId::Ord21 => {
                let mut v = ConditionId::weak_order_one().to_vec();
                v.push(ConditionId::W8);
                v
            }
            _ => ConditionId::weak().to_vec(),
        };
        if self.is_order_32() {
            ids.extend([ConditionId::D3A, ConditionId::D3B]);
        }
        ids
    }

    pub fn is_order_32(&self) -> bool {
        matches!(
            self,
            FamilyId::Ord32_212
                | FamilyId::Ord32_221A
                | FamilyId::Ord32_221B
                | FamilyId::Ord32_221C
                | FamilyId::Ord32_223A
                | FamilyId::Ord32_223C
        )
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts `ord32-221c`, `ORD32_221C` and similar spellings.
impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        FamilyId::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == norm)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// A family parameter name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    C(usize),
    Lambda,
    Branch,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::C(i) => write!(f, "c{i}"),
            Param::Lambda => f.write_str("lambda"),
            Param::Branch => f.write_str("sign"),
        }
    }
}

/// Choice of sign in the `±√κ` (and `±√(9c6²-36c6+24)`) formulas. `Upper`
/// takes the upper sign of each `±`/`∓` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub family: FamilyId,
    pub c1: f64,
    c: [Option<f64>; 12],
    pub lambda: Option<f64>,
    pub branch: Branch,
}

impl FamilyParams {
    /// `c1 = 1`, upper branch, no free parameters set.
    pub fn new(family: FamilyId) -> Self {
        FamilyParams {
            family,
            c1: 1.0,
            c: [None; 12],
            lambda: None,
            branch: Branch::Upper,
        }
    }

    pub fn c1(mut self, v: f64) -> Self {
        self.c1 = v;
        self
    }

    /// Sets `c_i` for `i` in `2..=11`.
    pub fn c(mut self, i: usize, v: f64) -> Self {
        assert!((2..=11).contains(&i), "no parameter c{i}");
        self.c[i] = Some(v);
        self
    }

    pub fn lambda(mut self, v: f64) -> Self {
        self.lambda = Some(v);
        self
    }

    pub fn branch(mut self, b: Branch) -> Self {
        self.branch = b;
        self
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.c.get(i).copied().flatten()
    }

    fn req(&self, i: usize) -> Result<f64> {
        self.get(i).ok_or_else(|| Error::MissingParameter {
            family: self.family.to_string(),
            name: format!("c{i}"),
        })
    }

    fn req_lambda(&self) -> Result<f64> {
        self.lambda.ok_or_else(|| Error::MissingParameter {
            family: self.family.to_string(),
            name: "lambda".into(),
        })
    }
}

/// Builds the tableau of one family member, checking the family's
/// admissibility constraints first.
pub fn make_family(p: &FamilyParams) -> Result<CoefficientTableau> {
    let fam = p.family;
    let c1 = p.c1;
    if c1 != 1.0 && c1 != -1.0 {
        return Err(Error::constraint(fam, "c1 ∈ {−1, 1}"));
    }
    for v in p.c.iter().flatten().chain(p.lambda.iter()) {
        if !v.is_finite() {
            return Err(Error::invalid(format!("{fam}: non-finite parameter {v}")));
        }
    }
    let t = match fam {
        FamilyId::Ord11 => ord11(c1),
        FamilyId::Ord21 => ord21(p)?,
        FamilyId::CaseA => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            case_a(c1, d)?
        }
        FamilyId::Case211 => {
            let d = DiffusionBlock::new(fam, c1, p.req(2)?, p.req(3)?, p.req(4)?, p.req(5)?)?;
            case_211(c1, p.req(6)?, p.req(7)?, d)?
        }
        FamilyId::Case212 => {
            let d = DiffusionBlock::new(fam, c1, p.req(2)?, p.req(3)?, p.req(4)?, p.req(5)?)?;
            case_212(fam, c1, p.req(6)?, p.req(7)?, p.req(8)?, d)?
        }
        FamilyId::Case221 => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            case_221(fam, c1, p.req(6)?, p.req(7)?, p.req(8)?, p.req(9)?, p.branch, d)?
        }
        FamilyId::Case222 => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            case_222(fam, c1, p.req(6)?, p.req(7)?, p.req(8)?, d)?
        }
        FamilyId::Case223 => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            case_223(fam, c1, p.req(6)?, p.req(7)?, p.req(8)?, d)?
        }
        FamilyId::Ord32_212 => {
            let d = DiffusionBlock::new(fam, c1, p.req(2)?, p.req(3)?, p.req(4)?, p.req(5)?)?;
            let c6 = p.req(6)?;
            if c6.abs() <= EXCLUSION_TOLERANCE {
                return Err(Error::constraint(fam, "c6 ≠ 0"));
            }
            let disc = 9.0 * c6 * c6 - 36.0 * c6 + 24.0;
            if disc < 0.0 {
                return Err(Error::constraint(fam, "9c6² − 36c6 + 24 ≥ 0"));
            }
            let c8 = 1.0 / (3.0 * c6);
            let c7 = 0.5 * c6 + p.branch.sign() * disc.sqrt() / 6.0 - c8;
            case_212(fam, c1, c6, c7, c8, d)?
        }
        FamilyId::Ord32_221A => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            let c7 = p.req(7)?;
            let excluded = [-0.75, 0.0, 0.5].iter().any(|&x| near(c7, x))
                || (c7 > -0.25 && c7 < 0.0);
            if excluded {
                return Err(Error::constraint(fam, "c7 ∉ {−3/4, 0, 1/2} ∪ ]−1/4, 0["));
            }
            case_221(fam, c1, 0.75, c7, 2.0 / 3.0, 1.0 / (4.0 * c7), p.branch, d)?
        }
        FamilyId::Ord32_221B => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            let c9 = p.req(9)?;
            if near(c9, 0.0) {
                return Err(Error::constraint(fam, "c9 ≠ 0"));
            }
            let c7 = 1.0 / (4.0 * c9);
            let c6 = 0.75 - c7;
            let inside = c6 > EXCLUSION_TOLERANCE
                && c6 < 0.75 - EXCLUSION_TOLERANCE
                && !near(c6, 0.25);
            if !inside {
                return Err(Error::constraint(fam, "c6 ∈ ]0, 1/4[ ∪ ]1/4, 3/4["));
            }
            case_221(fam, c1, c6, c7, 2.0 / 3.0, c9, p.branch, d)?
        }
        FamilyId::Ord32_221C => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            let (c6, c7, c8, c9) = ord32_221c_parameters(p.req_lambda()?, p.req(8)?)?;
            case_221(fam, c1, c6, c7, c8, c9, p.branch, d)?
        }
        FamilyId::Ord32_223A => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            case_223(fam, c1, 0.75, 2.0 / 3.0, -1.0 / 3.0, d)?
        }
        FamilyId::Ord32_223C => {
            let d = DiffusionBlock::new(fam, c1, 0.0, p.req(3)?, p.req(4)?, 0.0)?;
            let c7 = p.req(7)?;
            if [-1.0 / 6.0, 0.0, 1.0 / 3.0].iter().any(|&x| near(c7, x)) {
                return Err(Error::constraint(fam, "c7 ∉ {−1/6, 0, 1/3}"));
            }
            let c6 = 1.0 / (4.0 * c7 - 4.0 / 3.0);
            let c8 = -1.0 / (6.0 * c6 * c7);
            case_223(fam, c1, c6, c7, c8, d)?
        }
    };
    Ok(t)
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= EXCLUSION_TOLERANCE
}

/// `(c6, c7, c8, c9)` of family 2.2.1 for the order (3,2) case c), from
/// `lambda = A0_31 + A0_32` and `c8 = A0_21`.
fn ord32_221c_parameters(lambda: f64, c8: f64) -> Result<(f64, f64, f64, f64)> {
    let fam = FamilyId::Ord32_221C;
    let two_thirds = 2.0 / 3.0;
    if [0.0, two_thirds, c8, two_thirds - c8].iter().any(|&x| near(lambda, x)) {
        return Err(Error::constraint(fam, "λ ∉ {0, 2/3, c8, 2/3 − c8}"));
    }
    if near((lambda - 1.0) * c8, lambda * lambda - two_thirds) {
        return Err(Error::constraint(fam, "(λ − 1)c8 ≠ λ² − 2/3"));
    }
    if near(c8, 0.0) || near(c8, two_thirds) {
        return Err(Error::constraint(fam, "c8 ∉ {0, 2/3}"));
    }
    // admissible lambda intervals, boundaries as listed
    if c8 == 1.0 {
        if !(lambda < two_thirds) {
            return Err(Error::constraint(fam, "λ < 2/3 if c8 = 1"));
        }
    } else {
        let bound = (3.0 * c8 - 2.0) / (3.0 * (c8 - 1.0));
        if c8 > two_thirds && c8 < 1.0 {
            if !(bound <= lambda && lambda < two_thirds) {
                return Err(Error::constraint(
                    fam,
                    "(3c8 − 2)/(3(c8 − 1)) ≤ λ < 2/3 if 2/3 < c8 < 1",
                ));
            }
        } else if c8 > 0.0 && c8 < two_thirds {
            if !(lambda > two_thirds || lambda <= bound) {
                return Err(Error::constraint(
                    fam,
                    "λ > 2/3 or λ ≤ (3c8 − 2)/(3(c8 − 1)) if 0 < c8 < 2/3",
                ));
            }
        } else if !(lambda < two_thirds || lambda >= bound) {
            return Err(Error::constraint(
                fam,
                "λ < 2/3 or λ ≥ (3c8 − 2)/(3(c8 − 1)) if c8 < 0 or c8 > 1",
            ));
        }
    }
    let c6 = (2.0 - 3.0 * lambda) / (6.0 * c8 * (c8 - lambda));
    let c7 = (3.0 * c8 - 2.0) / (6.0 * lambda * (c8 - lambda));
    let c9 = lambda * (c8 - lambda) / ((3.0 * c8 - 2.0) * c8);
    Ok((c6, c7, c8, c9))
}

fn ord11(c1: f64) -> CoefficientTableau {
    let z = || Matrix::zeros(1);
    CoefficientTableau::new(
        vec![1.0],
        [vec![c1], vec![0.0], vec![0.0], vec![0.0]],
        [z(), z(), z()],
        [z(), z(), z()],
    )
    .expect("s = 1 family is explicit")
}

fn ord21(p: &FamilyParams) -> Result<CoefficientTableau> {
    let fam = p.family;
    let c1 = p.c1;
    let c2 = p.req(2)?;
    if near(c2, 0.0) {
        return Err(Error::constraint(fam, "c2 ≠ 0"));
    }
    let c: Vec<f64> = (3..=11).map(|i| p.req(i)).collect::<Result<_>>()?;
    let [c3, c4, c5, c6, c7, c8, c9, c10, c11] = c[..] else {
        unreachable!()
    };
    if c4 * c10 != 0.0 {
        return Err(Error::constraint(fam, "c4·c10 = 0"));
    }
    if c6 * c11 != 0.0 {
        return Err(Error::constraint(fam, "c6·c11 = 0"));
    }
    let m = |v: f64| Matrix::strictly_lower(2, &[&[v]]);
    CoefficientTableau::new(
        vec![1.0 - 1.0 / (2.0 * c2), 1.0 / (2.0 * c2)],
        [vec![c1 - c4, c4], vec![c5, -c5], vec![c6, -c6], vec![c7, -c7]],
        [m(c2), m(c8), m(c9)],
        [m(c3), m(c10), m(c11)],
    )
}

/// Weights and diffusion stage matrices shared by all s = 3 order (2,2)
/// families.
struct DiffusionBlock {
    beta: [Vec<f64>; 4],
    a1: Matrix,
    a2: Matrix,
    b1: Matrix,
    b2: Matrix,
}

impl DiffusionBlock {
    fn new(fam: FamilyId, c1: f64, c2: f64, c3: f64, c4: f64, c5: f64) -> Result<Self> {
        if near(c3, 0.0) {
            return Err(Error::constraint(fam, "c3 ≠ 0"));
        }
        if near(c4, 0.0) {
            return Err(Error::constraint(fam, "c4 ≠ 0"));
        }
        let (q3, q4) = (c3 * c3, c4 * c4);
        Ok(DiffusionBlock {
            beta: [
                vec![c1 - c1 / (2.0 * q3), c1 / (4.0 * q3), c1 / (4.0 * q3)],
                vec![0.0, 1.0 / (2.0 * c3), -1.0 / (2.0 * c3)],
                vec![-c1 / (2.0 * q4), c1 / (4.0 * q4), c1 / (4.0 * q4)],
                vec![0.0, 1.0 / (2.0 * c4), -1.0 / (2.0 * c4)],
            ],
            a1: Matrix::strictly_lower(3, &[&[q3], &[q3 - c2, c2]]),
            a2: Matrix::strictly_lower(3, &[&[0.0], &[c5, -c5]]),
            b1: Matrix::strictly_lower(3, &[&[c3], &[-c3, 0.0]]),
            b2: Matrix::strictly_lower(3, &[&[c4], &[-c4, 0.0]]),
        })
    }

    fn assemble(self, alpha: [f64; 3], a0: Matrix, b0: Matrix) -> Result<CoefficientTableau> {
        CoefficientTableau::new(alpha.to_vec(), self.beta, [a0, self.a1, self.a2], [b0, self.b1, self.b2])
    }
}

fn case_a(c1: f64, d: DiffusionBlock) -> Result<CoefficientTableau> {
    d.assemble(
        [0.5, 0.5, 0.0],
        Matrix::strictly_lower(3, &[&[1.0], &[0.0, 0.0]]),
        Matrix::strictly_lower(3, &[&[c1], &[0.0, 0.0]]),
    )
}

fn case_211(c1: f64, c6: f64, c7: f64, d: DiffusionBlock) -> Result<CoefficientTableau> {
    d.assemble(
        [0.5 - c6, c6, 0.5],
        Matrix::strictly_lower(3, &[&[0.0], &[c7, 1.0 - c7]]),
        Matrix::strictly_lower(3, &[&[0.0], &[c1, 0.0]]),
    )
}

fn case_212(fam: FamilyId, c1: f64, c6: f64, c7: f64, c8: f64, d: DiffusionBlock) -> Result<CoefficientTableau> {
    if near(c6, 0.0) {
        return Err(Error::constraint(fam, "c6 ≠ 0"));
    }
    let a2 = (1.0 - c7 - c8) / (2.0 * c6);
    d.assemble(
        [0.5 - a2, a2, 0.5],
        Matrix::strictly_lower(3, &[&[c6], &[c7, c8]]),
        Matrix::strictly_lower(3, &[&[0.0], &[c1, 0.0]]),
    )
}

#[allow(clippy::too_many_arguments)]
fn case_221(
    fam: FamilyId,
    c1: f64,
    c6: f64,
    c7: f64,
    c8: f64,
    c9: f64,
    branch: Branch,
    d: DiffusionBlock,
) -> Result<CoefficientTableau> {
    if near(c6, 0.0) {
        return Err(Error::constraint(fam, "c6 ≠ 0"));
    }
    if near(c7, 0.0) {
        return Err(Error::constraint(fam, "c7 ≠ 0"));
    }
    if near(c6, -c7) {
        return Err(Error::constraint(fam, "c6 ≠ −c7"));
    }
    let kappa = c6 * c7 * (2.0 * c6 + 2.0 * c7 - 1.0);
    if kappa < -EXCLUSION_TOLERANCE {
        return Err(Error::constraint(fam, "κ ≥ 0"));
    }
    let root = kappa.max(0.0).sqrt();
    if near(c6, root) || near(c6, -root) {
        return Err(Error::constraint(fam, "c6 ≠ ±√κ"));
    }
    let lambda = (1.0 - 2.0 * c6 * c8) / (2.0 * c7);
    let sign = branch.sign();
    let b21 = 0.5 * c1 * (c6 - sign * root) / (c6 * (c6 + c7));
    let b31 = 0.5 * c1 * (c7 + sign * root) / (c7 * (c6 + c7));
    d.assemble(
        [1.0 - c6 - c7, c6, c7],
        Matrix::strictly_lower(3, &[&[c8], &[lambda - c9, c9]]),
        Matrix::strictly_lower(3, &[&[b21], &[b31, 0.0]]),
    )
}

fn case_222(fam: FamilyId, c1: f64, c6: f64, c7: f64, c8: f64, d: DiffusionBlock) -> Result<CoefficientTableau> {
    if near(c8, 0.0) {
        return Err(Error::constraint(fam, "c8 ≠ 0"));
    }
    d.assemble(
        [0.5, 0.0, 0.5],
        Matrix::strictly_lower(3, &[&[c6], &[1.0 - c7, c7]]),
        Matrix::strictly_lower(3, &[&[c8], &[c1, 0.0]]),
    )
}

fn case_223(fam: FamilyId, c1: f64, c6: f64, c7: f64, c8: f64, d: DiffusionBlock) -> Result<CoefficientTableau> {
    if near(c6, -0.5) || near(c6, 0.0) {
        return Err(Error::constraint(fam, "c6 ∉ {−1/2, 0}"));
    }
    let a31 = (1.0 - 2.0 * c6 * c7) / (-2.0 * c6) - c8;
    d.assemble(
        [1.0, c6, -c6],
        Matrix::strictly_lower(3, &[&[c7], &[a31, c8]]),
        Matrix::strictly_lower(
            3,
            &[&[0.5 * c1 * (1.0 + 1.0 / (2.0 * c6))], &[0.5 * c1 * (1.0 - 1.0 / (2.0 * c6)), 0.0]],
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedScheme {
    Em,
    Pl1wm,
    Rdi1wm,
    Rdi2wm,
    Rdi3wm,
    Rdi4wm,
}

impl NamedScheme {
    pub const ALL: [NamedScheme; 6] = [
        NamedScheme::Em,
        NamedScheme::Pl1wm,
        NamedScheme::Rdi1wm,
        NamedScheme::Rdi2wm,
        NamedScheme::Rdi3wm,
        NamedScheme::Rdi4wm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NamedScheme::Em => "EM",
            NamedScheme::Pl1wm => "PL1WM",
            NamedScheme::Rdi1wm => "RDI1WM",
            NamedScheme::Rdi2wm => "RDI2WM",
            NamedScheme::Rdi3wm => "RDI3WM",
            NamedScheme::Rdi4wm => "RDI4WM",
        }
    }

    /// The family parameters that reproduce this scheme.
    pub fn family_params(&self) -> FamilyParams {
        let (r23, r2) = ((2.0f64 / 3.0).sqrt(), 2.0f64.sqrt());
        match self {
            NamedScheme::Em => FamilyParams::new(FamilyId::Ord11),
            NamedScheme::Pl1wm => FamilyParams::new(FamilyId::CaseA).c(3, 1.0).c(4, 1.0),
            NamedScheme::Rdi1wm => (4..=11).fold(
                FamilyParams::new(FamilyId::Ord21).c(2, 2.0 / 3.0).c(3, 2.0 / 3.0),
                |p, i| p.c(i, 0.0),
            ),
            NamedScheme::Rdi2wm => FamilyParams::new(FamilyId::CaseA).c(3, r23).c(4, r2),
            NamedScheme::Rdi3wm => FamilyParams::new(FamilyId::Ord32_221C)
                .c(3, r23)
                .c(4, r2)
                .lambda(0.75)
                .c(8, 0.5),
            NamedScheme::Rdi4wm => FamilyParams::new(FamilyId::Ord32_221C)
                .c(3, r23)
                .c(4, r2)
                .lambda(1.0)
                .c(8, 0.5),
        }
    }
}

impl fmt::Display for NamedScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedScheme::ALL
            .iter()
            .copied()
            .find(|n| n.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Coefficient tables of the named schemes, written out entry by entry.
pub fn named_scheme(name: NamedScheme) -> CoefficientTableau {
    let r6 = 6.0f64.sqrt();
    let r15 = 15.0f64.sqrt();
    let r23 = (2.0f64 / 3.0).sqrt();
    let r2 = 2.0f64.sqrt();
    let lower3 = |rows: &[&[f64]]| Matrix::strictly_lower(3, rows);
    // diffusion part shared by RDI2WM, RDI3WM and RDI4WM
    let rdi_diffusion = || {
        (
            [
                vec![0.25, 0.375, 0.375],
                vec![0.0, r6 / 4.0, -r6 / 4.0],
                vec![-0.25, 0.125, 0.125],
                vec![0.0, r2 / 4.0, -r2 / 4.0],
            ],
            lower3(&[&[2.0 / 3.0], &[2.0 / 3.0, 0.0]]),
            lower3(&[&[0.0], &[0.0, 0.0]]),
            lower3(&[&[r23], &[-r23, 0.0]]),
            lower3(&[&[r2], &[-r2, 0.0]]),
        )
    };
    let rdi = |alpha: [f64; 3], a0: Matrix, b0: Matrix| {
        let (beta, a1, a2, b1, b2) = rdi_diffusion();
        CoefficientTableau::new(alpha.to_vec(), beta, [a0, a1, a2], [b0, b1, b2])
    };
    let t = match name {
        NamedScheme::Em => {
            let z = || Matrix::zeros(1);
            CoefficientTableau::new(
                vec![1.0],
                [vec![1.0], vec![0.0], vec![0.0], vec![0.0]],
                [z(), z(), z()],
                [z(), z(), z()],
            )
        }
        NamedScheme::Rdi1wm => {
            let m = |v: f64| Matrix::strictly_lower(2, &[&[v]]);
            CoefficientTableau::new(
                vec![0.25, 0.75],
                [vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
                [m(2.0 / 3.0), m(0.0), m(0.0)],
                [m(2.0 / 3.0), m(0.0), m(0.0)],
            )
        }
        NamedScheme::Pl1wm => CoefficientTableau::new(
            vec![0.5, 0.5, 0.0],
            [
                vec![0.5, 0.25, 0.25],
                vec![0.0, 0.5, -0.5],
                vec![-0.5, 0.25, 0.25],
                vec![0.0, 0.5, -0.5],
            ],
            [
                lower3(&[&[1.0], &[0.0, 0.0]]),
                lower3(&[&[1.0], &[1.0, 0.0]]),
                lower3(&[&[0.0], &[0.0, 0.0]]),
            ],
            [
                lower3(&[&[1.0], &[0.0, 0.0]]),
                lower3(&[&[1.0], &[-1.0, 0.0]]),
                lower3(&[&[1.0], &[-1.0, 0.0]]),
            ],
        ),
        NamedScheme::Rdi2wm => rdi(
            [0.5, 0.5, 0.0],
            lower3(&[&[1.0], &[0.0, 0.0]]),
            lower3(&[&[1.0], &[0.0, 0.0]]),
        ),
        NamedScheme::Rdi3wm => rdi(
            [2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0],
            lower3(&[&[0.5], &[0.0, 0.75]]),
            lower3(&[&[(9.0 - 2.0 * r15) / 14.0], &[(18.0 + 3.0 * r15) / 28.0, 0.0]]),
        ),
        NamedScheme::Rdi4wm => rdi(
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            lower3(&[&[0.5], &[-1.0, 2.0]]),
            lower3(&[&[(6.0 - r6) / 10.0], &[(3.0 + 2.0 * r6) / 5.0, 0.0]]),
        ),
    };
    t.expect("named tables are explicit").with_name(name.as_str())
}

pub fn named_scheme_by_name(name: &str) -> Result<CoefficientTableau> {
    Ok(named_scheme(name.parse()?))
}
