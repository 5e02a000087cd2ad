//! Built-in test problems with known weak functionals.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrator::SdeProblem;

pub type Functional = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// An SDE together with the functional `f` whose expectation is studied and
/// the default evaluation time.
#[derive(Clone)]
pub struct NamedProblem {
    pub name: String,
    pub problem: SdeProblem,
    pub f: Functional,
    pub f_description: String,
    pub t_eval: f64,
}

impl fmt::Debug for NamedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NamedProblem")
            .field("name", &self.name)
            .field("problem", &self.problem)
            .field("f", &self.f_description)
            .field("t_eval", &self.t_eval)
            .finish()
    }
}

impl NamedProblem {
    /// The problem must carry an exact functional, and it must agree with
    /// `f(x0)` at `t0`.
    pub fn new(
        name: impl Into<String>,
        problem: SdeProblem,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        f_description: impl Into<String>,
        t_eval: f64,
    ) -> Result<Self> {
        let named = NamedProblem {
            name: name.into(),
            problem,
            f: Arc::new(f),
            f_description: f_description.into(),
            t_eval,
        };
        named.check_consistency()?;
        Ok(named)
    }

    /// `f(x0) = E f(X_{t0})` up to rounding.
    pub fn check_consistency(&self) -> Result<()> {
        let p = &self.problem;
        let exact = p
            .exact_functional()
            .ok_or_else(|| Error::MissingExactFunctional(self.name.clone()))?;
        let (lhs, rhs) = ((self.f)(&p.x0), exact(p.t0));
        if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(1.0) {
            return Err(Error::InvalidProblem {
                spec: self.name.clone(),
                reason: format!("f(x0) = {lhs} but the exact functional gives {rhs} at t0"),
            });
        }
        if !(self.t_eval > p.t0 && self.t_eval <= p.t_end) {
            return Err(Error::InvalidProblem {
                spec: self.name.clone(),
                reason: format!("evaluation time {} outside ({}, {}]", self.t_eval, p.t0, p.t_end),
            });
        }
        Ok(())
    }

    pub fn exact(&self, t: f64) -> f64 {
        self.problem.exact_functional().map(|e| e(t)).unwrap_or(f64::NAN)
    }
}

/// `dX = (X/2 + √(X²+1)) dt + √(X²+1) dW`, `X0 = 0` on `[0, 2]`, with
/// solution `sinh(t + W)`. For `f(x) = p(asinh x)`, `p(z) = z³ - 6z² + 8z`,
/// `E f(X_t) = t³ - 3t² + 2t`.
pub fn problem_nonlinear() -> NamedProblem {
    let p = SdeProblem::new(
        1,
        vec![0.0],
        0.0,
        2.0,
        |_, x, out| out[0] = 0.5 * x[0] + x[0].hypot(1.0),
        |_, x, _, out| out[0] = x[0].hypot(1.0),
    )
    .expect("valid problem")
    .with_exact_functional(|t| t * t * t - 3.0 * t * t + 2.0 * t);
    NamedProblem::new("nonlinear16", p, |x| cubic(x[0].asinh()), "p(asinh(x)), p(z) = z^3 - 6z^2 + 8z", 2.0)
        .expect("consistent problem")
}

fn cubic(z: f64) -> f64 {
    z * (z * (z - 6.0) + 8.0)
}

/// Two-dimensional linear system with non-commutative noise, `X0 = (1, 1)`,
/// on `[0, 4]`. For `f(x) = (x¹)²`, `E f(X_t) = e^{-t}`.
pub fn problem_2d() -> NamedProblem {
    let a22 = -785.0 / 512.0 + 2f64.sqrt() / 8.0;
    let b21 = (1.0 - 2.0 * 2f64.sqrt()) / 4.0;
    let p = SdeProblem::new(
        2,
        vec![1.0, 1.0],
        0.0,
        4.0,
        move |_, x, out| {
            out[0] = -273.0 / 512.0 * x[0];
            out[1] = -1.0 / 160.0 * x[0] + a22 * x[1];
        },
        move |_, x, j, out| {
            if j == 0 {
                out[0] = 0.25 * x[0];
                out[1] = b21 * x[1];
            } else {
                out[0] = x[0] / 16.0;
                out[1] = x[0] / 10.0 + x[1] / 16.0;
            }
        },
    )
    .expect("valid problem")
    .with_exact_functional(|t| (-t).exp());
    NamedProblem::new("system18", p, |x| x[0] * x[0], "(x^1)^2", 4.0).expect("consistent problem")
}

/// Scalar `dX = aX dt + bX dW` with `f(x) = x^power`, `power ∈ {1, 2}`.
pub fn problem_linear(a: f64, b: f64, power: u32) -> Result<NamedProblem> {
    LinearSpec {
        a,
        b,
        power,
        ..LinearSpec::default()
    }
    .build()
}

/// Parameters of [`problem_linear`] including initial value and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSpec {
    pub a: f64,
    pub b: f64,
    pub power: u32,
    pub x0: f64,
    pub t_end: f64,
}

impl Default for LinearSpec {
    fn default() -> Self {
        LinearSpec {
            a: 0.0,
            b: 0.0,
            power: 1,
            x0: 1.0,
            t_end: 1.0,
        }
    }
}

impl LinearSpec {
    pub fn name(&self) -> String {
        let mut s = format!("linear:a={},b={},p={}", self.a, self.b, self.power);
        if self.x0 != 1.0 {
            s += &format!(",x0={}", self.x0);
        }
        if self.t_end != 1.0 {
            s += &format!(",T={}", self.t_end);
        }
        s
    }

    pub fn build(&self) -> Result<NamedProblem> {
        let LinearSpec { a, b, power, x0, t_end } = *self;
        let invalid = |reason: String| Error::InvalidProblem {
            spec: self.name(),
            reason,
        };
        if !(power == 1 || power == 2) {
            return Err(invalid(format!("power must be 1 or 2, got {power}")));
        }
        if ![a, b, x0, t_end].iter().all(|v| v.is_finite()) {
            return Err(invalid("parameters must be finite".into()));
        }
        if !(t_end > 0.0) {
            return Err(invalid(format!("horizon must be positive, got {t_end}")));
        }
        let rate = if power == 1 { a } else { 2.0 * a + b * b };
        let scale = x0.powi(power as i32);
        let p = SdeProblem::new(
            1,
            vec![x0],
            0.0,
            t_end,
            move |_, x, out| out[0] = a * x[0],
            move |_, x, _, out| out[0] = b * x[0],
        )?
        .with_exact_functional(move |t| scale * (rate * t).exp());
        let desc = if power == 1 { "x" } else { "x^2" };
        NamedProblem::new(self.name(), p, move |x| x[0].powi(power as i32), desc, t_end)
    }
}

impl FromStr for LinearSpec {
    type Err = Error;

    /// `a=..,b=..,p=..` with optional `x0=..` and `T=..`.
    fn from_str(s: &str) -> Result<Self> {
        let spec = format!("linear:{s}");
        let bad = |reason: String| Error::InvalidProblem {
            spec: spec.clone(),
            reason,
        };
        let mut out = LinearSpec::default();
        let mut seen = [false; 5];
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
            let key = key.trim();
            let value = value.trim();
            let slot = match key {
                "a" => 0,
                "b" => 1,
                "p" => 2,
                "x0" => 3,
                "T" | "t" => 4,
                _ => return Err(bad(format!("unknown key '{key}'"))),
            };
            if std::mem::replace(&mut seen[slot], true) {
                return Err(bad(format!("duplicate key '{key}'")));
            }
            if slot == 2 {
                out.power = value.parse().map_err(|_| bad(format!("invalid power '{value}'")))?;
                continue;
            }
            let v: f64 = value.parse().map_err(|_| bad(format!("invalid number '{value}'")))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value for '{key}'")));
            }
            match slot {
                0 => out.a = v,
                1 => out.b = v,
                3 => out.x0 = v,
                _ => out.t_end = v,
            }
        }
        if !(seen[0] && seen[1] && seen[2]) {
            return Err(bad("a, b and p are required".into()));
        }
        Ok(out)
    }
}

/// Parses `nonlinear16`, `system18` or `linear:a=..,b=..,p=..[,x0=..][,T=..]`.
pub fn problem_by_name(spec: &str) -> Result<NamedProblem> {
    let spec = spec.trim();
    match spec {
        "nonlinear16" => Ok(problem_nonlinear()),
        "system18" => Ok(problem_2d()),
        _ => match spec.strip_prefix("linear:") {
            Some(rest) => rest.parse::<LinearSpec>()?.build(),
            None => Err(Error::InvalidProblem {
                spec: spec.to_string(),
                reason: "expected nonlinear16, system18 or linear:a=..,b=..,p=..".into(),
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinear_values() {
        let p = problem_nonlinear();
        assert_eq!(p.exact(2.0), 0.0);
        assert_eq!((p.f)(&[0.0]), 0.0);
        let mut out = [0.0];
        p.problem.drift(0.0, &[0.0], &mut out);
        assert_eq!(out, [1.0]);
        p.problem.diffusion_column(0.0, &[0.0], 0, &mut out);
        assert_eq!(out, [1.0]);
        assert!((p.f)(&[1e300]).is_finite());
    }

    #[test]
    fn system_values() {
        let p = problem_2d();
        assert!((p.exact(4.0) - 1.8316e-2).abs() < 1e-6);
        assert_eq!((p.f)(&p.problem.x0), 1.0);
        let mut out = [0.0; 2];
        p.problem.diffusion_column(0.0, &[1.0, 1.0], 1, &mut out);
        assert_eq!(out, [1.0 / 16.0, 0.1 + 1.0 / 16.0]);
    }

    #[test]
    fn linear_moments() {
        assert_eq!(problem_linear(0.0, 0.0, 2).unwrap().exact(0.7), 1.0);
        assert!((problem_linear(1.0, 1.0, 2).unwrap().exact(1.0) - 3f64.exp()).abs() < 1e-12);
        assert!((problem_linear(-1.0, 0.0, 1).unwrap().exact(1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!(problem_linear(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!(problem_by_name("nonlinear16").unwrap().name, "nonlinear16");
        assert_eq!(problem_by_name("system18").unwrap().problem.noise_dim(), 2);
        let l = problem_by_name("linear:a=1,b=0.5,p=2,T=2").unwrap();
        assert_eq!(l.name, "linear:a=1,b=0.5,p=2,T=2");
        assert_eq!(l.problem.t_end, 2.0);
        for bad in ["linear:a=1,b=1", "linear:a=1,b=1,p=2,a=3", "linear:a=x,b=1,p=1", "linear:q=1", "foo"] {
            assert!(problem_by_name(bad).is_err(), "{bad}");
        }
    }
}
