//! Monte Carlo estimation of weak errors and convergence orders.
//!
//! For each step size the sample average `u_{M,h}` of `f(Y_t)` over `M`
//! trajectories is compared with the exact `E f(X_t)`. The variance of the
//! mean error and its 90% confidence interval come from batch means: the
//! trajectories are split by index into `batches` equal groups, `σ̂²_μ` is
//! the sample variance of the group means divided by `batches`, and the
//! interval is `μ̂ ± t_{0.95, batches-1} σ̂_μ`.

use std::fmt;
use std::str::FromStr;

use log::warn;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::families::{named_scheme, NamedScheme};
use crate::integrator::{sample_functional, stream_domain, SdeProblem};
use crate::problems::NamedProblem;
use crate::random::{IncrementKind, StreamFamily};
use crate::tableau::CoefficientTableau;

pub const DEFAULT_BATCHES: usize = 20;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const CONFIDENCE_LEVEL: f64 = 0.90;

/// A method whose weak error can be estimated.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Scheme {
    Srk { name: String, tableau: CoefficientTableau },
    /// `2 E f(Z^{h/2}) - E f(Z^h)` for Euler-Maruyama `Z`, with the two
    /// levels driven by independent streams.
    ExtrapolatedEm,
}

impl Scheme {
    pub fn srk(name: impl Into<String>, tableau: CoefficientTableau) -> Self {
        Scheme::Srk {
            name: name.into(),
            tableau,
        }
    }

    pub fn named(s: NamedScheme) -> Self {
        Scheme::srk(s.as_str(), named_scheme(s))
    }

    pub fn name(&self) -> &str {
        match self {
            Scheme::Srk { name, .. } => name,
            Scheme::ExtrapolatedEm => "EXEM",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// A named scheme or `EXEM`, case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("exem") {
            return Ok(Scheme::ExtrapolatedEm);
        }
        Ok(Scheme::named(s.parse()?))
    }
}

/// What to do with trajectories whose state becomes non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergencePolicy {
    /// Any divergence fails the estimate.
    #[default]
    Fail,
    /// Diverged trajectories are left out of their batch and counted in
    /// [`WeakErrorReport::diverged`].
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
    pub divergence: DivergencePolicy,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            batches: DEFAULT_BATCHES,
            divergence: DivergencePolicy::Fail,
        }
    }
}

impl EstimateOptions {
    pub fn samples(mut self, m: usize) -> Self {
        self.samples = m;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn batches(mut self, b: usize) -> Self {
        self.batches = b;
        self
    }

    pub fn divergence(mut self, policy: DivergencePolicy) -> Self {
        self.divergence = policy;
        self
    }
}

/// Mean error statistics at one step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakErrorReport {
    pub h: f64,
    pub samples: usize,
    pub u_mh: f64,
    pub mu_hat: f64,
    pub sigma2_mu: f64,
    pub ci: (f64, f64),
    pub diverged: usize,
}

impl WeakErrorReport {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }
}

/// Error reports of one scheme over several step sizes, with the slope of
/// the regression line of `log2 |μ̂|` against `log2 h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub scheme: String,
    pub problem: String,
    pub points: Vec<WeakErrorReport>,
    pub fitted_order: f64,
}

/// Estimates the mean error of `scheme` for `E f(X_{t_eval})`.
pub fn estimate(
    p: &SdeProblem,
    scheme: &Scheme,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    t_eval: f64,
    h: f64,
    opts: &EstimateOptions,
) -> Result<WeakErrorReport> {
    let exact = p
        .exact_functional()
        .ok_or_else(|| Error::MissingExactFunctional("<unnamed>".into()))?(t_eval);
    let (m, batches) = (opts.samples, opts.batches);
    if batches < 2 || m < batches || m % batches != 0 {
        return Err(Error::invalid(format!(
            "need at least 2 batches dividing M, got M = {m}, batches = {batches}"
        )));
    }
    let values = sample_values(p, scheme, f, t_eval, h, opts)?;
    let diverged = values.iter().filter(|v| v.is_none()).count();
    if diverged > 0 && opts.divergence == DivergencePolicy::Fail {
        return Err(Error::DivergedTrajectories {
            count: diverged,
            total: m,
        });
    }

    let size = m / batches;
    let mut means = Vec::with_capacity(batches);
    let (mut total, mut kept) = (0.0, 0usize);
    for chunk in values.chunks(size) {
        let (mut sum, mut n) = (0.0, 0usize);
        for v in chunk.iter().flatten() {
            sum += v;
            n += 1;
        }
        if n == 0 {
            return Err(Error::DivergedTrajectories {
                count: diverged,
                total: m,
            });
        }
        means.push(sum / n as f64);
        total += sum;
        kept += n;
    }
    let u_mh = total / kept as f64;
    let mu_hat = u_mh - exact;
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var_means = means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let sigma2_mu = var_means / batches as f64;
    let t = StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.5 + CONFIDENCE_LEVEL / 2.0);
    let half = t * sigma2_mu.sqrt();
    Ok(WeakErrorReport {
        h,
        samples: m,
        u_mh,
        mu_hat,
        sigma2_mu,
        ci: (mu_hat - half, mu_hat + half),
        diverged,
    })
}

fn sample_values(
    p: &SdeProblem,
    scheme: &Scheme,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    t_eval: f64,
    h: f64,
    opts: &EstimateOptions,
) -> Result<Vec<Option<f64>>> {
    let run = |t: &CoefficientTableau, step: f64, level: u64| {
        sample_functional(
            t,
            p,
            f,
            t_eval,
            step,
            opts.samples,
            StreamFamily::new(opts.seed, stream_domain(h, level)),
            IncrementKind::ThreePoint,
        )
    };
    match scheme {
        Scheme::Srk { tableau, .. } => run(tableau, h, 0),
        Scheme::ExtrapolatedEm => {
            let em = named_scheme(NamedScheme::Em);
            let coarse = run(&em, h, 1)?;
            let fine = run(&em, 0.5 * h, 2)?;
            Ok(coarse
                .into_iter()
                .zip(fine)
                .map(|(c, f)| Some(2.0 * f? - c?))
                .collect())
        }
    }
}

/// Least-squares slope of `log2 |μ̂|` against `log2 h` over `(h, μ̂)` pairs.
/// Points with `μ̂ = 0` are skipped with a warning.
pub fn fit_order(points: &[(f64, f64)]) -> Result<f64> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(h, mu) in points {
        if !(h > 0.0) || !h.is_finite() || !mu.is_finite() {
            return Err(Error::Regression(format!("invalid point (h = {h}, mean error = {mu})")));
        }
        if mu == 0.0 {
            warn!("mean error is exactly zero at h = {h}; point left out of the regression");
            continue;
        }
        xs.push(h.log2());
        ys.push(mu.abs().log2());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || !(sxx > 0.0) {
        return Err(Error::Regression(
            "need at least two distinct step sizes with nonzero mean error; increase M or add step sizes".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Estimates every scheme at every step size and fits the orders.
pub fn run_study(
    problem: &NamedProblem,
    schemes: &[Scheme],
    h_list: &[f64],
    opts: &EstimateOptions,
) -> Result<Vec<ConvergenceStudy>> {
    let f = problem.f.as_ref();
    schemes
        .iter()
        .map(|scheme| {
            let points = h_list
                .iter()
                .map(|&h| estimate(&problem.problem, scheme, f, problem.t_eval, h, opts))
                .collect::<Result<Vec<_>>>()?;
            let pairs: Vec<(f64, f64)> = points.iter().map(|r| (r.h, r.mu_hat)).collect();
            Ok(ConvergenceStudy {
                scheme: scheme.name().to_string(),
                problem: problem.name.clone(),
                fitted_order: fit_order(&pairs)?,
                points,
            })
        })
        .collect()
}

/// Scientific notation with 6 significant digits and a signed two-digit
/// exponent, e.g. `8.79700E-01`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.5E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

pub const ERRORS_CSV_HEADER: &str = "scheme,problem,h,M,u_Mh,mu_hat,sigma2_mu,ci_a,ci_b,diverged";
pub const ORDERS_CSV_HEADER: &str = "scheme,problem,fitted_order";

/// One row per scheme and step size.
pub fn errors_csv(studies: &[ConvergenceStudy]) -> String {
    let mut out = String::from(ERRORS_CSV_HEADER);
    out.push('\n');
    for s in studies {
        for r in &s.points {
            out += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                s.scheme,
                csv_field(&s.problem),
                format_sci(r.h),
                r.samples,
                format_sci(r.u_mh),
                format_sci(r.mu_hat),
                format_sci(r.sigma2_mu),
                format_sci(r.ci.0),
                format_sci(r.ci.1),
                r.diverged
            );
        }
    }
    out
}

pub fn orders_csv(studies: &[ConvergenceStudy]) -> String {
    let mut out = String::from(ORDERS_CSV_HEADER);
    out.push('\n');
    for s in studies {
        out += &format!("{},{},{}\n", s.scheme, csv_field(&s.problem), format_sci(s.fitted_order));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl fmt::Display for ConvergenceStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}: order {:.2}", self.scheme, self.problem, self.fitted_order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(0.8797), "8.79700E-01");
        assert_eq!(format_sci(-1.178e-2), "-1.17800E-02");
        assert_eq!(format_sci(0.0), "0.00000E+00");
        assert_eq!(format_sci(1.5e12), "1.50000E+12");
        assert_eq!(format_sci(1e-100), "1.00000E-100");
    }

    #[test]
    fn exact_quadratic_fit() {
        let pts = [(0.5, 0.25), (0.25, 0.0625), (0.125, 0.015625)];
        assert!((fit_order(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_two_points() {
        assert!(fit_order(&[(0.5, 0.1)]).is_err());
        assert!(fit_order(&[(0.5, 0.1), (0.25, 0.0)]).is_err());
        assert!(fit_order(&[(0.5, 0.1), (0.5, 0.2)]).is_err());
    }

    #[test]
    fn scheme_names() {
        assert_eq!("exem".parse::<Scheme>().unwrap(), Scheme::ExtrapolatedEm);
        assert_eq!("rdi4wm".parse::<Scheme>().unwrap().name(), "RDI4WM");
        assert!("RDI9WM".parse::<Scheme>().is_err());
    }
}
