//! Explicit SRK stepping for d-dimensional Itô SDEs driven by an
//! m-dimensional Wiener process.
//!
//! One step from `(t, y)` with step size `h` evaluates, for stages
//! `i = 1..s` in order,
//!
//! ```text
//! H0_i    = y + Σ_j A0_ij a(t + c0_j h, H0_j) h + Σ_j Σ_r B0_ij b^r(t + c1_j h, H_j^(r)) Î(r)
//! H_i^(k) = y + Σ_j A1_ij a(t + c0_j h, H0_j) h + Σ_j B1_ij b^k(t + c1_j h, H_j^(k)) √h
//! Ĥ_i^(k) = y + Σ_j A2_ij a(t + c0_j h, H0_j) h + Σ_j B2_ij b^k(t + c1_j h, H_j^(k)) √h
//! ```
//!
//! and combines them as
//!
//! ```text
//! y' = y + Σ_i α_i a(H0_i) h
//!        + Σ_i Σ_k (β1_i Î(k) + β2_i Î(k,k)/√h) b^k(t + c1_i h, H_i^(k))
//!        + Σ_i Σ_{k≠l} (β3_i Î(k) + β4_i Î(k,l)/√h) b^k(t + c2_i h, Ĥ_i^(l))
//! ```
//!
//! Evaluation rules, which also define [`evaluation_cost`]:
//! * `a` at `H0_i` is evaluated once per stage, `b^k` at `H_i^(k)` once per
//!   `(i, k)` and `b^k` at `Ĥ_i^(l)` once per `(i, l, k≠l)`.
//! * A stage value is only formed when a nonzero coefficient references it,
//!   directly in the update or through a later stage that is itself formed.
//! * Stage 1 of every family is `y` at time `t`, so `b^k(t, y)` is shared
//!   between `H_1^(k)` and all `Ĥ_1^(l)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::random::{enumerate_support, IncrementKind, RngStream, StreamFamily, WeakIncrementBatch};
use crate::tableau::CoefficientTableau;

pub type DriftFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type DiffusionFn = Arc<dyn Fn(f64, &[f64], usize, &mut [f64]) + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `dX = a(t, X) dt + Σ_j b^j(t, X) dW^j`, `X(t0) = x0` on `[t0, t_end]`.
#[derive(Clone)]
pub struct SdeProblem {
    d: usize,
    m: usize,
    drift: DriftFn,
    diffusion: DiffusionFn,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    exact_functional: Option<ExactFn>,
}

impl fmt::Debug for SdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeProblem")
            .field("d", &self.d)
            .field("m", &self.m)
            .field("x0", &self.x0)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("exact_functional", &self.exact_functional.is_some())
            .finish_non_exhaustive()
    }
}

impl SdeProblem {
    /// `drift(t, x, out)` writes `a(t, x)`; `diffusion(t, x, j, out)` writes
    /// column `b^j(t, x)` (0-based `j`).
    pub fn new<A, B>(m: usize, x0: Vec<f64>, t0: f64, t_end: f64, drift: A, diffusion: B) -> Result<Self>
    where
        A: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        B: Fn(f64, &[f64], usize, &mut [f64]) + Send + Sync + 'static,
    {
        let d = x0.len();
        if d == 0 || m == 0 {
            return Err(Error::invalid(format!("need d, m >= 1, got d = {d}, m = {m}")));
        }
        if !(t0 < t_end) {
            return Err(Error::invalid(format!("need t0 < T, got [{t0}, {t_end}]")));
        }
        Ok(SdeProblem {
            d,
            m,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            x0,
            t0,
            t_end,
            exact_functional: None,
        })
    }

    /// Attaches `t ↦ E f(X_t)` for the functional a study estimates.
    pub fn with_exact_functional(mut self, exact: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact_functional = Some(Arc::new(exact));
        self
    }

    /// Same problem with the drift and diffusion replaced, e.g. to
    /// instrument calls.
    pub fn with_coefficients(mut self, drift: DriftFn, diffusion: DiffusionFn) -> Self {
        self.drift = drift;
        self.diffusion = diffusion;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.d
    }

    pub fn noise_dim(&self) -> usize {
        self.m
    }

    pub fn drift_fn(&self) -> &DriftFn {
        &self.drift
    }

    pub fn diffusion_fn(&self) -> &DiffusionFn {
        &self.diffusion
    }

    #[inline]
    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    #[inline]
    pub fn diffusion_column(&self, t: f64, x: &[f64], j: usize, out: &mut [f64]) {
        (self.diffusion)(t, x, j, out)
    }

    pub fn exact_functional(&self) -> Option<&ExactFn> {
        self.exact_functional.as_ref()
    }
}

/// State and increments of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub t: f64,
    pub h: f64,
    pub y: &'a [f64],
    pub increments: &'a WeakIncrementBatch,
}

/// Which stage evaluations a tableau actually needs for noise dimension `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    pub drift: Vec<bool>,
    pub diffusion: Vec<bool>,
    pub cross: Vec<bool>,
    /// Off-diagonal `V(k,l)` are read, so they must be drawn.
    pub pairs: bool,
}

impl StagePlan {
    pub fn new(t: &CoefficientTableau, m: usize) -> Self {
        let s = t.stages();
        let nz = |x: f64| x != 0.0;
        let mut drift = vec![false; s];
        let mut diffusion = vec![false; s];
        let mut cross = vec![false; s];
        for i in (0..s).rev() {
            cross[i] = m >= 2 && (nz(t.beta(3)[i]) || nz(t.beta(4)[i]));
            let later = (i + 1)..s;
            drift[i] = nz(t.alpha()[i])
                || later.clone().any(|j| {
                    (nz(t.a(0).get(j, i)) && drift[j])
                        || (nz(t.a(1).get(j, i)) && diffusion[j])
                        || (nz(t.a(2).get(j, i)) && cross[j])
                });
            diffusion[i] = nz(t.beta(1)[i])
                || nz(t.beta(2)[i])
                || later.clone().any(|j| {
                    (nz(t.b(0).get(j, i)) && drift[j])
                        || (nz(t.b(1).get(j, i)) && diffusion[j])
                        || (nz(t.b(2).get(j, i)) && cross[j])
                });
        }
        let pairs = m >= 2 && t.beta(4).iter().any(|&x| nz(x));
        StagePlan {
            drift,
            diffusion,
            cross,
            pairs,
        }
    }
}

/// Function evaluations and random variables needed per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvaluationCost {
    pub drift_evals: usize,
    pub diffusion_column_evals: usize,
    pub random_draws: usize,
}

impl fmt::Display for EvaluationCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "drift {}, diffusion {}, rv {}",
            self.drift_evals, self.diffusion_column_evals, self.random_draws
        )
    }
}

/// Per-step cost under the evaluation rules in the module docs.
pub fn evaluation_cost(t: &CoefficientTableau, m: usize) -> EvaluationCost {
    let plan = StagePlan::new(t, m);
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
    let mut diffusion = count(&plan.diffusion) * m;
    if m >= 2 {
        diffusion += count(&plan.cross[1..]) * m * (m - 1);
        if plan.cross[0] && !plan.diffusion[0] {
            diffusion += m;
        }
    }
    EvaluationCost {
        drift_evals: count(&plan.drift),
        diffusion_column_evals: diffusion,
        random_draws: m + if plan.pairs { m * (m - 1) / 2 } else { 0 },
    }
}

/// Reusable stepping workspace for one tableau and problem.
pub struct SrkStepper<'a> {
    tableau: &'a CoefficientTableau,
    problem: &'a SdeProblem,
    plan: StagePlan,
    d: usize,
    m: usize,
    stage: Vec<f64>,
    /// `a` at `H0_i`, `[i][..d]`
    a_vals: Vec<f64>,
    /// `b^k` at `H_i^(k)`, `[i][k][..d]`
    b_vals: Vec<f64>,
    /// `b^k` at `Ĥ_i^(l)`, `[i][l][k][..d]`
    bhat_vals: Vec<f64>,
}

impl<'a> SrkStepper<'a> {
    pub fn new(tableau: &'a CoefficientTableau, problem: &'a SdeProblem) -> Self {
        let (s, d, m) = (tableau.stages(), problem.state_dim(), problem.noise_dim());
        SrkStepper {
            tableau,
            problem,
            plan: StagePlan::new(tableau, m),
            d,
            m,
            stage: vec![0.0; d],
            a_vals: vec![0.0; s * d],
            b_vals: vec![0.0; s * m * d],
            bhat_vals: vec![0.0; s * m * m * d],
        }
    }

    pub fn plan(&self) -> &StagePlan {
        &self.plan
    }

    #[inline]
    fn a_at(&self, i: usize) -> &[f64] {
        &self.a_vals[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    fn b_at(&self, i: usize, k: usize) -> &[f64] {
        let o = (i * self.m + k) * self.d;
        &self.b_vals[o..o + self.d]
    }

    #[inline]
    fn bhat_at(&self, i: usize, l: usize, k: usize) -> &[f64] {
        let o = ((i * self.m + l) * self.m + k) * self.d;
        &self.bhat_vals[o..o + self.d]
    }

    /// Writes the drift or diffusion stage value of stage `i` into
    /// `self.stage`: `y + Σ_j A_ij a_j h + Σ_j B_ij (Σ_r w_r b^r_j)` where the
    /// diffusion weights `w` are `Î(r)` for the drift stage and `√h` on
    /// column `k` otherwise.
    fn form_stage(&mut self, q: usize, i: usize, y: &[f64], h: f64, diffusion: StageNoise<'_>) {
        let t = self.tableau;
        let mut stage = std::mem::take(&mut self.stage);
        stage.copy_from_slice(y);
        for j in 0..i {
            let aij = t.a(q).get(i, j);
            if aij != 0.0 {
                for (x, a) in stage.iter_mut().zip(self.a_at(j)) {
                    *x += aij * h * a;
                }
            }
            let bij = t.b(q).get(i, j);
            if bij != 0.0 {
                match diffusion {
                    StageNoise::Increments(ihat) => {
                        for (r, &w) in ihat.iter().enumerate() {
                            if w != 0.0 {
                                for (x, b) in stage.iter_mut().zip(self.b_at(j, r)) {
                                    *x += bij * w * b;
                                }
                            }
                        }
                    }
                    StageNoise::Column(k, sqrt_h) => {
                        for (x, b) in stage.iter_mut().zip(self.b_at(j, k)) {
                            *x += bij * sqrt_h * b;
                        }
                    }
                }
            }
        }
        self.stage = stage;
    }

    /// One SRK step; `out` receives the new state.
    pub fn step(&mut self, t: f64, h: f64, y: &[f64], inc: &WeakIncrementBatch, out: &mut [f64]) -> Result<()> {
        let tab = self.tableau;
        let p = self.problem;
        let (d, m, s) = (self.d, self.m, tab.stages());
        debug_assert_eq!(inc.dim(), m);
        let sqrt_h = h.sqrt();
        let (c0, c1, c2) = (tab.c(0), tab.c(1), tab.c(2));

        for i in 0..s {
            if self.plan.drift[i] {
                self.form_stage(0, i, y, h, StageNoise::Increments(inc.ihat_all()));
                let o = i * d;
                p.drift(t + c0[i] * h, &self.stage, &mut self.a_vals[o..o + d]);
            }
            if self.plan.diffusion[i] {
                for k in 0..m {
                    self.form_stage(1, i, y, h, StageNoise::Column(k, sqrt_h));
                    let o = (i * m + k) * d;
                    p.diffusion_column(t + c1[i] * h, &self.stage, k, &mut self.b_vals[o..o + d]);
                }
            }
            if self.plan.cross[i] {
                if i == 0 {
                    // Ĥ_1^(l) = y at time t for every l
                    for k in 0..m {
                        let o = k * d;
                        if !self.plan.diffusion[0] {
                            p.diffusion_column(t, y, k, &mut self.b_vals[o..o + d]);
                        }
                        for l in (0..m).filter(|&l| l != k) {
                            let dst = (l * m + k) * d;
                            self.bhat_vals.copy_within(0..0, 0);
                            let (src, dst_slice) = (self.b_vals[o..o + d].to_owned(), dst);
                            self.bhat_vals[dst_slice..dst_slice + d].copy_from_slice(&src);
                        }
                    }
                } else {
                    for l in 0..m {
                        self.form_stage(2, i, y, h, StageNoise::Column(l, sqrt_h));
                        for k in (0..m).filter(|&k| k != l) {
                            let o = ((i * m + l) * m + k) * d;
                            p.diffusion_column(t + c2[i] * h, &self.stage, k, &mut self.bhat_vals[o..o + d]);
                        }
                    }
                }
            }
        }

        out.copy_from_slice(y);
        for i in 0..s {
            let alpha = tab.alpha()[i];
            if alpha != 0.0 {
                for (x, a) in out.iter_mut().zip(self.a_at(i)) {
                    *x += alpha * h * a;
                }
            }
            let (b1, b2) = (tab.beta(1)[i], tab.beta(2)[i]);
            if b1 != 0.0 || b2 != 0.0 {
                for k in 0..m {
                    let w = b1 * inc.ihat(k) + b2 * inc.pair(k, k) / sqrt_h;
                    if w != 0.0 {
                        for (x, b) in out.iter_mut().zip(self.b_at(i, k)) {
                            *x += w * b;
                        }
                    }
                }
            }
            let (b3, b4) = (tab.beta(3)[i], tab.beta(4)[i]);
            if self.plan.cross[i] {
                for k in 0..m {
                    for l in (0..m).filter(|&l| l != k) {
                        let pair = if b4 != 0.0 { inc.pair(k, l) } else { 0.0 };
                        let w = b3 * inc.ihat(k) + b4 * pair / sqrt_h;
                        if w != 0.0 {
                            for (x, b) in out.iter_mut().zip(self.bhat_at(i, l, k)) {
                                *x += w * b;
                            }
                        }
                    }
                }
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged {
                t: t + h,
                state: out.to_vec(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum StageNoise<'a> {
    Increments(&'a [f64]),
    Column(usize, f64),
}

/// One step of the scheme, allocating a fresh workspace.
pub fn srk_step(t: &CoefficientTableau, p: &SdeProblem, ctx: &StepContext<'_>) -> Result<Vec<f64>> {
    if ctx.y.len() != p.state_dim() || ctx.increments.dim() != p.noise_dim() {
        return Err(Error::invalid("step context does not match problem dimensions"));
    }
    if !(ctx.h > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {}", ctx.h)));
    }
    let mut out = vec![0.0; p.state_dim()];
    SrkStepper::new(t, p).step(ctx.t, ctx.h, ctx.y, ctx.increments, &mut out)?;
    Ok(out)
}

fn check_increment_kind(t: &CoefficientTableau, kind: IncrementKind) -> Result<()> {
    if kind == IncrementKind::Gaussian {
        let em_like = t.stages() == 1 && (2..=4).all(|k| t.beta(k).iter().all(|&x| x == 0.0));
        if !em_like {
            return Err(Error::invalid(
                "Gaussian increments are only supported for the Euler-Maruyama tableau",
            ));
        }
    }
    Ok(())
}

/// Integrates from `(p.t0, p.x0)` over the step sizes in `grid`, drawing
/// fresh three-point increments from `stream` for each step.
pub fn simulate_path(t: &CoefficientTableau, p: &SdeProblem, grid: &[f64], stream: &mut RngStream) -> Result<Vec<f64>> {
    simulate_path_with(t, p, grid, stream, IncrementKind::ThreePoint)
}

pub fn simulate_path_with(
    t: &CoefficientTableau,
    p: &SdeProblem,
    grid: &[f64],
    stream: &mut RngStream,
    kind: IncrementKind,
) -> Result<Vec<f64>> {
    check_increment_kind(t, kind)?;
    if grid.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::invalid("step sizes must be positive and finite"));
    }
    let span: f64 = grid.iter().sum();
    let horizon = p.t_end - p.t0;
    if span > horizon * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "steps cover {span}, beyond the problem horizon {horizon}"
        )));
    }
    let mut stepper = SrkStepper::new(t, p);
    let pairs = stepper.plan().pairs;
    let mut inc = WeakIncrementBatch::empty(p.noise_dim(), 0.0);
    let mut y = p.x0.clone();
    let mut next = vec![0.0; p.state_dim()];
    let mut time = p.t0;
    for &h in grid {
        inc.redraw(h, stream, kind, pairs);
        stepper.step(time, h, &y, &inc, &mut next)?;
        std::mem::swap(&mut y, &mut next);
        time += h;
    }
    Ok(y)
}

/// `E f(Y_1)` after one step from `(t0, y0)`, summed exactly over the finite
/// distribution of the increments.
pub fn exact_one_step_expectation(
    t: &CoefficientTableau,
    p: &SdeProblem,
    f: &dyn Fn(&[f64]) -> f64,
    t0: f64,
    y0: &[f64],
    h: f64,
) -> Result<f64> {
    let atoms = enumerate_support(p.noise_dim(), h)?;
    if y0.len() != p.state_dim() {
        return Err(Error::invalid("initial state does not match problem dimension"));
    }
    let mut stepper = SrkStepper::new(t, p);
    let mut out = vec![0.0; p.state_dim()];
    let mut total = 0.0;
    for atom in &atoms {
        stepper.step(t0, h, y0, &atom.batch, &mut out)?;
        total += atom.probability * f(&out);
    }
    Ok(total)
}

/// Number of uniform steps of size `h` covering `[t0, t_eval]`.
pub fn uniform_steps(t0: f64, t_eval: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {h}")));
    }
    let span = t_eval - t0;
    let n = (span / h).round();
    if n < 1.0 || ((span / h) - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::invalid(format!(
            "step size {h} does not divide the interval [{t0}, {t_eval}]"
        )));
    }
    Ok(n as usize)
}

/// `f(Y)` at `t_eval` for trajectories `0..samples` on a uniform grid;
/// `None` marks a diverged trajectory (non-finite state or functional).
/// Trajectory `i` draws from `streams.stream(i)`, and results are returned
/// in trajectory order whatever the thread count.
#[allow(clippy::too_many_arguments)]
pub fn sample_functional(
    t: &CoefficientTableau,
    p: &SdeProblem,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    t_eval: f64,
    h: f64,
    samples: usize,
    streams: StreamFamily,
    kind: IncrementKind,
) -> Result<Vec<Option<f64>>> {
    check_increment_kind(t, kind)?;
    if t_eval > p.t_end * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::invalid(format!(
            "evaluation time {t_eval} lies beyond the horizon {}",
            p.t_end
        )));
    }
    let n = uniform_steps(p.t0, t_eval, h)?;
    let (d, m) = (p.state_dim(), p.noise_dim());
    let out = (0..samples)
        .into_par_iter()
        .map_init(
            || {
                let stepper = SrkStepper::new(t, p);
                let pairs = stepper.plan().pairs;
                (stepper, pairs, WeakIncrementBatch::empty(m, h), vec![0.0; d], vec![0.0; d])
            },
            |(stepper, pairs, inc, y, next), i| {
                let mut stream = streams.stream(i as u64);
                y.copy_from_slice(&p.x0);
                let mut time = p.t0;
                for _ in 0..n {
                    inc.redraw(h, &mut stream, kind, *pairs);
                    if stepper.step(time, h, y, inc, next).is_err() {
                        return None;
                    }
                    std::mem::swap(y, next);
                    time += h;
                }
                Some(f(y)).filter(|v| v.is_finite())
            },
        )
        .collect();
    Ok(out)
}

/// Stream domain for a Monte Carlo level: distinct `(h, level)` pairs get
/// distinct keys.
pub fn stream_domain(h: f64, level: u64) -> u64 {
    h.to_bits().rotate_left(17) ^ level.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Extrapolated Euler-Maruyama estimate `2 E f(Z^{h/2}) - E f(Z^h)` from two
/// independent Monte Carlo runs with `samples` trajectories each.
pub fn extrapolated_em(
    p: &SdeProblem,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    t_eval: f64,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let em = crate::families::named_scheme(crate::families::NamedScheme::Em);
    let mean = |step: f64, level: u64| -> Result<f64> {
        let vals = sample_functional(
            &em,
            p,
            f,
            t_eval,
            step,
            samples,
            StreamFamily::new(seed, stream_domain(h, level)),
            IncrementKind::ThreePoint,
        )?;
        let diverged = vals.iter().filter(|v| v.is_none()).count();
        if diverged > 0 {
            return Err(Error::DivergedTrajectories {
                count: diverged,
                total: samples,
            });
        }
        Ok(vals.iter().flatten().sum::<f64>() / samples as f64)
    };
    Ok(2.0 * mean(0.5 * h, 2)? - mean(h, 1)?)
}
