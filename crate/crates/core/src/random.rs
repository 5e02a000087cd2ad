//! Random increments of the weak SRK schemes.
//!
//! Each step uses three-point variables `Î(k)` with
//! `P(Î = ±√(3h)) = 1/6`, `P(Î = 0) = 2/3` and two-point variables
//! `V(k,l) = ±h` for `l < k`, with `V(k,k) = -h` and `V(l,k) = -V(k,l)`.
//! The mixed increments are `Î(k,l) = (Î(k) Î(l) + V(k,l)) / 2`.
//!
//! Randomness comes from [`RngStream`], a ChaCha8 stream addressed by
//! `(seed, domain, index)`. Monte Carlo trajectory `i` uses stream `i`, so
//! results do not depend on how trajectories are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest noise dimension accepted by [`enumerate_support`].
pub const MAX_ENUMERATION_DIM: usize = 4;

/// A reproducible random stream. Distinct `(seed, domain, index)` triples
/// give independent streams; equal triples give identical streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    pub fn new(seed: u64, domain: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        RngStream { rng, draws: 0 }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    pub fn coin(&mut self) -> bool {
        self.draws += 1;
        self.rng.random::<bool>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    /// Number of random variables drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

/// Factory for the streams of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    pub seed: u64,
    pub domain: u64,
}

impl StreamFamily {
    pub fn new(seed: u64, domain: u64) -> Self {
        StreamFamily { seed, domain }
    }

    pub fn stream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, self.domain, index)
    }
}

/// Distribution of the `Î(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncrementKind {
    #[default]
    ThreePoint,
    /// `Î(k) = √h N(0,1)`. Only meaningful for schemes that never use the
    /// mixed increments (Euler-Maruyama).
    Gaussian,
}

/// Random increments of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakIncrementBatch {
    h: f64,
    m: usize,
    ihat: Vec<f64>,
    v: Vec<f64>,
}

impl WeakIncrementBatch {
    /// Batch with all `Î(k) = 0` and `V` at its diagonal values, off-diagonal
    /// entries zero until drawn.
    pub fn empty(m: usize, h: f64) -> Self {
        let mut v = vec![0.0; m * m];
        for k in 0..m {
            v[k * m + k] = -h;
        }
        WeakIncrementBatch {
            h,
            m,
            ihat: vec![0.0; m],
            v,
        }
    }

    /// Batch from explicit values. `v_lower` lists `V(k,l)` for `l < k` in
    /// row order (`(1,0), (2,0), (2,1), ...`); the rest of `V` is implied.
    pub fn from_values(h: f64, ihat: Vec<f64>, v_lower: &[f64]) -> Self {
        let m = ihat.len();
        assert_eq!(v_lower.len(), m * m.saturating_sub(1) / 2, "wrong number of V entries");
        let mut b = WeakIncrementBatch::empty(m, h);
        b.ihat = ihat;
        let mut it = v_lower.iter();
        for k in 0..m {
            for l in 0..k {
                b.set_pair_sign(k, l, *it.next().expect("counted"));
            }
        }
        b
    }

    fn set_pair_sign(&mut self, k: usize, l: usize, v: f64) {
        self.v[k * self.m + l] = v;
        self.v[l * self.m + k] = -v;
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// `Î(k)`, 0-based `k`.
    #[inline]
    pub fn ihat(&self, k: usize) -> f64 {
        self.ihat[k]
    }

    pub fn ihat_all(&self) -> &[f64] {
        &self.ihat
    }

    /// `V(k,l)`, 0-based.
    #[inline]
    pub fn v(&self, k: usize, l: usize) -> f64 {
        self.v[k * self.m + l]
    }

    /// `Î(k,l) = (Î(k) Î(l) + V(k,l)) / 2`.
    #[inline]
    pub fn pair(&self, k: usize, l: usize) -> f64 {
        0.5 * (self.ihat[k] * self.ihat[l] + self.v(k, l))
    }

    /// Redraws this batch in place for step size `h`. With `pairs == false`
    /// the off-diagonal `V` entries are left untouched and must not be read.
    pub fn redraw(&mut self, h: f64, stream: &mut RngStream, kind: IncrementKind, pairs: bool) {
        self.h = h;
        let m = self.m;
        match kind {
            IncrementKind::ThreePoint => {
                let r = (3.0 * h).sqrt();
                for x in &mut self.ihat {
                    let u = stream.uniform();
                    *x = if u < 1.0 / 6.0 {
                        -r
                    } else if u < 5.0 / 6.0 {
                        0.0
                    } else {
                        r
                    };
                }
            }
            IncrementKind::Gaussian => {
                let r = h.sqrt();
                for x in &mut self.ihat {
                    *x = r * stream.standard_normal();
                }
            }
        }
        for k in 0..m {
            self.v[k * m + k] = -h;
        }
        if pairs {
            for k in 1..m {
                for l in 0..k {
                    let v = if stream.coin() { h } else { -h };
                    self.set_pair_sign(k, l, v);
                }
            }
        }
    }
}

/// One full draw of the `m` three-point and `m(m-1)/2` two-point variables.
pub fn draw(m: usize, h: f64, stream: &mut RngStream) -> WeakIncrementBatch {
    let mut b = WeakIncrementBatch::empty(m, h);
    b.redraw(h, stream, IncrementKind::ThreePoint, true);
    b
}

/// A point of the joint increment distribution with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportAtom {
    pub batch: WeakIncrementBatch,
    pub probability: f64,
}

/// Every outcome of the joint distribution of one step's increments:
/// `3^m · 2^(m(m-1)/2)` atoms.
pub fn enumerate_support(m: usize, h: f64) -> Result<Vec<SupportAtom>> {
    if m > MAX_ENUMERATION_DIM {
        return Err(Error::NoiseDimensionTooLarge {
            m,
            max: MAX_ENUMERATION_DIM,
        });
    }
    if m == 0 || !(h > 0.0) {
        return Err(Error::invalid(format!("need m >= 1 and h > 0, got m = {m}, h = {h}")));
    }
    let r = (3.0 * h).sqrt();
    let points = [(-r, 1.0 / 6.0), (0.0, 2.0 / 3.0), (r, 1.0 / 6.0)];
    let npairs = m * (m - 1) / 2;
    let n_ihat = 3usize.pow(m as u32);
    let mut atoms = Vec::with_capacity(n_ihat << npairs);
    for code in 0..n_ihat {
        let mut ihat = Vec::with_capacity(m);
        let mut p_ihat = 1.0;
        let mut c = code;
        for _ in 0..m {
            let (x, p) = points[c % 3];
            ihat.push(x);
            p_ihat *= p;
            c /= 3;
        }
        for signs in 0..(1usize << npairs) {
            let v: Vec<f64> = (0..npairs)
                .map(|bit| if signs >> bit & 1 == 1 { h } else { -h })
                .collect();
            atoms.push(SupportAtom {
                batch: WeakIncrementBatch::from_values(h, ihat.clone(), &v),
                probability: p_ihat * 0.5f64.powi(npairs as i32),
            });
        }
    }
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_batch_has_fixed_diagonal() {
        let mut s = RngStream::new(1, 0, 0);
        let b = draw(1, 0.3, &mut s);
        assert_eq!(b.v(0, 0), -0.3);
        let i = b.ihat(0);
        assert_eq!(b.pair(0, 0), 0.5 * (i * i - 0.3));
    }

    #[test]
    fn drawn_values_respect_support() {
        let mut s = RngStream::new(7, 3, 11);
        let h: f64 = 0.25;
        let r = (3.0 * h).sqrt();
        for _ in 0..1000 {
            let b = draw(3, h, &mut s);
            for k in 0..3 {
                assert!([-r, 0.0, r].contains(&b.ihat(k)));
                assert_eq!(b.v(k, k), -h);
                for l in (0..3).filter(|&l| l != k) {
                    assert_eq!(b.v(k, l), -b.v(l, k));
                    assert!(b.v(k, l) == h || b.v(k, l) == -h);
                }
            }
        }
    }

    #[test]
    fn empirical_moments() {
        let mut s = RngStream::new(2024, 0, 0);
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = draw(1, 1.0, &mut s).ihat(0);
            m1 += x;
            m2 += x * x;
        }
        assert!((m1 / n as f64).abs() < 0.005);
        assert!((m2 / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn same_stream_same_batch() {
        let a = draw(3, 0.1, &mut RngStream::new(5, 1, 9));
        let b = draw(3, 0.1, &mut RngStream::new(5, 1, 9));
        let c = draw(3, 0.1, &mut RngStream::new(5, 1, 10));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn draw_counts() {
        let mut s = RngStream::new(0, 0, 0);
        draw(3, 0.1, &mut s);
        assert_eq!(s.draws(), 3 + 3);
        let mut b = WeakIncrementBatch::empty(3, 0.1);
        b.redraw(0.1, &mut s, IncrementKind::ThreePoint, false);
        assert_eq!(s.draws(), 6 + 3);
    }

    #[test]
    fn support_sizes_and_mass() {
        let one = enumerate_support(1, 1.0).unwrap();
        let probs: Vec<f64> = one.iter().map(|a| a.probability).collect();
        assert_eq!(probs, vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]);
        let two = enumerate_support(2, 0.5).unwrap();
        assert_eq!(two.len(), 18);
        assert!((two.iter().map(|a| a.probability).sum::<f64>() - 1.0).abs() <= 1e-15);
        assert_eq!(enumerate_support(4, 0.5).unwrap().len(), 5184);
        assert!(matches!(
            enumerate_support(5, 0.5),
            Err(Error::NoiseDimensionTooLarge { m: 5, max: 4 })
        ));
    }

    #[test]
    fn exact_mean_of_diagonal_pair() {
        let s: f64 = enumerate_support(1, 1.0)
            .unwrap()
            .iter()
            .map(|a| a.probability * a.batch.pair(0, 0))
            .sum();
        assert!(s.abs() < 1e-16);
    }
}
