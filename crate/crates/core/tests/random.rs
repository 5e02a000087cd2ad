use srk_core::random::{draw, enumerate_support, IncrementKind, RngStream, StreamFamily, WeakIncrementBatch};

fn expect(m: usize, h: f64, g: impl Fn(&WeakIncrementBatch) -> f64) -> f64 {
    enumerate_support(m, h).unwrap().iter().map(|a| a.probability * g(&a.batch)).sum()
}

#[test]
fn enumerated_moments() {
    for m in 1..=3 {
        for h in [2.0, 1.0, 0.01, 1e-4] {
            for k in 0..m {
                let i = |p: i32| expect(m, h, |b| b.ihat(k).powi(p));
                assert!(i(1).abs() <= 1e-14 * h.sqrt());
                assert!((i(2) - h).abs() <= 1e-14 * h);
                assert!(i(3).abs() <= 1e-14 * h.powf(1.5));
                assert!((i(4) - 3.0 * h * h).abs() <= 1e-14 * h * h);
                assert!(i(5).abs() <= 1e-14 * h.powf(2.5));
                for l in 0..m {
                    assert!(expect(m, h, |b| b.pair(k, l)).abs() <= 1e-14 * h);
                    if k != l {
                        let sq = expect(m, h, |b| b.pair(k, l).powi(2));
                        assert!((sq - 0.5 * h * h).abs() <= 1e-14 * h * h);
                    }
                }
            }
        }
    }
}

#[test]
fn drawn_batches_are_antisymmetric() {
    let fam = StreamFamily::new(3, 1);
    for i in 0..200 {
        let b = draw(4, 0.5, &mut fam.stream(i));
        for k in 0..4 {
            for l in 0..4 {
                if k != l {
                    assert_eq!(b.v(k, l), -b.v(l, k));
                }
            }
        }
    }
}

#[test]
fn streams_reproduce_and_separate() {
    let a: Vec<_> = (0..10).map(|_| 0).scan(RngStream::new(1, 2, 3), |s, _| Some(s.uniform())).collect();
    let b: Vec<_> = (0..10).map(|_| 0).scan(RngStream::new(1, 2, 3), |s, _| Some(s.uniform())).collect();
    assert_eq!(a, b);
    for other in [RngStream::new(2, 2, 3), RngStream::new(1, 3, 3), RngStream::new(1, 2, 4)] {
        let c: Vec<_> = (0..10).map(|_| 0).scan(other, |s, _| Some(s.uniform())).collect();
        assert_ne!(a, c);
    }
}

#[test]
fn gaussian_increments_have_unit_variance() {
    let mut s = RngStream::new(5, 5, 5);
    let mut b = WeakIncrementBatch::empty(1, 0.25);
    let n = 200_000;
    let mut acc = 0.0;
    for _ in 0..n {
        b.redraw(0.25, &mut s, IncrementKind::Gaussian, false);
        acc += b.ihat(0).powi(2);
    }
    assert!((acc / n as f64 - 0.25).abs() < 0.005);
}
