mod common;

use common::{frac, members, naive_best_window};
use num_rational::Ratio;
use proptest::prelude::*;
use sumset_lab::density::{banach_density, banach_density_sweep, relative_density};
use sumset_lab::experiments::bernoulli_set;
use sumset_lab::sequences::SequenceFamily;
use sumset_lab::{Window, WindowSet};

fn w(lo: i64, hi: i64) -> Window {
    Window::new(lo, hi).unwrap()
}

#[test]
fn periodic_and_empty() {
    let thirds = WindowSet::from_fn(w(0, 30_000), |x| x % 3 == 0);
    assert_eq!(banach_density(&thirds, 2_999).unwrap().value, Ratio::new(1, 3));
    for est in banach_density_sweep(&thirds, &[299, 2_999, 29_999]).unwrap() {
        assert_eq!(est.value, Ratio::new(1, 3));
    }
    let empty = WindowSet::empty(w(0, 1_000));
    assert_eq!(banach_density(&empty, 99).unwrap().value, Ratio::new(0, 1));
}

#[test]
fn finite_block_decays() {
    let s = WindowSet::from_fn(w(0, 1_000_000), |x| x < 10);
    let v: Vec<_> = banach_density_sweep(&s, &[9, 99, 999]).unwrap().into_iter().map(|e| e.value).collect();
    assert_eq!(v, vec![Ratio::new(1, 1), Ratio::new(1, 10), Ratio::new(1, 100)]);
}

#[test]
fn golden_rotation_quarter() {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let s = WindowSet::from_fn(w(0, 1_000_000), |n| frac(n as f64 * phi) < 0.25);
    let d = banach_density(&s, 99_999).unwrap().as_f64();
    assert!((d - 0.25).abs() < 0.01, "{d}");

    // same set on a shorter window against the exhaustive window scan
    let small = WindowSet::from_fn(w(0, 20_000), |n| frac(n as f64 * phi) < 0.25);
    let est = banach_density(&small, 999).unwrap();
    assert_eq!(est.count, naive_best_window(&members(&small), small.valid(), 1_000));
}

#[test]
fn bernoulli_sweep_settles_near_half() {
    let s = bernoulli_set(w(0, 1 << 20), 0.5, 7);
    let v: Vec<f64> = banach_density_sweep(&s, &[99, 999, 9_999])
        .unwrap()
        .iter()
        .map(|e| e.as_f64())
        .collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    assert!((v[2] - 0.5).abs() < 0.02, "{v:?}");
}

#[test]
fn relative_density_examples() {
    let all = WindowSet::full(w(0, 20_000));
    assert_eq!(relative_density(&all, &SequenceFamily::Squares, 100).unwrap(), Ratio::new(1, 1));
    let evens = WindowSet::from_fn(w(0, 20_000), |x| x % 2 == 0);
    assert_eq!(relative_density(&evens, &SequenceFamily::Squares, 100).unwrap(), Ratio::new(1, 2));

    let r2 = 2f64.sqrt();
    let a = WindowSet::from_fn(w(0, 100_000_001), |n| frac(n as f64 * r2) < 0.3);
    let v = relative_density(&a, &SequenceFamily::Squares, 10_000).unwrap();
    let v = *v.numer() as f64 / *v.denom() as f64;
    let direct = (1..=10_000i64).filter(|m| frac((m * m) as f64 * r2) < 0.3).count() as f64 / 1e4;
    assert!((v - 0.3).abs() < 0.02, "{v}");
    assert!((v - direct).abs() < 0.002, "{v} vs {direct}");
}

proptest! {
    #[test]
    fn matches_exhaustive_scan(bits in prop::collection::vec(any::<bool>(), 50..400), m in 0u64..40) {
        let s = WindowSet::from_bools(w(0, bits.len() as i64), &bits).unwrap();
        let est = banach_density(&s, m).unwrap();
        prop_assert_eq!(est.count, naive_best_window(&members(&s), s.valid(), m + 1));
        let lo = est.argmax_window.lo();
        prop_assert_eq!(s.count_range(lo, lo + m as i64 + 1), est.count);
    }

    #[test]
    fn shift_invariant(bits in prop::collection::vec(any::<bool>(), 50..300), m in 0u64..40, t in -500i64..500) {
        let s = WindowSet::from_bools(w(0, bits.len() as i64), &bits).unwrap();
        prop_assert_eq!(banach_density(&s, m).unwrap().value, banach_density(&s.shift(t), m).unwrap().value);
    }
}
