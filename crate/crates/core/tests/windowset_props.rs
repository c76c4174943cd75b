mod common;

use common::{members, naive_intersection, naive_sumset};
use proptest::prelude::*;
use sumset_lab::experiments::bernoulli_set;
use sumset_lab::windowset::union_translates;
use sumset_lab::{sumset, FiniteOffsets, Window, WindowSet};

fn w(lo: i64, hi: i64) -> Window {
    Window::new(lo, hi).unwrap()
}

#[test]
fn construction_clips_to_window() {
    assert_eq!(WindowSet::from_elements(&[1, 2, 10], w(0, 20)).popcount(), 3);
    let empty = WindowSet::from_elements(&[], w(0, 8));
    assert_eq!(empty.popcount(), 0);
    assert_eq!(empty.valid(), w(0, 8));
    assert_eq!(WindowSet::from_elements(&[-1, 25], w(0, 20)).popcount(), 0);
}

#[test]
fn shift_examples() {
    let s = WindowSet::from_elements(&[4, 8], w(0, 16));
    let t = s.shift(4);
    assert_eq!(t.to_vec(), vec![0, 4]);
    assert_eq!(t.window(), w(-4, 12));
    assert_eq!(s.shift(0), s);
}

#[test]
fn intersect_translates_examples() {
    let e = WindowSet::from_fn(w(0, 100), |x| x % 4 == 0);
    let r = e.intersect_translates(&[0, 4, 8]).unwrap();
    assert_eq!(r.valid(), w(0, 92));
    assert_eq!(r.to_vec(), (0..92).filter(|x| x % 4 == 0).collect::<Vec<_>>());

    let evens = WindowSet::from_fn(w(0, 100), |x| x % 2 == 0);
    assert_eq!(evens.intersect_translates(&[0, 1]).unwrap().popcount(), 0);
}

#[test]
fn intersect_translates_matches_triple_loop() {
    let e = bernoulli_set(w(0, 10_000), 0.5, 42);
    let r = e.intersect_translates(&[0, 7, 14]).unwrap();
    let set = members(&e);
    let mut count = 0;
    for x in 0..10_000 - 14 {
        if set.contains(&x) && set.contains(&(x + 7)) && set.contains(&(x + 14)) {
            count += 1;
        }
    }
    assert_eq!(r.popcount(), count);
}

#[test]
fn sumset_examples() {
    let b = WindowSet::from_elements(&[1, 2, 10], w(0, 20));
    let e = sumset(&FiniteOffsets::new(vec![0, 5]).unwrap(), &b).unwrap();
    assert_eq!(e.valid(), w(5, 20));
    assert_eq!(e.to_vec(), vec![6, 7, 10, 15]);

    let id = sumset(&FiniteOffsets::new(vec![0]).unwrap(), &b).unwrap();
    assert_eq!(id.to_vec(), b.to_vec());
    assert_eq!(id.valid(), b.valid());

    let thirds = WindowSet::from_fn(w(0, 30_000), |x| x % 3 == 0);
    let all = sumset(&FiniteOffsets::new(vec![0, 1, 2]).unwrap(), &thirds).unwrap();
    assert_eq!(all.popcount(), all.valid().len());
}

#[test]
fn union_translates_examples() {
    let d = bernoulli_set(w(0, 1_000), 0.4, 3);
    let single = union_translates(&d, &FiniteOffsets::new(vec![0]).unwrap()).unwrap();
    assert_eq!(single.to_vec(), d.to_vec());

    let evens = WindowSet::from_fn(w(0, 1_000), |x| x % 2 == 0);
    let all = union_translates(&evens, &FiniteOffsets::new(vec![0, 1]).unwrap()).unwrap();
    assert_eq!(all.popcount(), all.valid().len());
}

#[test]
fn union_of_random_translates_has_independent_density() {
    let d = bernoulli_set(w(0, 100_000), 0.3, 5);
    let offsets = FiniteOffsets::new(vec![0, 13, 101, 257, 600, 911, 1_409, 2_003, 2_711, 3_301]).unwrap();
    let u = union_translates(&d, &offsets).unwrap();
    let measured = u.popcount() as f64 / u.valid().len() as f64;
    let expected = 1.0 - 0.7f64.powi(10);
    assert!((measured - expected).abs() < 0.01, "{measured} vs {expected}");
    let oracle = naive_sumset(offsets.elements(), &members(&d), u.valid());
    assert_eq!(members(&u), oracle);
}

#[test]
fn words_are_little_endian_in_text_form() {
    let s = WindowSet::from_elements(&[0, 9], w(0, 64));
    let text = s.to_text();
    let hex_line = text.lines().nth(1).unwrap();
    assert!(hex_line.starts_with("0102"), "{hex_line}");
}

fn arb_set() -> impl Strategy<Value = WindowSet> {
    (-300i64..300, 1usize..400, prop::collection::vec(any::<bool>(), 400))
        .prop_map(|(lo, len, bits)| WindowSet::from_bools(w(lo, lo + len as i64), &bits[..len]).unwrap())
}

proptest! {
    #[test]
    fn shift_preserves_popcount(s in arb_set(), t in -1_000i64..1_000) {
        prop_assert_eq!(s.shift(t).popcount(), s.popcount());
    }

    #[test]
    fn shift_composes(s in arb_set(), a in -500i64..500, b in -500i64..500) {
        prop_assert_eq!(s.shift(a).shift(b), s.shift(a + b));
    }

    #[test]
    fn intersect_with_zero_is_identity(s in arb_set()) {
        prop_assert_eq!(s.intersect_translates(&[0]).unwrap().to_vec(), s.to_vec());
    }

    #[test]
    fn intersect_matches_oracle(s in arb_set(), offs in prop::collection::vec(-40i64..40, 1..5)) {
        if let Ok(r) = s.intersect_translates(&offs) {
            prop_assert_eq!(members(&r), naive_intersection(&members(&s), &offs, r.valid()));
        }
    }

    #[test]
    fn sumset_matches_oracle(s in arb_set(), offs in prop::collection::vec(-70i64..70, 1..6)) {
        let a = FiniteOffsets::new(offs).unwrap();
        if let Ok(e) = sumset(&a, &s) {
            prop_assert_eq!(members(&e), naive_sumset(a.elements(), &members(&s), e.valid()));
        }
    }

    #[test]
    fn text_round_trip(s in arb_set()) {
        prop_assert_eq!(WindowSet::from_text(&s.to_text()).unwrap(), s);
    }
}
