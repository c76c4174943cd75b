use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use sumset_lab::dynamics::{
    averaged_observable, cesaro_select, correlation, multi_correlation, powers_of_two, spectral_series,
    spectral_series_at, weak_mixing_statistic, wiener_exceedance, GridFunction, TorusSystem,
};
use sumset_lab::progressions::PolyVec;
use sumset_lab::sequences::{frac_part_power, Alpha, FixedPointReal, SequenceFamily};
use sumset_lab::{LabError, Window};

const BITS: u32 = 256;

fn alpha() -> FixedPointReal {
    Alpha::sqrt2().render(BITS).unwrap()
}

fn skew() -> TorusSystem {
    TorusSystem::skew_quadratic(&Alpha::sqrt2(), BITS).unwrap()
}

fn rotation() -> TorusSystem {
    TorusSystem::kronecker1d(&Alpha::sqrt2(), BITS).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn closed_form_orbits() {
    let sys = skew();
    let origin = vec![FixedPointReal::zero(BITS).unwrap(); 2];
    for n in [1u64, 7, 12, 1_000, 123_456] {
        let p = sys.iterate(&origin, &BigInt::from(n)).unwrap();
        assert_eq!(p[0], frac_part_power(n, 1, &alpha()).unwrap(), "n={n}");
        assert_eq!(p[1], frac_part_power(n, 2, &alpha()).unwrap(), "n={n}");
    }
    let rot = rotation();
    let x0 = vec![FixedPointReal::from_f64(0.25, BITS).unwrap()];
    assert_eq!(rot.iterate(&x0, &BigInt::from(0)).unwrap(), x0);
    let zero = vec![FixedPointReal::zero(BITS).unwrap()];
    let p = rot.iterate(&zero, &BigInt::from(12)).unwrap();
    let expected = (12.0 * (2f64.sqrt() - 1.0)).fract();
    assert!((p[0].to_f64() - expected).abs() < 1e-12);
    assert!((p[0].to_f64() - 0.9706).abs() < 1e-4);
}

#[test]
fn correlation_examples() {
    let rot = rotation();
    let e = GridFunction::exp_axis(1, 4096, 0, 1).unwrap();
    let a = 2f64.sqrt() - 1.0;
    for n in [1i64, 5, 100, -3] {
        let z = correlation(&rot, &e, &e, n).unwrap();
        let expected = Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 * a);
        assert!((z.norm() - 1.0).abs() < 1e-9);
        assert!((z - expected).norm() < 1e-2, "n={n} {z} vs {expected}");
    }

    let sys = skew();
    let f = GridFunction::exp_y(2, 1019).unwrap();
    assert!((correlation(&sys, &f, &f, 0).unwrap() - c(1.0)).norm() < 1e-12);
    for n in 1..=50 {
        assert!(correlation(&sys, &f, &f, n).unwrap().norm() < 1e-9, "n={n}");
    }

    let k = GridFunction::constant(2, 1019, Complex64::new(0.3, -0.2)).unwrap();
    let one = GridFunction::constant(2, 1019, c(1.0)).unwrap();
    for n in [0, 1, 17] {
        assert!((correlation(&sys, &k, &one, n).unwrap() - Complex64::new(0.3, -0.2)).norm() < 1e-12);
    }
}

#[test]
fn correlation_at_zero_is_inner_product() {
    let sys = skew();
    let f = GridFunction::from_fn(2, 101, |p| Complex64::new(p[0] * p[1], p[0] - p[1])).unwrap();
    let g = GridFunction::from_fn(2, 101, |p| Complex64::new(1.0 - p[1], p[0])).unwrap();
    let direct: Complex64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b.conj()).sum::<Complex64>() / f.len() as f64;
    assert!((correlation(&sys, &f, &g, 0).unwrap() - direct).norm() < 1e-12);
}

#[test]
fn measure_is_preserved() {
    let sys = skew();
    let f = GridFunction::from_fn(2, 257, |p| c((p[0] * 3.0).sin() + p[1] * p[1])).unwrap();
    let one = GridFunction::constant(2, 257, c(1.0)).unwrap();
    for n in [1, 9, 1_000, 99_999] {
        let z = correlation(&sys, &f, &one, n).unwrap();
        assert!((z - f.mean()).norm() < 1e-9, "n={n}");
    }
}

#[test]
fn spectral_series_atoms() {
    let one = GridFunction::constant(1, 512, c(1.0)).unwrap();
    let s = spectral_series(&rotation(), &one, &one, 40).unwrap();
    assert!(s.coeffs.values().all(|z| (z - c(1.0)).norm() < 1e-12));

    let e = GridFunction::exp_axis(1, 4096, 0, 1).unwrap();
    let s = spectral_series(&rotation(), &e, &e, 40).unwrap();
    for n in -40..=40 {
        let z = s.get(n).unwrap();
        assert!((z - s.get(-n).unwrap().conj()).norm() < 1e-12);
        assert!((z.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn skew_kronecker_free_part_has_no_spectrum() {
    let sys = skew();
    let f = GridFunction::from_fn(2, 1019, |p| c((std::f64::consts::TAU * p[1]).cos() + p[0])).unwrap();
    let (_, h) = f.kronecker_split();
    let s = spectral_series(&sys, &h, &h, 100).unwrap();
    assert!(s.max_abs_nonzero() < 1e-9, "{}", s.max_abs_nonzero());
}

#[test]
fn wiener_exceedance_examples() {
    let sys = skew();
    let f = GridFunction::exp_y(2, 1019).unwrap();
    let squares: Vec<i64> = (1..=1_000i64).map(|m| m * m).collect();
    let s = spectral_series_at(&sys, &f, &f, &squares).unwrap();
    assert_eq!(wiener_exceedance(&s, 0.05, &SequenceFamily::Squares, 1_000).unwrap(), Ratio::new(0, 1));

    let e = GridFunction::exp_axis(1, 4096, 0, 1).unwrap();
    let s = spectral_series(&rotation(), &e, &e, 100).unwrap();
    assert_eq!(wiener_exceedance(&s, 0.5, &SequenceFamily::Squares, 10).unwrap(), Ratio::new(1, 1));
}

#[test]
fn cesaro_flattens_the_fiber_character() {
    let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 1024).unwrap();
    let f = GridFunction::exp_y(2, 1019).unwrap();
    let tol = 0.05;
    let sel = cesaro_select(&sys, &f, powers_of_two(), tol, 2_000, 1.0).unwrap();
    assert!(sel.final_norm < tol);
    // 1/√N first drops below tol at N = 1/tol² + 1
    assert!(sel.offsets.len() as f64 <= (1.0 / (tol * tol)).round() + 1.0);
    // the pulled-back characters are orthogonal, so the norm is N^{-1/2}
    let avg = averaged_observable(&sys, &f, &sel.offsets).unwrap();
    let n = sel.offsets.len() as f64;
    assert!((avg.norm() - n.powf(-0.5)).abs() < 1e-9);
    assert!(sel.norm_history.windows(2).all(|p| p[1] <= p[0]));

    let one = GridFunction::constant(2, 1019, c(1.0)).unwrap();
    assert!(matches!(
        cesaro_select(&sys, &one, powers_of_two(), 0.5, 30, 1.0),
        Err(LabError::ToleranceNotReached { .. })
    ));
}

#[test]
fn multiple_correlation_near_zero_orbit() {
    let rot = rotation();
    let d = GridFunction::indicator_interval(4096, 0.0, 0.3).unwrap();
    let pvec = PolyVec::arithmetic(3);
    let pvec = PolyVec::new(pvec.polys[1..].to_vec());
    let r = 2f64.sqrt() - 1.0;
    let mut seen = 0;
    for n in 1..=100_000i64 {
        let x = (n as f64 * r).fract();
        if x < 1e-3 {
            seen += 1;
            let v = multi_correlation(&rot, &d, &pvec, n).unwrap();
            assert!(v >= 0.3 - 0.01, "n={n} I={v}");
        }
    }
    assert!(seen > 0);

    let one = GridFunction::constant(1, 512, c(1.0)).unwrap();
    assert_eq!(multi_correlation(&rot, &one, &pvec, 77).unwrap(), 1.0);
    let collapsed = multi_correlation(&rot, &d, &pvec, 0).unwrap();
    assert!((collapsed - d.mean().re).abs() < 1e-12);
}

#[test]
fn weak_mixing_statistics() {
    let rot = rotation();
    let pvec = PolyVec::new(vec!["n".parse().unwrap(), "2n".parse().unwrap()]);
    let half = GridFunction::indicator_interval(4096, 0.0, 0.5).unwrap();
    let r = weak_mixing_statistic(&rot, &half, &pvec, 0.01, Window::inclusive(1, 10_000).unwrap()).unwrap();
    assert!(*r.numer() as f64 / *r.denom() as f64 > 0.5, "{r}");

    let one = GridFunction::constant(1, 512, c(1.0)).unwrap();
    let r = weak_mixing_statistic(&rot, &one, &pvec, 0.01, Window::inclusive(1, 100).unwrap()).unwrap();
    assert_eq!(r, Ratio::new(0, 1));

    let sys = skew();
    let shifted = GridFunction::exp_y(2, 1019).unwrap().map(|z| c((z.re + 1.0) / 2.0));
    let single = PolyVec::new(vec!["n".parse().unwrap()]);
    let r = weak_mixing_statistic(&sys, &shifted, &single, 0.01, Window::inclusive(1, 300).unwrap()).unwrap();
    assert!(*r.numer() as f64 / *r.denom() as f64 <= 0.05, "{r}");
}
