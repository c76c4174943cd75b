//! Kronecker rotations and affine skew products on the torus: correlation
//! sequences, their spectral coefficients, Cesàro flattening of translates
//! and multiple correlations along polynomial patterns.
//!
//! Observables live on a uniform grid. Every time step is applied in closed
//! form: the image of each cell center is computed exactly in fixed point and
//! the observable is read from the cell containing it. Because the maps are
//! affine with integer linear part, this nearest-cell transport permutes the
//! grid, so integrals are preserved exactly.

mod grid;
mod system;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::progressions::PolyVec;
use crate::sequences::SequenceFamily;
use crate::windowset::Window;

pub use grid::{GridFunction, MAX_CELLS};
pub use system::{CellMap, SystemKind, TorusSystem};

/// Default grid for one-dimensional systems.
pub const DEFAULT_GRID_1D: usize = 4096;

/// Default grid per axis for two-dimensional systems: an odd prime with 2 as
/// a primitive root, so `2n·x` frequencies and pullbacks along powers of two
/// do not alias onto the grid.
pub const DEFAULT_GRID_2D: usize = 1019;

pub fn default_grid(d: usize) -> usize {
    if d == 1 {
        DEFAULT_GRID_1D
    } else {
        DEFAULT_GRID_2D
    }
}

/// `σ̂(n) = ∫ (f ∘ T^n) · conj(g) dμ` by grid quadrature.
pub fn correlation(sys: &TorusSystem, f: &GridFunction, g: &GridFunction, n: i64) -> Result<Complex64> {
    correlation_big(sys, f, g, &BigInt::from(n))
}

pub fn correlation_big(sys: &TorusSystem, f: &GridFunction, g: &GridFunction, n: &BigInt) -> Result<Complex64> {
    check_grid(sys, f)?;
    sys.cell_map(n, f.g())?.correlate(f, g)
}

fn check_grid(sys: &TorusSystem, f: &GridFunction) -> Result<()> {
    if f.d() != sys.d() {
        return Err(LabError::InvalidArgument(format!(
            "observable is on a {}-torus, system on a {}-torus",
            f.d(),
            sys.d()
        )));
    }
    Ok(())
}

/// Fourier coefficients of the spectral measure of a correlation sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSeries {
    #[serde(with = "coeff_map")]
    pub coeffs: BTreeMap<i64, Complex64>,
}

mod coeff_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<i64, Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(i64, f64, f64)> = m.iter().map(|(&n, z)| (n, z.re, z.im)).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<i64, Complex64>, D::Error> {
        let rows: Vec<(i64, f64, f64)> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|(n, re, im)| (n, Complex64::new(re, im))).collect())
    }
}

impl SpectralSeries {
    pub fn get(&self, n: i64) -> Option<Complex64> {
        self.coeffs.get(&n).copied()
    }

    /// Largest `|σ̂(n)|` over `n ≠ 0`.
    pub fn max_abs_nonzero(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&n, _)| n != 0)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Coefficients at the requested indices (and their negatives when given).
///
/// For an autocorrelation (`f` and `g` equal) negative indices are filled by
/// conjugation, which is exact for the spectral measure.
pub fn spectral_series_at(sys: &TorusSystem, f: &GridFunction, g: &GridFunction, ns: &[i64]) -> Result<SpectralSeries> {
    check_grid(sys, f)?;
    let auto = f == g;
    let mut wanted: Vec<i64> = ns.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let direct: Vec<i64> = if auto {
        let mut v: Vec<i64> = wanted.iter().map(|n| n.abs()).collect();
        v.sort_unstable();
        v.dedup();
        v
    } else {
        wanted.clone()
    };
    let values = direct
        .par_iter()
        .map(|&n| correlation(sys, f, g, n))
        .collect::<Result<Vec<_>>>()?;
    let computed: BTreeMap<i64, Complex64> = direct.into_iter().zip(values).collect();
    let mut coeffs = BTreeMap::new();
    for n in wanted {
        let z = if auto && n < 0 { computed[&-n].conj() } else { computed[&n] };
        coeffs.insert(n, z);
    }
    Ok(SpectralSeries { coeffs })
}

/// Coefficients for all `|n| <= n_max`.
pub fn spectral_series(sys: &TorusSystem, f: &GridFunction, g: &GridFunction, n_max: u64) -> Result<SpectralSeries> {
    let n_max = i64::try_from(n_max).map_err(|_| LabError::Overflow("n_max".into()))?;
    let ns: Vec<i64> = (-n_max..=n_max).collect();
    spectral_series_at(sys, f, g, &ns)
}

/// `|{n ∈ S_j : |σ̂(n)| > eps}| / |S_j|`.
pub fn wiener_exceedance(series: &SpectralSeries, eps: f64, family: &SequenceFamily, j: u64) -> Result<Ratio<u64>> {
    let members = family.generate(j)?;
    if members.is_empty() {
        return Err(LabError::IndexOutOfRange(format!("S_{j} is empty")));
    }
    let mut hits = 0u64;
    for &n in &members {
        let z = i64::try_from(n)
            .ok()
            .and_then(|n| series.get(n))
            .ok_or_else(|| LabError::IndexOutOfRange(format!("no spectral coefficient at n = {n}")))?;
        if z.norm() > eps {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, members.len() as u64))
}

/// Output of [`cesaro_select`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroSelection {
    #[serde(with = "bigint_strings")]
    pub offsets: Vec<BigInt>,
    /// Running norm after each accepted offset.
    pub norm_history: Vec<f64>,
    pub final_norm: f64,
    /// Generator elements examined, accepted or not.
    pub examined: usize,
    pub reached: bool,
}

mod bigint_strings {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        let strs: Vec<String> = Vec::deserialize(d)?;
        strs.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Greedy Cesàro flattening.
///
/// Draws `a_1 < a_2 < ...` from `generator` and keeps a candidate when the
/// running average `‖(1/N) Σ f ∘ T^{-a_n}‖₂` does not exceed `slack` times
/// its previous value. Stops once the norm is below `tol` or after `n_cap`
/// candidates. With `slack = 1` the accepted norms are non-increasing.
pub fn cesaro_select(
    sys: &TorusSystem,
    f: &GridFunction,
    generator: impl IntoIterator<Item = BigInt>,
    tol: f64,
    n_cap: usize,
    slack: f64,
) -> Result<CesaroSelection> {
    check_grid(sys, f)?;
    let g = f.g();
    let mut sum = f.zeros_like();
    let mut offsets: Vec<BigInt> = Vec::new();
    let mut norm_history = Vec::new();
    let mut current = f64::INFINITY;
    let mut examined = 0usize;
    let mut last: Option<BigInt> = None;

    for a in generator.into_iter().take(n_cap) {
        examined += 1;
        if last.as_ref().is_some_and(|prev| a <= *prev) {
            return Err(LabError::InvalidArgument("generator must be strictly increasing".into()));
        }
        last = Some(a.clone());
        let pulled = sys.cell_map(&-&a, g)?.pullback(f)?;
        let count = (offsets.len() + 1) as f64;
        let norm = sum_norm(&sum, &pulled) / count;
        if offsets.is_empty() || norm <= slack * current {
            for (s, p) in sum.values_mut().iter_mut().zip(pulled.values()) {
                *s += p;
            }
            offsets.push(a);
            norm_history.push(norm);
            current = norm;
            if current < tol {
                break;
            }
        }
    }

    let selection = CesaroSelection {
        final_norm: current,
        reached: current < tol,
        offsets,
        norm_history,
        examined,
    };
    if selection.reached {
        Ok(selection)
    } else {
        Err(LabError::ToleranceNotReached {
            best: Box::new(selection),
        })
    }
}

fn sum_norm(a: &GridFunction, b: &GridFunction) -> f64 {
    let g = a.g();
    let (av, bv) = (a.values(), b.values());
    let rows: Vec<f64> = (0..av.len() / g)
        .into_par_iter()
        .map(|row| {
            let r = row * g..(row + 1) * g;
            av[r.clone()].iter().zip(&bv[r]).map(|(x, y)| (x + y).norm_sqr()).sum()
        })
        .collect();
    let mut acc = crate::sequences::CompensatedSum::default();
    for r in rows {
        acc.add(r);
    }
    (acc.value() / av.len() as f64).sqrt()
}

/// `f_{A'} = (1/|A'|) Σ_{a ∈ A'} f ∘ T^{-a}`.
pub fn averaged_observable(sys: &TorusSystem, f: &GridFunction, offsets: &[BigInt]) -> Result<GridFunction> {
    check_grid(sys, f)?;
    if offsets.is_empty() {
        return Err(LabError::InvalidArgument("offset set must be nonempty".into()));
    }
    let mut acc = f.zeros_like();
    for a in offsets {
        let pulled = sys.cell_map(&-a, f.g())?.pullback(f)?;
        for (s, p) in acc.values_mut().iter_mut().zip(pulled.values()) {
            *s += p;
        }
    }
    let k = offsets.len() as f64;
    Ok(acc.map(|z| z / k))
}

fn check_unit_interval(f: &GridFunction) -> Result<()> {
    let (lo, hi) = f.real_range();
    if f.max_abs_imag() > 1e-12 || lo < -1e-12 || hi > 1.0 + 1e-12 {
        return Err(LabError::InvalidArgument(
            "multiple correlation needs a real observable with values in [0, 1]".into(),
        ));
    }
    Ok(())
}

/// `I_p(f; n) = ∫ f · Π_i f ∘ T^{p_i(n)} dμ`.
pub fn multi_correlation(sys: &TorusSystem, f: &GridFunction, pvec: &PolyVec, n: i64) -> Result<f64> {
    check_grid(sys, f)?;
    check_unit_interval(f)?;
    multi_correlation_unchecked(sys, f, pvec, n)
}

fn multi_correlation_unchecked(sys: &TorusSystem, f: &GridFunction, pvec: &PolyVec, n: i64) -> Result<f64> {
    let t = BigInt::from(n);
    let mut prod: Vec<f64> = f.values().iter().map(|z| z.re).collect();
    for p in &pvec.polys {
        let pulled = sys.cell_map(&p.eval_big(&t), f.g())?.pullback(f)?;
        for (x, z) in prod.iter_mut().zip(pulled.values()) {
            *x *= z.re;
        }
    }
    let mut acc = crate::sequences::CompensatedSum::default();
    for x in &prod {
        acc.add(*x);
    }
    Ok(acc.value() / prod.len() as f64)
}

/// `I_p(f; n)` for every `n` in the range.
pub fn multi_correlation_series(sys: &TorusSystem, f: &GridFunction, pvec: &PolyVec, n_range: Window) -> Result<Vec<f64>> {
    check_grid(sys, f)?;
    check_unit_interval(f)?;
    n_range
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| multi_correlation_unchecked(sys, f, pvec, n))
        .collect()
}

/// Frequency of `n` in the range with `|I_p(f; n) - (∫f)^k| > eps`.
pub fn weak_mixing_statistic(sys: &TorusSystem, f: &GridFunction, pvec: &PolyVec, eps: f64, n_range: Window) -> Result<Ratio<u64>> {
    let series = multi_correlation_series(sys, f, pvec, n_range)?;
    let target = f.mean().re.powi(pvec.k() as i32);
    let hits = series.iter().filter(|&&v| (v - target).abs() > eps).count() as u64;
    Ok(Ratio::new(hits, series.len() as u64))
}

/// Powers of two `1, 2, 4, ...` as an offset generator.
pub fn powers_of_two() -> impl Iterator<Item = BigInt> {
    (0u32..).map(|e| BigInt::from(1u32) << e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progressions::IntPoly;
    use crate::sequences::Alpha;

    fn one(d: usize, g: usize) -> GridFunction {
        GridFunction::constant(d, g, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn constants_correlate_to_constant() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let c = GridFunction::constant(2, 31, Complex64::new(0.25, 0.5)).unwrap();
        for n in [0, 1, 9, -4] {
            let z = correlation(&sys, &c, &one(2, 31), n).unwrap();
            assert!((z - Complex64::new(0.25, 0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_lag_is_inner_product() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let f = GridFunction::from_fn(2, 17, |x| Complex64::new(x[0] * x[1], x[0])).unwrap();
        let g = GridFunction::exp_y(2, 17).unwrap();
        assert_eq!(correlation(&sys, &f, &g, 0).unwrap(), f.inner(&g).unwrap());
    }

    #[test]
    fn skew_orthogonality_small() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let f = GridFunction::exp_y(2, 101).unwrap();
        assert!((correlation(&sys, &f, &f, 0).unwrap().norm() - 1.0).abs() < 1e-12);
        for n in 1..50 {
            assert!(correlation(&sys, &f, &f, n).unwrap().norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn kronecker_eigenfunction() {
        let sys = TorusSystem::kronecker1d(&Alpha::sqrt2(), 192).unwrap();
        let f = GridFunction::exp_axis(1, 4096, 0, 1).unwrap();
        let alpha = 2f64.sqrt() - 1.0;
        for n in [1i64, 2, 7, 100] {
            let z = correlation(&sys, &f, &f, n).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-12);
            let want = Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 * alpha);
            assert!((z - want).norm() < 2.0 * std::f64::consts::PI / 4096.0);
        }
    }

    #[test]
    fn spectral_series_hermitian_and_atoms() {
        let sys = TorusSystem::kronecker1d(&Alpha::sqrt2(), 192).unwrap();
        let f = GridFunction::exp_axis(1, 512, 0, 1).unwrap();
        let s = spectral_series(&sys, &f, &f, 20).unwrap();
        assert_eq!(s.coeffs.len(), 41);
        for n in 1..=20 {
            assert_eq!(s.get(-n).unwrap(), s.get(n).unwrap().conj());
            assert!((s.get(n).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let ones = spectral_series(&sys, &one(1, 64), &one(1, 64), 5).unwrap();
        assert!(ones.coeffs.values().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn cross_series_negative_direct() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let f = GridFunction::from_fn(2, 23, |x| Complex64::new(x[0], x[1] * x[1])).unwrap();
        let g = GridFunction::from_fn(2, 23, |x| Complex64::new(x[1], 0.0)).unwrap();
        let fg = spectral_series(&sys, &f, &g, 4).unwrap();
        let gf = spectral_series(&sys, &g, &f, 4).unwrap();
        // σ_{f,g}(-n) = conj(σ_{g,f}(n)) holds exactly for permutation transports
        for n in 1..=4 {
            assert!((fg.get(-n).unwrap() - gf.get(n).unwrap().conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn wiener_controls() {
        let mut coeffs = BTreeMap::new();
        for n in 0..=100 {
            coeffs.insert(n, if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        }
        let lebesgue = SpectralSeries { coeffs };
        assert_eq!(
            wiener_exceedance(&lebesgue, 0.05, &SequenceFamily::Squares, 10).unwrap(),
            Ratio::new(0, 1)
        );
        let atom = SpectralSeries {
            coeffs: (0..=100).map(|n| (n, Complex64::from_polar(1.0, n as f64))).collect(),
        };
        assert_eq!(
            wiener_exceedance(&atom, 0.5, &SequenceFamily::Primes, 100).unwrap(),
            Ratio::new(1, 1)
        );
        assert!(matches!(
            wiener_exceedance(&atom, 0.5, &SequenceFamily::Squares, 11),
            Err(LabError::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn cesaro_zero_function() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let zero = GridFunction::constant(2, 11, Complex64::new(0.0, 0.0)).unwrap();
        let sel = cesaro_select(&sys, &zero, powers_of_two(), 0.05, 100, 1.0).unwrap();
        assert_eq!(sel.offsets.len(), 1);
        assert_eq!(sel.final_norm, 0.0);
    }

    #[test]
    fn cesaro_invariant_function_fails() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        match cesaro_select(&sys, &one(2, 11), powers_of_two(), 0.5, 50, 1.0) {
            Err(LabError::ToleranceNotReached { best }) => {
                assert!(!best.reached);
                assert!((best.final_norm - 1.0).abs() < 1e-12);
                assert_eq!(best.examined, 50);
            }
            other => panic!("expected ToleranceNotReached, got {other:?}"),
        }
    }

    #[test]
    fn cesaro_rejects_non_increasing_generator() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let f = GridFunction::exp_y(2, 11).unwrap();
        let gen = vec![BigInt::from(3), BigInt::from(3)];
        assert!(matches!(
            cesaro_select(&sys, &f, gen, 0.01, 10, 1.0),
            Err(LabError::InvalidArgument(_))
        ));
    }

    #[test]
    fn averaging_preserves_integral() {
        let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 256).unwrap();
        let f = GridFunction::from_fn(2, 19, |x| Complex64::new(x[0] * x[1], x[1])).unwrap();
        let single = averaged_observable(&sys, &f, &[BigInt::from(0)]).unwrap();
        assert_eq!(single, f);
        let offs: Vec<BigInt> = [1, 5, 12, 40].iter().map(|&a| BigInt::from(a)).collect();
        let avg = averaged_observable(&sys, &f, &offs).unwrap();
        assert!((avg.mean() - f.mean()).norm() < 1e-14);
    }

    #[test]
    fn half_torus_average_values() {
        let sys = TorusSystem::kronecker1d(&Alpha::Decimal("0.5".into()), 192).unwrap();
        let f = GridFunction::indicator_interval(64, 0.0, 0.5).unwrap();
        let avg = averaged_observable(&sys, &f, &[BigInt::from(0), BigInt::from(1)]).unwrap();
        assert!(avg.values().iter().all(|z| (z.re - 0.5).abs() < 1e-15));
        let sys = TorusSystem::kronecker1d(&Alpha::Decimal("0.25".into()), 192).unwrap();
        let avg = averaged_observable(&sys, &f, &[BigInt::from(0), BigInt::from(1)]).unwrap();
        for z in avg.values() {
            assert!([0.0, 0.5, 1.0].contains(&z.re));
        }
    }

    #[test]
    fn multi_correlation_collapsed_and_constant() {
        let sys = TorusSystem::kronecker1d(&Alpha::sqrt2(), 192).unwrap();
        let f = GridFunction::indicator_interval(1000, 0.0, 0.3).unwrap();
        let pv = PolyVec::new(vec![IntPoly::monomial(1, 2), IntPoly::monomial(3, 2)]);
        // p_i(0) = 0 collapses the pattern to ∫ f^3
        assert!((multi_correlation(&sys, &f, &pv, 0).unwrap() - 0.3).abs() < 1e-12);
        let c = one(1, 100);
        for n in 0..5 {
            assert!((multi_correlation(&sys, &c, &pv, n).unwrap() - 1.0).abs() < 1e-15);
        }
        let bad = GridFunction::constant(1, 10, Complex64::new(2.0, 0.0)).unwrap();
        assert!(multi_correlation(&sys, &bad, &pv, 1).is_err());
    }

    #[test]
    fn weak_mixing_constant_is_zero() {
        let sys = TorusSystem::kronecker1d(&Alpha::sqrt2(), 192).unwrap();
        let c = GridFunction::constant(1, 64, Complex64::new(0.5, 0.0)).unwrap();
        let r = weak_mixing_statistic(&sys, &c, &PolyVec::arithmetic(3), 1e-9, Window::new(1, 200).unwrap()).unwrap();
        assert_eq!(r, Ratio::new(0, 1));
    }

    #[test]
    fn dimension_mismatch() {
        let sys = TorusSystem::kronecker1d(&Alpha::sqrt2(), 192).unwrap();
        let f = GridFunction::exp_y(2, 8).unwrap();
        assert!(correlation(&sys, &f, &f, 1).is_err());
    }
}
