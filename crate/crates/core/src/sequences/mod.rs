//! Sequence families, Weyl averages and intersective sets.

mod fixed;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::windowset::Window;

pub use fixed::{
    f64_to_frac128, frac_part_power, Alpha, Arc, FixedPointReal, BUDGET_MARGIN_BITS,
    MIN_FRAC_BITS,
};

/// Largest sieve bound for the primes family.
pub const PRIME_SIEVE_LIMIT: u64 = 100_000_000;

/// Largest index accepted by any family (memory guard).
pub const MAX_INDEX: u64 = 100_000_000;

/// The finite index sets `S_j` used for Weyl averages and relative density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceFamily {
    /// `{1, 4, 9, ..., j^2}`
    Squares,
    /// primes `p <= j`
    Primes,
    /// `{2^j, 2^j + 1, ..., 2^j + j - 1}`
    Blocks,
    /// `{floor(m^(5/2)) : 1 <= m <= j}`
    #[serde(rename = "floor_pow_5_2")]
    FloorPow52,
    /// `{floor(sqrt(2) m^5 - pi m^3) : 1 <= m <= j}`
    PolyFloor,
}

impl SequenceFamily {
    pub const ALL: [SequenceFamily; 5] = [
        SequenceFamily::Squares,
        SequenceFamily::Primes,
        SequenceFamily::Blocks,
        SequenceFamily::FloorPow52,
        SequenceFamily::PolyFloor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SequenceFamily::Squares => "squares",
            SequenceFamily::Primes => "primes",
            SequenceFamily::Blocks => "blocks",
            SequenceFamily::FloorPow52 => "floor_pow_5_2",
            SequenceFamily::PolyFloor => "poly_floor",
        }
    }

    fn check_index(&self, j: u64) -> Result<()> {
        if j == 0 {
            return Err(LabError::InvalidArgument("family index j must be at least 1".into()));
        }
        if j > MAX_INDEX {
            return Err(LabError::InvalidArgument(format!("family index {j} exceeds {MAX_INDEX}")));
        }
        if *self == SequenceFamily::Primes && j > PRIME_SIEVE_LIMIT {
            return Err(LabError::InvalidArgument(format!(
                "prime sieve limited to {PRIME_SIEVE_LIMIT}"
            )));
        }
        Ok(())
    }

    /// The elements of `S_j` in increasing order.
    pub fn generate(&self, j: u64) -> Result<Vec<i128>> {
        self.check_index(j)?;
        match self {
            SequenceFamily::Squares => Ok((1..=j as i128).map(|m| m * m).collect()),
            SequenceFamily::Primes => Ok(primes_up_to(j).into_iter().map(i128::from).collect()),
            SequenceFamily::Blocks => {
                if j > 126 {
                    return Err(LabError::Overflow(format!(
                        "2^{j} + {} exceeds the 128-bit integer width",
                        j - 1
                    )));
                }
                let base = 1i128 << j;
                Ok((0..j as i128).map(|i| base + i).collect())
            }
            SequenceFamily::FloorPow52 => (1..=j)
                .map(|m| {
                    let m5 = (m as u128)
                        .checked_pow(5)
                        .ok_or_else(|| LabError::Overflow(format!("{m}^5 exceeds 128 bits")))?;
                    Ok(m5.sqrt() as i128)
                })
                .collect(),
            SequenceFamily::PolyFloor => {
                let coeffs = PolyFloorCoefficients::new();
                (1..=j).map(|m| coeffs.eval(m)).collect()
            }
        }
    }

    /// The elements of `S_j` reduced mod `2^128`, sufficient for phases against
    /// 128-bit angles. Defined for block indices far beyond the integer width.
    pub fn residues(&self, j: u64) -> Result<Vec<u128>> {
        match self {
            SequenceFamily::Blocks => {
                self.check_index(j)?;
                let base: u128 = if j < 128 { 1u128 << j } else { 0 };
                Ok((0..j as u128).map(|i| base.wrapping_add(i)).collect())
            }
            _ => Ok(self.generate(j)?.into_iter().map(|x| x as u128).collect()),
        }
    }

    /// Angles `2π a/q` (`q <= max_den`, `gcd(a, q) = 1`) where the family is
    /// known to concentrate; empty for the equidistributed families.
    pub fn analytic_suspects(&self, max_den: u64) -> Vec<Angle> {
        match self {
            SequenceFamily::Squares | SequenceFamily::Primes => {
                let mut out = Vec::new();
                for q in 2..=max_den {
                    for a in 1..q {
                        if a.gcd(&q) == 1 {
                            out.push(Angle::from_ratio(a, q));
                        }
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

impl FromStr for SequenceFamily {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        SequenceFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| LabError::Parse(format!("unknown sequence family {s:?}")))
    }
}

impl fmt::Display for SequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `sqrt(2)` and `pi` scaled by `2^256`, for exact floors of `sqrt(2) m^5 - pi m^3`.
struct PolyFloorCoefficients {
    sqrt2: BigInt,
    pi: BigInt,
}

const POLY_FLOOR_BITS: u32 = 256;

impl PolyFloorCoefficients {
    fn new() -> Self {
        let sqrt2 = Alpha::sqrt2()
            .render(POLY_FLOOR_BITS)
            .expect("precision above minimum");
        let pi = Alpha::PiFrac
            .render(POLY_FLOOR_BITS)
            .expect("precision above minimum");
        let one = BigUint::one() << POLY_FLOOR_BITS;
        PolyFloorCoefficients {
            sqrt2: BigInt::from(sqrt2.mantissa() + &one),
            pi: BigInt::from(pi.mantissa() + &one * 3u32),
        }
    }

    fn eval(&self, m: u64) -> Result<i128> {
        let m = BigInt::from(m);
        let m3 = m.pow(3);
        let m5 = &m3 * &m * &m;
        let scaled = &self.sqrt2 * m5 - &self.pi * m3;
        let floor = scaled.div_floor(&(BigInt::one() << POLY_FLOOR_BITS));
        floor
            .to_i128()
            .ok_or_else(|| LabError::Overflow(format!("poly_floor value at m = {m} exceeds 128 bits")))
    }
}

/// Simple sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    out
}

/// An angle stored as a 128-bit binary fraction of a full turn.
///
/// `e^{i n θ}` is evaluated from the exact phase `n · turns mod 2^128`, so
/// huge sequence elements do not lose accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    turns: u128,
}

impl Angle {
    pub fn from_turns_fixed(turns: u128) -> Self {
        Angle { turns }
    }

    pub fn from_turns(t: f64) -> Self {
        Angle {
            turns: f64_to_frac128(t),
        }
    }

    pub fn from_radians(theta: f64) -> Self {
        Angle::from_turns(theta / TAU)
    }

    /// `2π · num / den`.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        let num = BigUint::from(num % den) << 128u32;
        let t = num / den;
        Angle {
            turns: t.to_u128().expect("fraction below one"),
        }
    }

    /// `2π · {x}` for a fixed-point real `x`.
    pub fn from_fixed(x: &FixedPointReal) -> Self {
        Angle {
            turns: x.top_bits(),
        }
    }

    pub fn turns_fixed(&self) -> u128 {
        self.turns
    }

    pub fn turns(&self) -> f64 {
        self.turns as f64 / 2f64.powi(128)
    }

    pub fn radians(&self) -> f64 {
        self.turns() * TAU
    }

    /// The reflected angle `2π - θ`.
    pub fn reflect(&self) -> Self {
        Angle {
            turns: self.turns.wrapping_neg(),
        }
    }

    /// `e^{i n θ}` for `n` given mod `2^128`.
    #[inline]
    pub fn phase(&self, n: u128) -> Complex64 {
        let p = n.wrapping_mul(self.turns) as i128;
        let t = p as f64 / 2f64.powi(128);
        let (s, c) = (t * TAU).sin_cos();
        Complex64::new(c, s)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn weyl_average_residues(residues: &[u128], theta: Angle) -> Result<Complex64> {
    if theta.turns == 0 {
        return Err(LabError::InvalidAngle);
    }
    if residues.is_empty() {
        return Err(LabError::InvalidArgument("S_j must be nonempty".into()));
    }
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &n in residues {
        let z = theta.phase(n);
        re.add(z.re);
        im.add(z.im);
    }
    let len = residues.len() as f64;
    Ok(Complex64::new(re.value() / len, im.value() / len))
}

/// `(1/|S_j|) Σ_{n ∈ S_j} e^{i n θ}` for `θ ∈ (0, 2π)`.
pub fn weyl_average(elements: &[i128], theta: Angle) -> Result<Complex64> {
    let residues: Vec<u128> = elements.iter().map(|&x| x as u128).collect();
    weyl_average_residues(&residues, theta)
}

/// Weyl average of a family member, valid even when `S_j` exceeds 128-bit integers.
pub fn family_weyl_average(family: SequenceFamily, j: u64, theta: Angle) -> Result<Complex64> {
    weyl_average_residues(&family.residues(j)?, theta)
}

/// Per-angle magnitudes of the Weyl average of one family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylProfile {
    pub family: SequenceFamily,
    pub j: u64,
    /// angles in radians
    pub thetas: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl WeylProfile {
    /// Angles whose magnitude exceeds `tol`: candidate exceptional frequencies.
    pub fn exceptional(&self, tol: f64) -> Vec<f64> {
        self.thetas
            .iter()
            .zip(&self.magnitudes)
            .filter(|(_, &m)| m > tol)
            .map(|(&t, _)| t)
            .collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Two-column CSV `theta,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,magnitude\n");
        for (t, m) in self.thetas.iter().zip(&self.magnitudes) {
            out.push_str(&format!("{t},{m}\n"));
        }
        out
    }
}

/// Magnitudes `|weyl_average(S_j, θ)|` over a grid of angles in `(0, 2π)`.
pub fn equidist_profile(family: SequenceFamily, j: u64, thetas: &[Angle]) -> Result<WeylProfile> {
    let residues = family.residues(j)?;
    let magnitudes = thetas
        .par_iter()
        .map(|&t| weyl_average_residues(&residues, t).map(|z| z.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylProfile {
        family,
        j,
        thetas: thetas.iter().map(Angle::radians).collect(),
        magnitudes,
    })
}

/// `2πk/(count+1)` for `k = 1..=count`.
pub fn uniform_angle_grid(count: u64) -> Vec<Angle> {
    (1..=count).map(|k| Angle::from_ratio(k, count + 1)).collect()
}

/// `2π {k φ}` for `k = 1..=count` with φ the golden ratio: angles with no
/// small-denominator rational structure.
pub fn generic_angle_grid(count: u64) -> Vec<Angle> {
    let golden = Alpha::Golden.render(MIN_FRAC_BITS).expect("valid precision");
    (1..=count)
        .map(|k| {
            let x = golden
                .mul_int_mod1(&BigInt::from(k))
                .expect("small multiplier within budget");
            Angle::from_fixed(&x)
        })
        .collect()
}

/// Bound `2 / (j |1 - e^{iθ}|)` on block Weyl averages.
pub fn block_bound(j: u64, theta: Angle) -> f64 {
    let z = Complex64::new(1.0, 0.0) - theta.phase(1);
    2.0 / (j as f64 * z.norm())
}

/// Membership of `n` in `{n : {n^k α} ∈ (1/4, 3/4)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    Member,
    NonMember,
    BoundaryAmbiguous,
}

/// Result of [`intersective_members`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectiveScan {
    pub k: u32,
    pub frac_bits: u32,
    pub n_range: Window,
    pub members: Vec<i64>,
    /// `n` whose classification is not settled at this precision and its double.
    pub boundary_ambiguous: Vec<i64>,
}

impl IntersectiveScan {
    pub fn density(&self) -> f64 {
        self.members.len() as f64 / self.n_range.len() as f64
    }
}

/// Exact side of `(1/4, 3/4)` for a stored value, and whether a rounding error
/// of `err_ulps` could move it across an endpoint.
fn classify(value: &FixedPointReal, err_ulps: &BigUint) -> (bool, bool) {
    let b = value.frac_bits();
    let quarter = BigUint::one() << (b - 2);
    let three_quarters = &quarter * 3u32;
    let m = value.mantissa();
    let inside = *m > quarter && *m < three_quarters;
    if !value_is_uncertain(err_ulps) {
        return (inside, false);
    }
    // the true value lies in [m, m + err]
    let upper = m + err_ulps;
    let near = |edge: &BigUint| m <= edge && *edge <= upper;
    (inside, near(&quarter) || near(&three_quarters))
}

fn value_is_uncertain(err: &BigUint) -> bool {
    err.bits() > 0
}

/// Classify one `n` at the stored precision, re-checking at double precision
/// when the error bound touches an endpoint.
pub fn intersective_membership(n: u64, k: u32, alpha: &FixedPointReal) -> Result<Membership> {
    let power = BigInt::from(n).pow(k);
    let err = if alpha.is_rounded() {
        power.magnitude().clone()
    } else {
        BigUint::default()
    };
    let v = alpha.mul_int_mod1(&power)?;
    let (inside, near) = classify(&v, &err);
    if !near {
        return Ok(if inside { Membership::Member } else { Membership::NonMember });
    }
    let refined = alpha.with_frac_bits(alpha.frac_bits() * 2)?;
    let v2 = refined.mul_int_mod1(&power)?;
    let (inside2, near2) = classify(&v2, &err);
    if near2 || inside2 != inside {
        Ok(Membership::BoundaryAmbiguous)
    } else {
        Ok(if inside { Membership::Member } else { Membership::NonMember })
    }
}

/// `{n ∈ n_range : {n^k α} ∈ (1/4, 3/4)}`, open interval, exact dyadic endpoints.
pub fn intersective_members(k: u32, alpha: &FixedPointReal, n_range: Window) -> Result<IntersectiveScan> {
    if k == 0 {
        return Err(LabError::InvalidArgument("exponent k must be at least 1".into()));
    }
    if n_range.lo() < 0 {
        return Err(LabError::InvalidArgument("intersective scan needs n >= 0".into()));
    }
    let last = BigInt::from(n_range.hi() - 1).pow(k);
    alpha.check_budget(&last)?;

    let labels = n_range
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| intersective_membership(n as u64, k, alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut members = Vec::new();
    let mut boundary_ambiguous = Vec::new();
    for (n, label) in n_range.iter().zip(labels) {
        match label {
            Membership::Member => members.push(n),
            Membership::BoundaryAmbiguous => boundary_ambiguous.push(n),
            Membership::NonMember => {}
        }
    }
    Ok(IntersectiveScan {
        k,
        frac_bits: alpha.frac_bits(),
        n_range,
        members,
        boundary_ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn generators_small() {
        assert_eq!(SequenceFamily::Squares.generate(4).unwrap(), vec![1, 4, 9, 16]);
        assert_eq!(SequenceFamily::Primes.generate(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(SequenceFamily::Blocks.generate(3).unwrap(), vec![8, 9, 10]);
        assert_eq!(SequenceFamily::FloorPow52.generate(3).unwrap(), vec![1, 5, 15]);
        // sqrt2 - pi = -1.727..., 32 sqrt2 - 8 pi = 20.121...
        assert_eq!(SequenceFamily::PolyFloor.generate(2).unwrap(), vec![-2, 20]);
    }

    #[test]
    fn generator_errors() {
        assert!(SequenceFamily::Squares.generate(0).is_err());
        assert!(matches!(
            SequenceFamily::Blocks.generate(127),
            Err(LabError::Overflow(_))
        ));
        assert_eq!(SequenceFamily::Blocks.residues(10_000).unwrap().len(), 10_000);
    }

    #[test]
    fn family_names_round_trip() {
        for f in SequenceFamily::ALL {
            assert_eq!(f.name().parse::<SequenceFamily>().unwrap(), f);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.name()));
        }
    }

    #[test]
    fn alternating_cancellation() {
        let s: Vec<i128> = (1..=200).collect();
        let z = weyl_average(&s, Angle::from_ratio(1, 2)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn zero_angle_rejected() {
        assert!(matches!(
            weyl_average(&[1, 2], Angle::from_turns(0.0)),
            Err(LabError::InvalidAngle)
        ));
        assert!(weyl_average(&[], Angle::from_ratio(1, 3)).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        let s = SequenceFamily::Primes.generate(1000).unwrap();
        for t in uniform_angle_grid(7) {
            let a = weyl_average(&s, t).unwrap();
            let b = weyl_average(&s, t.reflect()).unwrap();
            assert!((a - b.conj()).norm() < 1e-13);
            assert!(a.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn angle_conversions() {
        let a = Angle::from_radians(PI / 2.0);
        assert_eq!(a.turns_fixed(), 1u128 << 126);
        assert!((Angle::from_ratio(1, 3).radians() - 2.0 * PI / 3.0).abs() < 1e-15);
        let z = Angle::from_ratio(1, 4).phase(3);
        assert!((z - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn suspects_for_squares_only() {
        assert_eq!(SequenceFamily::Squares.analytic_suspects(4).len(), 1 + 2 + 2);
        assert!(SequenceFamily::Blocks.analytic_suspects(4).is_empty());
    }

    #[test]
    fn intersective_small_cases() {
        let a = Alpha::sqrt2().render(192).unwrap();
        assert_eq!(intersective_membership(1, 1, &a).unwrap(), Membership::Member);
        assert_eq!(intersective_membership(2, 1, &a).unwrap(), Membership::NonMember);
        // exact dyadic endpoints are excluded
        let quarter = FixedPointReal::from_f64(0.25, 192).unwrap();
        assert_eq!(intersective_membership(1, 1, &quarter).unwrap(), Membership::NonMember);
        assert_eq!(intersective_membership(3, 1, &quarter).unwrap(), Membership::NonMember);
        assert_eq!(intersective_membership(5, 1, &quarter).unwrap(), Membership::NonMember);
    }

    #[test]
    fn intersective_flags_touching_error_bound() {
        // a rounded alpha sitting exactly on the endpoint 1/4 cannot be classified
        let a: Alpha = "0.25".parse().unwrap();
        let rendered = a.render(192).unwrap();
        assert_eq!(
            intersective_membership(1, 1, &rendered).unwrap(),
            Membership::BoundaryAmbiguous
        );
    }

    #[test]
    fn intersective_range() {
        let a = Alpha::sqrt2().render(192).unwrap();
        let scan = intersective_members(2, &a, Window::new(1, 1001).unwrap()).unwrap();
        assert!(scan.boundary_ambiguous.is_empty());
        for &n in scan.members.iter().take(20) {
            let v = ((n * n) as f64 * (2f64.sqrt() - 1.0)).fract();
            assert!(v > 0.25 && v < 0.75, "n = {n}");
        }
        assert!(intersective_members(1, &a, Window::new(-1, 3).unwrap()).is_err());
    }
}
