//! k-AP and polynomial-pattern correlation densities, threshold scans over n,
//! and the gap statistics used as syndeticity evidence.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::banach_density;
use crate::error::{LabError, Result};
use crate::windowset::{Window, WindowSet};

/// Integer polynomial, `coeffs[i]` multiplies `n^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        IntPoly { coeffs }
    }

    /// `c · n^e`
    pub fn monomial(c: i64, e: usize) -> Self {
        let mut coeffs = vec![0; e + 1];
        coeffs[e] = c;
        IntPoly::new(coeffs)
    }

    pub fn identity() -> Self {
        IntPoly::monomial(1, 1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant_term(&self) -> i64 {
        self.coeffs[0]
    }

    /// `p(n)`, or `None` on 128-bit overflow.
    pub fn eval(&self, n: i64) -> Option<i128> {
        let n = n as i128;
        self.coeffs
            .iter()
            .rev()
            .try_fold(0i128, |acc, &c| acc.checked_mul(n)?.checked_add(c as i128))
    }

    pub fn eval_big(&self, n: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::from(0), |acc, &c| acc * n + c)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 && !(first && e == 0) {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            let body = match (e, mag) {
                (0, m) => format!("{m}"),
                (1, 1) => "n".to_string(),
                (1, m) => format!("{m}n"),
                (e, 1) => format!("n^{e}"),
                (e, m) => format!("{m}n^{e}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for IntPoly {
    type Err = LabError;

    /// Parses sums of terms like `3n^2 - n + 4` or `2*n`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| LabError::Parse(format!("bad polynomial {s:?}: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut coeffs: Vec<i64> = Vec::new();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body[1.min(body.len())..]
                .find(['+', '-'])
                .map(|i| i + 1)
                .unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            let (coef, exp) = match term.find('n') {
                None => (term.parse::<i64>().map_err(|_| bad(term))?, 0usize),
                Some(pos) => {
                    let c = term[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { 1 } else { c.parse::<i64>().map_err(|_| bad(term))? };
                    let tail = &term[pos + 1..];
                    let e = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^')
                            .ok_or_else(|| bad(term))?
                            .parse::<usize>()
                            .map_err(|_| bad(term))?
                    };
                    (c, e)
                }
            };
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, 0);
            }
            coeffs[exp] += sign * coef;
        }
        Ok(IntPoly::new(coeffs))
    }
}

impl TryFrom<String> for IntPoly {
    type Error = LabError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IntPoly> for String {
    fn from(p: IntPoly) -> String {
        p.to_string()
    }
}

/// The polynomial pattern `(p_1, ..., p_{k-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyVec {
    pub polys: Vec<IntPoly>,
}

impl PolyVec {
    pub fn new(polys: Vec<IntPoly>) -> Self {
        PolyVec { polys }
    }

    /// `(n, 2n, ..., (k-1)n)`, the k-term arithmetic progression pattern.
    pub fn arithmetic(k: usize) -> Self {
        PolyVec::new((1..k as i64).map(|c| IntPoly::monomial(c, 1)).collect())
    }

    /// Maximum degree `r`.
    pub fn degree(&self) -> usize {
        self.polys.iter().map(IntPoly::degree).max().unwrap_or(0)
    }

    /// Pattern length `k = polys + 1`.
    pub fn k(&self) -> usize {
        self.polys.len() + 1
    }

    pub fn vanish_at_zero(&self) -> bool {
        self.polys.iter().all(|p| p.constant_term() == 0)
    }

    /// `[0, p_1(n), ..., p_{k-1}(n)]`, or `None` when a value leaves `i64`.
    pub fn offsets(&self, n: i64) -> Option<Vec<i64>> {
        std::iter::once(Some(0))
            .chain(self.polys.iter().map(|p| p.eval(n).and_then(|v| i64::try_from(v).ok())))
            .collect()
    }
}

/// Density of `E ∩ (E - n) ∩ ... ∩ (E - (k-1)n)` at window length `M + 1`.
pub fn ap_correlation_density(set: &WindowSet, k: usize, n: i64, m: u64) -> Result<Ratio<u64>> {
    if k == 0 {
        return Err(LabError::InvalidArgument("k must be at least 1".into()));
    }
    let offsets: Vec<i64> = (0..k as i64)
        .map(|i| i.checked_mul(n).ok_or_else(|| LabError::Overflow("offset i·n".into())))
        .collect::<Result<_>>()?;
    pattern_correlation_density(set, &offsets, m)
}

/// Density of `∩_{t ∈ offsets} (E - t)` at window length `M + 1`.
pub fn pattern_correlation_density(set: &WindowSet, offsets: &[i64], m: u64) -> Result<Ratio<u64>> {
    let inter = set.intersect_translates(offsets)?;
    Ok(banach_density(&inter, m)?.value)
}

/// How a per-n value is compared with the scan threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value >= threshold`
    AtLeast,
    /// `value > threshold`
    Above,
}

impl Comparison {
    pub fn passes(&self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtLeast => value >= threshold,
            Comparison::Above => value > threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryStatus {
    Ok,
    /// The pattern leaves the data (empty or too short valid region); density
    /// recorded as 0 and the entry excluded from gap statistics.
    OutOfRange,
}

/// One scanned `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub n: i64,
    pub density: f64,
    pub status: EntryStatus,
}

/// Threshold scan over a range of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub threshold: f64,
    pub comparison: Comparison,
    pub n_range: Window,
    pub passing: Vec<i64>,
    /// Largest difference between consecutive passing `n`; the range length
    /// when fewer than two `n` pass.
    pub max_gap: u64,
    /// Number of in-range entries considered (after filtering).
    pub scanned: u64,
    pub out_of_range: u64,
    /// `|passing| / scanned`
    pub relative_frequency: f64,
    pub per_n_density: Vec<ScanEntry>,
}

/// Largest difference of consecutive values, or `sentinel` for fewer than two.
pub fn max_consecutive_gap(sorted: &[i64], sentinel: u64) -> u64 {
    if sorted.len() < 2 {
        return sentinel;
    }
    sorted
        .windows(2)
        .map(|w| (w[1] - w[0]) as u64)
        .max()
        .unwrap_or(sentinel)
}

impl ScanReport {
    /// Assemble a report from entries in any order.
    pub fn from_entries(
        threshold: f64,
        comparison: Comparison,
        n_range: Window,
        mut entries: Vec<ScanEntry>,
    ) -> Self {
        entries.sort_by_key(|e| e.n);
        let passing: Vec<i64> = entries
            .iter()
            .filter(|e| e.status == EntryStatus::Ok && comparison.passes(e.density, threshold))
            .map(|e| e.n)
            .collect();
        let out_of_range = entries
            .iter()
            .filter(|e| e.status == EntryStatus::OutOfRange)
            .count() as u64;
        let scanned = entries.len() as u64 - out_of_range;
        let relative_frequency = if scanned == 0 {
            0.0
        } else {
            passing.len() as f64 / scanned as f64
        };
        ScanReport {
            threshold,
            comparison,
            n_range,
            max_gap: max_consecutive_gap(&passing, n_range.len()),
            passing,
            scanned,
            out_of_range,
            relative_frequency,
            per_n_density: entries,
        }
    }

    /// Recompute all derived fields from `per_n_density`.
    pub fn recomputed(&self) -> Self {
        ScanReport::from_entries(
            self.threshold,
            self.comparison,
            self.n_range,
            self.per_n_density.clone(),
        )
    }

    /// Two-column CSV `n,density` of the in-range entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,density\n");
        for e in self.per_n_density.iter().filter(|e| e.status == EntryStatus::Ok) {
            out.push_str(&format!("{},{}\n", e.n, e.density));
        }
        out
    }
}

/// Scan `n` over `n_range` (optionally filtered) for pattern densities at or above `threshold`.
///
/// Runs in parallel over `n`; entries are merged in `n` order so the report is
/// independent of scheduling.
pub fn scan_good_n(
    set: &WindowSet,
    pvec: &PolyVec,
    threshold: f64,
    n_range: Window,
    m: u64,
    filter: Option<&(dyn Fn(i64) -> bool + Sync)>,
) -> Result<ScanReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(LabError::InvalidArgument(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let ns: Vec<i64> = n_range
        .iter()
        .filter(|&n| filter.is_none_or(|f| f(n)))
        .collect();
    let entries = ns
        .par_iter()
        .map(|&n| scan_entry(set, pvec, n, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport::from_entries(threshold, Comparison::AtLeast, n_range, entries))
}

fn scan_entry(set: &WindowSet, pvec: &PolyVec, n: i64, m: u64) -> Result<ScanEntry> {
    let out_of_range = ScanEntry {
        n,
        density: 0.0,
        status: EntryStatus::OutOfRange,
    };
    let Some(offsets) = pvec.offsets(n) else {
        return Ok(out_of_range);
    };
    match pattern_correlation_density(set, &offsets, m) {
        Ok(r) => Ok(ScanEntry {
            n,
            density: *r.numer() as f64 / *r.denom() as f64,
            status: EntryStatus::Ok,
        }),
        Err(LabError::EmptyValidRegion | LabError::WindowTooSmall { .. }) => Ok(out_of_range),
        Err(e) => Err(e),
    }
}
