//! Windowed estimators for upper Banach density and relative density.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sequences::SequenceFamily;
use crate::windowset::{Window, WindowSet, WORD_BITS};

/// Best window proportion `|S ∩ [N, N+M]| / (M+1)` over placements inside the valid region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityEstimate {
    pub m: u64,
    pub count: u64,
    pub value: Ratio<u64>,
    pub argmax_window: Window,
}

/// JSON form of a [`DensityEstimate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityRecord {
    #[serde(rename = "M")]
    pub m: u64,
    pub value_num: u64,
    pub value_den: u64,
    pub argmax_lo: i64,
}

impl DensityEstimate {
    pub fn as_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }

    pub fn to_record(&self) -> DensityRecord {
        DensityRecord {
            m: self.m,
            value_num: *self.value.numer(),
            value_den: *self.value.denom(),
            argmax_lo: self.argmax_window.lo(),
        }
    }
}

/// Rank structure over a bitmap: number of set bits before any position in O(1).
struct Ranks<'a> {
    words: &'a [u64],
    prefix: Vec<u64>,
}

impl<'a> Ranks<'a> {
    fn new(words: &'a [u64]) -> Self {
        let mut prefix = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for w in words {
            acc += w.count_ones() as u64;
            prefix.push(acc);
        }
        Ranks { words, prefix }
    }

    #[inline]
    fn rank(&self, pos: u64) -> u64 {
        let q = pos as usize / WORD_BITS;
        let r = pos as usize % WORD_BITS;
        if r == 0 {
            self.prefix[q]
        } else {
            self.prefix[q] + (self.words[q] & ((1u64 << r) - 1)).count_ones() as u64
        }
    }
}

/// Upper Banach density estimate at window length `M + 1`.
///
/// Scans every placement `[N, N+M]` inside the valid region. A window count
/// changes by at most one per step, so after a window with count `c` below
/// the current best `b` the next `b - c` placements cannot improve and are
/// skipped. The reported argmax is the leftmost maximizing placement.
pub fn banach_density(set: &WindowSet, m: u64) -> Result<DensityEstimate> {
    let valid = set.valid();
    let len = m + 1;
    if len > valid.len() {
        return Err(LabError::WindowTooSmall {
            needed: len,
            available: valid.len(),
        });
    }
    let ranks = Ranks::new(set.words());
    let origin = (valid.lo() - set.window().lo()) as u64;
    let last_start = origin + valid.len() - len;
    let count_at = |p: u64| ranks.rank(p + len) - ranks.rank(p);

    let mut best = count_at(origin);
    let mut best_pos = origin;
    let mut pos = origin + 1;
    while best < len && pos <= last_start {
        let c = count_at(pos);
        if c > best {
            best = c;
            best_pos = pos;
            pos += 1;
        } else {
            pos += best - c + 1;
        }
    }
    let lo = set.window().lo() + best_pos as i64;
    Ok(DensityEstimate {
        m,
        count: best,
        value: Ratio::new(best, len),
        argmax_window: Window::new(lo, lo + len as i64)?,
    })
}

/// One estimate per window parameter, to diagnose the `M → ∞` limit.
pub fn banach_density_sweep(set: &WindowSet, ms: &[u64]) -> Result<Vec<DensityEstimate>> {
    ms.iter().map(|&m| banach_density(set, m)).collect()
}

/// `|A ∩ S_j| / |S_j|`.
pub fn relative_density(set: &WindowSet, family: &SequenceFamily, j: u64) -> Result<Ratio<u64>> {
    let members = family.generate(j)?;
    if members.is_empty() {
        return Err(LabError::IndexOutOfRange(format!("S_{j} is empty")));
    }
    let valid = set.valid();
    let mut hits = 0u64;
    for &x in &members {
        let x = i64::try_from(x)
            .ok()
            .filter(|x| valid.contains(*x))
            .ok_or_else(|| {
                LabError::IndexOutOfRange(format!(
                    "S_{j} element {x} lies outside the valid region [{}, {})",
                    valid.lo(),
                    valid.hi()
                ))
            })?;
        if set.contains(x) {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, members.len() as u64))
}

/// Relative density for each `j`, together with the running maximum over the
/// tail starting at each index (the finite stand-in for the limsup).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeDensityProfile {
    pub js: Vec<u64>,
    pub values: Vec<f64>,
    pub tail_max: Vec<f64>,
}

pub fn relative_density_profile(
    set: &WindowSet,
    family: &SequenceFamily,
    js: &[u64],
) -> Result<RelativeDensityProfile> {
    let values = js
        .iter()
        .map(|&j| relative_density(set, family, j).map(|r| *r.numer() as f64 / *r.denom() as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut tail_max = values.clone();
    for i in (0..tail_max.len().saturating_sub(1)).rev() {
        tail_max[i] = tail_max[i].max(tail_max[i + 1]);
    }
    Ok(RelativeDensityProfile {
        js: js.to_vec(),
        values,
        tail_max,
    })
}
