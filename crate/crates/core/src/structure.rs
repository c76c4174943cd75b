//! Gap statistics on windows (syndetic, thick and piecewise syndetic
//! evidence) and Bohr / Nil-Bohr return-time sets of torus rotations.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{multi_correlation, GridFunction, TorusSystem};
use crate::error::{LabError, Result};
use crate::progressions::{Comparison, EntryStatus, IntPoly, PolyVec, ScanEntry, ScanReport};
use crate::sequences::{Arc, FixedPointReal};
use crate::windowset::{Window, WindowSet};

/// Observed constant in `max_gap <= ceil(C / w)` for one-dimensional Bohr
/// sets of `√2 - 1` or the golden ratio with a symmetric box of width `w`
/// over `[1, 10^6]`. Measured worst case is about 2.04 at `w = 0.005`.
/// Rotations with large partial quotients (`π - 3`) have no such constant.
pub const BOHR_GAP_CONSTANT: f64 = 2.5;

/// Gap statistics of a set over its valid region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapProfile {
    /// Largest difference between consecutive members; the valid length when
    /// fewer than two members exist.
    pub max_gap: u64,
    pub longest_run_absent: u64,
    pub longest_run_present: u64,
    pub window: Window,
}

pub fn gap_profile(set: &WindowSet) -> GapProfile {
    let valid = set.valid();
    let mut max_gap = 0u64;
    let mut prev: Option<i64> = None;
    let mut run_present = 0u64;
    let mut best_present = 0u64;
    let mut best_absent = 0u64;
    let mut cursor = valid.lo();
    for x in set.iter() {
        best_absent = best_absent.max((x - cursor) as u64);
        match prev {
            Some(p) if x == p + 1 => run_present += 1,
            _ => run_present = 1,
        }
        best_present = best_present.max(run_present);
        if let Some(p) = prev {
            max_gap = max_gap.max((x - p) as u64);
        }
        prev = Some(x);
        cursor = x + 1;
    }
    best_absent = best_absent.max((valid.hi() - cursor) as u64);
    if set.popcount() < 2 {
        max_gap = valid.len();
    }
    GapProfile {
        max_gap,
        longest_run_absent: best_absent,
        longest_run_present: best_present,
        window: valid,
    }
}

/// Leftmost length-`L` interval of the valid region in which every `g`
/// consecutive integers contain a member, if one exists.
///
/// When `g > L` the requirement is that the interval meets the set.
pub fn is_piecewise_syndetic_evidence(set: &WindowSet, g: u64, l: u64) -> Option<Window> {
    let valid = set.valid();
    if g == 0 || l == 0 || l > valid.len() {
        return None;
    }
    let g = g.min(l) as i64;
    let l = l as i64;
    let lo = valid.lo();
    let len = valid.len() as i64;
    // bad[x] marks [lo + x, lo + x + g) free of members
    let bad_count = len - g + 1;
    let mut bad_prefix = Vec::with_capacity(bad_count as usize + 1);
    bad_prefix.push(0u32);
    let mut acc = 0u32;
    for x in 0..bad_count {
        if set.count_range(lo + x, lo + x + g) == 0 {
            acc += 1;
        }
        bad_prefix.push(acc);
    }
    // start s is a witness when no bad x lies in [s, s + l - g]
    (0..=len - l)
        .find(|&s| bad_prefix[(s + l - g + 1) as usize] == bad_prefix[s as usize])
        .map(|s| Window::new(lo + s, lo + s + l).expect("l >= 1"))
}

/// Rotation data `α ∈ T^d` and an open box `U` (one arc per coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct BohrSpec {
    pub alphas: Vec<FixedPointReal>,
    pub arcs: Vec<Arc>,
}

impl BohrSpec {
    pub fn new(alphas: Vec<FixedPointReal>, arcs: Vec<Arc>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != arcs.len() {
            return Err(LabError::InvalidArgument(format!(
                "Bohr spec needs one arc per rotation number ({} alphas, {} arcs)",
                alphas.len(),
                arcs.len()
            )));
        }
        Ok(BohrSpec { alphas, arcs })
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }

    fn contains_multiple(&self, t: &BigInt) -> bool {
        self.alphas
            .iter()
            .zip(&self.arcs)
            .all(|(a, arc)| a.mul_int_mod1_unchecked(t).in_open_arc(arc))
    }

    fn check_budget(&self, t: &BigInt) -> Result<()> {
        self.alphas.iter().try_for_each(|a| a.check_budget(t))
    }
}

/// `{n : p(n)·α ∈ U}` intersected over a list of polynomials with `p(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NilBohrSpec {
    pub base: BohrSpec,
    pub polys: Vec<IntPoly>,
}

impl NilBohrSpec {
    pub fn new(base: BohrSpec, polys: Vec<IntPoly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(LabError::InvalidArgument("at least one polynomial required".into()));
        }
        if let Some(p) = polys.iter().find(|p| p.constant_term() != 0) {
            return Err(LabError::InvalidArgument(format!(
                "polynomial {p} must vanish at 0"
            )));
        }
        Ok(NilBohrSpec { base, polys })
    }
}

const MEMBER_CHUNK: usize = 4096;

/// `{n ∈ n_range : n·α ∈ U}`, tested exactly on the stored rotation numbers.
pub fn bohr_members(spec: &BohrSpec, n_range: Window) -> Result<WindowSet> {
    nil_bohr_members(
        &NilBohrSpec {
            base: spec.clone(),
            polys: vec![IntPoly::identity()],
        },
        n_range,
    )
}

/// `∩_p {n ∈ n_range : p(n)·α ∈ U}`.
pub fn nil_bohr_members(spec: &NilBohrSpec, n_range: Window) -> Result<WindowSet> {
    let reach = BigInt::from(n_range.lo().unsigned_abs().max((n_range.hi() - 1).unsigned_abs()));
    for p in &spec.polys {
        let bound: BigInt = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(e, &c)| BigInt::from(c.unsigned_abs()) * reach.pow(e as u32))
            .sum();
        spec.base.check_budget(&bound)?;
    }
    let ns: Vec<i64> = n_range.iter().collect();
    let bits: Vec<bool> = ns
        .par_chunks(MEMBER_CHUNK)
        .flat_map_iter(|chunk| {
            chunk.iter().map(|&n| {
                let n = BigInt::from(n);
                spec.polys.iter().all(|p| spec.base.contains_multiple(&p.eval_big(&n)))
            })
        })
        .collect();
    WindowSet::from_bools(n_range, &bits)
}

/// A measurable subset of the torus, as used by recurrence scans.
#[derive(Debug, Clone, PartialEq)]
pub enum TorusSet {
    /// Product of open arcs.
    Box(Vec<Arc>),
    /// Explicit 0/1 grid indicator.
    Grid(GridFunction),
}

impl TorusSet {
    pub fn indicator(&self, d: usize, g: usize) -> Result<GridFunction> {
        match self {
            TorusSet::Box(arcs) => GridFunction::indicator_box(d, g, arcs),
            TorusSet::Grid(f) => {
                if f.d() != d || f.g() != g {
                    return Err(LabError::InvalidArgument(format!(
                        "grid set is {}^{}, expected {g}^{d}",
                        f.g(),
                        f.d()
                    )));
                }
                if f.values().iter().any(|z| z.im != 0.0 || (z.re != 0.0 && z.re != 1.0)) {
                    return Err(LabError::InvalidArgument("grid set must be a 0/1 indicator".into()));
                }
                Ok(f.clone())
            }
        }
    }
}

/// Scan `n` for `μ(D ∩ (D - p_1(n)α) ∩ ... ) > μ(D) - eps`, measured by grid counting.
pub fn torus_recurrence_scan(
    d_set: &GridFunction,
    alphas: &[FixedPointReal],
    pvec: &PolyVec,
    eps: f64,
    n_range: Window,
) -> Result<ScanReport> {
    if alphas.len() != d_set.d() {
        return Err(LabError::InvalidArgument(format!(
            "{} rotation numbers for a {}-torus",
            alphas.len(),
            d_set.d()
        )));
    }
    let sys = TorusSystem::kronecker(alphas.to_vec())?;
    let measure = d_set.mean().re;
    let ns: Vec<i64> = n_range.iter().collect();
    let entries = ns
        .par_iter()
        .map(|&n| {
            multi_correlation(&sys, d_set, pvec, n).map(|density| ScanEntry {
                n,
                density,
                status: EntryStatus::Ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport::from_entries(measure - eps, Comparison::Above, n_range, entries))
}
