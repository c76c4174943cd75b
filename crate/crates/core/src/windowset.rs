//! Finite-window model of subsets of the integers.
//!
//! A [`WindowSet`] stores membership for every integer of a half-open
//! [`Window`] as a packed bitmap (64-bit words, least significant bit is the
//! lowest integer). A second window, the *valid* region, records where the
//! membership is known to be exact; every bit outside it is kept at zero.
//!
//! The translate convention follows `E - t = { x : x + t in E }`, so
//! [`WindowSet::shift`] moves both windows by `-t` without touching the bits.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const WORD_BITS: usize = 64;

/// Half-open integer interval `[lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo < hi {
            Ok(Window { lo, hi })
        } else {
            Err(LabError::InvalidWindow { lo, hi })
        }
    }

    /// The closed range `[first, last]`.
    pub fn inclusive(first: i64, last: i64) -> Result<Self> {
        Window::new(first, last + 1)
    }

    #[inline]
    pub fn lo(&self) -> i64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> i64 {
        self.hi
    }

    #[inline]
    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64
    }

    /// Always false; windows are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Window { lo, hi })
    }

    /// The window translated by `delta`.
    pub fn translate(&self, delta: i64) -> Window {
        Window {
            lo: self.lo + delta,
            hi: self.hi + delta,
        }
    }

    pub fn iter(&self) -> std::ops::Range<i64> {
        self.lo..self.hi
    }
}

/// Finite truncation `A'` of an infinite offset set: sorted, distinct, nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteOffsets {
    elements: Vec<i64>,
}

impl FiniteOffsets {
    pub fn new(mut elements: Vec<i64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(LabError::InvalidArgument(
                "offset set must be nonempty".into(),
            ));
        }
        Ok(FiniteOffsets { elements })
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn min(&self) -> i64 {
        self.elements[0]
    }

    pub fn max(&self) -> i64 {
        *self.elements.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A subset of the integers known exactly on its valid region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSet {
    window: Window,
    valid: Window,
    words: Vec<u64>,
}

fn word_count(len: u64) -> usize {
    (len as usize).div_ceil(WORD_BITS)
}

/// 64 bits of `words` starting at bit `pos`; positions outside `[0, len)` read as zero.
#[inline]
pub(crate) fn extract_word(words: &[u64], len: u64, pos: i64) -> u64 {
    if pos >= len as i64 || pos <= -(WORD_BITS as i64) {
        return 0;
    }
    if pos < 0 {
        return words[0] << ((-pos) as u32);
    }
    let q = (pos as usize) / WORD_BITS;
    let r = (pos as usize) % WORD_BITS;
    let low = words[q] >> r;
    if r == 0 || q + 1 >= words.len() {
        low
    } else {
        low | (words[q + 1] << (WORD_BITS - r))
    }
}

/// Mask selecting bits `[from, to)` of the word that starts at bit `word_start`.
#[inline]
fn range_mask(word_start: u64, from: u64, to: u64) -> u64 {
    let ws = word_start;
    let we = ws + WORD_BITS as u64;
    if to <= ws || from >= we {
        return 0;
    }
    let a = from.saturating_sub(ws);
    let b = (to - ws).min(WORD_BITS as u64);
    let high = if b == 64 { u64::MAX } else { (1u64 << b) - 1 };
    let low = if a == 0 { 0 } else { (1u64 << a) - 1 };
    high & !low
}

impl WindowSet {
    /// The set `elems ∩ window`, exact on the whole window.
    pub fn from_elements(elems: &[i64], window: Window) -> Self {
        let mut set = WindowSet::empty(window);
        for &x in elems {
            if window.contains(x) {
                set.set_bit((x - window.lo) as u64);
            }
        }
        set
    }

    pub fn empty(window: Window) -> Self {
        WindowSet {
            window,
            valid: window,
            words: vec![0; word_count(window.len())],
        }
    }

    pub fn full(window: Window) -> Self {
        WindowSet::from_fn(window, |_| true)
    }

    pub fn from_fn(window: Window, mut member: impl FnMut(i64) -> bool) -> Self {
        let mut set = WindowSet::empty(window);
        for (i, x) in window.iter().enumerate() {
            if member(x) {
                set.set_bit(i as u64);
            }
        }
        set
    }

    /// Build from a membership vector, where `bits[i]` is membership of `window.lo() + i`.
    pub fn from_bools(window: Window, bits: &[bool]) -> Result<Self> {
        if bits.len() as u64 != window.len() {
            return Err(LabError::InvalidArgument(format!(
                "expected {} membership flags, got {}",
                window.len(),
                bits.len()
            )));
        }
        let mut set = WindowSet::empty(window);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                set.set_bit(i as u64);
            }
        }
        Ok(set)
    }

    /// Assemble from raw words, clearing everything outside `valid`.
    pub fn from_words(window: Window, valid: Window, words: Vec<u64>) -> Result<Self> {
        if !window.contains_window(&valid) {
            return Err(LabError::InvalidArgument(
                "valid region must lie inside the window".into(),
            ));
        }
        if words.len() != word_count(window.len()) {
            return Err(LabError::InvalidArgument(format!(
                "expected {} words, got {}",
                word_count(window.len()),
                words.len()
            )));
        }
        let mut set = WindowSet {
            window,
            valid,
            words,
        };
        set.clear_outside_valid();
        Ok(set)
    }

    #[inline]
    fn set_bit(&mut self, i: u64) {
        self.words[(i as usize) / WORD_BITS] |= 1u64 << (i as usize % WORD_BITS);
    }

    #[inline]
    fn bit(&self, i: u64) -> bool {
        self.words[(i as usize) / WORD_BITS] >> (i as usize % WORD_BITS) & 1 == 1
    }

    fn clear_outside_valid(&mut self) {
        let from = (self.valid.lo - self.window.lo) as u64;
        let to = (self.valid.hi - self.window.lo) as u64;
        for (w, word) in self.words.iter_mut().enumerate() {
            *word &= range_mask((w * WORD_BITS) as u64, from, to);
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn valid(&self) -> Window {
        self.valid
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Shrink the valid region; bits leaving it are cleared.
    pub fn restrict_valid(&self, valid: Window) -> Result<Self> {
        let valid = self
            .valid
            .intersect(&valid)
            .ok_or(LabError::EmptyValidRegion)?;
        let mut out = self.clone();
        out.valid = valid;
        out.clear_outside_valid();
        Ok(out)
    }

    pub fn contains(&self, x: i64) -> bool {
        self.window.contains(x) && self.bit((x - self.window.lo) as u64)
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of members in `[from, to)` (absolute coordinates, clipped to the window).
    pub fn count_range(&self, from: i64, to: i64) -> u64 {
        let from = from.max(self.window.lo);
        let to = to.min(self.window.hi);
        if from >= to {
            return 0;
        }
        let a = (from - self.window.lo) as u64;
        let b = (to - self.window.lo) as u64;
        let first = a as usize / WORD_BITS;
        let last = (b as usize - 1) / WORD_BITS;
        (first..=last)
            .map(|w| (self.words[w] & range_mask((w * WORD_BITS) as u64, a, b)).count_ones() as u64)
            .sum()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        let lo = self.window.lo;
        self.words.iter().enumerate().flat_map(move |(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(lo + (w * WORD_BITS + tz) as i64)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.iter().collect()
    }

    /// `S - t`: x belongs to the result iff `x + t` belongs to `S`.
    pub fn shift(&self, t: i64) -> Self {
        WindowSet {
            window: self.window.translate(-t),
            valid: self.valid.translate(-t),
            words: self.words.clone(),
        }
    }

    /// `∩_{t ∈ offsets} (S - t)` computed with word-level shift-AND.
    ///
    /// The result window equals its valid region, the intersection of the
    /// shifted valid regions.
    pub fn intersect_translates(&self, offsets: &[i64]) -> Result<Self> {
        let (&first, rest) = offsets.split_first().ok_or_else(|| {
            LabError::InvalidArgument("offset list must be nonempty".into())
        })?;
        let mut valid = Some(self.valid.translate(-first));
        for &t in rest {
            valid = valid.and_then(|v| v.intersect(&self.valid.translate(-t)));
        }
        let valid = valid.ok_or(LabError::EmptyValidRegion)?;

        let len = self.window.len();
        let bases: Vec<i64> = offsets
            .iter()
            .map(|&t| valid.lo + t - self.window.lo)
            .collect();
        let n_words = word_count(valid.len());
        let mut words = Vec::with_capacity(n_words);
        for w in 0..n_words {
            let pos = (w * WORD_BITS) as i64;
            let mut acc = u64::MAX;
            for &base in &bases {
                acc &= extract_word(&self.words, len, base + pos);
                if acc == 0 {
                    break;
                }
            }
            words.push(acc);
        }
        let tail = valid.len() as usize % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(WindowSet {
            window: valid,
            valid,
            words,
        })
    }

    /// Set union on a common window; the valid region is the intersection.
    pub fn union(&self, other: &WindowSet) -> Result<Self> {
        if self.window != other.window {
            return Err(LabError::InvalidArgument(
                "union requires identical windows".into(),
            ));
        }
        let valid = self
            .valid
            .intersect(&other.valid)
            .ok_or(LabError::EmptyValidRegion)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        WindowSet::from_words(self.window, valid, words)
    }

    /// Whether every member of `self` on `region` is also a member of `other`.
    pub fn is_subset_on(&self, other: &WindowSet, region: Window) -> bool {
        region.iter().all(|x| !self.contains(x) || other.contains(x))
    }
}

/// Sumset `A + B` computed as the OR of translated bitmaps of `B`.
///
/// The valid region keeps only the points where every candidate `a` can be
/// tested inside `B`'s valid region.
pub fn sumset(offsets: &FiniteOffsets, set: &WindowSet) -> Result<WindowSet> {
    let (amin, amax) = (offsets.min(), offsets.max());
    let window = Window::new(set.window.lo + amin, set.window.hi + amax)?;
    let valid = Window::new(set.valid.lo + amax, set.valid.hi + amin)
        .map_err(|_| LabError::EmptyValidRegion)?;

    let mut words = vec![0u64; word_count(window.len())];
    let from = (valid.lo - window.lo) as u64;
    let to = (valid.hi - window.lo) as u64;
    let first = from as usize / WORD_BITS;
    let last = (to as usize - 1) / WORD_BITS;
    let src_len = set.window.len();
    for &a in offsets.elements() {
        // result bit at relative position p reads source bit p + window.lo - a - set.window.lo
        let base = window.lo - a - set.window.lo;
        for (w, word) in words.iter_mut().enumerate().take(last + 1).skip(first) {
            *word |= extract_word(&set.words, src_len, base + (w * WORD_BITS) as i64);
        }
    }
    WindowSet::from_words(window, valid, words)
}

/// `D_A = ∪_{a ∈ A} T^a D` on the integers; the same computation as [`sumset`].
pub fn union_translates(set: &WindowSet, offsets: &FiniteOffsets) -> Result<WindowSet> {
    sumset(offsets, set)
}

const HEX_CHARS_PER_LINE: usize = 64;

impl WindowSet {
    /// Serialize in the `WINDOWSET` text format.
    ///
    /// Header `WINDOWSET <lo> <hi> <valid_lo> <valid_hi>`, then the bitmap as
    /// lowercase hex, each 64-bit word written as its little-endian bytes,
    /// 64 hex characters per line.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "WINDOWSET {} {} {} {}",
            self.window.lo, self.window.hi, self.valid.lo, self.valid.hi
        )?;
        let mut hex = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            hex.push_str(&hex::encode(w.to_le_bytes()));
        }
        for chunk in hex.as_bytes().chunks(HEX_CHARS_PER_LINE) {
            out.write_all(chunk)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("format is ASCII")
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| LabError::Parse("missing WINDOWSET header".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "WINDOWSET" {
            return Err(LabError::Parse(format!("bad header line: {header:?}")));
        }
        let nums = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<i64>()
                    .map_err(|e| LabError::Parse(format!("bad integer {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let window = Window::new(nums[0], nums[1])?;
        let valid = Window::new(nums[2], nums[3])?;

        let mut hex_text = String::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.len() > HEX_CHARS_PER_LINE {
                return Err(LabError::Parse("hex line longer than 64 characters".into()));
            }
            hex_text.push_str(line);
        }
        if hex_text.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(LabError::Parse("hex must be lowercase".into()));
        }
        let bytes = hex::decode(&hex_text).map_err(|e| LabError::Parse(e.to_string()))?;
        if bytes.len() % 8 != 0 {
            return Err(LabError::Parse("bitmap is not a whole number of words".into()));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let set = WindowSet::from_words(window, valid, words.clone())?;
        if set.words != words {
            return Err(LabError::Parse("bits set outside the valid region".into()));
        }
        Ok(set)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        WindowSet::read_from(text.as_bytes())
    }
}

impl std::fmt::Display for WindowSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        let members: Vec<i64> = self.iter().take(16).collect();
        for (i, m) in members.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{m}");
        }
        if self.popcount() > members.len() as u64 {
            s.push_str(", ...");
        }
        write!(
            f,
            "{{{s}}} on [{}, {}) valid [{}, {})",
            self.window.lo, self.window.hi, self.valid.lo, self.valid.hi
        )
    }
}
