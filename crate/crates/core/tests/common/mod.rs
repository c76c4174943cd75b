//! Naive reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use sumset_lab::{Window, WindowSet};

pub fn members(set: &WindowSet) -> BTreeSet<i64> {
    set.iter().collect()
}

pub fn naive_sumset(a: &[i64], b: &BTreeSet<i64>, valid: Window) -> BTreeSet<i64> {
    valid.iter().filter(|&x| a.iter().any(|&t| b.contains(&(x - t)))).collect()
}

pub fn naive_intersection(e: &BTreeSet<i64>, offsets: &[i64], valid: Window) -> BTreeSet<i64> {
    valid.iter().filter(|&x| offsets.iter().all(|&t| e.contains(&(x + t)))).collect()
}

/// Best count over every window `[s, s + len)` inside `valid`, by plain prefix sums.
pub fn naive_best_window(members: &BTreeSet<i64>, valid: Window, len: u64) -> u64 {
    let mut prefix = vec![0u64];
    for x in valid.iter() {
        prefix.push(prefix.last().unwrap() + members.contains(&x) as u64);
    }
    let len = len as usize;
    (0..=prefix.len() - 1 - len)
        .map(|s| prefix[s + len] - prefix[s])
        .max()
        .unwrap_or(0)
}

/// `|{x : x + o ∈ E for all o}| / (M+1)` maximized over windows, counted point by point.
pub fn naive_pattern_density(set: &WindowSet, offsets: &[i64], m: u64) -> f64 {
    let e = members(set);
    let lo_shift = *offsets.iter().min().unwrap();
    let hi_shift = *offsets.iter().max().unwrap();
    let valid = Window::new(set.valid().lo() - lo_shift, set.valid().hi() - hi_shift).unwrap();
    let hits = naive_intersection(&e, offsets, valid);
    naive_best_window(&hits, valid, m + 1) as f64 / (m + 1) as f64
}

/// Fractional part of `x` computed with `f64` only, for coarse cross-checks.
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}
