//! Configured experiments that chain the set, sequence, structure and
//! dynamics modules, and the reports they produce.
//!
//! A config fixes every input including the seed, so two runs of the same
//! config produce identical reports apart from `timings_ms`.

mod config;
mod report;

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::density::{banach_density, relative_density};
use crate::dynamics::{
    averaged_observable, cesaro_select, correlation, default_grid, multi_correlation_series, powers_of_two,
    spectral_series_at, wiener_exceedance, GridFunction, TorusSystem, DEFAULT_GRID_1D,
};
use crate::error::{LabError, Result};
use crate::progressions::{scan_good_n, EntryStatus, PolyVec, ScanReport};
use crate::sequences::{
    block_bound, equidist_profile, f64_to_frac128, family_weyl_average, generic_angle_grid, intersective_members,
    uniform_angle_grid, Alpha, Angle, Membership, SequenceFamily,
};
use crate::structure::{gap_profile, nil_bohr_members, torus_recurrence_scan};
use crate::windowset::{sumset, FiniteOffsets, Window, WindowSet};

pub use config::*;
pub use report::{verify_report, Check, ExperimentReport, Verdict, VerifyOutcome};

/// Stated in every report: what "syndetic" means on a finite range.
pub const FINITE_PROXY_NOTE: &str = "Syndeticity is evidenced on the scanned range only: a scan counts as \
syndetic when relative_frequency >= min_freq and max_gap <= max_gap_bound, with both thresholds taken from \
the config. max_gap equals the range length when fewer than two n pass.";

/// Run whichever experiment the config names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::SumsetRecurrence => run_sumset_recurrence(cfg),
        ExperimentKind::NearTheorem => run_near_theorem(cfg),
        ExperimentKind::EquidistReport => run_equidist_report(cfg),
        ExperimentKind::DynamicsReport => run_dynamics_report(cfg),
    }
}

struct Stopwatch(Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(Instant::now())
    }

    fn lap(&mut self, report: &mut ExperimentReport, stage: &str) {
        let ms = self.0.elapsed().as_secs_f64() * 1e3;
        report.timings_ms.insert(stage.to_string(), ms);
        self.0 = Instant::now();
    }
}

/// All-ones `B` just long enough for every scanned `n`.
fn canary_scan(cfg: &ExperimentConfig, pvec: &PolyVec, threshold: f64, n_range: Window) -> Result<ScanReport> {
    let reach = n_range.lo().unsigned_abs().max((n_range.hi() - 1).unsigned_abs());
    let spread = pvec
        .offsets(reach as i64)
        .ok_or_else(|| LabError::Overflow("pattern offsets".into()))?
        .iter()
        .map(|x| x.unsigned_abs())
        .max()
        .unwrap_or(0);
    let m = cfg.m.min(4095);
    let len = 2 * spread + m + 1;
    let ones = WindowSet::full(Window::new(-(spread as i64), (len - spread) as i64)?);
    scan_good_n(&ones, pvec, threshold, n_range, m, None)
}

/// Members of the configured filter over `n_range`, plus the number of
/// boundary-ambiguous `n` dropped from it.
fn build_filter(spec: &FilterSpec, n_range: Window) -> Result<Option<(WindowSet, u64)>> {
    match spec {
        FilterSpec::None => Ok(None),
        FilterSpec::Intersective { k, alpha, frac_bits } => {
            let lo = n_range.lo().max(0);
            let range = Window::new(lo, n_range.hi().max(lo + 1))?;
            let scan = intersective_members(*k, &alpha.render(*frac_bits)?, range)?;
            let mut set = WindowSet::from_elements(&scan.members, n_range);
            set = set.restrict_valid(n_range)?;
            Ok(Some((set, scan.boundary_ambiguous.len() as u64)))
        }
        FilterSpec::Bohr(b) => Ok(Some((nil_bohr_members(&b.spec()?, n_range)?, 0))),
    }
}

fn filtered_scan(
    report: &mut ExperimentReport,
    e: &WindowSet,
    pvec: &PolyVec,
    threshold: f64,
    n_range: Window,
) -> Result<ScanReport> {
    let filter = build_filter(&report.config.filter, n_range)?;
    match &filter {
        Some((set, ambiguous)) => {
            report.values.insert("filter_members".into(), set.popcount() as f64);
            report.values.insert("filter_boundary_ambiguous".into(), *ambiguous as f64);
            let pred = |n: i64| set.contains(n);
            scan_good_n(e, pvec, threshold, n_range, report.config.m, Some(&pred))
        }
        None => scan_good_n(e, pvec, threshold, n_range, report.config.m, None),
    }
}

fn max_density(scan: &ScanReport) -> f64 {
    scan.per_n_density
        .iter()
        .filter(|e| e.status == EntryStatus::Ok)
        .map(|e| e.density)
        .fold(0.0, f64::max)
}

/// Good-`n` scan for `E = A' + B` along `n ∈ S_{k,α}` at threshold `δ^k - ε`.
pub fn run_sumset_recurrence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg.clone());
    rep.notes.push(FINITE_PROXY_NOTE.into());
    let mut clock = Stopwatch::start();
    let n_range = cfg.scan.window()?;
    let pvec = PolyVec::arithmetic(cfg.k);
    let threshold = cfg.recurrence_threshold();

    rep.scans.insert("canary_all_ones".into(), canary_scan(cfg, &pvec, threshold, n_range)?);
    rep.add_verdict("canary: all-ones B passes every n", Check::AllPass { scan: "canary_all_ones".into() })?;
    clock.lap(&mut rep, "canary");

    let b = cfg.set_b.build(cfg.window, cfg.seed)?;
    let a = cfg.set_a.build()?;
    let e = sumset(&a, &b)?;
    rep.densities.insert("B".into(), banach_density(&b, cfg.m)?.to_record());
    rep.densities.insert("E".into(), banach_density(&e, cfg.m)?.to_record());
    rep.values.insert("A_size".into(), a.len() as f64);
    clock.lap(&mut rep, "build_sets");

    let scan = filtered_scan(&mut rep, &e, &pvec, threshold, n_range)?;
    rep.values.insert("threshold".into(), threshold);
    rep.values.insert("achieved_threshold".into(), max_density(&scan));
    rep.scans.insert("main".into(), scan);
    clock.lap(&mut rep, "scan");

    rep.add_verdict("passing set nonempty", Check::NonEmpty { scan: "main".into() })?;
    rep.add_verdict(
        "syndetic on the scanned range",
        Check::Syndetic {
            scan: "main".into(),
            min_freq: cfg.min_freq,
            max_gap_bound: cfg.max_gap_bound,
        },
    )?;
    Ok(rep)
}

fn default_bohr() -> BohrConfig {
    BohrConfig {
        alphas: vec![Alpha::sqrt2()],
        arcs: vec![[-0.1, 0.1]],
        polys: Vec::new(),
        frac_bits: crate::sequences::MIN_FRAC_BITS,
    }
}

/// Good-`n` scan for `E = A' + B` at threshold `δ - ε`, compared with a Bohr set.
pub fn run_near_theorem(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg.clone());
    rep.notes.push(FINITE_PROXY_NOTE.into());
    rep.notes.push(
        "The passing set is compared with a generated Bohr set by overlap statistics only; no exceptional \
         set is subtracted."
            .into(),
    );
    let mut clock = Stopwatch::start();
    let n_range = cfg.scan.window()?;
    let pvec = PolyVec::arithmetic(cfg.k);
    let threshold = (cfg.delta - cfg.epsilon).max(0.0);

    rep.scans.insert("canary_all_ones".into(), canary_scan(cfg, &pvec, threshold, n_range)?);
    rep.add_verdict("canary: all-ones B passes every n", Check::AllPass { scan: "canary_all_ones".into() })?;
    clock.lap(&mut rep, "canary");

    if let SetARecipe::AlongFamily { family, j, modulus, residues } = &cfg.set_a {
        let s = family.generate(*j)?;
        let lo = i64::try_from(s[0]).map_err(|_| LabError::Overflow("family element".into()))?;
        let hi = i64::try_from(s[s.len() - 1]).map_err(|_| LabError::Overflow("family element".into()))?;
        let a_set = WindowSet::from_fn(Window::inclusive(lo, hi)?, |x| match modulus {
            None => true,
            Some(q) => residues.iter().any(|&r| (x - r).rem_euclid(*q) == 0),
        });
        let r = relative_density(&a_set, family, *j)?;
        if *r.numer() == 0 {
            return Err(LabError::InvalidArgument(format!(
                "A has zero density relative to {family} at j = {j}"
            )));
        }
        rep.ratios.insert("relative_density_A".into(), r);
    }

    let b = cfg.set_b.build(cfg.window, cfg.seed)?;
    let a = cfg.set_a.build()?;
    let e = sumset(&a, &b)?;
    rep.densities.insert("B".into(), banach_density(&b, cfg.m)?.to_record());
    rep.densities.insert("E".into(), banach_density(&e, cfg.m)?.to_record());
    rep.values.insert("A_size".into(), a.len() as f64);
    clock.lap(&mut rep, "build_sets");

    let scan = filtered_scan(&mut rep, &e, &pvec, threshold, n_range)?;
    rep.values.insert("threshold".into(), threshold);
    rep.values.insert("achieved_threshold".into(), max_density(&scan));
    clock.lap(&mut rep, "scan");

    let bohr_cfg = cfg.bohr.clone().unwrap_or_else(default_bohr);
    let bohr = nil_bohr_members(&bohr_cfg.spec()?, n_range)?;
    let both = scan.passing.iter().filter(|&&n| bohr.contains(n)).count() as f64;
    let frac = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    rep.values.insert("bohr_members".into(), bohr.popcount() as f64);
    rep.values.insert("bohr_max_gap".into(), gap_profile(&bohr).max_gap as f64);
    rep.values.insert("overlap_of_passing".into(), frac(both, scan.passing.len() as f64));
    rep.values.insert("overlap_of_bohr".into(), frac(both, bohr.popcount() as f64));
    rep.scans.insert("main".into(), scan);
    clock.lap(&mut rep, "bohr");

    rep.add_verdict("passing set nonempty", Check::NonEmpty { scan: "main".into() })?;
    Ok(rep)
}

/// Weyl profiles of the configured families with exceptional angles flagged.
pub fn run_equidist_report(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg.clone());
    rep.notes.push(FINITE_PROXY_NOTE.into());
    rep.notes.push(
        "Exceptional angles are reported on a finite grid together with the rational suspects 2πa/q; \
         countability of the exceptional set is not tested."
            .into(),
    );
    let mut clock = Stopwatch::start();
    let spec = &cfg.equidist;
    let thetas = uniform_angle_grid(spec.thetas);
    for family in &spec.families {
        let name = family.name();
        let profile = equidist_profile(*family, spec.j, &thetas)?;
        rep.values.insert(format!("exceptional_{name}"), profile.exceptional(spec.tol).len() as f64);
        rep.values.insert(format!("max_magnitude_{name}"), profile.max_magnitude());
        if *family == SequenceFamily::Blocks {
            let margin: Vec<f64> = thetas
                .iter()
                .zip(&profile.magnitudes)
                .map(|(&t, &m)| block_bound(spec.j, t) - m)
                .collect();
            rep.series.insert("blocks_bound_margin".into(), margin);
            rep.add_verdict(
                "blocks within the geometric bound",
                Check::SeriesMinAtLeast { series: "blocks_bound_margin".into(), bound: 0.0 },
            )?;
        }
        rep.series.insert(format!("weyl_{name}"), profile.magnitudes);

        let suspects = family.analytic_suspects(spec.max_den);
        if !suspects.is_empty() {
            let mags = suspects
                .iter()
                .map(|&t| family_weyl_average(*family, spec.j, t).map(|z| z.norm()))
                .collect::<Result<Vec<_>>>()?;
            rep.series.insert(format!("suspects_{name}"), mags);
        }
        match family {
            SequenceFamily::Squares => {
                let z = family_weyl_average(*family, spec.j, Angle::from_ratio(1, 4))?;
                let err = (z - Complex64::new(0.5, 0.5)).norm();
                rep.values.insert("squares_at_pi_over_2_error".into(), err);
                rep.add_verdict(
                    "squares concentrate at π/2",
                    Check::ValueBelow { value: "squares_at_pi_over_2_error".into(), bound: 0.01 },
                )?;
            }
            SequenceFamily::Primes => {
                let z = family_weyl_average(*family, spec.j, Angle::from_ratio(1, 3))?;
                rep.values.insert("primes_at_2pi_over_3".into(), z.norm());
                rep.add_verdict(
                    "primes exceptional at 2π/3",
                    Check::ValueAbove { value: "primes_at_2pi_over_3".into(), bound: spec.tol },
                )?;
            }
            SequenceFamily::FloorPow52 => {
                let generic = equidist_profile(*family, spec.j, &generic_angle_grid(spec.thetas))?;
                rep.series.insert(format!("generic_{name}"), generic.magnitudes);
                rep.add_verdict(
                    "floor_pow_5_2 small at generic angles",
                    Check::SeriesMaxBelow { series: format!("generic_{name}"), bound: spec.tol },
                )?;
            }
            _ => {}
        }
        clock.lap(&mut rep, name);
    }
    Ok(rep)
}

/// Correlation decay, Wiener exceedance, torus recurrence and Cesàro flattening.
pub fn run_dynamics_report(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg.clone());
    rep.notes.push(FINITE_PROXY_NOTE.into());
    rep.notes.push("Torus sets are grid-measurable: indicators of unions of grid cells.".into());
    let mut clock = Stopwatch::start();
    let spec = &cfg.dynamics;
    let sys = spec.system.build(spec.frac_bits)?;
    let d = sys.d();
    let g = spec.grid.unwrap_or_else(|| default_grid(d));
    let pvec = PolyVec::arithmetic(cfg.k);

    let one = GridFunction::constant(d, g, Complex64::new(1.0, 0.0))?;
    let control = multi_correlation_series(&sys, &one, &pvec, Window::inclusive(1, 10)?)?;
    rep.series.insert("control_constant_multi".into(), control);
    rep.add_verdict(
        "canary: constant observable has I_p = 1",
        Check::SeriesWithin { series: "control_constant_multi".into(), target: 1.0, tol: 1e-12 },
    )?;
    clock.lap(&mut rep, "canary");

    let f = spec.observable.build(d, g)?;
    let ns: Vec<i64> = (1..=spec.n_max as i64).collect();
    let decay = spectral_series_at(&sys, &f, &f, &ns)?;
    rep.series.insert("decay_abs_corr".into(), ns.iter().map(|&n| decay.coeffs[&n].norm()).collect());
    rep.add_verdict(
        "correlations vanish for n >= 1",
        Check::SeriesMaxBelow { series: "decay_abs_corr".into(), bound: spec.decay_bound },
    )?;

    let alpha = match &spec.system {
        SystemPreset::Kronecker1d { alpha } | SystemPreset::SkewQuadratic { alpha } => alpha.clone(),
    };
    let kron = TorusSystem::kronecker1d(&alpha, spec.frac_bits)?;
    let eigen = GridFunction::exp_axis(1, DEFAULT_GRID_1D, 0, 1)?;
    let atoms = spectral_series_at(&kron, &eigen, &eigen, &ns)?;
    rep.series.insert("kronecker_control_abs_corr".into(), ns.iter().map(|&n| atoms.coeffs[&n].norm()).collect());
    rep.add_verdict(
        "Kronecker eigenfunction has |correlation| = 1",
        Check::SeriesWithin { series: "kronecker_control_abs_corr".into(), target: 1.0, tol: 1e-9 },
    )?;
    clock.lap(&mut rep, "decay");

    for w in &spec.wiener {
        let elems: Vec<i64> = w
            .family
            .generate(w.j)?
            .into_iter()
            .map(|x| i64::try_from(x).map_err(|_| LabError::Overflow(format!("element {x}"))))
            .collect::<Result<_>>()?;
        let key = format!("wiener_{}_{}", w.family.name(), w.j);
        let series = spectral_series_at(&sys, &f, &f, &elems)?;
        rep.ratios.insert(key.clone(), wiener_exceedance(&series, spec.wiener_eps, &w.family, w.j)?);
        rep.add_verdict(&format!("no exceedance along {} (j = {})", w.family, w.j), Check::RatioEquals {
            ratio: key.clone(),
            num: 0,
            den: 1,
        })?;
        let atomic = spectral_series_at(&kron, &eigen, &eigen, &elems)?;
        let akey = format!("wiener_atomic_{}_{}", w.family.name(), w.j);
        rep.ratios.insert(akey.clone(), wiener_exceedance(&atomic, spec.wiener_eps, &w.family, w.j)?);
        rep.add_verdict(&format!("atomic control exceeds along {}", w.family), Check::RatioEquals {
            ratio: akey,
            num: 1,
            den: 1,
        })?;
    }
    clock.lap(&mut rep, "wiener");

    let r = &spec.recurrence;
    let d_set = GridFunction::indicator_interval(r.grid, r.lo, r.hi)?;
    let ralpha = r.alpha.render(crate::sequences::MIN_FRAC_BITS)?;
    let rpvec = PolyVec::new(vec![r.poly.clone()]);
    let n_range = Window::inclusive(1, r.n_hi)?;
    let scan = torus_recurrence_scan(&d_set, std::slice::from_ref(&ralpha), &rpvec, r.eps, n_range)?;
    let cut = f64_to_frac128(r.near_zero);
    let near: Vec<i64> = n_range
        .iter()
        .filter(|&n| {
            let v = ralpha.mul_int_mod1_unchecked(&r.poly.eval_big(&BigInt::from(n)));
            v.cmp_frac128(cut) == std::cmp::Ordering::Less
        })
        .collect();
    rep.values.insert("recurrence_measure_D".into(), d_set.mean().re);
    rep.scans.insert("torus_recurrence".into(), scan);
    rep.add_verdict("recurrence set nonempty", Check::NonEmpty { scan: "torus_recurrence".into() })?;
    rep.add_verdict(
        "recurrence set has positive frequency",
        Check::MinFrequency { scan: "torus_recurrence".into(), min: r.min_freq },
    )?;
    rep.add_verdict(
        "n with {p(n)α} near 0 recur",
        Check::PassesAll { scan: "torus_recurrence".into(), ns: near },
    )?;
    clock.lap(&mut rep, "torus_recurrence");

    if d == 2 {
        run_cesaro_pipeline(&mut rep, &pvec, g)?;
        clock.lap(&mut rep, "cesaro");
    } else {
        rep.notes.push("Cesàro flattening skipped: it needs the two-dimensional skew product.".into());
    }
    Ok(rep)
}

fn run_cesaro_pipeline(rep: &mut ExperimentReport, pvec: &PolyVec, g: usize) -> Result<()> {
    let c = rep.config.dynamics.cesaro.clone();
    let sys = rep.config.dynamics.system.build(c.frac_bits)?;
    let arcs = c
        .box_arcs
        .iter()
        .map(|[lo, hi]| crate::sequences::Arc::new(*lo, *hi))
        .collect::<Result<Vec<_>>>()?;
    let f = GridFunction::indicator_box(2, g, &arcs)?;
    let (_, h) = f.kronecker_split();
    let selection = match cesaro_select(&sys, &h, powers_of_two(), c.tol, c.n_cap, c.slack) {
        Ok(s) => s,
        Err(LabError::ToleranceNotReached { best }) => *best,
        Err(e) => return Err(e),
    };
    rep.series.insert("cesaro_norm_history".into(), selection.norm_history.clone());
    rep.values.insert("cesaro_final_norm".into(), selection.final_norm);
    rep.values.insert("cesaro_offsets".into(), selection.offsets.len() as f64);
    rep.values.insert("cesaro_examined".into(), selection.examined as f64);
    rep.add_verdict(
        "Cesàro selection reaches tolerance",
        Check::ValueBelow { value: "cesaro_final_norm".into(), bound: c.tol },
    )?;

    let one = GridFunction::constant(2, g, Complex64::new(1.0, 0.0))?;
    let control = match cesaro_select(&sys, &one, powers_of_two(), c.tol, 20, c.slack) {
        Ok(s) => s.final_norm,
        Err(LabError::ToleranceNotReached { best }) => best.final_norm,
        Err(e) => return Err(e),
    };
    rep.values.insert("cesaro_control_final_norm".into(), control);
    rep.add_verdict(
        "invariant control does not flatten",
        Check::ValueAbove { value: "cesaro_control_final_norm".into(), bound: c.tol },
    )?;

    let avg = averaged_observable(&sys, &f, &selection.offsets)?;
    let series = multi_correlation_series(&sys, &avg, pvec, Window::inclusive(1, c.n_hi)?)?;
    let mean = f.mean().re;
    rep.values.insert("averaged_min_multi_correlation".into(), series.iter().copied().fold(f64::INFINITY, f64::min));
    rep.values.insert("mean_pow_k".into(), mean.powi(pvec.k() as i32));
    rep.values.insert("averaged_corr_at_0".into(), correlation(&sys, &avg, &avg, 0)?.re);
    rep.series.insert("averaged_multi_correlation".into(), series);
    Ok(())
}

/// Members of `{n ∈ n_range : n ∈ S_{k,α}}` as a list, ambiguous `n` excluded.
pub fn intersective_filter(k: u32, alpha: &Alpha, frac_bits: u32, n_range: Window) -> Result<Vec<i64>> {
    let scan = intersective_members(k, &alpha.render(frac_bits)?, n_range)?;
    Ok(scan.members)
}

/// Classification of a single `n`, exposed for spot checks.
pub fn intersective_status(n: u64, k: u32, alpha: &Alpha, frac_bits: u32) -> Result<Membership> {
    crate::sequences::intersective_membership(n, k, &alpha.render(frac_bits)?)
}

/// The sets `A'` and `B` of a config and their sumset.
pub fn build_sets(cfg: &ExperimentConfig) -> Result<(FiniteOffsets, WindowSet, WindowSet)> {
    let b = cfg.set_b.build(cfg.window, cfg.seed)?;
    let a = cfg.set_a.build()?;
    let e = sumset(&a, &b)?;
    Ok((a, b, e))
}
