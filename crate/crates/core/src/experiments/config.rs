use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GridFunction, TorusSystem};
use crate::error::{LabError, Result};
use crate::progressions::IntPoly;
use crate::sequences::{Alpha, Arc, FixedPointReal, SequenceFamily, MIN_FRAC_BITS};
use crate::structure::{BohrSpec, NilBohrSpec};
use crate::windowset::{FiniteOffsets, Window, WindowSet};

/// Which runner an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SumsetRecurrence,
    NearTheorem,
    EquidistReport,
    DynamicsReport,
}

/// Seedable generator used for random sets. Only ChaCha with 8 rounds is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prng {
    #[default]
    Chacha8,
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prng: Prng,
    /// Length `N` of the window `[0, N)` carrying `B`.
    #[serde(default = "default_window")]
    pub window: u64,
    /// Density windows have length `M + 1`.
    #[serde(default = "default_m")]
    pub m: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Target density of `B`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Finite proxy for syndeticity: minimum passing frequency.
    #[serde(default)]
    pub min_freq: f64,
    /// Finite proxy for syndeticity: largest allowed gap between passing `n`.
    #[serde(default = "default_max_gap")]
    pub max_gap_bound: u64,
    #[serde(default)]
    pub set_a: SetARecipe,
    #[serde(default)]
    pub set_b: SetBRecipe,
    #[serde(default)]
    pub filter: FilterSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub bohr: Option<BohrConfig>,
    #[serde(default)]
    pub equidist: EquidistSpec,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_window() -> u64 {
    1 << 20
}
fn default_m() -> u64 {
    (1 << 16) - 1
}
fn default_k() -> usize {
    3
}
fn default_epsilon() -> f64 {
    0.03
}
fn default_delta() -> f64 {
    0.5
}
fn default_max_gap() -> u64 {
    100
}
fn default_frac_bits() -> u32 {
    MIN_FRAC_BITS
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; relative paths inside it are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let SetBRecipe::File { path } = &mut self.set_b {
            fix(path);
        }
        if let ObservableSpec::GridFile { path } = &mut self.dynamics.observable {
            fix(path);
        }
        self.output.report.iter_mut().chain(self.output.csv_dir.iter_mut()).for_each(fix);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidArgument(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} must lie in (0, 1)", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta {} must lie in (0, 1]", self.delta));
        }
        if self.k < 1 {
            return bad("k must be at least 1".into());
        }
        if self.window == 0 || self.window > i64::MAX as u64 / 4 {
            return bad(format!("window length {} out of range", self.window));
        }
        if !(0.0..=1.0).contains(&self.min_freq) {
            return bad(format!("min_freq {} must lie in [0, 1]", self.min_freq));
        }
        if self.scan.n_lo > self.scan.n_hi {
            return bad("scan range is empty".into());
        }
        if let SetBRecipe::Bernoulli { density } = self.set_b {
            if !(0.0..=1.0).contains(&density) {
                return bad(format!("Bernoulli density {density} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Threshold `δ^k - ε` of the sumset recurrence scan.
    pub fn recurrence_threshold(&self) -> f64 {
        (self.delta.powi(self.k as i32) - self.epsilon).max(0.0)
    }
}

/// Scanned range of `n`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub n_lo: i64,
    pub n_hi: i64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { n_lo: 1, n_hi: 5000 }
    }
}

impl ScanSpec {
    pub fn window(&self) -> Result<Window> {
        Window::inclusive(self.n_lo, self.n_hi)
    }
}

/// The finite set `A'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetARecipe {
    /// `{1, 2, 4, ...}` up to `max`.
    PowersOfTwo { max: u64 },
    /// All of `S_j`.
    Family { family: SequenceFamily, j: u64 },
    /// `A ∩ S_j` where `A` is the residue classes listed (every integer when `modulus` is absent).
    AlongFamily {
        family: SequenceFamily,
        j: u64,
        #[serde(default)]
        modulus: Option<i64>,
        #[serde(default)]
        residues: Vec<i64>,
    },
    Explicit { elements: Vec<i64> },
}

impl Default for SetARecipe {
    fn default() -> Self {
        SetARecipe::Explicit { elements: vec![0] }
    }
}

impl SetARecipe {
    pub fn build(&self) -> Result<FiniteOffsets> {
        let elems: Vec<i64> = match self {
            SetARecipe::PowersOfTwo { max } => (0..63).map(|e| 1i64 << e).filter(|&p| p as u64 <= *max).collect(),
            SetARecipe::Family { family, j } => to_i64(family.generate(*j)?)?,
            SetARecipe::AlongFamily { family, j, modulus, residues } => {
                let s = to_i64(family.generate(*j)?)?;
                s.into_iter().filter(|&x| in_residues(x, *modulus, residues)).collect()
            }
            SetARecipe::Explicit { elements } => elements.clone(),
        };
        if elems.is_empty() {
            return Err(LabError::InvalidArgument("set A' is empty".into()));
        }
        FiniteOffsets::new(elems)
    }
}

fn in_residues(x: i64, modulus: Option<i64>, residues: &[i64]) -> bool {
    match modulus {
        None => true,
        Some(q) => residues.iter().any(|&r| (x - r).rem_euclid(q) == 0),
    }
}

fn to_i64(v: Vec<i128>) -> Result<Vec<i64>> {
    v.into_iter()
        .map(|x| i64::try_from(x).map_err(|_| LabError::Overflow(format!("element {x} exceeds 64 bits"))))
        .collect()
}

/// The set `B` on `[0, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetBRecipe {
    /// i.i.d. membership with probability `density` per position.
    Bernoulli { density: f64 },
    AllOnes,
    /// `{n : {n^power · α} ∈ [lo, hi)}`.
    PolyFrac {
        alpha: Alpha,
        #[serde(default = "default_power")]
        power: u32,
        lo: f64,
        hi: f64,
        #[serde(default = "default_frac_bits")]
        frac_bits: u32,
    },
    Periodic { modulus: i64, residues: Vec<i64> },
    /// A set stored in the WINDOWSET text format.
    File { path: PathBuf },
}

fn default_power() -> u32 {
    1
}

impl Default for SetBRecipe {
    fn default() -> Self {
        SetBRecipe::Bernoulli { density: 0.5 }
    }
}

impl SetBRecipe {
    pub fn build(&self, n: u64, seed: u64) -> Result<WindowSet> {
        let window = Window::new(0, n as i64)?;
        match self {
            SetBRecipe::Bernoulli { density } => Ok(bernoulli_set(window, *density, seed)),
            SetBRecipe::AllOnes => Ok(WindowSet::full(window)),
            SetBRecipe::PolyFrac { alpha, power, lo, hi, frac_bits } => {
                poly_frac_set(window, &alpha.render(*frac_bits)?, *power, *lo, *hi)
            }
            SetBRecipe::Periodic { modulus, residues } => {
                if *modulus <= 0 {
                    return Err(LabError::InvalidArgument("modulus must be positive".into()));
                }
                Ok(WindowSet::from_fn(window, |x| in_residues(x, Some(*modulus), residues)))
            }
            SetBRecipe::File { path } => {
                let file = std::fs::File::open(path)?;
                WindowSet::read_from(std::io::BufReader::new(file))
            }
        }
    }
}

/// i.i.d. Bernoulli(`density`) set: position `i` is a member when the `i`-th
/// 64-bit ChaCha8 output is below `density · 2^64`.
pub fn bernoulli_set(window: Window, density: f64, seed: u64) -> WindowSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cut = density.clamp(0.0, 1.0) * 2f64.powi(64);
    let all = density >= 1.0;
    let threshold = cut as u64;
    WindowSet::from_fn(window, |_| {
        let draw = rng.next_u64();
        all || draw < threshold
    })
}

/// `{n ∈ window : {n^power α} ∈ [lo, hi)}` by exact fixed-point evaluation.
pub fn poly_frac_set(window: Window, alpha: &FixedPointReal, power: u32, lo: f64, hi: f64) -> Result<WindowSet> {
    use rayon::prelude::*;
    use std::cmp::Ordering;
    if power == 0 {
        return Err(LabError::InvalidArgument("power must be at least 1".into()));
    }
    let reach = num_bigint::BigInt::from(window.lo().unsigned_abs().max((window.hi() - 1).unsigned_abs()));
    alpha.check_budget(&reach.pow(power))?;
    let (lo, hi) = (crate::sequences::f64_to_frac128(lo), crate::sequences::f64_to_frac128(hi));
    let ns: Vec<i64> = window.iter().collect();
    let bits: Vec<bool> = ns
        .par_iter()
        .map(|&n| {
            let v = alpha.mul_int_mod1_unchecked(&num_bigint::BigInt::from(n).pow(power));
            let above_lo = v.cmp_frac128(lo) != Ordering::Less;
            let below_hi = v.cmp_frac128(hi) == Ordering::Less;
            if lo <= hi {
                above_lo && below_hi
            } else {
                above_lo || below_hi
            }
        })
        .collect();
    WindowSet::from_bools(window, &bits)
}

/// Restriction of the scanned `n`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    #[default]
    None,
    /// `n ∈ S_{k,α}`; boundary-ambiguous `n` are excluded and counted.
    Intersective {
        k: u32,
        alpha: Alpha,
        #[serde(default = "default_frac_bits")]
        frac_bits: u32,
    },
    Bohr(BohrConfig),
}

/// A Bohr or Nil-Bohr set in config form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohrConfig {
    pub alphas: Vec<Alpha>,
    /// One `[lo, hi]` arc per rotation number; `lo > hi` wraps through 0.
    pub arcs: Vec<[f64; 2]>,
    /// Polynomials `p` with `p(0) = 0`; the plain Bohr set when absent.
    #[serde(default)]
    pub polys: Vec<IntPoly>,
    #[serde(default = "default_frac_bits")]
    pub frac_bits: u32,
}

impl BohrConfig {
    pub fn spec(&self) -> Result<NilBohrSpec> {
        let alphas = self
            .alphas
            .iter()
            .map(|a| a.render(self.frac_bits))
            .collect::<Result<Vec<_>>>()?;
        let arcs = self.arcs.iter().map(|[lo, hi]| Arc::new(*lo, *hi)).collect::<Result<Vec<_>>>()?;
        let polys = if self.polys.is_empty() {
            vec![IntPoly::identity()]
        } else {
            self.polys.clone()
        };
        NilBohrSpec::new(BohrSpec::new(alphas, arcs)?, polys)
    }
}

/// Weyl profile settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquidistSpec {
    pub families: Vec<SequenceFamily>,
    pub j: u64,
    pub thetas: u64,
    /// Magnitudes above this are flagged exceptional.
    pub tol: f64,
    /// Largest denominator among rational suspects `2πa/q`.
    pub max_den: u64,
}

impl Default for EquidistSpec {
    fn default() -> Self {
        EquidistSpec {
            families: SequenceFamily::ALL.to_vec(),
            j: 10_000,
            thetas: 100,
            tol: 0.05,
            max_den: 6,
        }
    }
}

/// Named system presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemPreset {
    /// `x ↦ x + α` on the circle.
    Kronecker1d {
        #[serde(default = "default_alpha")]
        alpha: Alpha,
    },
    /// `(x, y) ↦ (x + α, y + 2x + α)`.
    SkewQuadratic {
        #[serde(default = "default_alpha")]
        alpha: Alpha,
    },
}

fn default_alpha() -> Alpha {
    Alpha::sqrt2()
}

impl Default for SystemPreset {
    fn default() -> Self {
        SystemPreset::SkewQuadratic { alpha: default_alpha() }
    }
}

impl SystemPreset {
    pub fn build(&self, frac_bits: u32) -> Result<TorusSystem> {
        match self {
            SystemPreset::Kronecker1d { alpha } => TorusSystem::kronecker1d(alpha, frac_bits),
            SystemPreset::SkewQuadratic { alpha } => TorusSystem::skew_quadratic(alpha, frac_bits),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            SystemPreset::Kronecker1d { .. } => 1,
            SystemPreset::SkewQuadratic { .. } => 2,
        }
    }
}

/// Observable presets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// `e^{2πi y}` on the last coordinate.
    #[default]
    ExpY,
    /// `e^{2πi x}` on the first coordinate.
    ExpX,
    IndicatorBox { arcs: Vec<[f64; 2]> },
    /// Little-endian `(re, im)` f64 pairs in row-major order.
    GridFile { path: PathBuf },
}

impl ObservableSpec {
    pub fn build(&self, d: usize, g: usize) -> Result<GridFunction> {
        match self {
            ObservableSpec::ExpY => GridFunction::exp_axis(d, g, d - 1, 1),
            ObservableSpec::ExpX => GridFunction::exp_axis(d, g, 0, 1),
            ObservableSpec::IndicatorBox { arcs } => {
                let arcs = arcs.iter().map(|[lo, hi]| Arc::new(*lo, *hi)).collect::<Result<Vec<_>>>()?;
                GridFunction::indicator_box(d, g, &arcs)
            }
            ObservableSpec::GridFile { path } => {
                let file = std::fs::File::open(path)?;
                GridFunction::read_binary(d, g, std::io::BufReader::new(file))
            }
        }
    }
}

/// Wiener exceedance along one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerSpec {
    pub family: SequenceFamily,
    pub j: u64,
}

/// Torus recurrence scan on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecurrenceSpec {
    /// `D = [lo, hi)`.
    pub lo: f64,
    pub hi: f64,
    pub alpha: Alpha,
    pub poly: IntPoly,
    pub eps: f64,
    pub n_hi: i64,
    pub grid: usize,
    pub min_freq: f64,
    /// `n` with `{p(n)α}` closer than this to 0 must pass.
    pub near_zero: f64,
}

impl Default for RecurrenceSpec {
    fn default() -> Self {
        RecurrenceSpec {
            lo: 0.0,
            hi: 0.3,
            alpha: Alpha::sqrt2(),
            poly: IntPoly::monomial(1, 2),
            eps: 0.05,
            n_hi: 10_000,
            grid: crate::dynamics::DEFAULT_GRID_1D,
            min_freq: 0.02,
            near_zero: 1e-3,
        }
    }
}

/// Cesàro flattening followed by multiple correlations of the averaged indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CesaroSpec {
    pub tol: f64,
    pub n_cap: usize,
    pub slack: f64,
    pub frac_bits: u32,
    /// Set `D` whose indicator is flattened and correlated.
    pub box_arcs: Vec<[f64; 2]>,
    /// Multiple correlations `I_p(f_{A'}; n)` for `1 <= n <= n_hi`.
    pub n_hi: i64,
}

impl Default for CesaroSpec {
    fn default() -> Self {
        CesaroSpec {
            tol: 0.05,
            n_cap: 2000,
            slack: 1.0,
            frac_bits: 1024,
            box_arcs: vec![[0.0, 0.5], [0.0, 0.5]],
            n_hi: 50,
        }
    }
}

/// Settings of the dynamics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSpec {
    pub system: SystemPreset,
    pub observable: ObservableSpec,
    /// Grid per axis; the dimension default when absent.
    pub grid: Option<usize>,
    pub frac_bits: u32,
    pub n_max: u64,
    pub decay_bound: f64,
    pub wiener_eps: f64,
    pub wiener: Vec<WienerSpec>,
    pub recurrence: RecurrenceSpec,
    pub cesaro: CesaroSpec,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        DynamicsSpec {
            system: SystemPreset::default(),
            observable: ObservableSpec::default(),
            grid: None,
            frac_bits: 256,
            n_max: 1000,
            decay_bound: 1e-9,
            wiener_eps: 0.05,
            wiener: vec![
                WienerSpec { family: SequenceFamily::Squares, j: 30 },
                WienerSpec { family: SequenceFamily::Primes, j: 1000 },
            ],
            recurrence: RecurrenceSpec::default(),
            cesaro: CesaroSpec::default(),
        }
    }
}

/// Where results go; relative paths are taken from the config file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub report: Option<PathBuf>,
    /// Directory for per-scan CSV files.
    pub csv_dir: Option<PathBuf>,
}
