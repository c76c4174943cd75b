use std::collections::BTreeMap;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::density::DensityRecord;
use crate::error::{LabError, Result};
use crate::progressions::ScanReport;

/// A pass/fail rule evaluated against data embedded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    NonEmpty { scan: String },
    AllPass { scan: String },
    /// `relative_frequency >= min_freq` and `max_gap <= max_gap_bound`.
    Syndetic { scan: String, min_freq: f64, max_gap_bound: u64 },
    MinFrequency { scan: String, min: f64 },
    /// Every listed `n` is in the passing set.
    PassesAll { scan: String, ns: Vec<i64> },
    SeriesMaxBelow { series: String, bound: f64 },
    SeriesMinAtLeast { series: String, bound: f64 },
    /// `|x - target| <= tol` for every entry.
    SeriesWithin { series: String, target: f64, tol: f64 },
    ValueBelow { value: String, bound: f64 },
    ValueAbove { value: String, bound: f64 },
    RatioEquals { ratio: String, num: u64, den: u64 },
}

/// A named check with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    #[serde(flatten)]
    pub check: Check,
    pub passed: bool,
}

/// Everything an experiment produced. All verdicts are functions of the
/// embedded scans, series, values and ratios; `timings_ms` is the only
/// field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub notes: Vec<String>,
    pub densities: BTreeMap<String, DensityRecord>,
    pub scans: BTreeMap<String, ScanReport>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub values: BTreeMap<String, f64>,
    pub ratios: BTreeMap<String, Ratio<u64>>,
    pub verdicts: Vec<Verdict>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentReport {
            config,
            notes: Vec::new(),
            densities: BTreeMap::new(),
            scans: BTreeMap::new(),
            series: BTreeMap::new(),
            values: BTreeMap::new(),
            ratios: BTreeMap::new(),
            verdicts: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    /// Evaluate `check` on the current contents and record it.
    pub fn add_verdict(&mut self, name: &str, check: Check) -> Result<bool> {
        let passed = self.evaluate(&check)?;
        self.verdicts.push(Verdict {
            name: name.to_string(),
            check,
            passed,
        });
        Ok(passed)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    fn scan(&self, name: &str) -> Result<&ScanReport> {
        self.scans
            .get(name)
            .ok_or_else(|| LabError::InvalidArgument(format!("report has no scan {name:?}")))
    }

    fn series_of(&self, name: &str) -> Result<&[f64]> {
        self.series
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| LabError::InvalidArgument(format!("report has no series {name:?}")))
    }

    fn value(&self, name: &str) -> Result<f64> {
        self.values
            .get(name)
            .copied()
            .ok_or_else(|| LabError::InvalidArgument(format!("report has no value {name:?}")))
    }

    pub fn evaluate(&self, check: &Check) -> Result<bool> {
        Ok(match check {
            Check::NonEmpty { scan } => !self.scan(scan)?.passing.is_empty(),
            Check::AllPass { scan } => {
                let s = self.scan(scan)?;
                s.scanned > 0 && s.passing.len() as u64 == s.scanned
            }
            Check::Syndetic { scan, min_freq, max_gap_bound } => {
                let s = self.scan(scan)?;
                s.relative_frequency >= *min_freq && s.max_gap <= *max_gap_bound
            }
            Check::MinFrequency { scan, min } => self.scan(scan)?.relative_frequency > *min,
            Check::PassesAll { scan, ns } => {
                let s = self.scan(scan)?;
                ns.iter().all(|n| s.passing.binary_search(n).is_ok())
            }
            Check::SeriesMaxBelow { series, bound } => self.series_of(series)?.iter().all(|x| x < bound),
            Check::SeriesMinAtLeast { series, bound } => self.series_of(series)?.iter().all(|x| x >= bound),
            Check::SeriesWithin { series, target, tol } => {
                self.series_of(series)?.iter().all(|x| (x - target).abs() <= *tol)
            }
            Check::ValueBelow { value, bound } => self.value(value)? < *bound,
            Check::ValueAbove { value, bound } => self.value(value)? > *bound,
            Check::RatioEquals { ratio, num, den } => {
                let r = self
                    .ratios
                    .get(ratio)
                    .ok_or_else(|| LabError::InvalidArgument(format!("report has no ratio {ratio:?}")))?;
                *r == Ratio::new(*num, *den)
            }
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// JSON with the timing fields cleared, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timings_ms.clear();
        copy.to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Write the JSON report and, when `csv_dir` is given, one CSV per scan.
    pub fn write(&self, report: &Path, csv_dir: Option<&Path>) -> Result<()> {
        if let Some(parent) = report.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(report, self.to_json()?)?;
        if let Some(dir) = csv_dir {
            std::fs::create_dir_all(dir)?;
            for (name, scan) in &self.scans {
                std::fs::write(dir.join(format!("{name}.csv")), scan.to_csv())?;
            }
        }
        Ok(())
    }
}

/// Outcome of re-checking a stored report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    /// `(verdict name, recomputed outcome)` in report order.
    pub verdicts: Vec<(String, bool)>,
    /// Disagreements between stored and recomputed data.
    pub mismatches: Vec<String>,
}

impl VerifyOutcome {
    pub fn all_pass(&self) -> bool {
        self.mismatches.is_empty() && self.verdicts.iter().all(|(_, p)| *p)
    }
}

/// Recompute scan summaries from their raw entries and re-evaluate every verdict.
pub fn verify_report(report: &ExperimentReport) -> Result<VerifyOutcome> {
    let mut mismatches = Vec::new();
    for (name, scan) in &report.scans {
        if scan.recomputed() != *scan {
            mismatches.push(format!("scan {name:?}: summary fields disagree with per-n data"));
        }
    }
    let mut rebuilt = report.clone();
    for scan in rebuilt.scans.values_mut() {
        *scan = scan.recomputed();
    }
    let mut verdicts = Vec::new();
    for v in &report.verdicts {
        let passed = rebuilt.evaluate(&v.check)?;
        if passed != v.passed {
            mismatches.push(format!("verdict {:?}: stored {}, recomputed {}", v.name, v.passed, passed));
        }
        verdicts.push((v.name.clone(), passed));
    }
    Ok(VerifyOutcome { verdicts, mismatches })
}
