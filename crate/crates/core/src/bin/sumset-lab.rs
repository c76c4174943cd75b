use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sumset_lab::density::banach_density;
use sumset_lab::dynamics::{default_grid, spectral_series};
use sumset_lab::experiments::{
    run_experiment, verify_report, BohrConfig, ExperimentConfig, ExperimentReport, ObservableSpec, SetBRecipe,
    SystemPreset,
};
use sumset_lab::progressions::{scan_good_n, IntPoly, PolyVec};
use sumset_lab::sequences::{
    equidist_profile, generic_angle_grid, intersective_members, uniform_angle_grid, Alpha, Angle, SequenceFamily,
};
use sumset_lab::structure::{gap_profile, nil_bohr_members};
use sumset_lab::{sumset, FiniteOffsets, Window, WindowSet};

#[derive(Parser)]
#[command(name = "sumset-lab", version, about = "Finite-window sumset and recurrence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKind {
    Bernoulli,
    AllOnes,
    Periodic,
    PolyFrac,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemKind {
    Kronecker1d,
    SkewQuadratic,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set on [0, N) and write it in WINDOWSET format.
    GenSet {
        #[arg(long, value_enum)]
        kind: SetKind,
        #[arg(long)]
        window: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        modulus: Option<i64>,
        #[arg(long, value_delimiter = ',')]
        residues: Vec<i64>,
        #[arg(long, default_value = "sqrt2")]
        alpha: Alpha,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 0.5)]
        hi: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write A + B, with A given explicitly or as S_j of a family.
    Sumset {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        offsets: Vec<i64>,
        #[arg(long)]
        family: Option<SequenceFamily>,
        #[arg(long)]
        j: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Upper Banach density estimates, one JSON record per M.
    Density {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
    /// Scan n for pattern densities at or above a threshold.
    ScanAp {
        #[arg(long)]
        set: PathBuf,
        /// Arithmetic pattern length; ignored when --poly is given.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Pattern polynomials such as "n" or "n^2"; repeatable.
        #[arg(long)]
        poly: Vec<IntPoly>,
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        n_lo: i64,
        #[arg(long)]
        n_hi: i64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Weyl average magnitudes over an angle grid, as CSV (theta, magnitude).
    Weyl {
        #[arg(long)]
        family: SequenceFamily,
        #[arg(long)]
        j: u64,
        #[arg(long, default_value_t = 100)]
        thetas: u64,
        /// Use golden-ratio angles instead of the uniform grid.
        #[arg(long)]
        generic: bool,
        /// Explicit angles in radians; overrides the grid.
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Members of {n : {n^k α} ∈ (1/4, 3/4)} with boundary flags.
    Intersective {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "sqrt2")]
        alpha: Alpha,
        #[arg(long, default_value_t = 1)]
        n_lo: i64,
        #[arg(long)]
        n_hi: i64,
        #[arg(long, default_value_t = 192)]
        frac_bits: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Bohr or Nil-Bohr set over a range of n, written in WINDOWSET format.
    Bohr {
        #[arg(long, required = true)]
        alpha: Vec<Alpha>,
        /// Arc "lo,hi" mod 1 per rotation number; lo > hi wraps.
        #[arg(long, required = true, allow_hyphen_values = true)]
        arc: Vec<String>,
        #[arg(long)]
        poly: Vec<IntPoly>,
        #[arg(long)]
        n_lo: i64,
        #[arg(long)]
        n_hi: i64,
        #[arg(long, default_value_t = 192)]
        frac_bits: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Correlation sequence of an observable, as CSV (n, re, im, abs).
    Dynamics {
        #[arg(long, value_enum, default_value = "skew-quadratic")]
        system: SystemKind,
        #[arg(long, default_value = "sqrt2")]
        alpha: Alpha,
        /// exp_y, exp_x, or a path to a binary grid file.
        #[arg(long, default_value = "exp_y")]
        observable: String,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 100)]
        n_max: u64,
        #[arg(long, default_value_t = 256)]
        frac_bits: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Configured experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Recompute every verdict of a stored report.
    Verify { report: PathBuf },
}

#[derive(Subcommand)]
enum ExperimentAction {
    Run {
        config: PathBuf,
        /// Report path; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
}

fn read_set(path: &Path) -> Result<WindowSet> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(WindowSet::read_from(BufReader::new(file))?)
}

fn write_set(set: &WindowSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    set.write_to(&mut out)?;
    out.flush()?;
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_arc(s: &str) -> Result<[f64; 2]> {
    let (lo, hi) = s.split_once(',').context("arc must be \"lo,hi\"")?;
    Ok([lo.trim().parse()?, hi.trim().parse()?])
}

fn report_verdicts(report: &ExperimentReport) {
    for v in &report.verdicts {
        println!("{}  {}", if v.passed { "PASS" } else { "FAIL" }, v.name);
    }
}

/// Exit status 0 when everything passed, 2 otherwise.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenSet { kind, window, seed, density, modulus, residues, alpha, power, lo, hi, out } => {
            let recipe = match kind {
                SetKind::Bernoulli => SetBRecipe::Bernoulli { density },
                SetKind::AllOnes => SetBRecipe::AllOnes,
                SetKind::Periodic => SetBRecipe::Periodic {
                    modulus: modulus.context("--modulus is required for periodic sets")?,
                    residues,
                },
                SetKind::PolyFrac => SetBRecipe::PolyFrac { alpha, power, lo, hi, frac_bits: 192 },
            };
            write_set(&recipe.build(window, seed)?, &out)?;
        }
        Command::Sumset { set, offsets, family, j, out } => {
            let b = read_set(&set)?;
            let a = match (family, j) {
                (Some(f), Some(j)) => FiniteOffsets::new(
                    f.generate(j)?
                        .into_iter()
                        .map(i64::try_from)
                        .collect::<std::result::Result<Vec<_>, _>>()?,
                )?,
                (None, None) if !offsets.is_empty() => FiniteOffsets::new(offsets)?,
                _ => bail!("give either --offsets or both --family and --j"),
            };
            write_set(&sumset(&a, &b)?, &out)?;
        }
        Command::Density { set, m } => {
            let s = read_set(&set)?;
            let records = m
                .iter()
                .map(|&m| banach_density(&s, m).map(|d| d.to_record()))
                .collect::<sumset_lab::Result<Vec<_>>>()?;
            println!("{}", serde_json::to_string_pretty(&records)?);
        }
        Command::ScanAp { set, k, poly, threshold, n_lo, n_hi, m, json, csv } => {
            let s = read_set(&set)?;
            let pvec = if poly.is_empty() { PolyVec::arithmetic(k) } else { PolyVec::new(poly) };
            let report = scan_good_n(&s, &pvec, threshold, Window::inclusive(n_lo, n_hi)?, m, None)?;
            if let Some(p) = csv {
                std::fs::write(p, report.to_csv())?;
            }
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), json.as_deref())?;
        }
        Command::Weyl { family, j, thetas, generic, theta, out } => {
            let angles: Vec<Angle> = if !theta.is_empty() {
                theta.iter().map(|&t| Angle::from_radians(t)).collect()
            } else if generic {
                generic_angle_grid(thetas)
            } else {
                uniform_angle_grid(thetas)
            };
            emit(&equidist_profile(family, j, &angles)?.to_csv(), out.as_deref())?;
        }
        Command::Intersective { k, alpha, n_lo, n_hi, frac_bits, out } => {
            let range = Window::inclusive(n_lo, n_hi)?;
            let scan = intersective_members(k, &alpha.render(frac_bits)?, range)?;
            if let Some(p) = out {
                write_set(&WindowSet::from_elements(&scan.members, range), &p)?;
            }
            let summary = json!({
                "k": k,
                "alpha": alpha.to_string(),
                "frac_bits": frac_bits,
                "n_range": range,
                "members": scan.members.len(),
                "density": scan.density(),
                "boundary_ambiguous": scan.boundary_ambiguous,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Bohr { alpha, arc, poly, n_lo, n_hi, frac_bits, out } => {
            let arcs = arc.iter().map(|s| parse_arc(s)).collect::<Result<Vec<_>>>()?;
            let spec = BohrConfig { alphas: alpha, arcs, polys: poly, frac_bits }.spec()?;
            let range = Window::inclusive(n_lo, n_hi)?;
            let members = nil_bohr_members(&spec, range)?;
            if let Some(p) = out {
                write_set(&members, &p)?;
            }
            let summary = json!({
                "members": members.popcount(),
                "density": members.popcount() as f64 / range.len() as f64,
                "gaps": gap_profile(&members),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Dynamics { system, alpha, observable, grid, n_max, frac_bits, out } => {
            let preset = match system {
                SystemKind::Kronecker1d => SystemPreset::Kronecker1d { alpha },
                SystemKind::SkewQuadratic => SystemPreset::SkewQuadratic { alpha },
            };
            let sys = preset.build(frac_bits)?;
            let g = grid.unwrap_or_else(|| default_grid(sys.d()));
            let obs = match observable.as_str() {
                "exp_y" => ObservableSpec::ExpY,
                "exp_x" => ObservableSpec::ExpX,
                path => ObservableSpec::GridFile { path: path.into() },
            };
            let f = obs.build(sys.d(), g)?;
            let series = spectral_series(&sys, &f, &f, n_max)?;
            let mut csv = String::from("n,re,im,abs\n");
            for (n, z) in series.coeffs.range(0..) {
                csv.push_str(&format!("{n},{},{},{}\n", z.re, z.im, z.norm()));
            }
            emit(&csv, out.as_deref())?;
        }
        Command::Experiment { action: ExperimentAction::Run { config, out, csv_dir } } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg)?;
            let path = out.or_else(|| cfg.output.report.clone());
            let csv_dir = csv_dir.or_else(|| cfg.output.csv_dir.clone());
            match path {
                Some(p) => report.write(&p, csv_dir.as_deref())?,
                None => print!("{}", report.to_json()?),
            }
            report_verdicts(&report);
            return Ok(report.all_pass());
        }
        Command::Verify { report } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let outcome = verify_report(&ExperimentReport::from_json(&text)?)?;
            for (name, passed) in &outcome.verdicts {
                println!("{}  {name}", if *passed { "PASS" } else { "FAIL" });
            }
            for m in &outcome.mismatches {
                println!("MISMATCH  {m}");
            }
            return Ok(outcome.all_pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
