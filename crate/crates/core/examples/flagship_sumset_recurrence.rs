//! Run a configured experiment end to end and print its verdicts.
//!
//! ```text
//! cargo run --release --example flagship_sumset_recurrence -- examples/configs/flagship.toml
//! ```

use std::path::PathBuf;

use sumset_lab::experiments::{run_experiment, verify_report, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/flagship.toml")));
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_experiment(&cfg)?;

    for note in &report.notes {
        println!("note: {note}");
    }
    for (name, d) in &report.densities {
        println!("density {name}: {}/{} (M={})", d.value_num, d.value_den, d.m);
    }
    for (name, scan) in &report.scans {
        println!(
            "scan {name}: {} passing of {}, frequency {:.3}, max gap {}",
            scan.passing.len(),
            scan.scanned,
            scan.relative_frequency,
            scan.max_gap
        );
    }
    for v in &report.verdicts {
        println!("{} {}", if v.passed { "PASS" } else { "FAIL" }, v.name);
    }
    let checked = verify_report(&report)?;
    println!("re-verified: {}", if checked.all_pass() { "ok" } else { "mismatch" });
    Ok(())
}
