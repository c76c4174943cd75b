//! Scan for common differences `n` whose 3-term progression count stays large.

use sumset_lab::experiments::bernoulli_set;
use sumset_lab::progressions::{ap_correlation_density, scan_good_n, PolyVec};
use sumset_lab::Window;

fn main() -> anyhow::Result<()> {
    let set = bernoulli_set(Window::new(0, 1 << 17)?, 0.5, 11);
    let m = 9_999;
    let d = ap_correlation_density(&set, 3, 5, m)?;
    println!("density of x, x+5, x+10 all in E: {d}");

    let pvec = PolyVec::arithmetic(3);
    let report = scan_good_n(&set, &pvec, 0.5f64.powi(3) - 0.03, Window::inclusive(1, 500)?, m, None)?;
    println!(
        "passing {} of {} (frequency {:.3}, max gap {})",
        report.passing.len(),
        report.scanned,
        report.relative_frequency,
        report.max_gap
    );

    let squares: PolyVec = PolyVec::new(vec!["0".parse()?, "n^2".parse()?]);
    let r2 = scan_good_n(&set, &squares, 0.22, Window::inclusive(1, 200)?, m, None)?;
    println!("pattern x, x+n^2: {} of {} pass", r2.passing.len(), r2.scanned);
    Ok(())
}
