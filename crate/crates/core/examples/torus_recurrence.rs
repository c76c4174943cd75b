//! How often `D ∩ (D - n^2 α)` keeps almost all of `D` on the circle.

use sumset_lab::dynamics::GridFunction;
use sumset_lab::progressions::PolyVec;
use sumset_lab::sequences::Alpha;
use sumset_lab::structure::torus_recurrence_scan;
use sumset_lab::Window;

fn main() -> anyhow::Result<()> {
    let d_set = GridFunction::indicator_interval(4096, 0.0, 0.3)?;
    let alpha = [Alpha::sqrt2().render(256)?];
    let pvec = PolyVec::new(vec!["0".parse()?, "n^2".parse()?]);

    for eps in [0.1, 0.05, 0.01] {
        let scan = torus_recurrence_scan(&d_set, &alpha, &pvec, eps, Window::inclusive(1, 5_000)?)?;
        println!(
            "eps={eps:<4}  recurrent n: {:>4} of {}  frequency {:.4}  max gap {}",
            scan.passing.len(),
            scan.scanned,
            scan.relative_frequency,
            scan.max_gap
        );
    }
    Ok(())
}
