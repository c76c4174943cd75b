//! Greedy selection of powers of two that flattens the non-invariant part of a box.

use num_complex::Complex64;
use sumset_lab::dynamics::{
    averaged_observable, cesaro_select, multi_correlation_series, powers_of_two, GridFunction, TorusSystem,
};
use sumset_lab::progressions::PolyVec;
use sumset_lab::sequences::{Alpha, Arc};
use sumset_lab::{LabError, Window};

fn main() -> anyhow::Result<()> {
    let g = 1019;
    let sys = TorusSystem::skew_quadratic(&Alpha::sqrt2(), 1024)?;
    let half = Arc::new(0.0, 0.5)?;
    let f = GridFunction::indicator_box(2, g, &[half, half])?;
    let (invariant, h) = f.kronecker_split();
    println!("‖h‖ = {:.4}, mean of the invariant part {:.4}", h.norm(), invariant.mean().re);

    let selection = match cesaro_select(&sys, &h, powers_of_two(), 0.05, 2_000, 1.0) {
        Ok(s) => s,
        Err(LabError::ToleranceNotReached { best }) => {
            println!("tolerance not reached");
            *best
        }
        Err(e) => return Err(e.into()),
    };
    println!(
        "kept {} of {} powers of two, final norm {:.4}",
        selection.offsets.len(),
        selection.examined,
        selection.final_norm
    );
    for (i, n) in selection.norm_history.iter().enumerate().take(8) {
        println!("  after {:>2} offsets: {n:.4}", i + 1);
    }

    // a constant never flattens
    let one = GridFunction::constant(2, g, Complex64::new(1.0, 0.0))?;
    if let Err(LabError::ToleranceNotReached { best }) = cesaro_select(&sys, &one, powers_of_two(), 0.05, 20, 1.0) {
        println!("constant stays at norm {:.3}", best.final_norm);
    }

    let avg = averaged_observable(&sys, &f, &selection.offsets)?;
    let series = multi_correlation_series(&sys, &avg, &PolyVec::arithmetic(3), Window::inclusive(1, 10)?)?;
    println!("3-fold correlations of the average: {series:.4?}");
    println!("mean^3 = {:.4}", f.mean().re.powi(3));
    Ok(())
}
