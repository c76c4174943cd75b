//! Upper Banach density estimates of a random set and a set with a dense block.

use sumset_lab::density::{banach_density_sweep, relative_density_profile};
use sumset_lab::experiments::bernoulli_set;
use sumset_lab::sequences::SequenceFamily;
use sumset_lab::{Window, WindowSet};

fn main() -> anyhow::Result<()> {
    let window = Window::new(0, 1 << 18)?;
    let random = bernoulli_set(window, 0.3, 7);
    for est in banach_density_sweep(&random, &[99, 999, 9_999])? {
        println!("random  M={:>5}  d={:.4}  at {:?}", est.m, est.as_f64(), est.argmax_window);
    }

    // sparse everywhere except one long block: Banach density sees the block
    let blocky = WindowSet::from_fn(window, |x| x % 100 == 0 || (50_000..60_000).contains(&x));
    for est in banach_density_sweep(&blocky, &[99, 999, 9_999])? {
        println!("blocky  M={:>5}  d={:.4}  at {:?}", est.m, est.as_f64(), est.argmax_window);
    }

    let profile = relative_density_profile(&random, &SequenceFamily::Squares, &[10, 100, 500])?;
    for ((j, v), t) in profile.js.iter().zip(&profile.values).zip(&profile.tail_max) {
        println!("squares  j={j:>3}  relative density {v:.3}  tail max {t:.3}");
    }
    Ok(())
}
