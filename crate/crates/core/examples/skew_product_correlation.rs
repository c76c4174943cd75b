//! Correlation sequences on the rotation and the skew product, and Wiener exceedance.

use sumset_lab::dynamics::{correlation, spectral_series, wiener_exceedance, GridFunction, TorusSystem};
use sumset_lab::sequences::{Alpha, SequenceFamily};

fn main() -> anyhow::Result<()> {
    let alpha = Alpha::sqrt2();

    let rotation = TorusSystem::kronecker1d(&alpha, 256)?;
    let e = GridFunction::exp_axis(1, 4096, 0, 1)?;
    for n in [1, 2, 3] {
        let c = correlation(&rotation, &e, &e, n)?;
        println!("rotation  n={n}  ⟨f∘T^n, f⟩ = {:.6}{:+.6}i", c.re, c.im);
    }

    let skew = TorusSystem::skew_quadratic(&alpha, 256)?;
    let f = GridFunction::exp_y(2, 1019)?;
    let series = spectral_series(&skew, &f, &f, 200)?;
    println!("skew product  max |c(n)| over 1 ≤ |n| ≤ 200: {:.2e}", series.max_abs_nonzero());

    let rot_series = spectral_series(&rotation, &e, &e, 1_000)?;
    for family in [SequenceFamily::Squares, SequenceFamily::Primes] {
        let skew_ratio = wiener_exceedance(&series, 0.05, &family, 10)?;
        let rot_ratio = wiener_exceedance(&rot_series, 0.05, &family, 30)?;
        println!("{:<8} exceedance: skew {skew_ratio}, rotation {rot_ratio}", family.name());
    }
    Ok(())
}
