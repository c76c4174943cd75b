//! Weyl averages of each sequence family over a grid of angles.

use sumset_lab::sequences::{equidist_profile, family_weyl_average, uniform_angle_grid, Angle, SequenceFamily};

fn main() -> anyhow::Result<()> {
    let thetas = uniform_angle_grid(60);
    for family in SequenceFamily::ALL {
        let j = if family == SequenceFamily::Blocks { 200 } else { 5_000 };
        let profile = equidist_profile(family, j, &thetas)?;
        println!(
            "{:<14} j={j:<5} max |avg| {:.4}  above 0.05: {}",
            family.name(),
            profile.max_magnitude(),
            profile.exceptional(0.05).len()
        );
    }

    // squares mod 4 are 0 or 1, so the average at a quarter turn stays near 1/√2
    let z = family_weyl_average(SequenceFamily::Squares, 10_000, Angle::from_ratio(1, 4))?;
    println!("squares at π/2: |avg| = {:.6}", z.norm());
    Ok(())
}
