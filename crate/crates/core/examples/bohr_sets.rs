//! Bohr and Nil-Bohr sets and how far apart their members can be.

use sumset_lab::progressions::IntPoly;
use sumset_lab::sequences::{Alpha, Arc};
use sumset_lab::structure::{bohr_members, gap_profile, nil_bohr_members, BohrSpec, NilBohrSpec};
use sumset_lab::Window;

fn main() -> anyhow::Result<()> {
    let range = Window::inclusive(1, 200_000)?;
    let alpha = Alpha::sqrt2().render(256)?;

    for radius in [0.2, 0.05, 0.01] {
        let spec = BohrSpec::new(vec![alpha.clone()], vec![Arc::new(-radius, radius)?])?;
        let set = bohr_members(&spec, range)?;
        let gaps = gap_profile(&set);
        println!(
            "Bohr(√2, {radius:<4})  density {:.4}  max gap {:>4}  radius·gap {:.2}",
            set.popcount() as f64 / range.len() as f64,
            gaps.max_gap,
            radius * gaps.max_gap as f64
        );
    }

    // two frequencies at once
    let golden = Alpha::Golden.render(256)?;
    let arc = Arc::new(-0.1, 0.1)?;
    let spec = BohrSpec::new(vec![alpha.clone(), golden], vec![arc, arc])?;
    let set = bohr_members(&spec, range)?;
    println!("Bohr(√2, φ; 0.1)  members {}  max gap {}", set.popcount(), gap_profile(&set).max_gap);

    let base = BohrSpec::new(vec![alpha], vec![Arc::new(-0.05, 0.05)?])?;
    let nil = NilBohrSpec::new(base, vec!["n^2".parse::<IntPoly>()?])?;
    let set = nil_bohr_members(&nil, Window::inclusive(1, 1_000_000)?)?;
    println!(
        "{{n^2 √2}} within 0.05 of 0: density {:.4}  max gap {}",
        set.popcount() as f64 / 1e6,
        gap_profile(&set).max_gap
    );
    Ok(())
}
