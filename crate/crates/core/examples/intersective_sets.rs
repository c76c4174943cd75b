//! The set of `n` with `{n^k α}` in the middle half of the circle.

use sumset_lab::sequences::Alpha;
use sumset_lab::sequences::intersective_members;
use sumset_lab::Window;

fn main() -> anyhow::Result<()> {
    let range = Window::inclusive(1, 100_000)?;
    for (alpha, k) in [(Alpha::sqrt2(), 1), (Alpha::sqrt2(), 2), (Alpha::Golden, 3)] {
        let fixed = alpha.render(256)?;
        let scan = intersective_members(k, &fixed, range)?;
        println!(
            "alpha={alpha:<8} k={k}  density {:.4}  first {:?}  ambiguous {}",
            scan.density(),
            &scan.members[..6],
            scan.boundary_ambiguous.len()
        );
    }

    // 0.05 has no finite binary expansion, so 5·0.05 = 1/4 cannot be placed on either side
    let rough = Alpha::Decimal("0.05".into()).render(192)?;
    let scan = intersective_members(1, &rough, Window::inclusive(1, 40)?)?;
    println!("alpha=0.05 members {:?}", scan.members);
    println!("alpha=0.05 ambiguous {:?}", scan.boundary_ambiguous);
    Ok(())
}
