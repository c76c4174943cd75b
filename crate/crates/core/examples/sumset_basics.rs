//! Build a window, translate it, and form `A + B` for a small offset set.

use sumset_lab::{sumset, FiniteOffsets, Window, WindowSet};

fn main() -> anyhow::Result<()> {
    let window = Window::new(0, 200)?;
    let b = WindowSet::from_fn(window, |x| x % 7 == 0 || x % 11 == 0);
    println!("B: {} members in {:?}", b.popcount(), b.window());

    let a = FiniteOffsets::new(vec![0, 1, 3])?;
    let e = sumset(&a, &b)?;
    println!("A + B is trustworthy on {:?}", e.valid());
    println!("first members: {:?}", e.iter().take(12).collect::<Vec<_>>());

    // x lies in E ∩ (E - 2) exactly when x and x + 2 both lie in E
    let both = e.intersect_translates(&[0, 2])?;
    println!("E ∩ (E - 2) has {} members on {:?}", both.popcount(), both.valid());

    let mut text = Vec::new();
    e.write_to(&mut text)?;
    let back = WindowSet::from_text(std::str::from_utf8(&text)?)?;
    assert_eq!(back, e);
    println!("text form round-trips ({} bytes)", text.len());
    Ok(())
}
