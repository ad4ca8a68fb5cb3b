//! Build a shifting filter over three small sets and query it.
//!
//! Run with `cargo run --example shifting_filter`.

use msfilter::worked_example;
use msfilter::{ShiftMode, ShiftingFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Seeded filter: 4096 cells, 4 hashes, 3 sets.
    let mut f = ShiftingFilter::new(4096, 4, 3, ShiftMode::Circular, 42)?;
    let sets: [(&str, usize); 6] = [
        ("alice", 1),
        ("bob", 1),
        ("carol", 2),
        ("dave", 2),
        ("erin", 3),
        ("frank", 3),
    ];
    for (name, label) in sets {
        f.insert(name.as_bytes(), label)?;
    }
    f.seal();
    println!("seeded filter: {} of {} bits set", f.popcount(), f.m());
    for name in ["alice", "carol", "frank", "mallory"] {
        println!("  {name:<8} -> {}", f.query(name.as_bytes())?);
    }

    // The 16-bit walkthrough with scripted digests.
    let mut w = worked_example::shifting_filter()?;
    w.seal();
    println!("walkthrough bits: {}", w.bit_string());
    for (label, e) in [
        ("d1", worked_example::D1),
        ("d2", worked_example::D2),
        ("nd1", worked_example::ND1),
        ("nd2", worked_example::ND2),
    ] {
        println!("  {label:<4} -> {}", w.query(e)?);
    }
    let c = w.counters().snapshot();
    println!(
        "walkthrough cost: {} hashes, {} lookups, {} cells read",
        c.hash_evaluations, c.lookups, c.cells_read
    );
    Ok(())
}
