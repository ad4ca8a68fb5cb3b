//! Build a spatial filter and show how labels overwrite each other.
//!
//! Run with `cargo run --example spatial_filter`.

use msfilter::worked_example;
use msfilter::{QueryOutcome, SpatialFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut f = SpatialFilter::new(512, 3, 5, 9)?;
    println!("cells of {} bits, {} bits in total", f.cell_bits(), f.bit_len());
    for label in 1..=5 {
        for i in 0..40 {
            f.insert(format!("set{label}-item{i}").as_bytes(), label)?;
        }
    }
    f.seal();
    let mut wrong = 0;
    for label in 1..=5 {
        for i in 0..40 {
            if let QueryOutcome::InterSetError { reported } =
                f.classify(format!("set{label}-item{i}").as_bytes(), label)?
            {
                wrong += 1;
                println!("  set{label}-item{i} reported as {reported}");
            }
        }
    }
    println!("{wrong} of 200 members reported under a higher label");
    println!("unknown -> {}", f.query(b"unknown")?);

    let mut w = worked_example::spatial_filter()?;
    w.seal();
    println!("walkthrough cells: {:?}", w.cell_values());
    for (label, e) in [
        ("d1", worked_example::D1),
        ("d2", worked_example::D2),
        ("nd1", worked_example::ND1),
        ("nd2", worked_example::ND2),
    ] {
        println!("  {label:<4} -> {}", w.query(e)?);
    }
    Ok(())
}
