//! Seeded workloads and their text format.
//!
//! Run with `cargo run --example datasets`.

use msfilter::workload;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let uniform = workload::gen_uniform(255, 256, 7);
    let random = workload::gen_random(255, 65_280, 7);
    let non = workload::gen_non_elements(1000, 7, &uniform);
    println!("uniform: {} elements in {} sets", uniform.len(), uniform.s);
    let (lo, hi) = (
        random.per_set_counts.iter().min().unwrap(),
        random.per_set_counts.iter().max().unwrap(),
    );
    println!("random:  {} elements, set sizes {lo}..={hi}", random.len());
    println!("non-elements: {}", non.len());

    let small = workload::gen_uniform(3, 2, 1);
    let mut text = Vec::new();
    small.write_text(&mut text)?;
    print!("{}", String::from_utf8(text.clone())?);
    let back = workload::Dataset::read_text(text.as_slice(), None)?;
    assert_eq!(back.entries, small.entries);
    Ok(())
}
