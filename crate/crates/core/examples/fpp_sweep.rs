//! False-positive rate against filter size, measured and predicted.
//!
//! Run with `cargo run --release --example fpp_sweep`. Pass a number to
//! change the non-element count (default 100000).

use msfilter::experiments::{self, RunOptions};
use msfilter::workload;
use msfilter::FilterKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let queries: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse())
        .transpose()?
        .unwrap_or(100_000);
    let seed = 7;
    let d = workload::gen_uniform(255, 256, seed);
    let non = workload::gen_non_elements(queries, seed, &d);
    let reports = experiments::run_fpp_sweep(
        &[FilterKind::Shifting, FilterKind::Spatial],
        &experiments::default_fpp_lengths(),
        &d,
        &non,
        10,
        seed,
        RunOptions::default(),
    )?;
    println!(
        "{:<5} {:>5} {:>5} {:>12} {:>12}",
        "kind", "m", "bits", "measured", "predicted"
    );
    for r in &reports {
        println!(
            "{:<5} 2^{:<3} 2^{:<3} {:>12.4e} {:>12.4e}",
            r.kind.name(),
            r.m.trailing_zeros(),
            r.l_bits.trailing_zeros(),
            r.fpp_emp.unwrap(),
            r.fpp_ana.unwrap()
        );
    }
    let mut csv = Vec::new();
    experiments::write_csv(&mut csv, &reports)?;
    println!("\n{}", String::from_utf8(csv)?);
    Ok(())
}
