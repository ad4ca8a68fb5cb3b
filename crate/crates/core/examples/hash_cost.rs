//! Hash evaluations per query as the number of sets grows.
//!
//! Run with `cargo run --release --example hash_cost`.

use msfilter::analytics::cost_model;
use msfilter::experiments::{self, RunOptions};
use msfilter::FilterKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = experiments::default_cost_grid(1 << 20, 10);
    let reports = experiments::run_cost_experiment(&grid, 2_000, 7, RunOptions::default())?;
    println!(
        "{:<5} {:>4} {:>8} {:>8} {:>14}",
        "kind", "s", "hashes", "model", "cells/query"
    );
    for r in &reports {
        let model = cost_model(r.kind, r.k as u64, r.s as u64);
        println!(
            "{:<5} {:>4} {:>8} {:>8} {:>14.2}",
            r.kind.name(),
            r.s,
            r.hashes_per_query.unwrap(),
            model.hashes_per_query,
            r.cells_read_total.unwrap() as f64 / r.queries.unwrap() as f64
        );
    }
    let shbf = cost_model(FilterKind::Shifting, 10, 255);
    println!(
        "ShBF at 255 sets: {} hashes and {} lookups per query",
        shbf.hashes_per_query, shbf.lookups_per_query
    );
    Ok(())
}
