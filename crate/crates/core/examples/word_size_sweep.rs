//! Ambiguous answers of a shifting filter when offsets are confined to a word.
//!
//! Run with `cargo run --release --example word_size_sweep`.

use msfilter::experiments::{self, RunOptions};
use msfilter::workload;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let d = workload::gen_uniform(255, 256, seed);
    let words = experiments::default_word_sizes();
    let reports = experiments::run_word_size_sweep(1 << 23, 10, &words, &d, seed, RunOptions::default())?;
    println!("{:>10} {:>8} {:>8} {:>9}", "w", "correct", "multi", "entropy");
    for r in &reports {
        let t = r.tally.as_ref().unwrap();
        let w =
            r.w.map_or("unbounded".to_string(), |w| format!("2^{}", w.trailing_zeros()));
        println!(
            "{w:>10} {:>8} {:>8} {:>9.6}",
            t.c,
            t.multi_matches(),
            r.entropy.unwrap()
        );
    }
    Ok(())
}
