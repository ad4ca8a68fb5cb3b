//! Correct, wrong and ambiguous answers for member queries, next to their
//! predicted rates.
//!
//! Run with `cargo run --release --example interset`.

use msfilter::experiments::{self, RunOptions};
use msfilter::workload;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let specs = experiments::default_interset_specs(10);
    for (name, d) in [
        ("uniform", workload::gen_uniform(255, 256, seed)),
        ("random", workload::gen_random(255, 65_280, seed)),
    ] {
        println!("{name} dataset");
        for r in experiments::run_interset_experiment(name, &d, &specs, seed, RunOptions::default())? {
            let t = r.tally.as_ref().unwrap();
            println!(
                "  {:<4} m=2^{:<2} c={:<6} e={:<3} u2={:<5} u3={:<4} u4={:<3} u5+={:<3} ent={:.5} rate {:.3e} predicted {:.3e}",
                r.kind.name(),
                r.m.trailing_zeros(),
                t.c,
                t.e,
                t.u(2),
                t.u(3),
                t.u(4),
                t.u_at_least(5),
                r.entropy.unwrap(),
                r.isep_emp.unwrap(),
                r.isep_ana.unwrap()
            );
            for f in &r.flags {
                println!("    outside tolerance: {f}");
            }
        }
    }
    Ok(())
}
