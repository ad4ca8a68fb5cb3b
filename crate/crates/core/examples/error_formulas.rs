//! Closed-form error probabilities for both filters.
//!
//! Run with `cargo run --example error_formulas`.

use msfilter::analytics::{self, FilterParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 65_280;
    for exp in [20, 23] {
        let m = 1u64 << exp;
        let p = FilterParams::uniform(m, 10, 255, 256)?;
        println!("m = 2^{exp}, k = 10, 255 sets of 256");
        println!("  ShBF false positive     {:.6e}", analytics::shbf_fpp_overall(&p)?);
        println!("  ShBF ambiguous answer   {:.6e}", analytics::shbf_isep(&p)?);
        for i in 2..=5 {
            println!(
                "    {i} candidates          {:.1} expected",
                n as f64 * analytics::shbf_isep_cardinality(&p, i)?
            );
        }
        println!("  SBF false positive      {:.6e}", analytics::sbf_fpp(&p)?);
        println!("  SBF wrong label         {:.6e}", analytics::sbf_isep_overall(&p)?);
        println!(
            "  SBF wrong label, set 1  {:.6e}, set 255 {:.1e}",
            analytics::sbf_isep_specific(&p, 1)?,
            analytics::sbf_isep_specific(&p, 255)?
        );
    }

    println!("ShBF false positives as sets grow (m = 2^20):");
    for s in [1, 10, 50, 100, 250] {
        let p = FilterParams::new(1 << 20, 10, s, n)?;
        println!("  s = {s:>3}: {:.4}", analytics::shbf_fpp_overall(&p)?);
    }
    Ok(())
}
