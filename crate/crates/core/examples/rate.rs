//! Rate formula in exact arithmetic against bits counted on real frames.

use nuhuncc::analysis::{rate_formula, rate_report};
use nuhuncc::polar::{entropy_profile, PolarParams, ProfileMethod};

fn main() -> nuhuncc::Result<()> {
    let r = rate_formula(100, 90, 2, 16, 2, 2)?;
    println!("|H|/n = 0.9, d_J/n = 0.02, ℓ = 16, c = 2, r = 2: R = {r} ≈ {:.5}", *r.numer() as f64 / *r.denom() as f64);

    let prof = entropy_profile(&PolarParams::new(16, 0.11, 0.25), ProfileMethod::Exact)?;
    println!(" ℓ  c   r  formula    measured   match");
    for (ell, c, r) in [(8, 1, 0), (8, 4, 8), (16, 2, 16), (16, 8, 32)] {
        let rep = rate_report(&prof, ell, c, r, None)?;
        println!("{ell:>2} {c:>2} {r:>3}  {:<9}  {:<9}  {}", rep.rate_exact, rep.measured_exact, rep.exact_match);
    }
    Ok(())
}
