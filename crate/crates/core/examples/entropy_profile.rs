//! Conditional entropy profile and H/U/J partition, exact and sampled.

use nuhuncc::polar::{entropy_profile, PolarParams, ProfileMethod};

fn main() -> nuhuncc::Result<()> {
    let params = PolarParams::new(16, 0.11, 0.25);
    let exact = entropy_profile(&params, ProfileMethod::Exact)?;
    let mc = entropy_profile(&params, ProfileMethod::MonteCarlo { samples: 50_000, seed: 1 })?;
    println!("δ = {:.4}", exact.delta);
    println!(" j   exact   sampled");
    for j in 0..16 {
        println!("{j:>2}  {:.4}  {:.4}", exact.entropies[j], mc.entropies[j]);
    }
    println!("H = {:?}\nU = {:?}\nJ = {:?}", exact.h_set, exact.u_set, exact.j_set);
    println!("ñ = {}, d_J = {}", exact.n_tilde(), exact.d_j());

    let big = entropy_profile(&PolarParams::new(1024, 0.11, 0.25), ProfileMethod::MonteCarlo { samples: 10_000, seed: 1 })?;
    println!("n = 1024: |H| = {}, |U| = {}, d_J = {}", big.h_set.len(), big.u_set.len(), big.d_j());
    Ok(())
}
