//! Exact leakage to an eavesdropper reading w links, against its bound.

use nuhuncc::adversary::{leakage_exact, LeakageInstance};
use nuhuncc::is_codec::{CodeParams, Codebook};
use nuhuncc::polar::{entropy_profile, PolarParams, ProfileMethod};

fn main() -> nuhuncc::Result<()> {
    let prof = entropy_profile(&PolarParams::new(2, 0.5, 0.25), ProfileMethod::Exact)?;
    for (ell, w) in [(4, 0), (4, 1), (4, 2), (5, 2), (6, 3)] {
        let cb = Codebook::generate(&CodeParams::new(ell, w, 1, 1.0, 0))?;
        let inst = LeakageInstance { profile: &prof, codebook: &cb, w, t: 1.0 };
        let rep = leakage_exact(&inst, &[0])?;
        println!(
            "ℓ = {ell}, w = {w}: max 𝕍 = {:.4}, mean {:.4}, worst W {:?}, bound {:.4}",
            rep.max_distance, rep.mean_distance, rep.worst_w, rep.bound
        );
    }
    Ok(())
}
