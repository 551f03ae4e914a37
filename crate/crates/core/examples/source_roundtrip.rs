//! Seeded compression of one source matrix and its recovery.

use nuhuncc::polar::{entropy_profile, PolarParams, ProfileMethod};
use nuhuncc::source_codec::{decode_matrix, encode_matrix, SeedMatrix};
use nuhuncc::BitMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nuhuncc::Result<()> {
    let (n, ell, p) = (16, 8, 0.11);
    let prof = entropy_profile(&PolarParams::new(n, p, 0.25).with_delta(0.01), ProfileMethod::Exact)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut v = BitMatrix::zeros(ell, n);
    for i in 0..ell {
        v.set_row(i, &nuhuncc::BitVector::bernoulli(n, p, &mut rng))?;
    }
    let seeds = SeedMatrix::random(ell, prof.d_j(), &mut rng);
    let m = encode_matrix(&v, &seeds, &prof)?;
    let back = decode_matrix(&m, &seeds, &prof, p)?;
    println!("{ell}×{n} source -> {}×{} compressed, seed {}×{}", m.rows(), m.cols(), seeds.rows(), seeds.cols());
    println!("recovered exactly: {}", back == v);
    Ok(())
}
