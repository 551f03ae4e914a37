//! GF(2) matrices: products, transposes and the on-disk format.

use nuhuncc::BitMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nuhuncc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = BitMatrix::random(4, 6, &mut rng);
    let b = BitMatrix::random(6, 3, &mut rng);
    let ab = a.matmul(&b)?;
    for i in 0..ab.rows() {
        println!("{}", ab.row(i));
    }
    assert_eq!(ab.transpose(), b.transpose().matmul(&a.transpose())?);

    let path = std::env::temp_dir().join("nuhuncc-example.bits");
    a.save(&path)?;
    assert_eq!(BitMatrix::load(&path)?, a);
    println!("wrote and re-read {} ({} bytes)", path.display(), a.to_bytes().len());
    Ok(())
}
