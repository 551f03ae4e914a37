//! Encrypting the first c links of each column with a pluggable block cipher.

use nuhuncc::crypt::{self, BlockCipher, LinkFrame};
use nuhuncc::is_codec::{CodeParams, Codebook, CodebookKind};
use nuhuncc::source_codec::{CompressedMatrix, SeedMatrix};
use nuhuncc::BitMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nuhuncc::Result<()> {
    let (ell, n_tilde, d_j, c, r) = (8, 12, 2, 2, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cb = Codebook::generate(&CodeParams::new(ell, 0, 2, 1.0, 5).with_kind(CodebookKind::Injective))?;
    let m = CompressedMatrix {
        bits: BitMatrix::random(ell, n_tilde, &mut rng),
        profile_id: String::new(),
    };
    let seeds = SeedMatrix::random(ell, d_j, &mut rng);
    println!("schemes: {:?}", crypt::SCHEMES);
    for name in crypt::SCHEMES {
        let r = if *name == "identity" { 0 } else { r };
        let cipher: Box<dyn BlockCipher> = crypt::scheme(name, c, r)?;
        let keys = crypt::keygen(cipher.as_ref(), Some(7));
        let frame = crypt::crypt2_encrypt(&m, &seeds, &cb, cipher.as_ref(), &keys.public_key, &mut rng)?;
        let wire = frame.to_bytes();
        let (m2, s2) = crypt::crypt2_decrypt(&LinkFrame::from_bytes(&wire)?, &cb, cipher.as_ref(), &keys.secret_key)?;
        let lens: Vec<usize> = frame.links.iter().map(|l| l.len()).collect();
        println!("{name}: link lengths {lens:?}, {} payload bits, {} bytes on the wire", frame.payload_bits(), wire.len());
        assert!(m2.bits == m.bits && s2 == seeds);
    }
    Ok(())
}
