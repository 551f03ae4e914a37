//! Random-binning codebooks: literal i.i.d. draw against the injective variant.

use nuhuncc::is_codec::{independent_ambiguity_probability, CodeParams, Codebook, CodebookKind};

fn main() -> nuhuncc::Result<()> {
    for ell in [8, 12, 16] {
        let iid = Codebook::generate(&CodeParams::new(ell, 0, 4, 1.0, 1))?;
        let inj = Codebook::generate(&CodeParams::new(ell, 0, 4, 1.0, 1).with_kind(CodebookKind::Injective))?;
        let total = (1u64 << ell) as f64;
        println!(
            "ℓ = {ell:>2}: i.i.d. ambiguous {:.4} (expected {:.4}), injective {:.4}",
            iid.ambiguous_messages() as f64 / total,
            independent_ambiguity_probability(ell),
            inj.ambiguous_messages() as f64 / total
        );
    }
    let cb = Codebook::generate(&CodeParams::new(8, 2, 3, 1.0, 4).with_kind(CodebookKind::Injective))?;
    let m = 0b1011_0010;
    let x = cb.encode_word(m);
    println!("message {m:08b} -> codeword {x:08b} (bin {}, {} bins of {})", m >> cb.k_w(), cb.num_bins(), cb.bin_size());
    assert_eq!(cb.decode_word(x)?, m);
    Ok(())
}
