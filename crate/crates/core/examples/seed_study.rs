//! Seed length against blocklength for a source of entropy 0.9.
//!
//! Pass `--full` for n up to 2^18; the largest point takes minutes.

use nuhuncc::analysis::{bias_for_entropy, seed_study, write_csv, EstimatorConfig};

fn main() -> nuhuncc::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let top = if full { 18 } else { 12 };
    let p = bias_for_entropy(0.9)?;
    let est = EstimatorConfig { samples: 10_000, seed: 1, exact_up_to: 16 };
    let ns: Vec<usize> = (4..=top).map(|k| 1 << k).collect();
    let points = seed_study(&ns, p, 0.2, &est)?;
    write_csv(std::io::stdout(), &points)?;
    if full {
        let last = points.last().unwrap();
        eprintln!("n = 2^18: d_J/ñ = {:.4} (reference value about 0.022)", last.seed_fraction);
    }
    Ok(())
}
