//! Distinguishing game on one partially encrypted column, with a control.

use nuhuncc::adversary::{mirrored_codebook, run_iss_cca1_game, GameConfig, GameSystem};
use nuhuncc::cli::most_biased_high_column;
use nuhuncc::is_codec::{CodeParams, Codebook};
use nuhuncc::polar::PolarParams;

fn main() -> nuhuncc::Result<()> {
    let params = PolarParams::new(16, 0.11, 0.25);
    let sys = GameSystem { n: 16, beta: 0.25, delta: params.delta(), t: 1.0, c: 8, r: 16 };
    let mut cfg = GameConfig {
        i_star: 0,
        m1: false,
        m2: true,
        trials: 20_000,
        d: 2.0,
        reveal_ks_minus_one: true,
        column_bias: most_biased_high_column(&params)?,
        seed: 1,
    };
    let cb = Codebook::generate(&CodeParams::new(16, 0, 4, 1.0, 0))?;
    for reveal in [true, false] {
        cfg.reveal_ks_minus_one = reveal;
        let rep = run_iss_cca1_game(&cb, &sys, &cfg)?;
        println!(
            "reveal others = {reveal}: advantage {:.4} ± {:.4}, bound {:.3}",
            rep.empirical_advantage, rep.std_error, rep.analytic_bound
        );
    }
    let mirror = mirrored_codebook(16, 4, 0, 2)?;
    let rep = run_iss_cca1_game(&mirror, &sys, &cfg)?;
    println!("mirrored control: advantage {:.4} ± {:.4}", rep.empirical_advantage, rep.std_error);
    Ok(())
}
