//! Whole system: build once, then measure roundtrip reliability.

use nuhuncc::cli::default_system;
use nuhuncc::pipeline::{reliability, System};

fn main() -> nuhuncc::Result<()> {
    for delta in [None, Some(0.05), Some(0.01)] {
        let mut params = default_system();
        params.delta_override = delta;
        let sys = System::build(&params, 1)?;
        let rep = reliability(&sys, 2_000, 2)?;
        println!(
            "δ = {:.4}: ñ = {:>2}, |U| = {}, d_J = {}, failures {}/{} ({} in channel decoding)",
            sys.profile.delta, rep.n_tilde, rep.u_size, rep.d_j, rep.failures, rep.trials, rep.channel_failures
        );
    }
    Ok(())
}
