//! IND-CCA games against the KEM with a range of adversaries, all runs sharing
//! one master seed.

use fo_lab::config::scheme_preset;
use fo_lab::games::{estimate_runs, run_spec, summarize, GameKind, GameSpec, QueryLimits};
use fo_lab::kem::Rejection;

fn main() -> fo_lab::Result<()> {
    let scheme = scheme_preset("key-dependent").unwrap();
    let limits = QueryLimits { q_g: 64, q_h: 64, q_d: 8 };
    println!("{:<18} {:<9} {:>8} {:>8} {:>6} {:>6}", "adversary", "rejection", "win", "se", "guess", "fail");
    for adversary in ["blind", "exhaustive", "honest-decaps", "random-ciphertext", "plant-failure"] {
        for rejection in [Rejection::Explicit, Rejection::Implicit] {
            let spec = GameSpec { game: GameKind::IndCcaKem, adversary: adversary.into(), limits, rejection };
            let s = summarize(&estimate_runs(4000, 9, |seed| run_spec(&spec, &scheme, seed))?);
            println!(
                "{adversary:<18} {:<9} {:>8.4} {:>8.4} {:>6} {:>6}",
                format!("{rejection:?}").to_lowercase(),
                s.win_rate,
                s.std_error,
                s.guess_runs,
                s.fail_runs
            );
        }
    }
    Ok(())
}
