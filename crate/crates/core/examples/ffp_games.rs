//! Finding-failing-plaintext games: with the public key, without it, and the
//! guessing game that is a coin flip when failures do not depend on the key.

use fo_lab::config::scheme_preset;
use fo_lab::games::{estimate_runs, run_spec, summarize, GameKind, GameSpec, QueryLimits};
use fo_lab::kem::Rejection;

fn main() -> fo_lab::Result<()> {
    let limits = QueryLimits { q_g: 32, q_h: 0, q_d: 0 };
    let cases = [
        ("fail-1/16", GameKind::FfpCpa, "uniform"),
        ("fail-1/16", GameKind::FfpCpa, "best-of-q"),
        ("key-dependent", GameKind::FfpCpa, "best-of-q"),
        ("key-dependent", GameKind::FfpNk, "uniform"),
        ("key-dependent", GameKind::FfpNk, "best-of-q"),
        ("fail-1/16", GameKind::FfpNg, "probe"),
        ("parity-leak", GameKind::FfpNg, "parity-leak"),
    ];
    for (scheme, game, adversary) in cases {
        let spec = GameSpec { game, adversary: adversary.into(), limits, rejection: Rejection::Explicit };
        let s = scheme_preset(scheme).unwrap();
        let sum = summarize(&estimate_runs(5000, 3, |seed| run_spec(&spec, &s, seed))?);
        let p = sum.bit_test_p.map(|p| format!(", bit test p = {p:.3}")).unwrap_or_default();
        println!("{scheme:<14} {game:<7} {adversary:<12} win {:.4} ± {:.4}{p}", sum.win_rate, sum.std_error);
    }
    Ok(())
}
