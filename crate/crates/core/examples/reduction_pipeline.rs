//! The passive-to-active reduction on a toy scheme: an IND-CCA adversary is
//! run directly, through simulated decapsulation against IND-CPA, and through
//! the failure extractor. The direct advantage stays under the sum of the two
//! reduction advantages plus the spreadness term.

use fo_lab::config::scheme_preset;
use fo_lab::games::{combined_se, estimate_runs, run_spec, summarize, GameKind, GameSpec, QueryLimits};
use fo_lab::kem::Rejection;
use fo_lab::oracle::stream;
use fo_lab::pke::PkeScheme;
use fo_lab::toy::gamma_exact_toy;

fn main() -> fo_lab::Result<()> {
    let scheme = scheme_preset("key-dependent").unwrap();
    let gamma = gamma_exact_toy(&scheme, &scheme.keygen(&mut stream(0, "example/spread")))?.gamma;
    let limits = QueryLimits { q_g: 64, q_h: 64, q_d: 4 };
    let trials = 4000;
    for adversary in ["plant-failure", "honest-decaps", "random-ciphertext"] {
        let run = |game, name: String| {
            let spec = GameSpec { game, adversary: name, limits, rejection: Rejection::Explicit };
            estimate_runs(trials, 21, |seed| run_spec(&spec, &scheme, seed)).map(|o| summarize(&o))
        };
        let cca = run(GameKind::IndCcaKem, adversary.into())?;
        let cpa = run(GameKind::IndCpaKem, format!("simulated:{adversary}"))?;
        let ffp = run(GameKind::FfpCca, format!("extract:{adversary}"))?;
        let spread = limits.q_d as f64 * 2f64.powf(-gamma);
        let rhs = cpa.win_rate + ffp.win_rate + spread;
        let se = combined_se(&[cca.std_error, cpa.std_error, ffp.std_error]);
        println!(
            "{adversary:<18} cca {:.4} <= cpa {:.4} + ffp {:.4} + spread {:.4} = {:.4} (se {:.4})",
            cca.win_rate, cpa.win_rate, ffp.win_rate, spread, rhs, se
        );
    }
    Ok(())
}
