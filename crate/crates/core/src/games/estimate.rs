//! Monte Carlo estimation over many seeded runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::oracle::run_seed;

use super::{GameKind, GameOutcome};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Runs `f` on the derived seeds `run_seed(master, 0..trials)`, in parallel.
/// The result is in index order regardless of scheduling; the first error
/// in index order wins.
pub fn estimate_runs<F>(trials: u64, master: u64, f: F) -> Result<Vec<GameOutcome>>
where
    F: Fn(u64) -> Result<GameOutcome> + Sync,
{
    (0..trials).into_par_iter().map(|i| f(run_seed(master, i))).collect()
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard error of a proportion.
pub fn proportion_se(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Two-sided p-value of the pooled two-proportion z-test of
/// `k1/n1 = k2/n2`. Returns 1 when the pooled proportion is degenerate.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1f + n2f);
    let var = pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f);
    if var <= 0.0 {
        return 1.0;
    }
    let z = (k1 as f64 / n1f - k2 as f64 / n2f) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * normal.sf(z.abs())).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub game: GameKind,
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub std_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// `|win - 1/2|` for bit games, the win rate otherwise.
    pub advantage: f64,
    /// Runs with at least one GUESS, DIFF or `L_FAIL` event.
    pub guess_runs: u64,
    pub diff_runs: u64,
    pub fail_runs: u64,
    /// Counts of `b' = 1` split by the hidden bit, for bit games.
    pub ones_when_b0: u64,
    pub runs_b0: u64,
    pub ones_when_b1: u64,
    pub runs_b1: u64,
    /// Two-proportion p-value for `Pr[b'=1 | b=0] = Pr[b'=1 | b=1]`.
    pub bit_test_p: Option<f64>,
    pub queries_g: u64,
    pub queries_h: u64,
    pub queries_d: u64,
}

impl Summary {
    /// Upper end of `rate + k SE`.
    pub fn upper(&self, k: f64) -> f64 {
        self.win_rate + k * self.std_error
    }

    pub fn guess_rate(&self) -> f64 {
        self.guess_runs as f64 / self.trials.max(1) as f64
    }

    pub fn guess_se(&self) -> f64 {
        proportion_se(self.guess_runs, self.trials)
    }

    pub fn fail_rate(&self) -> f64 {
        self.fail_runs as f64 / self.trials.max(1) as f64
    }
}

pub fn summarize(outcomes: &[GameOutcome]) -> Summary {
    let first = outcomes.first();
    let game = first.map_or(GameKind::IndCcaKem, |o| o.game);
    let adversary = first.map_or_else(String::new, |o| o.adversary.clone());
    let n = outcomes.len() as u64;
    let count = |f: &dyn Fn(&GameOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let wins = count(&|o| o.won);
    let win_rate = if n == 0 { 0.0 } else { wins as f64 / n as f64 };
    let (wilson_low, wilson_high) = wilson_interval(wins, n, Z95);
    let advantage = if game.is_bit_game() { (win_rate - 0.5).abs() } else { win_rate };
    let runs_b0 = count(&|o| o.challenge_bit == Some(false));
    let runs_b1 = count(&|o| o.challenge_bit == Some(true));
    let ones_when_b0 = count(&|o| o.challenge_bit == Some(false) && o.guess_bit == Some(true));
    let ones_when_b1 = count(&|o| o.challenge_bit == Some(true) && o.guess_bit == Some(true));
    let bit_test_p = game
        .is_bit_game()
        .then(|| two_proportion_test(ones_when_b0, runs_b0, ones_when_b1, runs_b1));
    Summary {
        game,
        adversary,
        trials: n,
        wins,
        win_rate,
        std_error: proportion_se(wins, n),
        wilson_low,
        wilson_high,
        advantage,
        guess_runs: count(&|o| o.events.guess_events > 0),
        diff_runs: count(&|o| o.events.diff_events > 0),
        fail_runs: count(&|o| !o.events.fail_list.is_empty()),
        ones_when_b0,
        runs_b0,
        ones_when_b1,
        runs_b1,
        bit_test_p,
        queries_g: outcomes.iter().map(|o| o.queries.g).sum(),
        queries_h: outcomes.iter().map(|o| o.queries.h).sum(),
        queries_d: outcomes.iter().map(|o| o.queries.decaps + o.queries.decrypt).sum(),
    }
}

/// Standard error of a sum of independent estimates.
pub fn combined_se(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_wilson_reference_values() {
        // hand-computed: k = 5, n = 10, z = 1.96 gives 0.5 +- 0.2659
        let (lo, hi) = wilson_interval(5, 10, 1.96);
        assert!((lo - 0.236_590).abs() < 1e-5, "{lo}");
        assert!((hi - 0.763_410).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(0, 20, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.161_130).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn test_two_proportion_reference() {
        // 60/100 vs 40/100: z = 0.2 / sqrt(0.25 * 0.02) = 2.8284, p = 0.004678
        let p = two_proportion_test(60, 100, 40, 100);
        assert!((p - 0.004_677_7).abs() < 1e-6, "{p}");
        assert_eq!(two_proportion_test(50, 100, 50, 100), 1.0);
        assert_eq!(two_proportion_test(0, 10, 0, 10), 1.0);
    }

    #[test]
    fn test_combined_se() {
        assert_eq!(combined_se(&[3.0, 4.0]), 5.0);
    }
}
