//! Exact failure statistics by enumerating keys and randomness.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::pke::{EnumerableKeys, Message, Randomness};

/// Per-randomness failure counts of one message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureProfile {
    pub message: Message,
    pub key_count: u64,
    /// `fail_counts[r]` = number of keys under which `(m, r)` fails.
    pub fail_counts: Vec<u64>,
}

pub type Exact = Ratio<i128>;

impl FailureProfile {
    fn r_count(&self) -> i128 {
        self.fail_counts.len() as i128
    }

    /// `E_r[Pr_key[fail]]`.
    pub fn mean_exact(&self) -> Exact {
        let total: i128 = self.fail_counts.iter().map(|&c| c as i128).sum();
        Exact::new(total, self.r_count() * self.key_count as i128)
    }

    /// `V_r[Pr_key[fail]]`.
    pub fn variance_exact(&self) -> Exact {
        let k = self.key_count as i128;
        let sq: i128 = self.fail_counts.iter().map(|&c| (c as i128) * (c as i128)).sum();
        let mean = self.mean_exact();
        Exact::new(sq, self.r_count() * k * k) - mean * mean
    }

    pub fn mean(&self) -> f64 {
        self.mean_exact().to_f64().unwrap()
    }

    pub fn variance(&self) -> f64 {
        self.variance_exact().to_f64().unwrap()
    }

    /// `τ(t) = Pr_r[Pr_key[fail] >= t]`, compared exactly.
    pub fn tail(&self, t: f64) -> f64 {
        let t = BigRational::from_float(t).expect("finite threshold");
        let k = BigInt::from(self.key_count);
        let hits = self
            .fail_counts
            .iter()
            .filter(|&&c| BigRational::new(BigInt::from(c), k.clone()) >= t)
            .count();
        hits as f64 / self.fail_counts.len() as f64
    }
}

/// Largest number of (key, randomness) pairs enumerated per message.
pub const PAIR_LIMIT: u128 = 1 << 26;

pub fn analytic_failure_prob<S: EnumerableKeys>(scheme: &S, m: Message) -> Result<FailureProfile> {
    scheme.message_space().check(m.0, "message")?;
    let keys = scheme
        .key_count()
        .ok_or_else(|| Error::Domain(format!("{} has no enumerable key space", scheme.name())))?;
    let rs = scheme.randomness_space();
    let pairs = keys as u128 * rs.size() as u128;
    if pairs > PAIR_LIMIT {
        return Err(Error::TooLarge { pairs, limit: PAIR_LIMIT });
    }
    let pairs: Vec<_> = (0..keys).map(|k| scheme.keypair_at(k).unwrap()).collect();
    let fail_counts = rs
        .iter()
        .map(|r| pairs.iter().filter(|kp| scheme.fails(kp, m, Randomness(r))).count() as u64)
        .collect();
    Ok(FailureProfile { message: m, key_count: keys, fail_counts })
}

/// `δ = max_m mean`, `σ² = max_m variance`, `τ(t) = max_m tail`.
#[derive(Clone, Debug)]
pub struct ExactFailureStats {
    pub profiles: Vec<FailureProfile>,
    pub delta: Exact,
    pub sigma_sq: Exact,
}

impl ExactFailureStats {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.to_f64().unwrap().sqrt()
    }

    pub fn delta_f64(&self) -> f64 {
        self.delta.to_f64().unwrap()
    }

    pub fn tail(&self, t: f64) -> f64 {
        self.profiles.iter().map(|p| p.tail(t)).fold(0.0, f64::max)
    }
}

pub fn exact_failure_stats<S: EnumerableKeys>(scheme: &S) -> Result<ExactFailureStats> {
    let profiles = scheme
        .message_space()
        .iter()
        .map(|m| analytic_failure_prob(scheme, Message(m)))
        .collect::<Result<Vec<_>>>()?;
    let delta = profiles.iter().map(|p| p.mean_exact()).max().unwrap();
    let sigma_sq = profiles.iter().map(|p| p.variance_exact()).max().unwrap();
    Ok(ExactFailureStats { profiles, delta, sigma_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::{FailurePredicate, SyntheticFailurePke};

    fn scheme(f: FailurePredicate) -> SyntheticFailurePke {
        SyntheticFailurePke::new(2, 4, 16, f).unwrap()
    }

    #[test]
    fn test_never_failing() {
        let p = analytic_failure_prob(&scheme(FailurePredicate::Never), Message(1)).unwrap();
        assert_eq!(p.mean(), 0.0);
        assert_eq!(p.variance(), 0.0);
        assert_eq!(p.tail(1e-9), 0.0);
    }

    #[test]
    fn test_triangular_counts() {
        // Hand count over r, k in 0..16: r + k >= 28 holds for 3 + 2 + 1 pairs,
        // r + k >= 27 for 4 + 3 + 2 + 1.
        let p = analytic_failure_prob(&scheme(FailurePredicate::sum_threshold(28)), Message(0)).unwrap();
        assert_eq!(p.mean_exact(), Exact::new(6, 256));
        let p = analytic_failure_prob(&scheme(FailurePredicate::sum_threshold(27)), Message(0)).unwrap();
        assert_eq!(p.mean_exact(), Exact::new(10, 256));
        // per-r fail fractions 1/16..4/16 at r = 12..15
        assert_eq!(p.fail_counts[12..], [1, 2, 3, 4]);
        assert_eq!(p.tail(3.0 / 16.0), 2.0 / 16.0);
    }

    #[test]
    fn test_randomness_independent_has_zero_variance() {
        let p = analytic_failure_prob(&scheme(FailurePredicate::key_below(5)), Message(2)).unwrap();
        assert_eq!(p.mean_exact(), Exact::new(5, 16));
        assert_eq!(p.variance_exact(), Exact::from_integer(0));
    }

    #[test]
    fn test_key_independent_variance() {
        // Pr_key[fail | r] is 1 for r < 4 and 0 otherwise: Bernoulli(1/4).
        let p = analytic_failure_prob(&scheme(FailurePredicate::randomness_below(4)), Message(0)).unwrap();
        assert_eq!(p.mean_exact(), Exact::new(1, 4));
        assert_eq!(p.variance_exact(), Exact::new(3, 16));
    }

    #[test]
    fn test_max_over_messages() {
        let s = scheme(FailurePredicate::message_randomness_threshold(16));
        let st = exact_failure_stats(&s).unwrap();
        // m = 3: r >= 13 fails, 3/16
        assert_eq!(st.delta, Exact::new(3, 16));
        assert_eq!(st.profiles.len(), 4);
    }
}
