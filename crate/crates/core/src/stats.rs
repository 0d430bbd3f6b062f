//! Failure statistics by sampling, and the bounds they feed.
//!
//! Estimation samples `r` first and then a batch of fresh keys per `r`, so
//! each batch is an unbiased estimate of `Pr_key[(m, r) fails]`. Mean and
//! variance over `r` come from the same batches.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Real;
use crate::oracle::{run_seed, stream};
use crate::pke::{Message, PkeScheme, Randomness};

/// Constant of the search bounds.
pub const SEARCH_CONSTANT: u64 = 304;
/// Smallest accepted number of randomness samples per message.
pub const MIN_TRIALS: u64 = 100;
/// Message spaces up to this size are probed exhaustively by default.
pub const EXHAUSTIVE_MESSAGE_LIMIT: u64 = 1 << 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRequest {
    /// Randomness samples per message.
    pub trials: u64,
    /// Fresh key pairs per randomness sample.
    pub keys_per_randomness: u64,
    /// Probe this many uniform messages instead of all of them.
    pub message_sample: Option<u64>,
    pub tail_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for StatsRequest {
    fn default() -> Self {
        StatsRequest {
            trials: 10_000,
            keys_per_randomness: 64,
            message_sample: None,
            tail_grid: vec![0.01, 0.05, 0.1, 0.25, 0.5],
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageStats {
    pub message: Message,
    pub delta: Estimate,
    pub variance: Estimate,
    /// `Pr_r[Pr_key[fail] >= t]` per grid point.
    pub tail: Vec<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureStats {
    /// Largest per-message mean failure rate.
    pub delta_ik: Estimate,
    /// Square root of the largest per-message variance.
    pub sigma: Estimate,
    pub sigma_sq: Estimate,
    pub tail: Vec<TailPoint>,
    pub trials_per_message: u64,
    pub keys_per_randomness: u64,
    pub messages_probed: u64,
    /// False when the maxima run over a sample and are lower-bound estimates.
    pub all_messages: bool,
    pub seed: u64,
    pub per_message: Vec<MessageStats>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n - 1` denominator.
fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn se_of_mean(xs: &[f64]) -> f64 {
    (sample_var(xs) / xs.len() as f64).sqrt()
}

/// Statistics of one message from its per-randomness batch fractions.
fn message_stats(message: Message, fracs: &[f64], keys: u64, grid: &[f64]) -> MessageStats {
    let n = fracs.len() as f64;
    let delta = mean(fracs);
    // E[p(1-p)] / K is the within-batch binomial noise; remove it.
    let k1 = (keys - 1) as f64;
    let z: Vec<f64> = fracs
        .iter()
        .map(|&p| (p - delta) * (p - delta) * n / (n - 1.0) - p * (1.0 - p) / k1)
        .collect();
    let var = mean(&z).clamp(0.0, delta * (1.0 - delta));
    let tail = grid
        .iter()
        .map(|&t| {
            let hits = fracs.iter().filter(|&&p| p >= t).count() as f64;
            let v = hits / n;
            Estimate { value: v, std_error: (v * (1.0 - v) / n).sqrt() }
        })
        .collect();
    MessageStats {
        message,
        delta: Estimate { value: delta, std_error: se_of_mean(fracs) },
        variance: Estimate { value: var, std_error: se_of_mean(&z) },
        tail,
    }
}

fn check_request(req: &StatsRequest) -> Result<()> {
    if req.trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("trials {} below the minimum {MIN_TRIALS}", req.trials)));
    }
    if req.keys_per_randomness < 2 {
        return Err(Error::InvalidParameter("keys_per_randomness must be at least 2".into()));
    }
    if req.tail_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter("tail grid points must lie in [0, 1]".into()));
    }
    if req.tail_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("tail grid must be strictly increasing".into()));
    }
    Ok(())
}

fn probed_messages<S: PkeScheme>(scheme: &S, req: &StatsRequest) -> Result<(Vec<Message>, bool)> {
    let space = scheme.message_space();
    match req.message_sample {
        Some(n) if n < space.size() => {
            let mut rng = stream(req.seed, "stats/messages");
            Ok(((0..n).map(|_| Message(space.sample(&mut rng))).collect(), false))
        }
        None if space.size() > EXHAUSTIVE_MESSAGE_LIMIT => Err(Error::InvalidParameter(format!(
            "message space of size {} needs message_sample",
            space.size()
        ))),
        _ => Ok((space.iter().map(Message).collect(), true)),
    }
}

/// Per-message estimates, maximized over the probed messages.
pub fn estimate_failure_stats<S: PkeScheme>(scheme: &S, req: &StatsRequest) -> Result<FailureStats> {
    check_request(req)?;
    let (messages, all_messages) = probed_messages(scheme, req)?;
    let keys = req.keys_per_randomness;
    let per_message: Vec<MessageStats> = messages
        .iter()
        .map(|&m| {
            let label = format!("stats/message/{}", m.0);
            let fracs: Vec<f64> = (0..req.trials)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream(run_seed(req.seed, j), &label);
                    let r = Randomness(scheme.randomness_space().sample(&mut rng));
                    let fails = (0..keys)
                        .filter(|_| {
                            let kp = scheme.keygen(&mut rng);
                            scheme.fails(&kp, m, r)
                        })
                        .count();
                    fails as f64 / keys as f64
                })
                .collect();
            message_stats(m, &fracs, keys, &req.tail_grid)
        })
        .collect();
    let argmax = |f: &dyn Fn(&MessageStats) -> f64| {
        per_message.iter().max_by(|a, b| f(a).total_cmp(&f(b))).expect("at least one message")
    };
    let delta_ik = argmax(&|s| s.delta.value).delta;
    let sigma_sq = argmax(&|s| s.variance.value).variance;
    let sigma_value = sigma_sq.value.sqrt();
    // delta method away from zero, square-root scale near it
    let root_se = sigma_sq.std_error.sqrt();
    let sigma = Estimate { value: sigma_value, std_error: sigma_sq.std_error / (2.0 * sigma_value + root_se).max(f64::MIN_POSITIVE) };
    let tail = req
        .tail_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let best = argmax(&|s| s.tail[i].value).tail[i];
            TailPoint { t, value: best.value, std_error: best.std_error }
        })
        .collect();
    Ok(FailureStats {
        delta_ik,
        sigma,
        sigma_sq,
        tail,
        trials_per_message: req.trials,
        keys_per_randomness: keys,
        messages_probed: messages.len() as u64,
        all_messages,
        seed: req.seed,
        per_message,
    })
}

fn check_probability(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{what} = {x} is not a probability")));
    }
    Ok(())
}

/// `min(1, 152 (q+1)^2 Γ_R / |Y|)`: success probability of finding `x` with
/// `R(x, RO(x))` in `q` queries.
pub fn search_success_bound(q: u128, gamma_r: &BigUint, y_size: &BigUint) -> Result<Real> {
    if y_size.is_zero() {
        return Err(Error::Domain("empty range".into()));
    }
    if gamma_r > y_size {
        return Err(Error::Domain(format!("relation size {gamma_r} exceeds range size {y_size}")));
    }
    let q1 = Real::from_u128(q).add(&Real::one());
    let v = Real::from_u64(SEARCH_CONSTANT / 2)
        .mul(&q1)
        .mul(&q1)
        .mul(&Real::from_ratio(gamma_r, y_size));
    Ok(v.min(Real::one()))
}

/// Index `κ` (0-based) and the value `t_κ + C q^2 Σ_{i>κ} t_i ΔG(i)`, exact.
/// `None` when no grid point satisfies `C q^2 G(t_i) <= 1`.
pub fn expectation_search_bound_exact(grid: &[f64], tail: &[f64], q: u128) -> Result<Option<(usize, BigRational)>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty value grid".into()));
    }
    if grid.len() != tail.len() {
        return Err(Error::Domain("grid and tail lengths differ".into()));
    }
    for (&t, &g) in grid.iter().zip(tail) {
        check_probability(t, "grid point")?;
        check_probability(g, "tail value")?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    if tail.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("tail function must be non-increasing".into()));
    }
    let exact = |x: f64| BigRational::from_float(x).expect("finite");
    let cq2 = BigRational::from_integer(BigInt::from(SEARCH_CONSTANT) * BigInt::from(q) * BigInt::from(q));
    let one = BigRational::one();
    let Some(kappa) = tail.iter().position(|&g| &cq2 * exact(g) <= one) else {
        return Ok(None);
    };
    let mut sum = BigRational::zero();
    for i in kappa + 1..grid.len() {
        let next = tail.get(i + 1).map_or_else(BigRational::zero, |&g| exact(g));
        sum += exact(grid[i]) * (exact(tail[i]) - next);
    }
    Ok(Some((kappa, exact(grid[kappa]) + cq2 * sum)))
}

/// [`expectation_search_bound_exact`] rounded to [`Real`] and clamped to 1;
/// 1 when `κ` does not exist.
pub fn expectation_search_bound(grid: &[f64], tail: &[f64], q: u128) -> Result<Real> {
    Ok(match expectation_search_bound_exact(grid, tail, q)? {
        None => Real::one(),
        Some((_, v)) => {
            let n = v.numer().to_biguint().expect("non-negative");
            let d = v.denom().to_biguint().unwrap();
            Real::from_ratio(&n, &d).min(Real::one())
        }
    })
}

/// `μ + 3x + 2x^2 μ ln(1/x)` with `x = √C q σ`, natural log; 1 when `x >= 1`.
pub fn ffp_nk_bound_chebyshev(q: u128, mu: f64, sigma: f64) -> Result<Real> {
    check_probability(mu, "mean failure rate")?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma = {sigma} must be non-negative")));
    }
    let mu_r = Real::from_f64(mu);
    if q == 0 || sigma == 0.0 {
        return Ok(mu_r);
    }
    let x = Real::from_u64(SEARCH_CONSTANT).sqrt().mul(&Real::from_u128(q)).mul(&Real::from_f64(sigma));
    if x >= Real::one() {
        return Ok(Real::one());
    }
    let neg_ln = Real::zero().sub(&x.ln());
    let v = mu_r
        .add(&Real::from_u64(3).mul(&x))
        .add(&Real::from_u64(2).mul(&x).mul(&x).mul(&mu_r).mul(&neg_ln));
    Ok(v.clamp_unit())
}

/// Smallest Gaussian-tail parameter the bound accepts, `e / (2C)`.
pub fn gaussian_beta_min() -> f64 {
    std::f64::consts::E / (2.0 * SEARCH_CONSTANT as f64)
}

/// `μ + 2 β^{-1/2} √(ln(2C√β) + 2 ln q)`, clamped to 1.
pub fn ffp_nk_bound_gaussian(q: u128, mu: f64, beta: f64) -> Result<Real> {
    check_probability(mu, "mean failure rate")?;
    if !beta.is_finite() || beta < gaussian_beta_min() {
        return Err(Error::Domain(format!("beta = {beta} is below e/(2C) = {}", gaussian_beta_min())));
    }
    if q == 0 {
        return Err(Error::Domain("the Gaussian bound needs q >= 1".into()));
    }
    let b = Real::from_f64(beta);
    let eta2 = Real::from_u64(2 * SEARCH_CONSTANT).mul(&b.sqrt());
    let inner = eta2.ln().add(&Real::from_u64(2).mul(&Real::from_u128(q).ln()));
    let v = Real::from_f64(mu).add(&Real::from_u64(2).mul(&inner.sqrt()).div(&b.sqrt()));
    Ok(v.clamp_unit())
}

/// One serialized statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub formula_id: String,
    pub inputs: serde_json::Value,
}

impl FailureStats {
    pub fn records(&self) -> Vec<StatRecord> {
        let inputs = serde_json::json!({
            "keys_per_randomness": self.keys_per_randomness,
            "messages_probed": self.messages_probed,
            "all_messages": self.all_messages,
        });
        let rec = |statistic: String, e: Estimate, formula: &str| StatRecord {
            statistic,
            value: e.value,
            stderr: e.std_error,
            trials: self.trials_per_message,
            seed: self.seed,
            formula_id: formula.into(),
            inputs: inputs.clone(),
        };
        let mut out = vec![
            rec("delta_ik".into(), self.delta_ik, "max_m mean_r batch_fail"),
            rec("sigma".into(), self.sigma, "sqrt(max_m var_r batch_fail)"),
            rec("sigma_sq".into(), self.sigma_sq, "max_m var_r batch_fail"),
        ];
        for p in &self.tail {
            let e = Estimate { value: p.value, std_error: p.std_error };
            out.push(rec(format!("tail({})", p.t), e, "max_m Pr_r[batch_fail >= t]"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::{FailurePredicate, SyntheticFailurePke};

    fn f(v: Real) -> f64 {
        v.to_f64()
    }

    #[test]
    fn test_search_bound_values() {
        let one = BigUint::one();
        let y = BigUint::one() << 16usize;
        assert_eq!(f(search_success_bound(0, &one, &y).unwrap()), 152.0 / 65536.0);
        assert_eq!(f(search_success_bound(5, &y, &y).unwrap()), 1.0);
        let y20 = BigUint::one() << 20usize;
        assert_eq!(f(search_success_bound(3, &one, &y20).unwrap()), 152.0 * 16.0 / 1048576.0);
        assert!(search_success_bound(1, &y20, &y).is_err());
    }

    #[test]
    fn test_expectation_bound_hand_values() {
        // G = 0: κ = 1, empty sum
        assert_eq!(f(expectation_search_bound(&[0.1, 0.5], &[0.0, 0.0], 4).unwrap()), 0.1);
        // q = 0: C q^2 G = 0 everywhere
        assert_eq!(f(expectation_search_bound(&[0.25, 0.5], &[1.0, 0.5], 0).unwrap()), 0.25);
        // q = 1, grid (1/4, 1/2), G = (1/128, 1/1024):
        // C G(t1) = 2.375 > 1, C G(t2) = 0.296875 <= 1, so κ = 2;
        // bound = t2 + 0 = 1/2.
        let (k, v) = expectation_search_bound_exact(&[0.25, 0.5], &[1.0 / 128.0, 1.0 / 1024.0], 1).unwrap().unwrap();
        assert_eq!(k, 1);
        assert_eq!(v, BigRational::new(1.into(), 2.into()));
        // q = 1, grid (1/8, 1/4, 1/2), G = (1/512, 1/1024, 1/2048):
        // κ = 1; sum = (1/4)(1/1024 - 1/2048) + (1/2)(1/2048) = 3/8192;
        // bound = 1/8 + 304 * 3/8192 = 1/8 + 912/8192 = 1936/8192.
        let (k, v) = expectation_search_bound_exact(&[0.125, 0.25, 0.5], &[1.0 / 512.0, 1.0 / 1024.0, 1.0 / 2048.0], 1)
            .unwrap()
            .unwrap();
        assert_eq!(k, 0);
        assert_eq!(v, BigRational::new(1936.into(), 8192.into()));
    }

    #[test]
    fn test_expectation_bound_rejects_bad_input() {
        assert!(expectation_search_bound(&[], &[], 1).is_err());
        assert!(expectation_search_bound(&[0.5, 0.25], &[0.1, 0.0], 1).is_err());
        assert!(expectation_search_bound(&[0.25, 0.5], &[0.1, 0.2], 1).is_err());
        assert_eq!(f(expectation_search_bound(&[0.5], &[1.0], 1).unwrap()), 1.0);
    }

    #[test]
    fn test_chebyshev_edge_cases() {
        assert_eq!(f(ffp_nk_bound_chebyshev(1 << 40, 0.01, 0.0).unwrap()), 0.01);
        assert_eq!(f(ffp_nk_bound_chebyshev(0, 0.01, 0.3).unwrap()), 0.01);
        assert_eq!(f(ffp_nk_bound_chebyshev(1, 0.01, 0.1).unwrap()), 1.0);
        assert!(ffp_nk_bound_chebyshev(1, 0.01, -1.0).is_err());
        // q = 1, σ = 1e-3, μ = 1e-2 against an independent f64 evaluation
        let x = 304f64.sqrt() * 1e-3;
        let want = 1e-2 + 3.0 * x + 2.0 * x * x * 1e-2 * (-x.ln());
        let got = f(ffp_nk_bound_chebyshev(1, 1e-2, 1e-3).unwrap());
        assert!((got - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn test_gaussian_values() {
        let beta: f64 = 1e6;
        let mu = 1e-3;
        let want = mu + 2.0 / beta.sqrt() * (2.0 * 304.0 * beta.sqrt()).ln().sqrt();
        let got = f(ffp_nk_bound_gaussian(1, mu, beta).unwrap());
        assert!((got - want).abs() <= 1e-14 * want);
        let at = ffp_nk_bound_gaussian(1, 0.0, gaussian_beta_min()).unwrap();
        assert!(at.to_f64() > 0.0);
        assert!(ffp_nk_bound_gaussian(1, 0.0, gaussian_beta_min() * 0.99).is_err());
        assert!(ffp_nk_bound_gaussian(0, 0.0, 1.0).is_err());
    }

    fn synthetic(f: FailurePredicate) -> SyntheticFailurePke {
        SyntheticFailurePke::new(2, 4, 8, f).unwrap()
    }

    #[test]
    fn test_never_failing_stats_are_exactly_zero() {
        let req = StatsRequest { trials: 200, keys_per_randomness: 8, ..StatsRequest::default() };
        let st = estimate_failure_stats(&synthetic(FailurePredicate::Never), &req).unwrap();
        assert_eq!(st.delta_ik.value, 0.0);
        assert_eq!(st.sigma.value, 0.0);
        assert!(st.tail.iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn test_refuses_small_trials() {
        let req = StatsRequest { trials: 99, ..StatsRequest::default() };
        assert!(matches!(
            estimate_failure_stats(&synthetic(FailurePredicate::Never), &req),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn test_estimates_are_reproducible() {
        let req = StatsRequest { trials: 150, keys_per_randomness: 16, seed: 5, ..StatsRequest::default() };
        let s = synthetic(FailurePredicate::sum_threshold(12));
        assert_eq!(estimate_failure_stats(&s, &req).unwrap(), estimate_failure_stats(&s, &req).unwrap());
    }
}
