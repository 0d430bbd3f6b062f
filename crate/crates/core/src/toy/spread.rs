//! γ-spreadness: exact values for Frodo- and HQC-shaped parameter sets and
//! brute force for toy schemes.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pke::{KeyPair, Message, PkeScheme, Randomness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SpreadnessParams {
    /// `rows x cols` noise matrix; `p0 = p0_num / p0_den` is `Pr[chi = 0]`.
    Frodo { rows: u64, cols: u64, p0_num: u64, p0_den: u64 },
    /// Weight-`weight` vectors of length `n1 * n2`.
    Hqc { n1: u64, n2: u64, weight: u64 },
}

pub const PRESET_NAMES: [&str; 6] = ["frodo-640", "frodo-976", "frodo-1344", "hqc-128", "hqc-192", "hqc-256"];

pub fn preset(name: &str) -> Option<SpreadnessParams> {
    use SpreadnessParams::*;
    let p = match name {
        "frodo-640" => Frodo { rows: 8, cols: 640, p0_num: 9288, p0_den: 1 << 16 },
        "frodo-976" => Frodo { rows: 8, cols: 976, p0_num: 11278, p0_den: 1 << 16 },
        "frodo-1344" => Frodo { rows: 8, cols: 1344, p0_num: 18286, p0_den: 1 << 16 },
        "hqc-128" => Hqc { n1: 46, n2: 384, weight: 75 },
        "hqc-192" => Hqc { n1: 56, n2: 640, weight: 114 },
        "hqc-256" => Hqc { n1: 90, n2: 640, weight: 149 },
        _ => return None,
    };
    Some(p)
}

/// `floor(-log2(num/den))` for `0 < num/den < 1`, in integers.
pub fn floor_neg_log2(num: u64, den: u64) -> Result<u64> {
    if num == 0 || num >= den {
        return Err(Error::Domain(format!("p0 = {num}/{den} is not in (0,1)")));
    }
    // largest k with num * 2^k <= den
    let mut k = 0u64;
    while (num as u128) << (k + 1) <= den as u128 {
        k += 1;
    }
    Ok(k)
}

/// `rows * cols * floor(-log2 p0)`.
pub fn gamma_frodo(rows: u64, cols: u64, p0_num: u64, p0_den: u64) -> Result<u64> {
    Ok(rows * cols * floor_neg_log2(p0_num, p0_den)?)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // exact at every step: acc = C(n, i+1) after the division
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `log2` of a positive big integer, to `f64` accuracy.
pub fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    (v >> shift as usize).to_f64().unwrap().log2() + shift as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct HqcSpread {
    pub binomial: BigUint,
    /// `floor(log2 C(n, w))`, exact.
    pub log2_binomial_floor: u64,
    pub log2_binomial: f64,
    pub gamma_exact: f64,
    pub gamma_floor: u64,
}

pub fn gamma_hqc(block_length: u64, weight: u64) -> Result<HqcSpread> {
    if weight == 0 || weight > block_length {
        return Err(Error::Domain(format!("weight {weight} not in 1..={block_length}")));
    }
    let c = binomial(block_length, weight);
    let fl = c.bits() - 1;
    let l = log2_big(&c);
    Ok(HqcSpread {
        binomial: c,
        log2_binomial_floor: fl,
        log2_binomial: l,
        gamma_exact: 2.0 * l,
        gamma_floor: 2 * fl,
    })
}

/// The conservative integer γ used by bounds.
pub fn gamma_floor(params: &SpreadnessParams) -> Result<u64> {
    match *params {
        SpreadnessParams::Frodo { rows, cols, p0_num, p0_den } => gamma_frodo(rows, cols, p0_num, p0_den),
        SpreadnessParams::Hqc { n1, n2, weight } => Ok(gamma_hqc(n1 * n2, weight)?.gamma_floor),
    }
}

/// Exponent `e` in `q_D (q_G + 2 q_D) 2^(-γ/2) <= q_G 2^e` at `q_D = 2^64`:
/// `e = 65 - floor(γ/2)`, rounding toward the weaker bound for odd γ.
pub fn budget_exponent(gamma_floor: u64) -> i64 {
    65 - (gamma_floor / 2) as i64
}

/// Largest ciphertext multiplicity for one key pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ToySpread {
    pub gamma: f64,
    pub max_multiplicity: u64,
    pub randomness_size: u64,
    pub argmax_message: Message,
}

pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// `-log2 max_(m, c) Pr_r[Enc(pk, m; r) = c]` by enumerating every `(m, r)`.
pub fn gamma_exact_toy<S: PkeScheme>(scheme: &S, keys: &KeyPair<S>) -> Result<ToySpread> {
    let ms = scheme.message_space();
    let rs = scheme.randomness_space();
    let pairs = ms.size() as u128 * rs.size() as u128;
    if pairs > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { pairs, limit: ENUMERATION_LIMIT });
    }
    let mut best = (0u64, Message(0));
    for m in ms.iter() {
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        for r in rs.iter() {
            let c = scheme.encrypt(&keys.pk, Message(m), Randomness(r));
            *counts.entry(c.0).or_default() += 1;
        }
        let top = counts.values().copied().max().unwrap_or(0);
        if top > best.0 {
            best = (top, Message(m));
        }
    }
    let gamma = (rs.size() as f64).log2() - (best.0 as f64).log2();
    Ok(ToySpread {
        gamma,
        max_multiplicity: best.0,
        randomness_size: rs.size(),
        argmax_message: best.1,
    })
}
