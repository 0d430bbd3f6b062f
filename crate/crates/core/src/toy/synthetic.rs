use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pke::{
    Ciphertext, EnumerableKeys, FailureScore, KeyPair, Message, PkeScheme, Randomness, Space,
};

/// When decryption of `(m, r)` under key index `k` goes wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailurePredicate {
    Never,
    /// Fails iff `m_weight*m + r_weight*r + k_weight*k >= threshold`.
    Linear {
        m_weight: i64,
        r_weight: i64,
        k_weight: i64,
        threshold: i64,
    },
    /// Fails iff `k` and `r` have equal parity and `r / 2 < window`.
    ParityMatch { window: u64 },
}

impl FailurePredicate {
    /// `r + k >= t`.
    pub fn sum_threshold(t: i64) -> Self {
        FailurePredicate::Linear { m_weight: 0, r_weight: 1, k_weight: 1, threshold: t }
    }

    /// `r < limit`: independent of the key.
    pub fn randomness_below(limit: i64) -> Self {
        FailurePredicate::Linear { m_weight: 0, r_weight: -1, k_weight: 0, threshold: 1 - limit }
    }

    /// `k < limit`: independent of the randomness.
    pub fn key_below(limit: i64) -> Self {
        FailurePredicate::Linear { m_weight: 0, r_weight: 0, k_weight: -1, threshold: 1 - limit }
    }

    /// `m + r >= t`: message-dependent and key-independent.
    pub fn message_randomness_threshold(t: i64) -> Self {
        FailurePredicate::Linear { m_weight: 1, r_weight: 1, k_weight: 0, threshold: t }
    }

    pub fn fails(&self, m: u64, r: u64, k: u64) -> bool {
        match *self {
            FailurePredicate::Never => false,
            FailurePredicate::Linear { m_weight, r_weight, k_weight, threshold } => {
                m_weight * m as i64 + r_weight * r as i64 + k_weight * k as i64 >= threshold
            }
            FailurePredicate::ParityMatch { window } => (k ^ r) & 1 == 0 && r / 2 < window,
        }
    }

    /// True when the predicate ignores the key.
    pub fn key_independent(&self) -> bool {
        match *self {
            FailurePredicate::Never => true,
            FailurePredicate::Linear { k_weight, .. } => k_weight == 0,
            FailurePredicate::ParityMatch { .. } => false,
        }
    }
}

/// What the public key reveals about the key index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyLeak {
    #[default]
    None,
    Parity,
    Full,
}

/// A testbed scheme whose failures come only from an explicit predicate.
///
/// The ciphertext is `(m XOR pad(r), r)` in three bytes. The randomness travels
/// in the clear, so ciphertexts of one message are distinct across `r`. The
/// key only steers the failure predicate; [`KeyLeak`] decides what the public
/// key reveals. A failing decryption returns `m XOR 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticFailurePke {
    pub msg_bits: u32,
    pub rand_bits: u32,
    pub key_count: u64,
    pub failure: FailurePredicate,
    #[serde(default)]
    pub leak: KeyLeak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticPublicKey {
    pub hint: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSecretKey {
    pub key: u64,
    pub pk: SyntheticPublicKey,
}

fn pad(r: u64) -> u64 {
    let mut z = r.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SyntheticFailurePke {
    pub fn new(msg_bits: u32, rand_bits: u32, key_count: u64, failure: FailurePredicate) -> Result<Self> {
        let s = SyntheticFailurePke { msg_bits, rand_bits, key_count, failure, leak: KeyLeak::None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_leak(mut self, leak: KeyLeak) -> Self {
        self.leak = leak;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.msg_bits) {
            return Err(Error::InvalidParameter(format!("msg_bits {} not in 1..=8", self.msg_bits)));
        }
        if self.rand_bits > 16 {
            return Err(Error::InvalidParameter(format!("rand_bits {} exceeds 16", self.rand_bits)));
        }
        if self.key_count == 0 || self.key_count > 1 << 16 {
            return Err(Error::InvalidParameter(format!("key_count {} not in 1..=65536", self.key_count)));
        }
        Ok(())
    }

    fn public_key_for(&self, k: u64) -> SyntheticPublicKey {
        let hint = match self.leak {
            KeyLeak::None => None,
            KeyLeak::Parity => Some(k & 1),
            KeyLeak::Full => Some(k),
        };
        SyntheticPublicKey { hint }
    }

    fn mask(&self) -> u64 {
        (1u64 << self.msg_bits) - 1
    }

    /// Fraction of keys under which `(m, r)` fails.
    pub fn key_averaged_failure(&self, m: u64, r: u64) -> f64 {
        let fails = (0..self.key_count).filter(|&k| self.failure.fails(m, r, k)).count();
        fails as f64 / self.key_count as f64
    }
}

impl PkeScheme for SyntheticFailurePke {
    type PublicKey = SyntheticPublicKey;
    type SecretKey = SyntheticSecretKey;

    fn name(&self) -> String {
        format!("synthetic(m={}b, r={}b, k={})", self.msg_bits, self.rand_bits, self.key_count)
    }

    fn message_space(&self) -> Space {
        Space::with_bits(self.msg_bits).unwrap()
    }

    fn randomness_space(&self) -> Space {
        Space::with_bits(self.rand_bits).unwrap()
    }

    fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> KeyPair<Self> {
        let k = rng.gen_range(0..self.key_count);
        self.keypair_at(k).unwrap()
    }

    fn encrypt(&self, _pk: &SyntheticPublicKey, m: Message, r: Randomness) -> Ciphertext {
        let body = (m.0 ^ pad(r.0)) & self.mask();
        Ciphertext(vec![body as u8, (r.0 >> 8) as u8, r.0 as u8])
    }

    fn decrypt(&self, sk: &SyntheticSecretKey, c: &Ciphertext) -> Option<Message> {
        let b = c.as_bytes();
        if b.len() != 3 {
            return None;
        }
        let body = b[0] as u64;
        let r = ((b[1] as u64) << 8) | b[2] as u64;
        if body > self.mask() || !self.randomness_space().contains(r) {
            return None;
        }
        let m = (body ^ pad(r)) & self.mask();
        if self.failure.fails(m, r, sk.key) {
            Some(Message(m ^ 1))
        } else {
            Some(Message(m))
        }
    }

    fn public_key_bytes(&self, pk: &SyntheticPublicKey) -> Vec<u8> {
        let mut out = vec![self.leak as u8];
        if let Some(h) = pk.hint {
            out.extend_from_slice(&h.to_be_bytes());
        }
        out
    }
}

impl EnumerableKeys for SyntheticFailurePke {
    fn key_count(&self) -> Option<u64> {
        Some(self.key_count)
    }

    fn keypair_at(&self, index: u64) -> Option<KeyPair<Self>> {
        (index < self.key_count).then(|| {
            let pk = self.public_key_for(index);
            KeyPair { pk, sk: SyntheticSecretKey { key: index, pk } }
        })
    }
}

impl FailureScore for SyntheticFailurePke {
    fn failure_score(&self, m: Message, r: Randomness) -> f64 {
        self.key_averaged_failure(m.0, r.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn test_correct_unless_predicate_fires() {
        let s = SyntheticFailurePke::new(4, 4, 16, FailurePredicate::sum_threshold(28)).unwrap();
        for k in 0..16 {
            let keys = s.keypair_at(k).unwrap();
            for m in 0..16 {
                for r in 0..16 {
                    let c = s.encrypt(&keys.pk, Message(m), Randomness(r));
                    let d = s.decrypt(&keys.sk, &c).unwrap();
                    assert_eq!(d != Message(m), r + k >= 28);
                }
            }
        }
    }

    #[test]
    fn test_malformed_ciphertexts_reject() {
        let s = SyntheticFailurePke::new(4, 4, 4, FailurePredicate::Never).unwrap();
        let keys = s.keypair_at(0).unwrap();
        assert_eq!(s.decrypt(&keys.sk, &Ciphertext(vec![0, 0])), None);
        assert_eq!(s.decrypt(&keys.sk, &Ciphertext(vec![16, 0, 0])), None);
        assert_eq!(s.decrypt(&keys.sk, &Ciphertext(vec![0, 0, 16])), None);
    }

    #[test]
    fn test_leak_shapes_public_key() {
        let s = SyntheticFailurePke::new(2, 2, 8, FailurePredicate::Never)
            .unwrap()
            .with_leak(KeyLeak::Parity);
        assert_eq!(s.keypair_at(5).unwrap().pk.hint, Some(1));
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let kp = s.keygen(&mut rng);
        assert_eq!(kp.pk.hint, Some(kp.sk.key & 1));
    }

    #[test]
    fn test_parameter_validation() {
        assert!(SyntheticFailurePke::new(0, 4, 4, FailurePredicate::Never).is_err());
        assert!(SyntheticFailurePke::new(9, 4, 4, FailurePredicate::Never).is_err());
        assert!(SyntheticFailurePke::new(4, 17, 4, FailurePredicate::Never).is_err());
        assert!(SyntheticFailurePke::new(4, 4, 0, FailurePredicate::Never).is_err());
    }

    #[test]
    fn test_predicate_helpers() {
        assert!(FailurePredicate::randomness_below(3).fails(0, 2, 99));
        assert!(!FailurePredicate::randomness_below(3).fails(0, 3, 0));
        assert!(FailurePredicate::key_below(2).fails(0, 9, 1));
        assert!(!FailurePredicate::key_below(2).fails(0, 9, 2));
        assert!(FailurePredicate::key_below(2).fails(5, 0, 0));
        assert!(FailurePredicate::randomness_below(3).key_independent());
        assert!(!FailurePredicate::sum_threshold(3).key_independent());
    }
}
