//! Public-key encryption interface and the derandomized scheme `Enc(pk, m; G(m))`.
//!
//! Messages and randomness are indices into finite spaces. Their canonical
//! encoding is fixed-width big-endian, so the derived `Ord` on [`Message`]
//! is exactly the byte-wise lexicographic order of the encodings. That order
//! selects the first preimage in [`crate::oracle::PreimageList`].

use std::fmt::Debug;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::RandomFunctions;

/// A finite space `{0, .., size - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    size: u64,
}

impl Space {
    pub fn new(size: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("empty space".into()));
        }
        Ok(Space { size })
    }

    pub fn with_bits(bits: u32) -> Result<Self> {
        if bits > 63 {
            return Err(Error::InvalidParameter(format!("{bits}-bit space is too large")));
        }
        Space::new(1u64 << bits)
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// `log2(size)` when the size is a power of two.
    pub fn bits(&self) -> Option<u32> {
        self.size.is_power_of_two().then(|| self.size.trailing_zeros())
    }

    /// Byte width of the canonical encoding (at least one byte).
    pub fn encoded_len(&self) -> usize {
        let bits = 64 - (self.size - 1).leading_zeros();
        (bits as usize).div_ceil(8).max(1)
    }

    pub fn contains(&self, index: u64) -> bool {
        index < self.size
    }

    pub fn check(&self, index: u64, what: &str) -> Result<()> {
        if self.contains(index) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} {index} outside a space of size {}", self.size)))
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.size)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        0..self.size
    }

    pub fn encode(&self, index: u64) -> Vec<u8> {
        index.to_be_bytes()[8 - self.encoded_len()..].to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Message(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Randomness(pub u64);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ciphertext(pub Vec<u8>);

/// A KEM session key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KemKey(pub Vec<u8>);

impl Ciphertext {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

pub struct KeyPair<S: PkeScheme + ?Sized> {
    pub pk: S::PublicKey,
    pub sk: S::SecretKey,
}

impl<S: PkeScheme + ?Sized> Clone for KeyPair<S> {
    fn clone(&self) -> Self {
        KeyPair { pk: self.pk.clone(), sk: self.sk.clone() }
    }
}

impl<S: PkeScheme + ?Sized> Debug for KeyPair<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair").field("pk", &self.pk).field("sk", &self.sk).finish()
    }
}

/// A randomized public-key encryption scheme with finite message and
/// randomness spaces.
///
/// `encrypt` must be a pure function of its inputs. `decrypt` returns `None`
/// for anything it cannot decrypt, including malformed ciphertexts.
pub trait PkeScheme: Send + Sync {
    type PublicKey: Clone + Debug + Send + Sync;
    type SecretKey: Clone + Debug + Send + Sync;

    fn name(&self) -> String;
    fn message_space(&self) -> Space;
    fn randomness_space(&self) -> Space;
    fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> KeyPair<Self>
    where
        Self: Sized;
    fn encrypt(&self, pk: &Self::PublicKey, m: Message, r: Randomness) -> Ciphertext;
    fn decrypt(&self, sk: &Self::SecretKey, c: &Ciphertext) -> Option<Message>;
    /// Canonical public-key bytes, hashed by the production-mode oracles.
    fn public_key_bytes(&self, pk: &Self::PublicKey) -> Vec<u8>;

    /// `encrypt` with both inputs checked against their spaces.
    fn encrypt_checked(&self, pk: &Self::PublicKey, m: Message, r: Randomness) -> Result<Ciphertext> {
        self.message_space().check(m.0, "message")?;
        self.randomness_space().check(r.0, "randomness")?;
        Ok(self.encrypt(pk, m, r))
    }

    /// True when `Dec(sk, Enc(pk, m; r)) != m`.
    fn fails(&self, keys: &KeyPair<Self>, m: Message, r: Randomness) -> bool
    where
        Self: Sized,
    {
        self.decrypt(&keys.sk, &self.encrypt(&keys.pk, m, r)) != Some(m)
    }
}

/// Schemes whose key space can be listed, so failure probabilities over keys
/// can be computed exactly.
pub trait EnumerableKeys: PkeScheme + Sized {
    fn key_count(&self) -> Option<u64>;
    fn keypair_at(&self, index: u64) -> Option<KeyPair<Self>>;
}

/// A key-independent score that grows with the chance that `(m, r)` fails.
/// Public information an adversary may use to rank candidates.
pub trait FailureScore: PkeScheme {
    fn failure_score(&self, m: Message, r: Randomness) -> f64;
}

/// The derandomized scheme: `Enc1(pk, m) = Enc(pk, m; G(m))`, and `Dec1`
/// rejects unless re-encryption reproduces the ciphertext.
#[derive(Clone, Debug)]
pub struct DerandomizedPke<S> {
    pub base: S,
    pub oracle_tag: String,
}

impl<S: PkeScheme> DerandomizedPke<S> {
    pub fn new(base: S) -> Self {
        DerandomizedPke { base, oracle_tag: "G".to_string() }
    }

    pub fn with_tag(base: S, tag: impl Into<String>) -> Self {
        DerandomizedPke { base, oracle_tag: tag.into() }
    }

    pub fn encrypt(
        &self,
        oracles: &mut dyn RandomFunctions,
        pk: &S::PublicKey,
        m: Message,
    ) -> Result<Ciphertext> {
        let r = oracles.g(m)?;
        self.base.encrypt_checked(pk, m, r)
    }

    pub fn decrypt(
        &self,
        oracles: &mut dyn RandomFunctions,
        keys: &KeyPair<S>,
        c: &Ciphertext,
    ) -> Result<Option<Message>> {
        let Some(m) = self.base.decrypt(&keys.sk, c) else {
            return Ok(None);
        };
        if !self.base.message_space().contains(m.0) {
            return Ok(None);
        }
        let r = oracles.g(m)?;
        if self.base.encrypt(&keys.pk, m, r) == *c {
            Ok(Some(m))
        } else {
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_encoding_order_matches_numeric_order() {
        let s = Space::new(300).unwrap();
        assert_eq!(s.encoded_len(), 2);
        let mut prev = s.encode(0);
        for i in 1..300 {
            let e = s.encode(i);
            assert!(prev < e);
            prev = e;
        }
    }

    #[test]
    fn test_space_bits() {
        assert_eq!(Space::with_bits(4).unwrap().bits(), Some(4));
        assert_eq!(Space::new(3).unwrap().bits(), None);
        assert_eq!(Space::new(1).unwrap().bits(), Some(0));
        assert_eq!(Space::new(1).unwrap().encoded_len(), 1);
        assert!(Space::new(0).is_err());
    }

    #[test]
    fn test_space_check_reports_domain() {
        let s = Space::with_bits(2).unwrap();
        assert!(s.check(3, "message").is_ok());
        assert!(matches!(s.check(4, "message"), Err(Error::Domain(_))));
    }
}
