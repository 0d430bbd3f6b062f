//! Toy schemes with tractable failure behavior and spreadness calculators.

mod analytic;
mod micro_lwe;
mod spread;
mod synthetic;

pub use analytic::*;
pub use micro_lwe::*;
pub use spread::*;
pub use synthetic::*;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pke::{
    Ciphertext, EnumerableKeys, FailureScore, KeyPair, Message, PkeScheme, Randomness, Space,
};

/// Any built-in toy scheme, selectable from a config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ToyScheme {
    Synthetic(SyntheticFailurePke),
    MicroLwe(MicroLwePke),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ToyPublicKey {
    Synthetic(SyntheticPublicKey),
    MicroLwe(LwePublicKey),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ToySecretKey {
    Synthetic(SyntheticSecretKey),
    MicroLwe(LweSecretKey),
}

impl ToyScheme {
    pub fn validate(&self) -> Result<()> {
        match self {
            ToyScheme::Synthetic(s) => s.validate(),
            ToyScheme::MicroLwe(s) => s.validate(),
        }
    }

    pub fn as_synthetic(&self) -> Option<&SyntheticFailurePke> {
        match self {
            ToyScheme::Synthetic(s) => Some(s),
            ToyScheme::MicroLwe(_) => None,
        }
    }
}

fn mismatch() -> ! {
    panic!("key pair belongs to a different toy scheme")
}

impl PkeScheme for ToyScheme {
    type PublicKey = ToyPublicKey;
    type SecretKey = ToySecretKey;

    fn name(&self) -> String {
        match self {
            ToyScheme::Synthetic(s) => s.name(),
            ToyScheme::MicroLwe(s) => s.name(),
        }
    }

    fn message_space(&self) -> Space {
        match self {
            ToyScheme::Synthetic(s) => s.message_space(),
            ToyScheme::MicroLwe(s) => s.message_space(),
        }
    }

    fn randomness_space(&self) -> Space {
        match self {
            ToyScheme::Synthetic(s) => s.randomness_space(),
            ToyScheme::MicroLwe(s) => s.randomness_space(),
        }
    }

    fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> KeyPair<Self> {
        match self {
            ToyScheme::Synthetic(s) => {
                let kp = s.keygen(rng);
                KeyPair { pk: ToyPublicKey::Synthetic(kp.pk), sk: ToySecretKey::Synthetic(kp.sk) }
            }
            ToyScheme::MicroLwe(s) => {
                let kp = s.keygen(rng);
                KeyPair { pk: ToyPublicKey::MicroLwe(kp.pk), sk: ToySecretKey::MicroLwe(kp.sk) }
            }
        }
    }

    fn encrypt(&self, pk: &ToyPublicKey, m: Message, r: Randomness) -> Ciphertext {
        match (self, pk) {
            (ToyScheme::Synthetic(s), ToyPublicKey::Synthetic(pk)) => s.encrypt(pk, m, r),
            (ToyScheme::MicroLwe(s), ToyPublicKey::MicroLwe(pk)) => s.encrypt(pk, m, r),
            _ => mismatch(),
        }
    }

    fn decrypt(&self, sk: &ToySecretKey, c: &Ciphertext) -> Option<Message> {
        match (self, sk) {
            (ToyScheme::Synthetic(s), ToySecretKey::Synthetic(sk)) => s.decrypt(sk, c),
            (ToyScheme::MicroLwe(s), ToySecretKey::MicroLwe(sk)) => s.decrypt(sk, c),
            _ => mismatch(),
        }
    }

    fn public_key_bytes(&self, pk: &ToyPublicKey) -> Vec<u8> {
        match (self, pk) {
            (ToyScheme::Synthetic(s), ToyPublicKey::Synthetic(pk)) => s.public_key_bytes(pk),
            (ToyScheme::MicroLwe(s), ToyPublicKey::MicroLwe(pk)) => s.public_key_bytes(pk),
            _ => mismatch(),
        }
    }
}

impl EnumerableKeys for ToyScheme {
    fn key_count(&self) -> Option<u64> {
        self.as_synthetic().and_then(|s| s.key_count())
    }

    fn keypair_at(&self, index: u64) -> Option<KeyPair<Self>> {
        let kp = self.as_synthetic()?.keypair_at(index)?;
        Some(KeyPair { pk: ToyPublicKey::Synthetic(kp.pk), sk: ToySecretKey::Synthetic(kp.sk) })
    }
}

impl FailureScore for ToyScheme {
    fn failure_score(&self, m: Message, r: Randomness) -> f64 {
        match self {
            ToyScheme::Synthetic(s) => s.failure_score(m, r),
            ToyScheme::MicroLwe(s) => s.failure_score(m, r),
        }
    }
}
