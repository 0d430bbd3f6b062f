//! The FO KEM with explicit rejection, its implicit-rejection variant, and
//! the simulated decapsulation oracles used by the reductions.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{check_key_len, prf, OracleState, PreimageList, RandomFunctions};
use crate::pke::{Ciphertext, DerandomizedPke, KemKey, KeyPair, Message, PkeScheme};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    #[default]
    Explicit,
    Implicit,
}

pub const DEFAULT_KEY_LEN_BITS: u32 = 128;

#[derive(Clone, Debug)]
pub struct FoKem<S> {
    pub dpke: DerandomizedPke<S>,
    pub key_len_bits: u32,
    pub rejection: Rejection,
}

/// PKE key pair plus the implicit-rejection PRF secret.
pub struct KemKeyPair<S: PkeScheme> {
    pub keys: KeyPair<S>,
    pub prf_secret: [u8; 32],
}

impl<S: PkeScheme> Clone for KemKeyPair<S> {
    fn clone(&self) -> Self {
        KemKeyPair { keys: self.keys.clone(), prf_secret: self.prf_secret }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encapsulation {
    pub key: KemKey,
    pub ciphertext: Ciphertext,
    /// The sampled plaintext, kept for analysis.
    pub message: Message,
}

impl<S: PkeScheme> FoKem<S> {
    pub fn new(base: S) -> Self {
        FoKem {
            dpke: DerandomizedPke::new(base),
            key_len_bits: DEFAULT_KEY_LEN_BITS,
            rejection: Rejection::Explicit,
        }
    }

    pub fn with_rejection(mut self, rejection: Rejection) -> Self {
        self.rejection = rejection;
        self
    }

    pub fn with_key_len(mut self, bits: u32) -> Result<Self> {
        check_key_len(bits)?;
        self.key_len_bits = bits;
        Ok(self)
    }

    pub fn scheme(&self) -> &S {
        &self.dpke.base
    }

    pub fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> KemKeyPair<S> {
        let keys = self.dpke.base.keygen(rng);
        let mut prf_secret = [0u8; 32];
        rng.fill_bytes(&mut prf_secret);
        KemKeyPair { keys, prf_secret }
    }

    /// Fresh oracles for one game run.
    pub fn oracles(&self, seed: u64) -> OracleState {
        OracleState::for_scheme(&self.dpke, seed, self.key_len_bits)
    }

    pub fn encaps<R: RngCore + ?Sized>(
        &self,
        oracles: &mut dyn RandomFunctions,
        pk: &S::PublicKey,
        rng: &mut R,
    ) -> Result<Encapsulation> {
        let m = Message(self.dpke.base.message_space().sample(rng));
        self.encaps_message(oracles, pk, m)
    }

    /// Encapsulation with a chosen plaintext.
    pub fn encaps_message(&self, oracles: &mut dyn RandomFunctions, pk: &S::PublicKey, m: Message) -> Result<Encapsulation> {
        let ciphertext = self.dpke.encrypt(oracles, pk, m)?;
        let key = oracles.h(m)?;
        Ok(Encapsulation { key, ciphertext, message: m })
    }

    /// Decapsulation under the configured rejection mode.
    pub fn decaps(&self, oracles: &mut dyn RandomFunctions, sk: &KemKeyPair<S>, c: &Ciphertext) -> Result<Option<KemKey>> {
        match (self.decaps_explicit(oracles, sk, c)?, self.rejection) {
            (Some(k), _) => Ok(Some(k)),
            (None, Rejection::Explicit) => Ok(None),
            (None, Rejection::Implicit) => Ok(Some(prf(&sk.prf_secret, c, self.key_len_bits))),
        }
    }

    /// Decapsulation with explicit rejection regardless of the configured mode.
    pub fn decaps_explicit(&self, oracles: &mut dyn RandomFunctions, sk: &KemKeyPair<S>, c: &Ciphertext) -> Result<Option<KemKey>> {
        match self.dpke.decrypt(oracles, &sk.keys, c)? {
            Some(m) => Ok(Some(oracles.h(m)?)),
            None => Ok(None),
        }
    }

    /// A uniform key, as used for the random challenge key.
    pub fn random_key<R: RngCore + ?Sized>(&self, rng: &mut R) -> KemKey {
        let mut k = vec![0u8; (self.key_len_bits / 8) as usize];
        rng.fill_bytes(&mut k);
        KemKey(k)
    }
}

/// Events observed while comparing real and simulated decapsulation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecapsEventLog {
    /// `L_FAIL`, in insertion order without repeats.
    pub fail_list: Vec<Message>,
    /// Real oracle accepts, simulation rejects.
    pub guess_events: u64,
    /// Real and simulated answers differ.
    pub diff_events: u64,
}

impl DecapsEventLog {
    pub fn record<T: PartialEq>(&mut self, real: &Option<T>, simulated: &Option<T>) {
        if real != simulated {
            self.diff_events += 1;
        }
        if real.is_some() && simulated.is_none() {
            self.guess_events += 1;
        }
    }

    pub fn add_failure(&mut self, m: Message) {
        if !self.fail_list.contains(&m) {
            self.fail_list.push(m);
        }
    }

    pub fn merge(&mut self, other: &DecapsEventLog) {
        for m in &other.fail_list {
            self.add_failure(*m);
        }
        self.guess_events += other.guess_events;
        self.diff_events += other.diff_events;
    }
}

fn check_challenge(c: &Ciphertext, challenge: Option<&Ciphertext>) -> Result<()> {
    if challenge == Some(c) {
        Err(Error::ForbiddenQuery)
    } else {
        Ok(())
    }
}

/// `oDecaps'` over an explicit list: `H(L^{-1}(c))`, or reject.
pub fn simulate_decaps(
    list: &PreimageList,
    h: &mut dyn FnMut(Message) -> Result<KemKey>,
    c: &Ciphertext,
    challenge: Option<&Ciphertext>,
) -> Result<Option<KemKey>> {
    check_challenge(c, challenge)?;
    list.preimage(c).map(|m| h(m)).transpose()
}

/// `oDecaps'` on the oracle's own `L_G`. Uses no secret key.
pub fn sim_decaps_prime(state: &mut OracleState, c: &Ciphertext, challenge: Option<&Ciphertext>) -> Result<Option<KemKey>> {
    check_challenge(c, challenge)?;
    match state.list_preimage(c) {
        Some(m) => Ok(Some(state.h(m)?)),
        None => Ok(None),
    }
}

/// `oDecaps''`: answers like `oDecaps'` and adds `m = L^{-1}(c)` to `L_FAIL`
/// when `m` exists and differs from `oDecrypt(c)`.
pub fn sim_decaps_double_prime(
    state: &mut OracleState,
    c: &Ciphertext,
    challenge: Option<&Ciphertext>,
    decrypt_oracle: &mut dyn FnMut(&mut OracleState, &Ciphertext) -> Result<Option<Message>>,
    log: &mut DecapsEventLog,
) -> Result<Option<KemKey>> {
    check_challenge(c, challenge)?;
    let Some(m) = state.list_preimage(c) else {
        return Ok(None);
    };
    if decrypt_oracle(state, c)? != Some(m) {
        log.add_failure(m);
    }
    Ok(Some(state.h(m)?))
}

/// `oDecrypt'`: `L^{-1}(c)`.
pub fn sim_decrypt_prime(state: &OracleState, c: &Ciphertext) -> Option<Message> {
    state.list_preimage(c)
}

/// Uniform bit helper shared by games.
pub(crate) fn coin<R: RngCore + ?Sized>(rng: &mut R) -> bool {
    rng.gen()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::{FailurePredicate, SyntheticFailurePke};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn kem(f: FailurePredicate) -> FoKem<SyntheticFailurePke> {
        FoKem::new(SyntheticFailurePke::new(4, 8, 16, f).unwrap())
    }

    #[test]
    fn test_roundtrip_on_correct_scheme() {
        let kem = kem(FailurePredicate::Never);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = kem.keygen(&mut rng);
        let mut st = kem.oracles(9);
        for _ in 0..200 {
            let e = kem.encaps(&mut st, &sk.keys.pk, &mut rng).unwrap();
            assert_eq!(kem.decaps(&mut st, &sk, &e.ciphertext).unwrap(), Some(e.key.clone()));
            assert_eq!(e.key, st.h(e.message).unwrap());
        }
    }

    #[test]
    fn test_implicit_rejection_is_stable() {
        let kem = kem(FailurePredicate::Never).with_rejection(Rejection::Implicit);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let sk = kem.keygen(&mut rng);
        let mut st = kem.oracles(3);
        // find a ciphertext that fails the re-encryption check
        let bad = (0..=255u8)
            .map(|r| Ciphertext(vec![0, 0, r]))
            .find(|c| kem.decaps_explicit(&mut st, &sk, c).unwrap().is_none())
            .unwrap();
        let k1 = kem.decaps(&mut st, &sk, &bad).unwrap().unwrap();
        let k2 = kem.decaps(&mut st, &sk, &bad).unwrap().unwrap();
        assert_eq!(k1, k2);
        assert_eq!(k1.0.len(), 16);
    }

    #[test]
    fn test_sim_prime_matches_real_after_g_query() {
        let kem = kem(FailurePredicate::Never);
        let sk = kem.keygen(&mut ChaCha20Rng::seed_from_u64(4));
        let mut st = kem.oracles(5);
        let pk = &sk.keys.pk;
        let m = Message(6);
        st.g_logged(kem.scheme(), pk, m).unwrap();
        let c = kem.encaps_message(&mut st, pk, m).unwrap().ciphertext;
        let sim = sim_decaps_prime(&mut st, &c, None).unwrap();
        assert_eq!(sim, kem.decaps(&mut st, &sk, &c).unwrap());
        assert!(matches!(sim_decaps_prime(&mut st, &c, Some(&c)), Err(Error::ForbiddenQuery)));
        assert_eq!(sim_decrypt_prime(&st, &c), Some(m));
        let other = Ciphertext(vec![1, 2, 3]);
        assert_eq!(sim_decaps_prime(&mut st, &other, None).unwrap(), None);
        assert_eq!(sim_decrypt_prime(&st, &other), None);
    }

    #[test]
    fn test_double_prime_records_failing_message() {
        // r < 128 always fails: find an m with G(m) < 128
        let kem = kem(FailurePredicate::randomness_below(128));
        let sk = kem.keygen(&mut ChaCha20Rng::seed_from_u64(6));
        let mut st = kem.oracles(7);
        let pk = sk.keys.pk;
        let m = (0..16).map(Message).find(|&m| st.g(m).unwrap().0 < 128).unwrap();
        st.g_logged(kem.scheme(), &pk, m).unwrap();
        let c = kem.dpke.encrypt(&mut st, &pk, m).unwrap();
        let mut log = DecapsEventLog::default();
        let dpke = kem.dpke.clone();
        let keys = sk.keys;
        let mut odec = |s: &mut OracleState, c: &Ciphertext| dpke.decrypt(s, &keys, c);
        let sim = sim_decaps_double_prime(&mut st, &c, None, &mut odec, &mut log).unwrap();
        assert_eq!(sim, Some(st.h(m).unwrap()));
        assert_eq!(log.fail_list, vec![m]);
        assert_ne!(kem.dpke.decrypt(&mut st, &keys, &c).unwrap(), Some(m));
        // no logged preimage: reject, list unchanged
        let none = sim_decaps_double_prime(&mut st, &Ciphertext(vec![9]), None, &mut odec, &mut log).unwrap();
        assert_eq!(none, None);
        assert_eq!(log.fail_list.len(), 1);
    }

    #[test]
    fn test_event_log_classification() {
        let mut log = DecapsEventLog::default();
        log.record(&Some(1), &Some(1));
        log.record(&Some(1), &None);
        log.record(&None, &Some(2));
        log.record(&Some(1), &Some(2));
        assert_eq!((log.diff_events, log.guess_events), (3, 1));
    }
}
