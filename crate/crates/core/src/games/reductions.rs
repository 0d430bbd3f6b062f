//! Reductions as adversary wrappers.
//!
//! Each wrapper runs an inner adversary against simulated oracles. Wrappers
//! that stop their inner adversary early do so by returning
//! [`Error::Halted`] from an oracle call and remembering that they did; an
//! inner adversary must propagate oracle errors for this to work.

use rand::{Rng, RngCore};

use crate::error::{Error, OracleKind, Result};
use crate::kem::{coin, FoKem};
use crate::oracle::{OracleState, PreimageList};
use crate::pke::{Ciphertext, DerandomizedPke, KemKey, Message, PkeScheme, Randomness};

use super::{
    sentinel_ciphertext, AdvRng, DecapsOracles, DecryptOracles, FcoOracle, FfpCcaAdversary, FfpCpaAdversary,
    FfpNgAdversary, FfpNkAdversary, GOracle, KemCcaAdversary, KemCpaAdversary, RandomOracles,
};

impl GOracle for OracleState {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        OracleState::g(self, m)
    }
}

fn charge(used: &mut u64, limit: u64, oracle: OracleKind) -> Result<()> {
    if *used >= limit {
        return Err(Error::BudgetExceeded { oracle, limit });
    }
    *used += 1;
    Ok(())
}

fn log_g<S: PkeScheme>(
    outer: &mut dyn GOracle,
    list: &mut PreimageList,
    scheme: &S,
    pk: &S::PublicKey,
    m: Message,
) -> Result<Randomness> {
    let r = outer.g(m)?;
    list.insert(m, scheme.encrypt(pk, m, r));
    Ok(r)
}

/// The IND-CPA adversary that runs an IND-CCA adversary with `oDecaps'`.
///
/// Each answered decapsulation costs one outer `H` query, so the outer game
/// needs an `H` budget of `q_H + q_D`.
pub struct SimulatedCpa<A> {
    pub inner: A,
    pub q_d: u64,
}

impl<A> SimulatedCpa<A> {
    pub fn new(inner: A, q_d: u64) -> Self {
        SimulatedCpa { inner, q_d }
    }
}

struct SimDecaps<'a, S: PkeScheme> {
    outer: &'a mut dyn RandomOracles,
    scheme: &'a S,
    pk: &'a S::PublicKey,
    list: PreimageList,
    challenge: &'a Ciphertext,
    used: u64,
    limit: u64,
}

impl<S: PkeScheme> GOracle for SimDecaps<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        log_g(self.outer, &mut self.list, self.scheme, self.pk, m)
    }
}

impl<S: PkeScheme> RandomOracles for SimDecaps<'_, S> {
    fn h(&mut self, m: Message) -> Result<KemKey> {
        self.outer.h(m)
    }
}

impl<S: PkeScheme> DecapsOracles for SimDecaps<'_, S> {
    fn decaps(&mut self, c: &Ciphertext) -> Result<Option<KemKey>> {
        if c == self.challenge {
            return Err(Error::ForbiddenQuery);
        }
        charge(&mut self.used, self.limit, OracleKind::Decaps)?;
        match self.list.preimage(c) {
            Some(m) => Ok(Some(self.outer.h(m)?)),
            None => Ok(None),
        }
    }
}

impl<S: PkeScheme, A: KemCcaAdversary<S>> KemCpaAdversary<S> for SimulatedCpa<A> {
    fn name(&self) -> String {
        format!("simulated({})", self.inner.name())
    }

    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn RandomOracles,
        rng: &mut AdvRng,
    ) -> Result<bool> {
        let mut handle = SimDecaps {
            outer: oracles,
            scheme: kem.scheme(),
            pk,
            list: PreimageList::new(),
            challenge,
            used: 0,
            limit: self.q_d,
        };
        self.inner.run(kem, pk, challenge, key, &mut handle, rng)
    }
}

/// The FFP-CCA adversary that runs an IND-CCA adversary with `oDecaps''`
/// and returns the first plaintext entering `L_FAIL`.
///
/// It plays the challenger itself: `m*` uniform, `c* = Enc(pk, m*; G(m*))`,
/// a uniform bit and a lazily sampled `H` of its own.
pub struct FailureExtractor<S, A> {
    pub inner: A,
    pub kem: FoKem<S>,
    pub q_d: u64,
}

impl<S, A> FailureExtractor<S, A> {
    pub fn new(inner: A, kem: FoKem<S>, q_d: u64) -> Self {
        FailureExtractor { inner, kem, q_d }
    }
}

struct ExtractDecaps<'a, S: PkeScheme> {
    outer: &'a mut dyn DecryptOracles,
    scheme: &'a S,
    pk: &'a S::PublicKey,
    list: PreimageList,
    h: OracleState,
    challenge: &'a Ciphertext,
    used: u64,
    limit: u64,
    found: Option<Message>,
}

impl<S: PkeScheme> GOracle for ExtractDecaps<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        let r = self.outer.g(m)?;
        self.list.insert(m, self.scheme.encrypt(self.pk, m, r));
        Ok(r)
    }
}

impl<S: PkeScheme> RandomOracles for ExtractDecaps<'_, S> {
    fn h(&mut self, m: Message) -> Result<KemKey> {
        self.h.h(m)
    }
}

impl<S: PkeScheme> DecapsOracles for ExtractDecaps<'_, S> {
    fn decaps(&mut self, c: &Ciphertext) -> Result<Option<KemKey>> {
        if c == self.challenge {
            return Err(Error::ForbiddenQuery);
        }
        charge(&mut self.used, self.limit, OracleKind::Decaps)?;
        let Some(m) = self.list.preimage(c) else {
            return Ok(None);
        };
        if self.outer.decrypt(c)? != Some(m) {
            self.found = Some(m);
            return Err(Error::Halted);
        }
        Ok(Some(self.h.h(m)?))
    }
}

impl<S: PkeScheme, A: KemCcaAdversary<S>> FfpCcaAdversary<S> for FailureExtractor<S, A> {
    fn name(&self) -> String {
        format!("extract({})", self.inner.name())
    }

    fn run(
        &mut self,
        dpke: &DerandomizedPke<S>,
        pk: &S::PublicKey,
        oracles: &mut dyn DecryptOracles,
        rng: &mut AdvRng,
    ) -> Result<Option<Message>> {
        let scheme = &dpke.base;
        let h = OracleState::new(
            rng.next_u64(),
            "extractor",
            scheme.message_space(),
            scheme.randomness_space(),
            self.kem.key_len_bits,
        );
        let m_star = Message(scheme.message_space().sample(rng));
        let challenge = scheme.encrypt_checked(pk, m_star, oracles.g(m_star)?)?;
        let bit = coin(rng);
        let random = self.kem.random_key(rng);
        let mut handle = ExtractDecaps {
            outer: oracles,
            scheme,
            pk,
            list: PreimageList::new(),
            h,
            challenge: &challenge,
            used: 0,
            limit: self.q_d,
            found: None,
        };
        let key = if bit { random } else { handle.h.h(m_star)? };
        match self.inner.run(&self.kem, pk, &challenge, &key, &mut handle, rng) {
            Ok(_) => Ok(None),
            Err(Error::Halted) if handle.found.is_some() => Ok(handle.found),
            Err(e) => Err(e),
        }
    }
}

/// The FFP-CPA adversary that runs an FFP-CCA adversary with `oDecrypt'`,
/// stops it at a uniformly chosen query `i` in `1..=q_D+1`, and returns
/// `L_G^{-1}(c_i)`, or the inner output when `i = q_D + 1`.
///
/// An inner adversary making fewer than `q_D` queries is treated as padded
/// with queries on [`sentinel_ciphertext`].
pub struct SampledQueryExtractor<B> {
    pub inner: B,
    pub q_d: u64,
}

impl<B> SampledQueryExtractor<B> {
    pub fn new(inner: B, q_d: u64) -> Self {
        SampledQueryExtractor { inner, q_d }
    }
}

struct SampledDecrypt<'a, S: PkeScheme> {
    outer: &'a mut dyn GOracle,
    scheme: &'a S,
    pk: &'a S::PublicKey,
    list: PreimageList,
    stop_at: u64,
    used: u64,
    limit: u64,
    captured: Option<Option<Message>>,
}

impl<S: PkeScheme> GOracle for SampledDecrypt<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        log_g(self.outer, &mut self.list, self.scheme, self.pk, m)
    }
}

impl<S: PkeScheme> DecryptOracles for SampledDecrypt<'_, S> {
    fn decrypt(&mut self, c: &Ciphertext) -> Result<Option<Message>> {
        charge(&mut self.used, self.limit, OracleKind::Decrypt)?;
        let answer = self.list.preimage(c);
        if self.used == self.stop_at {
            self.captured = Some(answer);
            return Err(Error::Halted);
        }
        Ok(answer)
    }
}

impl<S: PkeScheme, B: FfpCcaAdversary<S>> FfpCpaAdversary<S> for SampledQueryExtractor<B> {
    fn name(&self) -> String {
        format!("sampled({})", self.inner.name())
    }

    fn run(
        &mut self,
        dpke: &DerandomizedPke<S>,
        pk: &S::PublicKey,
        oracles: &mut dyn GOracle,
        rng: &mut AdvRng,
    ) -> Result<Option<Message>> {
        let stop_at = rng.gen_range(1..=self.q_d + 1);
        let mut handle = SampledDecrypt {
            outer: oracles,
            scheme: &dpke.base,
            pk,
            list: PreimageList::new(),
            stop_at,
            used: 0,
            limit: self.q_d,
            captured: None,
        };
        match self.inner.run(dpke, pk, &mut handle, rng) {
            Err(Error::Halted) if handle.captured.is_some() => Ok(handle.captured.unwrap()),
            Err(e) => Err(e),
            // the chosen query is a padding query
            Ok(_) if stop_at <= self.q_d => Ok(handle.list.preimage(&sentinel_ciphertext())),
            Ok(out) => Ok(out),
        }
    }
}

/// The FFP-NG adversary built from an FFP-CPA adversary: simulates `G` with
/// its own coins, runs the inner adversary on `pk0`, and answers with
/// `FCO_b(m, G(m))`.
pub struct NgFromFfpCpa<S, A> {
    pub inner: A,
    pub dpke: DerandomizedPke<S>,
}

impl<S, A> NgFromFfpCpa<S, A> {
    pub fn new(inner: A, dpke: DerandomizedPke<S>) -> Self {
        NgFromFfpCpa { inner, dpke }
    }
}

impl<S: PkeScheme, A: FfpCpaAdversary<S>> FfpNgAdversary<S> for NgFromFfpCpa<S, A> {
    fn name(&self) -> String {
        format!("ng-from({})", self.inner.name())
    }

    fn run(&mut self, scheme: &S, pk: &S::PublicKey, fco: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool> {
        let mut g = OracleState::new(
            rng.next_u64(),
            "ng-simulated",
            scheme.message_space(),
            scheme.randomness_space(),
            128,
        );
        match self.inner.run(&self.dpke, pk, &mut g, rng)? {
            Some(m) => {
                let r = g.g(m)?;
                fco.fco(m, r)
            }
            None => Ok(false),
        }
    }
}

/// The FFP-NK adversary built from an FFP-CPA adversary: generates its own
/// key pair and forwards the inner output.
pub struct NkFromFfpCpa<A> {
    pub inner: A,
}

impl<S: PkeScheme, A: FfpCpaAdversary<S>> FfpNkAdversary<S> for NkFromFfpCpa<A> {
    fn name(&self) -> String {
        format!("nk-from({})", self.inner.name())
    }

    fn run(&mut self, dpke: &DerandomizedPke<S>, oracles: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        let keys = dpke.base.keygen(rng);
        Ok(self.inner.run(dpke, &keys.pk, oracles, rng)?.unwrap_or(Message(0)))
    }
}
