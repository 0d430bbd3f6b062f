//! Built-in adversaries, selectable by name.
//!
//! Reduction wrappers compose by prefix: `simulated:honest-decaps` is the
//! IND-CPA adversary built from `honest-decaps`, `extract:plant-failure` the
//! FFP-CCA adversary built from it, and so on.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kem::{coin, FoKem, Rejection};
use crate::pke::{Ciphertext, DerandomizedPke, FailureScore, Message, PkeScheme, Randomness};
use crate::toy::{ToyPublicKey, ToyScheme};

use super::*;

/// Cap on `(m, r)` pairs an exhaustive PKE adversary tries before guessing.
pub const PAIR_SEARCH_LIMIT: u64 = 1 << 20;

/// Message indices `0..min(|M|, cap)`.
fn first_messages<S: PkeScheme>(scheme: &S, cap: u64) -> impl Iterator<Item = Message> {
    let n = scheme.message_space().size().min(cap);
    (0..n).map(Message)
}

/// `q` distinct uniform messages, or all of them when `q >= |M|`.
fn distinct_messages<S: PkeScheme>(scheme: &S, q: u64, rng: &mut AdvRng) -> Vec<Message> {
    let space = scheme.message_space();
    if q >= space.size() {
        return space.iter().map(Message).collect();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(q as usize);
    while (out.len() as u64) < q {
        let m = space.sample(rng);
        if seen.insert(m) {
            out.push(Message(m));
        }
    }
    out
}

/// Queries `G` on each message and returns the highest-scoring one; ties go
/// to the earliest.
fn argmax_score<S: FailureScore>(
    scheme: &S,
    msgs: &[Message],
    oracles: &mut dyn GOracle,
) -> Result<Option<(Message, Randomness, f64)>> {
    let mut best: Option<(Message, Randomness, f64)> = None;
    for &m in msgs {
        let r = oracles.g(m)?;
        let s = scheme.failure_score(m, r);
        if best.map_or(true, |(_, _, b)| s > b) {
            best = Some((m, r, s));
        }
    }
    Ok(best)
}

/// Outputs a fixed bit, or a fair coin when `bit` is `None`.
#[derive(Clone, Debug)]
pub struct Blind {
    pub bit: Option<bool>,
}

impl Blind {
    fn label(&self) -> String {
        match self.bit {
            None => "blind".into(),
            Some(b) => format!("blind-{}", b as u8),
        }
    }

    fn pick(&self, rng: &mut AdvRng) -> bool {
        self.bit.unwrap_or_else(|| coin(rng))
    }
}

/// Finds `m*` by re-encrypting every message and compares `K*` with `H(m*)`.
/// Without a match it flips a coin.
fn kem_exhaustive<S: PkeScheme, O: RandomOracles + ?Sized>(
    kem: &FoKem<S>,
    pk: &S::PublicKey,
    challenge: &Ciphertext,
    key: &KemKey,
    oracles: &mut O,
    rng: &mut AdvRng,
) -> Result<bool> {
    for m in kem.scheme().message_space().iter().map(Message) {
        let r = oracles.g(m)?;
        if kem.scheme().encrypt(pk, m, r) == *challenge {
            return Ok(*key != oracles.h(m)?);
        }
    }
    Ok(coin(rng))
}

/// Queries `G` until the budget runs out; every run aborts.
fn flood<O: GOracle + ?Sized>(oracles: &mut O, rng: &mut AdvRng) -> Result<()> {
    loop {
        oracles.g(Message(rng.gen_range(0..2)))?;
    }
}

#[derive(Clone, Debug)]
pub struct Exhaustive;

#[derive(Clone, Debug)]
pub struct GFlood;

/// Makes `q_D` decapsulation queries on honest encryptions of fresh
/// messages, then plays [`Exhaustive`]. It never exploits failures.
#[derive(Clone, Debug)]
pub struct HonestDecaps {
    pub q_d: u64,
}

/// Makes `q_D` decapsulation queries on encryptions under uniform randomness,
/// without ever querying `G`; any valid answer is a GUESS event.
#[derive(Clone, Debug)]
pub struct RandomCiphertext {
    pub q_d: u64,
}

/// Queries `G` on every message, then decapsulates the ciphertexts of the
/// highest-scoring messages, hoping one of them fails.
#[derive(Clone, Debug)]
pub struct PlantFailure {
    pub q_d: u64,
}

impl<S: PkeScheme> KemCcaAdversary<S> for Blind {
    fn name(&self) -> String {
        self.label()
    }

    fn run(&mut self, _: &FoKem<S>, _: &S::PublicKey, _: &Ciphertext, _: &KemKey, _: &mut dyn DecapsOracles, rng: &mut AdvRng) -> Result<bool> {
        Ok(self.pick(rng))
    }
}

impl<S: PkeScheme> KemCpaAdversary<S> for Blind {
    fn name(&self) -> String {
        self.label()
    }

    fn run(&mut self, _: &FoKem<S>, _: &S::PublicKey, _: &Ciphertext, _: &KemKey, _: &mut dyn RandomOracles, rng: &mut AdvRng) -> Result<bool> {
        Ok(self.pick(rng))
    }
}

impl<S: PkeScheme> KemCcaAdversary<S> for Exhaustive {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn DecapsOracles,
        rng: &mut AdvRng,
    ) -> Result<bool> {
        kem_exhaustive(kem, pk, challenge, key, oracles, rng)
    }
}

impl<S: PkeScheme> KemCpaAdversary<S> for Exhaustive {
    fn name(&self) -> String {
        "exhaustive".into()
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
        kem_exhaustive(kem, pk, challenge, key, oracles, rng)
    }
}

impl<S: PkeScheme> KemCcaAdversary<S> for GFlood {
    fn name(&self) -> String {
        "g-flood".into()
    }

    fn run(&mut self, _: &FoKem<S>, _: &S::PublicKey, _: &Ciphertext, _: &KemKey, o: &mut dyn DecapsOracles, rng: &mut AdvRng) -> Result<bool> {
        flood(o, rng).map(|_| false)
    }
}

impl<S: PkeScheme> KemCpaAdversary<S> for GFlood {
    fn name(&self) -> String {
        "g-flood".into()
    }

    fn run(&mut self, _: &FoKem<S>, _: &S::PublicKey, _: &Ciphertext, _: &KemKey, o: &mut dyn RandomOracles, rng: &mut AdvRng) -> Result<bool> {
        flood(o, rng).map(|_| false)
    }
}

impl<S: PkeScheme> KemCcaAdversary<S> for HonestDecaps {
    fn name(&self) -> String {
        "honest-decaps".into()
    }

    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn DecapsOracles,
        rng: &mut AdvRng,
    ) -> Result<bool> {
        let space = kem.scheme().message_space();
        for _ in 0..self.q_d {
            let m = Message(space.sample(rng));
            let c = kem.scheme().encrypt(pk, m, oracles.g(m)?);
            if c != *challenge {
                oracles.decaps(&c)?;
            }
        }
        kem_exhaustive(kem, pk, challenge, key, oracles, rng)
    }
}

impl<S: PkeScheme> KemCcaAdversary<S> for RandomCiphertext {
    fn name(&self) -> String {
        "random-ciphertext".into()
    }

    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        _: &KemKey,
        oracles: &mut dyn DecapsOracles,
        rng: &mut AdvRng,
    ) -> Result<bool> {
        let scheme = kem.scheme();
        for _ in 0..self.q_d {
            let m = Message(scheme.message_space().sample(rng));
            let r = Randomness(scheme.randomness_space().sample(rng));
            let c = scheme.encrypt(pk, m, r);
            if c != *challenge {
                oracles.decaps(&c)?;
            }
        }
        Ok(coin(rng))
    }
}

impl<S: FailureScore> KemCcaAdversary<S> for PlantFailure {
    fn name(&self) -> String {
        "plant-failure".into()
    }

    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn DecapsOracles,
        rng: &mut AdvRng,
    ) -> Result<bool> {
        let scheme = kem.scheme();
        let mut scored = Vec::new();
        let mut found = None;
        for m in scheme.message_space().iter().map(Message) {
            let r = oracles.g(m)?;
            let c = scheme.encrypt(pk, m, r);
            if c == *challenge {
                found = Some(m);
            } else {
                scored.push((scheme.failure_score(m, r), c));
            }
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (score, c) in scored.iter().take(self.q_d as usize) {
            if *score > 0.0 {
                oracles.decaps(c)?;
            }
        }
        match found {
            Some(m) => Ok(*key != oracles.h(m)?),
            None => Ok(coin(rng)),
        }
    }
}

impl<S: PkeScheme> OwCpaAdversary<S> for Blind {
    fn name(&self) -> String {
        "blind".into()
    }

    fn run(&mut self, scheme: &S, _: &S::PublicKey, _: &Ciphertext, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        Ok(Message(scheme.message_space().sample(rng)))
    }
}

impl<S: PkeScheme> OwCpaAdversary<S> for Exhaustive {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    /// Tries every `(m, r)` in index order, up to [`PAIR_SEARCH_LIMIT`].
    fn run(&mut self, scheme: &S, pk: &S::PublicKey, c: &Ciphertext, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        let rs = scheme.randomness_space().size();
        let mut tried = 0u64;
        for m in scheme.message_space().iter().map(Message) {
            for r in 0..rs {
                if tried >= PAIR_SEARCH_LIMIT {
                    return Ok(Message(scheme.message_space().sample(rng)));
                }
                tried += 1;
                if scheme.encrypt(pk, m, Randomness(r)) == *c {
                    return Ok(m);
                }
            }
        }
        Ok(Message(scheme.message_space().sample(rng)))
    }
}

impl<S: PkeScheme> OwCpaAdversary<S> for GFlood {
    fn name(&self) -> String {
        "g-flood".into()
    }

    fn run(&mut self, _: &S, _: &S::PublicKey, _: &Ciphertext, o: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        flood(o, rng).map(|_| Message(0))
    }
}

impl<S: PkeScheme> PkeCpaAdversary<S> for Blind {
    fn name(&self) -> String {
        "blind".into()
    }

    fn choose(&mut self, _: &S, _: &S::PublicKey, _: &mut dyn GOracle, _: &mut AdvRng) -> Result<(Message, Message)> {
        Ok((Message(0), Message(1)))
    }

    fn guess(&mut self, _: &S, _: &S::PublicKey, _: &Ciphertext, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<bool> {
        Ok(coin(rng))
    }
}

impl<S: PkeScheme> PkeCpaAdversary<S> for Exhaustive {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    fn choose(&mut self, _: &S, _: &S::PublicKey, _: &mut dyn GOracle, _: &mut AdvRng) -> Result<(Message, Message)> {
        Ok((Message(0), Message(1)))
    }

    /// Looks for randomness encrypting the second message to `c`.
    fn guess(&mut self, scheme: &S, pk: &S::PublicKey, c: &Ciphertext, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<bool> {
        let rs = scheme.randomness_space().size();
        if rs > PAIR_SEARCH_LIMIT {
            return Ok(coin(rng));
        }
        Ok((0..rs).any(|r| scheme.encrypt(pk, Message(1), Randomness(r)) == *c))
    }
}

impl<S: PkeScheme> PkeCpaAdversary<S> for GFlood {
    fn name(&self) -> String {
        "g-flood".into()
    }

    fn choose(&mut self, _: &S, _: &S::PublicKey, o: &mut dyn GOracle, rng: &mut AdvRng) -> Result<(Message, Message)> {
        flood(o, rng).map(|_| (Message(0), Message(1)))
    }

    fn guess(&mut self, _: &S, _: &S::PublicKey, _: &Ciphertext, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<bool> {
        Ok(coin(rng))
    }
}

/// Gives up without output.
#[derive(Clone, Debug)]
pub struct Never;

/// Outputs a uniform message without querying anything.
#[derive(Clone, Debug)]
pub struct Uniform;

/// Queries `G` on `q` distinct uniform messages and outputs the one whose
/// `(m, G(m))` has the highest public failure score.
#[derive(Clone, Debug)]
pub struct BestOfQ {
    pub q: u64,
}

/// [`BestOfQ`] over the whole message space.
#[derive(Clone, Debug)]
pub struct BruteForce;

/// Ranks all messages by failure score, then asks the decryption oracle about
/// the top `q_D` ciphertexts. Returns the first one seen to fail, else the
/// top-ranked message.
#[derive(Clone, Debug)]
pub struct DecryptProbe {
    pub q_d: u64,
}

/// Always outputs message 0.
#[derive(Clone, Debug)]
pub struct First;

impl<S: PkeScheme> FfpCpaAdversary<S> for Never {
    fn name(&self) -> String {
        "never".into()
    }

    fn run(&mut self, _: &DerandomizedPke<S>, _: &S::PublicKey, _: &mut dyn GOracle, _: &mut AdvRng) -> Result<Option<Message>> {
        Ok(None)
    }
}

impl<S: PkeScheme> FfpCcaAdversary<S> for Never {
    fn name(&self) -> String {
        "never".into()
    }

    fn run(&mut self, _: &DerandomizedPke<S>, _: &S::PublicKey, _: &mut dyn DecryptOracles, _: &mut AdvRng) -> Result<Option<Message>> {
        Ok(None)
    }
}

impl<S: PkeScheme> FfpCpaAdversary<S> for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, _: &S::PublicKey, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Option<Message>> {
        Ok(Some(Message(d.base.message_space().sample(rng))))
    }
}

impl<S: PkeScheme> FfpCcaAdversary<S> for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, _: &S::PublicKey, _: &mut dyn DecryptOracles, rng: &mut AdvRng) -> Result<Option<Message>> {
        Ok(Some(Message(d.base.message_space().sample(rng))))
    }
}

impl<S: PkeScheme> FfpNkAdversary<S> for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, _: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        Ok(Message(d.base.message_space().sample(rng)))
    }
}

impl<S: FailureScore> FfpCpaAdversary<S> for BestOfQ {
    fn name(&self) -> String {
        "best-of-q".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, _: &S::PublicKey, o: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Option<Message>> {
        let msgs = distinct_messages(&d.base, self.q, rng);
        Ok(argmax_score(&d.base, &msgs, o)?.map(|(m, _, _)| m))
    }
}

impl<S: FailureScore> FfpNkAdversary<S> for BestOfQ {
    fn name(&self) -> String {
        "best-of-q".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, o: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message> {
        let msgs = distinct_messages(&d.base, self.q, rng);
        match argmax_score(&d.base, &msgs, o)? {
            Some((m, _, _)) => Ok(m),
            None => Ok(Message(d.base.message_space().sample(rng))),
        }
    }
}

impl<S: FailureScore> FfpCpaAdversary<S> for BruteForce {
    fn name(&self) -> String {
        "brute-force".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, _: &S::PublicKey, o: &mut dyn GOracle, _: &mut AdvRng) -> Result<Option<Message>> {
        let msgs: Vec<_> = first_messages(&d.base, u64::MAX).collect();
        Ok(argmax_score(&d.base, &msgs, o)?.map(|(m, _, _)| m))
    }
}

impl<S: FailureScore> FfpCcaAdversary<S> for DecryptProbe {
    fn name(&self) -> String {
        "decrypt-probe".into()
    }

    fn run(&mut self, d: &DerandomizedPke<S>, pk: &S::PublicKey, o: &mut dyn DecryptOracles, _: &mut AdvRng) -> Result<Option<Message>> {
        let mut scored = Vec::new();
        for m in d.base.message_space().iter().map(Message) {
            let r = o.g(m)?;
            scored.push((d.base.failure_score(m, r), m, r));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        for &(_, m, r) in scored.iter().take(self.q_d as usize) {
            let c = d.base.encrypt(pk, m, r);
            if o.decrypt(&c)? != Some(m) {
                return Ok(Some(m));
            }
        }
        Ok(scored.first().map(|&(_, m, _)| m))
    }
}

impl<S: PkeScheme> FfpNkAdversary<S> for First {
    fn name(&self) -> String {
        "first".into()
    }

    fn run(&mut self, _: &DerandomizedPke<S>, _: &mut dyn GOracle, _: &mut AdvRng) -> Result<Message> {
        Ok(Message(0))
    }
}

/// Flips a coin and never queries the failure-checking oracle.
#[derive(Clone, Debug)]
pub struct Ignore;

/// Queries one uniform `(m, r)` and outputs the oracle's answer as `b'`.
#[derive(Clone, Debug)]
pub struct Probe;

/// Against a synthetic scheme with a parity-leaking public key and a
/// parity-match failure predicate: picks `r` whose parity equals the leaked
/// key parity inside the failure window, so `(m, r)` fails for sure under its
/// own key. Outputs `b' = 0` iff the oracle reports a failure.
#[derive(Clone, Debug)]
pub struct ParityLeak;

impl<S: PkeScheme> FfpNgAdversary<S> for Ignore {
    fn name(&self) -> String {
        "ignore".into()
    }

    fn run(&mut self, _: &S, _: &S::PublicKey, _: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool> {
        Ok(coin(rng))
    }
}

impl<S: PkeScheme> FfpNgAdversary<S> for Probe {
    fn name(&self) -> String {
        "probe".into()
    }

    fn run(&mut self, scheme: &S, _: &S::PublicKey, fco: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool> {
        let m = Message(scheme.message_space().sample(rng));
        let r = Randomness(scheme.randomness_space().sample(rng));
        fco.fco(m, r)
    }
}

impl FfpNgAdversary<ToyScheme> for ParityLeak {
    fn name(&self) -> String {
        "parity-leak".into()
    }

    fn run(&mut self, scheme: &ToyScheme, pk: &ToyPublicKey, fco: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool> {
        let unsupported = || Error::Domain("parity-leak needs a parity-leaking synthetic scheme".into());
        let s = scheme.as_synthetic().ok_or_else(unsupported)?;
        let ToyPublicKey::Synthetic(pk) = pk else { return Err(unsupported()) };
        let parity = pk.hint.ok_or_else(unsupported)? & 1;
        let rs = s.randomness_space().size();
        // r = 2j + parity with r < |R|, and j < window when failures sit in a window
        let mut slots = (rs - parity).div_ceil(2);
        if let crate::toy::FailurePredicate::ParityMatch { window } = s.failure {
            slots = slots.min(window);
        }
        if slots == 0 {
            return Err(Error::Domain("failure window is empty".into()));
        }
        let r = 2 * rng.gen_range(0..slots) + parity;
        let m = Message(s.message_space().sample(rng));
        Ok(!fco.fco(m, Randomness(r))?)
    }
}

/// Everything needed to instantiate a named adversary and its game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub game: GameKind,
    pub adversary: String,
    #[serde(default)]
    pub limits: QueryLimits,
    #[serde(default)]
    pub rejection: Rejection,
}

/// Adversary names accepted for each game, reduction prefixes excluded.
pub fn adversary_names(game: GameKind) -> &'static [&'static str] {
    match game {
        GameKind::IndCcaKem => &[
            "blind",
            "blind-0",
            "blind-1",
            "exhaustive",
            "honest-decaps",
            "random-ciphertext",
            "plant-failure",
            "g-flood",
        ],
        GameKind::IndCpaKem => &["blind", "blind-0", "blind-1", "exhaustive", "g-flood"],
        GameKind::OwCpaPke | GameKind::IndCpaPke => &["blind", "exhaustive", "g-flood"],
        GameKind::FfpCpa => &["never", "uniform", "best-of-q", "brute-force"],
        GameKind::FfpCca => &["never", "uniform", "decrypt-probe"],
        GameKind::FfpNk => &["uniform", "best-of-q", "first"],
        GameKind::FfpNg => &["ignore", "probe", "parity-leak"],
    }
}

/// Reduction prefixes accepted for each game, with the game of the inner
/// adversary.
pub fn reduction_prefixes(game: GameKind) -> &'static [(&'static str, GameKind)] {
    match game {
        GameKind::IndCpaKem => &[("simulated", GameKind::IndCcaKem)],
        GameKind::FfpCca => &[("extract", GameKind::IndCcaKem)],
        GameKind::FfpCpa => &[("sampled", GameKind::FfpCca)],
        GameKind::FfpNk => &[("nk-from", GameKind::FfpCpa)],
        GameKind::FfpNg => &[("ng-from", GameKind::FfpCpa)],
        _ => &[],
    }
}

type Toy = ToyScheme;

fn unknown(name: &str, game: GameKind) -> Error {
    Error::UnknownAdversary { name: name.to_string(), game: game.to_string() }
}

fn blind(name: &str) -> Option<Blind> {
    match name {
        "blind" => Some(Blind { bit: None }),
        "blind-0" => Some(Blind { bit: Some(false) }),
        "blind-1" => Some(Blind { bit: Some(true) }),
        _ => None,
    }
}

fn split_prefix(name: &str) -> Option<(&str, &str)> {
    name.split_once(':')
}

pub fn ind_cca_adversary(name: &str, limits: &QueryLimits) -> Result<Box<dyn KemCcaAdversary<Toy>>> {
    if let Some(b) = blind(name) {
        return Ok(Box::new(b));
    }
    let q_d = limits.q_d;
    Ok(match name {
        "exhaustive" => Box::new(Exhaustive),
        "honest-decaps" => Box::new(HonestDecaps { q_d }),
        "random-ciphertext" => Box::new(RandomCiphertext { q_d }),
        "plant-failure" => Box::new(PlantFailure { q_d }),
        "g-flood" => Box::new(GFlood),
        _ => return Err(unknown(name, GameKind::IndCcaKem)),
    })
}

pub fn ind_cpa_kem_adversary(name: &str, limits: &QueryLimits) -> Result<Box<dyn KemCpaAdversary<Toy>>> {
    if let Some(b) = blind(name) {
        return Ok(Box::new(b));
    }
    Ok(match (name, split_prefix(name)) {
        ("exhaustive", _) => Box::new(Exhaustive),
        ("g-flood", _) => Box::new(GFlood),
        (_, Some(("simulated", inner))) => Box::new(SimulatedCpa::new(ind_cca_adversary(inner, limits)?, limits.q_d)),
        _ => return Err(unknown(name, GameKind::IndCpaKem)),
    })
}

pub fn ow_cpa_adversary(name: &str) -> Result<Box<dyn OwCpaAdversary<Toy>>> {
    Ok(match name {
        "blind" => Box::new(Blind { bit: None }),
        "exhaustive" => Box::new(Exhaustive),
        "g-flood" => Box::new(GFlood),
        _ => return Err(unknown(name, GameKind::OwCpaPke)),
    })
}

pub fn ind_cpa_pke_adversary(name: &str) -> Result<Box<dyn PkeCpaAdversary<Toy>>> {
    Ok(match name {
        "blind" => Box::new(Blind { bit: None }),
        "exhaustive" => Box::new(Exhaustive),
        "g-flood" => Box::new(GFlood),
        _ => return Err(unknown(name, GameKind::IndCpaPke)),
    })
}

pub fn ffp_cpa_adversary(name: &str, limits: &QueryLimits) -> Result<Box<dyn FfpCpaAdversary<Toy>>> {
    Ok(match (name, split_prefix(name)) {
        ("never", _) => Box::new(Never),
        ("uniform", _) => Box::new(Uniform),
        ("best-of-q", _) => Box::new(BestOfQ { q: limits.q_g }),
        ("brute-force", _) => Box::new(BruteForce),
        (_, Some(("sampled", inner))) => {
            Box::new(SampledQueryExtractor::new(ffp_cca_adversary(inner, limits, Rejection::Explicit)?, limits.q_d))
        }
        _ => return Err(unknown(name, GameKind::FfpCpa)),
    })
}

/// FFP-CCA adversaries; `extract:` wrappers simulate a KEM with `rejection`.
pub fn ffp_cca_adversary(name: &str, limits: &QueryLimits, rejection: Rejection) -> Result<Box<dyn FfpCcaAdversary<Toy>>> {
    Ok(match (name, split_prefix(name)) {
        ("never", _) => Box::new(Never),
        ("uniform", _) => Box::new(Uniform),
        ("decrypt-probe", _) => Box::new(DecryptProbe { q_d: limits.q_d }),
        (_, Some(("extract", inner))) => Box::new(ExtractorFor { inner: inner.to_string(), limits: *limits, rejection }),
        _ => return Err(unknown(name, GameKind::FfpCca)),
    })
}

/// Defers building the KEM until the scheme is known.
struct ExtractorFor {
    inner: String,
    limits: QueryLimits,
    rejection: Rejection,
}

impl FfpCcaAdversary<Toy> for ExtractorFor {
    fn name(&self) -> String {
        format!("extract({})", self.inner)
    }

    fn run(&mut self, dpke: &DerandomizedPke<Toy>, pk: &ToyPublicKey, o: &mut dyn DecryptOracles, rng: &mut AdvRng) -> Result<Option<Message>> {
        let kem = FoKem::new(dpke.base.clone()).with_rejection(self.rejection);
        let inner = ind_cca_adversary(&self.inner, &self.limits)?;
        FailureExtractor::new(inner, kem, self.limits.q_d).run(dpke, pk, o, rng)
    }
}

pub fn ffp_nk_adversary(name: &str, limits: &QueryLimits) -> Result<Box<dyn FfpNkAdversary<Toy>>> {
    Ok(match (name, split_prefix(name)) {
        ("uniform", _) => Box::new(Uniform),
        ("best-of-q", _) => Box::new(BestOfQ { q: limits.q_g }),
        ("first", _) => Box::new(First),
        (_, Some(("nk-from", inner))) => Box::new(NkFromFfpCpa { inner: ffp_cpa_adversary(inner, limits)? }),
        _ => return Err(unknown(name, GameKind::FfpNk)),
    })
}

pub fn ffp_ng_adversary(name: &str, scheme: &Toy, limits: &QueryLimits) -> Result<Box<dyn FfpNgAdversary<Toy>>> {
    Ok(match (name, split_prefix(name)) {
        ("ignore", _) => Box::new(Ignore),
        ("probe", _) => Box::new(Probe),
        ("parity-leak", _) => Box::new(ParityLeak),
        (_, Some(("ng-from", inner))) => {
            Box::new(NgFromFfpCpa::new(ffp_cpa_adversary(inner, limits)?, DerandomizedPke::new(scheme.clone())))
        }
        _ => return Err(unknown(name, GameKind::FfpNg)),
    })
}

/// Checks that `spec` names a known adversary without running anything.
pub fn validate_spec(spec: &GameSpec, scheme: &Toy) -> Result<()> {
    let l = &spec.limits;
    let name = spec.adversary.as_str();
    let kem_inner = match (spec.game, split_prefix(name)) {
        (GameKind::IndCcaKem, None) => Some(name),
        (GameKind::IndCpaKem, None) => Some(name),
        (GameKind::IndCpaKem, Some(("simulated", inner))) | (GameKind::FfpCca, Some(("extract", inner))) => Some(inner),
        _ => None,
    };
    if let Some(inner) = kem_inner {
        // these adversaries enumerate the message space through G
        let m = scheme.message_space().size();
        let need = match inner {
            "exhaustive" | "plant-failure" => m,
            "honest-decaps" => m.saturating_add(l.q_d),
            _ => 0,
        };
        if l.q_g < need {
            return Err(Error::InvalidParameter(format!("{name} needs q_g >= {need}, got {}", l.q_g)));
        }
    }
    match spec.game {
        GameKind::IndCcaKem => ind_cca_adversary(name, l).map(|_| ()),
        GameKind::IndCpaKem => ind_cpa_kem_adversary(name, l).map(|_| ()),
        GameKind::OwCpaPke => ow_cpa_adversary(name).map(|_| ()),
        GameKind::IndCpaPke => ind_cpa_pke_adversary(name).map(|_| ()),
        GameKind::FfpCpa => ffp_cpa_adversary(name, l).map(|_| ()),
        GameKind::FfpCca => match split_prefix(name) {
            Some(("extract", inner)) => ind_cca_adversary(inner, l).map(|_| ()),
            _ => ffp_cca_adversary(name, l, spec.rejection).map(|_| ()),
        },
        GameKind::FfpNk => ffp_nk_adversary(name, l).map(|_| ()),
        GameKind::FfpNg => ffp_ng_adversary(name, scheme, l).map(|_| ()),
    }
}

/// Runs one game with a freshly built adversary.
pub fn run_spec(spec: &GameSpec, scheme: &Toy, seed: u64) -> Result<GameOutcome> {
    let l = spec.limits;
    let name = spec.adversary.as_str();
    let kem = || FoKem::new(scheme.clone()).with_rejection(spec.rejection);
    let dpke = || DerandomizedPke::new(scheme.clone());
    match spec.game {
        GameKind::IndCcaKem => run_ind_cca_kem(&kem(), ind_cca_adversary(name, &l)?.as_mut(), l, seed),
        GameKind::IndCpaKem => {
            // simulated decapsulation spends outer H queries
            let outer = QueryLimits { q_h: l.q_h.saturating_add(l.q_d), ..l };
            run_ind_cpa_kem(&kem(), ind_cpa_kem_adversary(name, &l)?.as_mut(), outer, seed)
        }
        GameKind::OwCpaPke => run_ow_cpa_pke(scheme, ow_cpa_adversary(name)?.as_mut(), l, seed),
        GameKind::IndCpaPke => run_ind_cpa_pke(scheme, ind_cpa_pke_adversary(name)?.as_mut(), l, seed),
        GameKind::FfpCpa => run_ffp_cpa(&dpke(), ffp_cpa_adversary(name, &l)?.as_mut(), l, seed),
        GameKind::FfpCca => run_ffp_cca(&dpke(), ffp_cca_adversary(name, &l, spec.rejection)?.as_mut(), l, seed),
        GameKind::FfpNk => run_ffp_nk(&dpke(), ffp_nk_adversary(name, &l)?.as_mut(), l, seed),
        GameKind::FfpNg => run_ffp_ng(scheme, ffp_ng_adversary(name, scheme, &l)?.as_mut(), seed),
    }
}
