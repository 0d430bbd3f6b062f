//! Security games for the KEM and the underlying PKE, run against
//! programmable adversaries in the classical random-oracle model.
//!
//! An adversary only receives the oracle handle of its game. The handle types
//! are trait objects whose traits expose exactly the granted oracles, so an
//! adversary for a game without a decryption oracle cannot reach one:
//!
//! ```compile_fail
//! use fo_lab::games::{AdvRng, FfpCpaAdversary, GOracle};
//! use fo_lab::pke::{DerandomizedPke, Message};
//! use fo_lab::toy::ToyScheme;
//!
//! struct Cheater;
//! impl FfpCpaAdversary<ToyScheme> for Cheater {
//!     fn name(&self) -> String { "cheater".into() }
//!     fn run(
//!         &mut self,
//!         _dpke: &DerandomizedPke<ToyScheme>,
//!         _pk: &fo_lab::toy::ToyPublicKey,
//!         oracles: &mut dyn GOracle,
//!         _rng: &mut AdvRng,
//!     ) -> fo_lab::Result<Option<Message>> {
//!         let _ = oracles.decrypt(&fo_lab::pke::Ciphertext(vec![]))?;
//!         Ok(None)
//!     }
//! }
//! ```
//!
//! Every run draws its randomness from named streams of one run seed:
//! `game/keys`, `game/challenge` and `game/adversary`, plus the oracle tables.
//! Games that share a seed therefore share keys, challenge and oracles, which
//! is what the matched-seed comparisons of the reductions rely on.

mod catalog;
mod estimate;
mod reductions;

pub use catalog::*;
pub use estimate::*;
pub use reductions::*;

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, OracleKind, Result};
use crate::kem::{coin, sim_decaps_prime, DecapsEventLog, FoKem, KemKeyPair, Rejection};
use crate::oracle::{stream, OracleState};
use crate::pke::{Ciphertext, DerandomizedPke, KemKey, KeyPair, Message, PkeScheme, Randomness};

pub type AdvRng = ChaCha20Rng;

/// Ciphertext used to pad decryption queries. No built-in scheme produces it.
pub fn sentinel_ciphertext() -> Ciphertext {
    Ciphertext(Vec::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryLimits {
    pub q_g: u64,
    pub q_h: u64,
    /// Decapsulation or decryption queries, whichever the game grants.
    pub q_d: u64,
}

impl Default for QueryLimits {
    fn default() -> Self {
        QueryLimits { q_g: 1 << 16, q_h: 1 << 16, q_d: 8 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub g: u64,
    pub h: u64,
    pub decaps: u64,
    pub decrypt: u64,
    pub fco: u64,
}

impl QueryCounts {
    /// Classical queries are sequential: depth is the total count.
    pub fn depth(&self) -> u64 {
        self.g + self.h + self.decaps + self.decrypt + self.fco
    }

    pub fn width(&self) -> u64 {
        1
    }
}

#[derive(Clone, Debug, Default)]
pub struct QueryBudget {
    pub limits: QueryLimits,
    pub used: QueryCounts,
}

impl QueryBudget {
    pub fn new(limits: QueryLimits) -> Self {
        QueryBudget { limits, used: QueryCounts::default() }
    }

    pub fn charge(&mut self, kind: OracleKind) -> Result<()> {
        let (count, limit) = match kind {
            OracleKind::G => (&mut self.used.g, self.limits.q_g),
            OracleKind::H => (&mut self.used.h, self.limits.q_h),
            OracleKind::Decaps => (&mut self.used.decaps, self.limits.q_d),
            OracleKind::Decrypt => (&mut self.used.decrypt, self.limits.q_d),
            OracleKind::Fco => (&mut self.used.fco, 1),
        };
        if *count >= limit {
            if kind == OracleKind::Fco {
                return Err(Error::OracleViolation("the failure-checking oracle answers one query".into()));
            }
            return Err(Error::BudgetExceeded { oracle: kind, limit });
        }
        *count += 1;
        Ok(())
    }
}

pub trait GOracle {
    fn g(&mut self, m: Message) -> Result<Randomness>;
}

pub trait RandomOracles: GOracle {
    fn h(&mut self, m: Message) -> Result<KemKey>;
}

/// `G`, `H` and a decapsulation oracle that excludes the challenge.
pub trait DecapsOracles: RandomOracles {
    fn decaps(&mut self, c: &Ciphertext) -> Result<Option<KemKey>>;
}

/// `G` and the derandomized decryption oracle.
pub trait DecryptOracles: GOracle {
    fn decrypt(&mut self, c: &Ciphertext) -> Result<Option<Message>>;
}

/// The failure-checking oracle, good for a single query.
pub trait FcoOracle {
    fn fco(&mut self, m: Message, r: Randomness) -> Result<bool>;
}

/// Outputs `b'`; `b = 0` means the presented key is the real one.
pub trait KemCcaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn DecapsOracles,
        rng: &mut AdvRng,
    ) -> Result<bool>;
}

pub trait KemCpaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(
        &mut self,
        kem: &FoKem<S>,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        key: &KemKey,
        oracles: &mut dyn RandomOracles,
        rng: &mut AdvRng,
    ) -> Result<bool>;
}

pub trait OwCpaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(
        &mut self,
        scheme: &S,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        oracles: &mut dyn GOracle,
        rng: &mut AdvRng,
    ) -> Result<Message>;
}

/// Two-stage IND-CPA adversary; state between the stages lives in `self`.
pub trait PkeCpaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn choose(
        &mut self,
        scheme: &S,
        pk: &S::PublicKey,
        oracles: &mut dyn GOracle,
        rng: &mut AdvRng,
    ) -> Result<(Message, Message)>;
    fn guess(
        &mut self,
        scheme: &S,
        pk: &S::PublicKey,
        challenge: &Ciphertext,
        oracles: &mut dyn GOracle,
        rng: &mut AdvRng,
    ) -> Result<bool>;
}

/// Returns a plaintext it hopes fails, or `None` to give up.
pub trait FfpCpaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(
        &mut self,
        dpke: &DerandomizedPke<S>,
        pk: &S::PublicKey,
        oracles: &mut dyn GOracle,
        rng: &mut AdvRng,
    ) -> Result<Option<Message>>;
}

pub trait FfpCcaAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(
        &mut self,
        dpke: &DerandomizedPke<S>,
        pk: &S::PublicKey,
        oracles: &mut dyn DecryptOracles,
        rng: &mut AdvRng,
    ) -> Result<Option<Message>>;
}

/// Sees no key material at all.
pub trait FfpNkAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(&mut self, dpke: &DerandomizedPke<S>, oracles: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message>;
}

/// Outputs `b'`; `b = 0` means the oracle uses the adversary's own key pair.
pub trait FfpNgAdversary<S: PkeScheme> {
    fn name(&self) -> String;
    fn run(&mut self, scheme: &S, pk: &S::PublicKey, fco: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool>;
}

macro_rules! forward_boxed {
    ($tr:ident { $($f:ident($($a:ident: $t:ty),*) -> $r:ty;)* }) => {
        impl<S: PkeScheme, A: $tr<S> + ?Sized> $tr<S> for Box<A> {
            fn name(&self) -> String {
                (**self).name()
            }
            $(fn $f(&mut self, $($a: $t),*) -> $r {
                (**self).$f($($a),*)
            })*
        }
    };
}

forward_boxed!(KemCcaAdversary {
    run(kem: &FoKem<S>, pk: &S::PublicKey, challenge: &Ciphertext, key: &KemKey,
        oracles: &mut dyn DecapsOracles, rng: &mut AdvRng) -> Result<bool>;
});
forward_boxed!(KemCpaAdversary {
    run(kem: &FoKem<S>, pk: &S::PublicKey, challenge: &Ciphertext, key: &KemKey,
        oracles: &mut dyn RandomOracles, rng: &mut AdvRng) -> Result<bool>;
});
forward_boxed!(OwCpaAdversary {
    run(scheme: &S, pk: &S::PublicKey, challenge: &Ciphertext, oracles: &mut dyn GOracle,
        rng: &mut AdvRng) -> Result<Message>;
});
forward_boxed!(PkeCpaAdversary {
    choose(scheme: &S, pk: &S::PublicKey, oracles: &mut dyn GOracle, rng: &mut AdvRng)
        -> Result<(Message, Message)>;
    guess(scheme: &S, pk: &S::PublicKey, challenge: &Ciphertext, oracles: &mut dyn GOracle,
        rng: &mut AdvRng) -> Result<bool>;
});
forward_boxed!(FfpCpaAdversary {
    run(dpke: &DerandomizedPke<S>, pk: &S::PublicKey, oracles: &mut dyn GOracle,
        rng: &mut AdvRng) -> Result<Option<Message>>;
});
forward_boxed!(FfpCcaAdversary {
    run(dpke: &DerandomizedPke<S>, pk: &S::PublicKey, oracles: &mut dyn DecryptOracles,
        rng: &mut AdvRng) -> Result<Option<Message>>;
});
forward_boxed!(FfpNkAdversary {
    run(dpke: &DerandomizedPke<S>, oracles: &mut dyn GOracle, rng: &mut AdvRng) -> Result<Message>;
});
forward_boxed!(FfpNgAdversary {
    run(scheme: &S, pk: &S::PublicKey, fco: &mut dyn FcoOracle, rng: &mut AdvRng) -> Result<bool>;
});

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    IndCcaKem,
    IndCpaKem,
    OwCpaPke,
    IndCpaPke,
    FfpCpa,
    FfpCca,
    FfpNk,
    FfpNg,
}

impl GameKind {
    pub const ALL: [GameKind; 8] = [
        GameKind::IndCcaKem,
        GameKind::IndCpaKem,
        GameKind::OwCpaPke,
        GameKind::IndCpaPke,
        GameKind::FfpCpa,
        GameKind::FfpCca,
        GameKind::FfpNk,
        GameKind::FfpNg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GameKind::IndCcaKem => "ind-cca-kem",
            GameKind::IndCpaKem => "ind-cpa-kem",
            GameKind::OwCpaPke => "ow-cpa-pke",
            GameKind::IndCpaPke => "ind-cpa-pke",
            GameKind::FfpCpa => "ffp-cpa",
            GameKind::FfpCca => "ffp-cca",
            GameKind::FfpNk => "ffp-nk",
            GameKind::FfpNg => "ffp-ng",
        }
    }

    pub fn parse(s: &str) -> Option<GameKind> {
        GameKind::ALL.into_iter().find(|g| g.as_str() == s)
    }

    /// Games won by guessing a bit, where advantage is `|win - 1/2|`.
    pub fn is_bit_game(&self) -> bool {
        matches!(self, GameKind::IndCcaKem | GameKind::IndCpaKem | GameKind::IndCpaPke | GameKind::FfpNg)
    }
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub game: GameKind,
    pub adversary: String,
    pub seed: u64,
    pub won: bool,
    pub events: DecapsEventLog,
    pub queries: QueryCounts,
    /// The hidden bit `b`, for bit games.
    pub challenge_bit: Option<bool>,
    /// The adversary's bit `b'`, for bit games.
    pub guess_bit: Option<bool>,
    /// The message output, for OW and FFP games.
    pub output: Option<Message>,
}

impl GameOutcome {
    fn new(game: GameKind, adversary: String, seed: u64, budget: &QueryBudget) -> Self {
        GameOutcome {
            game,
            adversary,
            seed,
            won: false,
            events: DecapsEventLog::default(),
            queries: budget.used,
            challenge_bit: None,
            guess_bit: None,
            output: None,
        }
    }

    fn with_bits(mut self, b: bool, guess: bool) -> Self {
        self.challenge_bit = Some(b);
        self.guess_bit = Some(guess);
        self.won = b == guess;
        self
    }
}

fn key_rng(seed: u64) -> ChaCha20Rng {
    stream(seed, "game/keys")
}

fn challenge_rng(seed: u64) -> ChaCha20Rng {
    stream(seed, "game/challenge")
}

/// The adversary's coins for a run with this seed.
pub fn adversary_rng(seed: u64) -> AdvRng {
    stream(seed, "game/adversary")
}

/// `G'` and `H` charged against a budget. `G'` records `L_G` when a public
/// key is known.
struct RoHandle<'a, S: PkeScheme> {
    scheme: &'a S,
    pk: Option<&'a S::PublicKey>,
    state: &'a mut OracleState,
    budget: &'a mut QueryBudget,
}

impl<S: PkeScheme> GOracle for RoHandle<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        self.budget.charge(OracleKind::G)?;
        match self.pk {
            Some(pk) => self.state.g_logged(self.scheme, pk, m),
            None => self.state.g(m),
        }
    }
}

impl<S: PkeScheme> RandomOracles for RoHandle<'_, S> {
    fn h(&mut self, m: Message) -> Result<KemKey> {
        self.budget.charge(OracleKind::H)?;
        self.state.h(m)
    }
}

struct DecapsHandle<'a, S: PkeScheme> {
    ro: RoHandle<'a, S>,
    kem: &'a FoKem<S>,
    keys: &'a KemKeyPair<S>,
    challenge: &'a Ciphertext,
    log: &'a mut DecapsEventLog,
}

impl<S: PkeScheme> GOracle for DecapsHandle<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        self.ro.g(m)
    }
}

impl<S: PkeScheme> RandomOracles for DecapsHandle<'_, S> {
    fn h(&mut self, m: Message) -> Result<KemKey> {
        self.ro.h(m)
    }
}

impl<S: PkeScheme> DecapsOracles for DecapsHandle<'_, S> {
    fn decaps(&mut self, c: &Ciphertext) -> Result<Option<KemKey>> {
        if c == self.challenge {
            return Err(Error::ForbiddenQuery);
        }
        self.ro.budget.charge(OracleKind::Decaps)?;
        let state = &mut *self.ro.state;
        let answer = self.kem.decaps(state, self.keys, c)?;
        // events compare against the explicit-rejection oracle
        let real = match self.kem.rejection {
            Rejection::Explicit => answer.clone(),
            Rejection::Implicit => self.kem.decaps_explicit(state, self.keys, c)?,
        };
        let simulated = sim_decaps_prime(state, c, None)?;
        self.log.record(&real, &simulated);
        if let Some(m) = state.list_preimage(c) {
            if self.kem.dpke.decrypt(state, &self.keys.keys, c)? != Some(m) {
                self.log.add_failure(m);
            }
        }
        Ok(answer)
    }
}

struct DecryptHandle<'a, S: PkeScheme> {
    ro: RoHandle<'a, S>,
    dpke: &'a DerandomizedPke<S>,
    keys: &'a KeyPair<S>,
    log: &'a mut DecapsEventLog,
}

impl<S: PkeScheme> GOracle for DecryptHandle<'_, S> {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        self.ro.g(m)
    }
}

impl<S: PkeScheme> DecryptOracles for DecryptHandle<'_, S> {
    fn decrypt(&mut self, c: &Ciphertext) -> Result<Option<Message>> {
        self.ro.budget.charge(OracleKind::Decrypt)?;
        let state = &mut *self.ro.state;
        let real = self.dpke.decrypt(state, self.keys, c)?;
        let simulated = state.list_preimage(c);
        self.log.record(&real, &simulated);
        if let Some(m) = simulated {
            if real != Some(m) {
                self.log.add_failure(m);
            }
        }
        Ok(real)
    }
}

struct FcoHandle<'a, S: PkeScheme> {
    scheme: &'a S,
    keys: &'a KeyPair<S>,
    budget: &'a mut QueryBudget,
}

impl<S: PkeScheme> FcoOracle for FcoHandle<'_, S> {
    fn fco(&mut self, m: Message, r: Randomness) -> Result<bool> {
        self.budget.charge(OracleKind::Fco)?;
        let c = self.scheme.encrypt_checked(&self.keys.pk, m, r)?;
        Ok(self.scheme.decrypt(&self.keys.sk, &c) != Some(m))
    }
}

/// Keys, oracles and challenge shared by both KEM games.
pub struct KemChallenge<S: PkeScheme> {
    pub keys: KemKeyPair<S>,
    pub oracles: OracleState,
    pub ciphertext: Ciphertext,
    pub message: Message,
    pub bit: bool,
    pub presented_key: KemKey,
}

/// `(K0, c*) <- Encaps(pk)`, `K1` uniform, `b` uniform; presents `K_b`.
pub fn kem_challenge<S: PkeScheme>(kem: &FoKem<S>, seed: u64) -> Result<KemChallenge<S>> {
    let keys = kem.keygen(&mut key_rng(seed));
    let mut oracles = kem.oracles(seed);
    let mut rng = challenge_rng(seed);
    let enc = kem.encaps(&mut oracles, &keys.keys.pk, &mut rng)?;
    let bit = coin(&mut rng);
    let random = kem.random_key(&mut rng);
    let presented_key = if bit { random } else { enc.key };
    Ok(KemChallenge { keys, oracles, ciphertext: enc.ciphertext, message: enc.message, bit, presented_key })
}

pub fn run_ind_cca_kem<S: PkeScheme>(
    kem: &FoKem<S>,
    adv: &mut dyn KemCcaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let mut ch = kem_challenge(kem, seed)?;
    let mut budget = QueryBudget::new(limits);
    let mut log = DecapsEventLog::default();
    let mut rng = adversary_rng(seed);
    let guess = {
        let mut handle = DecapsHandle {
            ro: RoHandle { scheme: kem.scheme(), pk: Some(&ch.keys.keys.pk), state: &mut ch.oracles, budget: &mut budget },
            kem,
            keys: &ch.keys,
            challenge: &ch.ciphertext,
            log: &mut log,
        };
        adv.run(kem, &ch.keys.keys.pk, &ch.ciphertext, &ch.presented_key, &mut handle, &mut rng)?
    };
    let mut out = GameOutcome::new(GameKind::IndCcaKem, adv.name(), seed, &budget).with_bits(ch.bit, guess);
    out.events = log;
    Ok(out)
}

pub fn run_ind_cpa_kem<S: PkeScheme>(
    kem: &FoKem<S>,
    adv: &mut dyn KemCpaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let mut ch = kem_challenge(kem, seed)?;
    let mut budget = QueryBudget::new(limits);
    let mut rng = adversary_rng(seed);
    let guess = {
        let mut handle =
            RoHandle { scheme: kem.scheme(), pk: Some(&ch.keys.keys.pk), state: &mut ch.oracles, budget: &mut budget };
        adv.run(kem, &ch.keys.keys.pk, &ch.ciphertext, &ch.presented_key, &mut handle, &mut rng)?
    };
    Ok(GameOutcome::new(GameKind::IndCpaKem, adv.name(), seed, &budget).with_bits(ch.bit, guess))
}

/// Oracles for the PKE games. `G` there is independent of the scheme; it is
/// offered so random-oracle adversaries run unchanged.
fn pke_oracles<S: PkeScheme>(scheme: &S, seed: u64) -> OracleState {
    OracleState::new(seed, "pke-game", scheme.message_space(), scheme.randomness_space(), 128)
}

pub fn run_ow_cpa_pke<S: PkeScheme>(
    scheme: &S,
    adv: &mut dyn OwCpaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let keys = scheme.keygen(&mut key_rng(seed));
    let mut ch_rng = challenge_rng(seed);
    let m = Message(scheme.message_space().sample(&mut ch_rng));
    let r = Randomness(scheme.randomness_space().sample(&mut ch_rng));
    let c = scheme.encrypt(&keys.pk, m, r);
    let mut state = pke_oracles(scheme, seed);
    let mut budget = QueryBudget::new(limits);
    let mut rng = adversary_rng(seed);
    let answer = {
        let mut handle = RoHandle { scheme, pk: Some(&keys.pk), state: &mut state, budget: &mut budget };
        adv.run(scheme, &keys.pk, &c, &mut handle, &mut rng)?
    };
    let mut out = GameOutcome::new(GameKind::OwCpaPke, adv.name(), seed, &budget);
    out.won = answer == m;
    out.output = Some(answer);
    Ok(out)
}

pub fn run_ind_cpa_pke<S: PkeScheme>(
    scheme: &S,
    adv: &mut dyn PkeCpaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let keys = scheme.keygen(&mut key_rng(seed));
    let mut state = pke_oracles(scheme, seed);
    let mut budget = QueryBudget::new(limits);
    let mut rng = adversary_rng(seed);
    let mut ch_rng = challenge_rng(seed);
    let mut handle = RoHandle { scheme, pk: Some(&keys.pk), state: &mut state, budget: &mut budget };
    let (m0, m1) = adv.choose(scheme, &keys.pk, &mut handle, &mut rng)?;
    let space = scheme.message_space();
    space.check(m0.0, "first challenge message")?;
    space.check(m1.0, "second challenge message")?;
    let b = coin(&mut ch_rng);
    let r = Randomness(scheme.randomness_space().sample(&mut ch_rng));
    let c = scheme.encrypt(&keys.pk, if b { m1 } else { m0 }, r);
    let guess = adv.guess(scheme, &keys.pk, &c, &mut handle, &mut rng)?;
    drop(handle);
    Ok(GameOutcome::new(GameKind::IndCpaPke, adv.name(), seed, &budget).with_bits(b, guess))
}

/// The adversary of an FFP game; the variant decides which oracles it gets.
pub enum FfpAdversary<'a, S: PkeScheme> {
    Cpa(&'a mut dyn FfpCpaAdversary<S>),
    Cca(&'a mut dyn FfpCcaAdversary<S>),
}

/// True when `Dec1(sk, Enc1(pk, m)) != m`.
pub fn plaintext_fails<S: PkeScheme>(
    dpke: &DerandomizedPke<S>,
    state: &mut OracleState,
    keys: &KeyPair<S>,
    m: Message,
) -> Result<bool> {
    let c = dpke.encrypt(state, &keys.pk, m)?;
    Ok(dpke.decrypt(state, keys, &c)? != Some(m))
}

/// FFP-CPA or FFP-CCA: won iff the returned plaintext fails.
pub fn run_ffp_atk<S: PkeScheme>(
    dpke: &DerandomizedPke<S>,
    adv: FfpAdversary<'_, S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let keys = dpke.base.keygen(&mut key_rng(seed));
    let mut state = OracleState::for_scheme(dpke, seed, 128);
    let mut budget = QueryBudget::new(limits);
    let mut log = DecapsEventLog::default();
    let mut rng = adversary_rng(seed);
    let ro = RoHandle { scheme: &dpke.base, pk: Some(&keys.pk), state: &mut state, budget: &mut budget };
    let (game, name, answer) = match adv {
        FfpAdversary::Cpa(a) => {
            let mut handle = ro;
            (GameKind::FfpCpa, a.name(), a.run(dpke, &keys.pk, &mut handle, &mut rng)?)
        }
        FfpAdversary::Cca(a) => {
            let mut handle = DecryptHandle { ro, dpke, keys: &keys, log: &mut log };
            (GameKind::FfpCca, a.name(), a.run(dpke, &keys.pk, &mut handle, &mut rng)?)
        }
    };
    let mut out = GameOutcome::new(game, name, seed, &budget);
    if let Some(m) = answer {
        dpke.base.message_space().check(m.0, "FFP output")?;
        out.won = plaintext_fails(dpke, &mut state, &keys, m)?;
    }
    out.output = answer;
    out.events = log;
    Ok(out)
}

pub fn run_ffp_cpa<S: PkeScheme>(
    dpke: &DerandomizedPke<S>,
    adv: &mut dyn FfpCpaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    run_ffp_atk(dpke, FfpAdversary::Cpa(adv), limits, seed)
}

pub fn run_ffp_cca<S: PkeScheme>(
    dpke: &DerandomizedPke<S>,
    adv: &mut dyn FfpCcaAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    run_ffp_atk(dpke, FfpAdversary::Cca(adv), limits, seed)
}

/// `m <- A`, then `(pk, sk) <- KG`; won iff `(m, G(m))` fails.
pub fn run_ffp_nk<S: PkeScheme>(
    dpke: &DerandomizedPke<S>,
    adv: &mut dyn FfpNkAdversary<S>,
    limits: QueryLimits,
    seed: u64,
) -> Result<GameOutcome> {
    let mut state = OracleState::for_scheme(dpke, seed, 128);
    let mut budget = QueryBudget::new(limits);
    let mut rng = adversary_rng(seed);
    let m = {
        let mut handle = RoHandle { scheme: &dpke.base, pk: None, state: &mut state, budget: &mut budget };
        adv.run(dpke, &mut handle, &mut rng)?
    };
    dpke.base.message_space().check(m.0, "FFP-NK output")?;
    let keys = dpke.base.keygen(&mut key_rng(seed));
    let r = state.g(m)?;
    let mut out = GameOutcome::new(GameKind::FfpNk, adv.name(), seed, &budget);
    out.won = dpke.base.fails(&keys, m, r);
    out.output = Some(m);
    Ok(out)
}

/// Own key pair `0`, independent key pair `1`; one `FCO_b` query.
pub fn run_ffp_ng<S: PkeScheme>(scheme: &S, adv: &mut dyn FfpNgAdversary<S>, seed: u64) -> Result<GameOutcome> {
    let own = scheme.keygen(&mut key_rng(seed));
    let other = scheme.keygen(&mut stream(seed, "game/keys-independent"));
    let b = coin(&mut challenge_rng(seed));
    let mut budget = QueryBudget::new(QueryLimits { q_g: 0, q_h: 0, q_d: 0 });
    let mut rng = adversary_rng(seed);
    let guess = {
        let mut fco = FcoHandle { scheme, keys: if b { &other } else { &own }, budget: &mut budget };
        adv.run(scheme, &own.pk, &mut fco, &mut rng)?
    };
    Ok(GameOutcome::new(GameKind::FfpNg, adv.name(), seed, &budget).with_bits(b, guess))
}

#[cfg(test)]
mod tests;
