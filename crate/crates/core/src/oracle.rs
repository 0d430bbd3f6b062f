//! Random oracles: lazily sampled tables for games and XOF-based functions
//! for production mode.
//!
//! # Game mode
//!
//! Each oracle owns a 32-byte key derived from the run seed. The value at
//! input `m` is drawn from a ChaCha20 generator keyed with that key and
//! positioned on stream number `m`. A power-of-two output space of `b` bits
//! takes the top `b` bits of the first `u64`; other sizes use
//! `gen_range(0..size)`. Values are cached, so the table is the record of what
//! was sampled. Because each input has its own stream, the value of `G(m)`
//! does not depend on the order of queries. Matched-seed runs therefore see
//! identical oracles.
//!
//! # Production mode
//!
//! All byte strings inside the XOF input are length-prefixed with a 4-byte
//! big-endian length; the leading domain byte is not.
//!
//! ```text
//! hpk   = SHA3-256(public_key_bytes)
//! G(m)  = SHAKE256(0x01 || len(hpk) || hpk || len(m) || m)
//! H(m)  = SHAKE256(0x02 || len(hpk) || hpk || len(m) || m)   -> key_len bits
//! PRF(k, c) = SHAKE256(0x03 || len(k) || k || len(c) || c)   -> key_len bits
//! ```
//!
//! `m` is the canonical fixed-width big-endian message encoding. `G` reads the
//! first 8 output bytes big-endian and keeps the top `b` bits for a `2^b`-sized
//! randomness space; any other size reduces the first 16 bytes modulo the size.

use std::collections::{HashMap, HashSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Digest, Sha3_256, Shake256};

use crate::error::{Error, Result};
use crate::pke::{Ciphertext, KemKey, Message, PkeScheme, Randomness, Space};

/// The two random functions of the transform.
pub trait RandomFunctions {
    fn g(&mut self, m: Message) -> Result<Randomness>;
    fn h(&mut self, m: Message) -> Result<KemKey>;
}

fn shake_parts(domain: Option<u8>, parts: &[&[u8]], out: &mut [u8]) {
    let mut x = Shake256::default();
    if let Some(d) = domain {
        x.update(&[d]);
    }
    for p in parts {
        x.update(&(p.len() as u32).to_be_bytes());
        x.update(p);
    }
    x.finalize_xof().read(out);
}

/// 32 bytes of seed material for `(master, label, index)`.
pub fn derive_key(master: u64, label: &str, index: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    shake_parts(
        None,
        &[b"fo-lab/seed", &master.to_be_bytes(), label.as_bytes(), &index.to_be_bytes()],
        &mut out,
    );
    out
}

/// Per-run seed `XOF(master || i)` for Monte Carlo ensembles.
pub fn run_seed(master: u64, index: u64) -> u64 {
    let k = derive_key(master, "run", index);
    u64::from_be_bytes(k[..8].try_into().unwrap())
}

/// A named generator stream of a run.
pub fn stream(seed: u64, label: &str) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive_key(seed, label, 0))
}

fn sample_index<R: RngCore>(rng: &mut R, space: Space) -> u64 {
    match space.bits() {
        Some(0) => 0,
        Some(b) => rng.next_u64() >> (64 - b),
        None => rng.gen_range(0..space.size()),
    }
}

/// The ordered set `L_G` of `(message, ciphertext)` pairs with first-preimage
/// lookup.
#[derive(Clone, Debug, Default)]
pub struct PreimageList {
    entries: Vec<(Message, Ciphertext)>,
    seen: HashSet<(Message, Ciphertext)>,
    first: HashMap<Ciphertext, Message>,
}

impl PreimageList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `(m, c)` unless already present. Returns whether it was new.
    pub fn insert(&mut self, m: Message, c: Ciphertext) -> bool {
        if !self.seen.insert((m, c.clone())) {
            return false;
        }
        self.first
            .entry(c.clone())
            .and_modify(|e| *e = (*e).min(m))
            .or_insert(m);
        self.entries.push((m, c));
        true
    }

    /// The smallest `m` with `(m, c)` in the list.
    pub fn preimage(&self, c: &Ciphertext) -> Option<Message> {
        self.first.get(c).copied()
    }

    pub fn entries(&self) -> &[(Message, Ciphertext)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug)]
struct LazyTable<T> {
    key: [u8; 32],
    table: HashMap<Message, T>,
    transcript: Vec<Message>,
}

impl<T: Clone> LazyTable<T> {
    fn new(key: [u8; 32]) -> Self {
        LazyTable { key, table: HashMap::new(), transcript: Vec::new() }
    }

    fn eval(&mut self, m: Message, sample: impl FnOnce(&mut ChaCha20Rng) -> T) -> T {
        self.transcript.push(m);
        let key = self.key;
        self.table
            .entry(m)
            .or_insert_with(|| {
                let mut rng = ChaCha20Rng::from_seed(key);
                rng.set_stream(m.0);
                sample(&mut rng)
            })
            .clone()
    }
}

/// Lazily sampled `G` and `H` plus the list `L_G` filled by the logging
/// wrapper `G'`.
#[derive(Clone, Debug)]
pub struct OracleState {
    g: LazyTable<Randomness>,
    h: LazyTable<KemKey>,
    message_space: Space,
    randomness_space: Space,
    key_len_bits: u32,
    preimages: PreimageList,
}

impl OracleState {
    pub fn new(seed: u64, tag: &str, message_space: Space, randomness_space: Space, key_len_bits: u32) -> Self {
        assert!(key_len_bits % 8 == 0 && key_len_bits > 0, "key length must be whole bytes");
        OracleState {
            g: LazyTable::new(derive_key(seed, &format!("oracle/{tag}/G"), 0)),
            h: LazyTable::new(derive_key(seed, &format!("oracle/{tag}/H"), 0)),
            message_space,
            randomness_space,
            key_len_bits,
            preimages: PreimageList::new(),
        }
    }

    /// Oracles for a derandomized scheme, domain-separated by its tag.
    pub fn for_scheme<S: PkeScheme>(dpke: &crate::pke::DerandomizedPke<S>, seed: u64, key_len_bits: u32) -> Self {
        Self::new(
            seed,
            &dpke.oracle_tag,
            dpke.base.message_space(),
            dpke.base.randomness_space(),
            key_len_bits,
        )
    }

    pub fn g(&mut self, m: Message) -> Result<Randomness> {
        self.message_space.check(m.0, "G input")?;
        let space = self.randomness_space;
        Ok(self.g.eval(m, |rng| Randomness(sample_index(rng, space))))
    }

    pub fn h(&mut self, m: Message) -> Result<KemKey> {
        self.message_space.check(m.0, "H input")?;
        let n = (self.key_len_bits / 8) as usize;
        Ok(self.h.eval(m, |rng| {
            let mut k = vec![0u8; n];
            rng.fill_bytes(&mut k);
            KemKey(k)
        }))
    }

    /// `G'(m)`: evaluates `G` and records `(m, Enc(pk, m; G(m)))` in `L_G`.
    pub fn g_logged<S: PkeScheme>(&mut self, scheme: &S, pk: &S::PublicKey, m: Message) -> Result<Randomness> {
        let r = self.g(m)?;
        let c = scheme.encrypt(pk, m, r);
        self.preimages.insert(m, c);
        Ok(r)
    }

    /// `L_G^{-1}(c)`.
    pub fn list_preimage(&self, c: &Ciphertext) -> Option<Message> {
        self.preimages.preimage(c)
    }

    pub fn preimages(&self) -> &PreimageList {
        &self.preimages
    }

    pub fn g_transcript(&self) -> &[Message] {
        &self.g.transcript
    }

    pub fn h_transcript(&self) -> &[Message] {
        &self.h.transcript
    }

    pub fn key_len_bits(&self) -> u32 {
        self.key_len_bits
    }

    pub fn message_space(&self) -> Space {
        self.message_space
    }
}

impl RandomFunctions for OracleState {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        OracleState::g(self, m)
    }

    fn h(&mut self, m: Message) -> Result<KemKey> {
        OracleState::h(self, m)
    }
}

/// Hash-based `G`, `H` bound to one public key.
#[derive(Clone, Debug)]
pub struct XofOracles {
    hpk: [u8; 32],
    message_space: Space,
    randomness_space: Space,
    key_len_bits: u32,
}

impl XofOracles {
    pub fn new<S: PkeScheme>(scheme: &S, pk: &S::PublicKey, key_len_bits: u32) -> Self {
        assert!(key_len_bits % 8 == 0 && key_len_bits > 0, "key length must be whole bytes");
        let hpk: [u8; 32] = Sha3_256::digest(scheme.public_key_bytes(pk)).into();
        XofOracles {
            hpk,
            message_space: scheme.message_space(),
            randomness_space: scheme.randomness_space(),
            key_len_bits,
        }
    }

    pub fn public_key_hash(&self) -> [u8; 32] {
        self.hpk
    }
}

impl RandomFunctions for XofOracles {
    fn g(&mut self, m: Message) -> Result<Randomness> {
        self.message_space.check(m.0, "G input")?;
        let mut out = [0u8; 16];
        shake_parts(Some(0x01), &[&self.hpk, &self.message_space.encode(m.0)], &mut out);
        let r = match self.randomness_space.bits() {
            Some(0) => 0,
            Some(b) => u64::from_be_bytes(out[..8].try_into().unwrap()) >> (64 - b),
            None => (u128::from_be_bytes(out) % self.randomness_space.size() as u128) as u64,
        };
        Ok(Randomness(r))
    }

    fn h(&mut self, m: Message) -> Result<KemKey> {
        self.message_space.check(m.0, "H input")?;
        let mut out = vec![0u8; (self.key_len_bits / 8) as usize];
        shake_parts(Some(0x02), &[&self.hpk, &self.message_space.encode(m.0)], &mut out);
        Ok(KemKey(out))
    }
}

/// Implicit-rejection key `PRF(k, c)`.
pub fn prf(secret: &[u8], c: &Ciphertext, key_len_bits: u32) -> KemKey {
    let mut out = vec![0u8; (key_len_bits / 8) as usize];
    shake_parts(Some(0x03), &[secret, c.as_bytes()], &mut out);
    KemKey(out)
}

/// Rejects a configured key length that is not a positive whole number of bytes.
pub fn check_key_len(bits: u32) -> Result<()> {
    if bits == 0 || bits % 8 != 0 {
        return Err(Error::InvalidParameter(format!("key length {bits} is not a positive multiple of 8")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(rand_bits: u32) -> OracleState {
        OracleState::new(
            7,
            "G",
            Space::with_bits(4).unwrap(),
            Space::with_bits(rand_bits).unwrap(),
            128,
        )
    }

    #[test]
    fn test_repeated_query_is_stable() {
        let mut s = state(8);
        let a = s.g(Message(3)).unwrap();
        let _ = s.g(Message(4)).unwrap();
        assert_eq!(s.g(Message(3)).unwrap(), a);
        assert_eq!(s.g_transcript(), &[Message(3), Message(4), Message(3)]);
    }

    #[test]
    fn test_two_bit_output_replays_generator() {
        let mut s = state(2);
        let out = s.g(Message(5)).unwrap();
        // Replay: key for the G table, stream 5, top two bits of the first word.
        let mut rng = ChaCha20Rng::from_seed(derive_key(7, "oracle/G/G", 0));
        rng.set_stream(5);
        assert_eq!(out.0, rng.next_u64() >> 62);
    }

    #[test]
    fn test_query_order_does_not_change_values() {
        let mut a = state(8);
        let mut b = state(8);
        let x1 = a.g(Message(1)).unwrap();
        let x2 = a.g(Message(2)).unwrap();
        let y2 = b.g(Message(2)).unwrap();
        let y1 = b.g(Message(1)).unwrap();
        assert_eq!((x1, x2), (y1, y2));
    }

    #[test]
    fn test_out_of_space_input_is_domain_error() {
        let mut s = state(8);
        assert!(matches!(s.g(Message(16)), Err(Error::Domain(_))));
        assert!(matches!(s.h(Message(99)), Err(Error::Domain(_))));
    }

    #[test]
    fn test_single_bit_outputs_are_balanced() {
        let mut s = OracleState::new(
            11,
            "G",
            Space::with_bits(20).unwrap(),
            Space::with_bits(1).unwrap(),
            128,
        );
        let ones: u64 = (0..10_000).map(|i| s.g(Message(i)).unwrap().0).sum();
        let mean = ones as f64 / 10_000.0;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
    }

    #[test]
    fn test_preimage_list_prefers_smallest_message() {
        let mut l = PreimageList::new();
        let c = Ciphertext(vec![1, 2]);
        assert_eq!(l.preimage(&c), None);
        l.insert(Message(9), c.clone());
        l.insert(Message(4), c.clone());
        assert!(!l.insert(Message(9), c.clone()));
        assert_eq!(l.preimage(&c), Some(Message(4)));
        assert_eq!(l.len(), 2);
        assert_eq!(l.preimage(&Ciphertext(vec![3])), None);
    }

    #[test]
    fn test_h_output_length() {
        let mut s = OracleState::new(1, "G", Space::with_bits(4).unwrap(), Space::with_bits(4).unwrap(), 256);
        assert_eq!(s.h(Message(0)).unwrap().0.len(), 32);
    }

    #[test]
    fn test_prf_is_deterministic_and_keyed() {
        let c = Ciphertext(vec![5, 6, 7]);
        assert_eq!(prf(b"k1", &c, 128), prf(b"k1", &c, 128));
        assert_ne!(prf(b"k1", &c, 128), prf(b"k2", &c, 128));
    }

    #[test]
    fn test_run_seeds_differ() {
        assert_ne!(run_seed(1, 0), run_seed(1, 1));
        assert_ne!(run_seed(1, 0), run_seed(2, 0));
        assert_eq!(run_seed(1, 5), run_seed(1, 5));
    }
}
