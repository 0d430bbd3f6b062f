use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pke::{Ciphertext, FailureScore, KeyPair, Message, PkeScheme, Randomness, Space};

/// A one-bit Regev-style scheme over `Z_q^n`.
///
/// `pk = (A, b = A s + e)`, randomness `(r, e1, e2)` with every coordinate
/// drawn uniformly from the table `chi`, and
/// `Enc(m) = (A^T r + e1, <b, r> + e2 + m * floor(q/2))`.
/// Decryption outputs 0 iff `4 |x| < q` for the centered `x = v - <s, u>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroLwePke {
    pub n: usize,
    pub q: u32,
    pub chi: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LwePublicKey {
    /// Row-major `n x n`.
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LweSecretKey {
    pub s: Vec<i32>,
    pub e: Vec<i32>,
    pub pk: LwePublicKey,
}

/// The randomness triple behind an index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LweRandomness {
    pub r: Vec<i32>,
    pub e1: Vec<i32>,
    pub e2: i32,
}

const MAX_RANDOMNESS: u64 = 1 << 40;

impl MicroLwePke {
    pub fn new(n: usize, q: u32, chi: Vec<i32>) -> Result<Self> {
        let s = MicroLwePke { n, q, chi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(1..=8).contains(&self.n) {
            return bad(format!("dimension {} not in 1..=8", self.n));
        }
        if !(5..=257).contains(&self.q) {
            return bad(format!("modulus {} not in 5..=257", self.q));
        }
        // With q = 0 mod 4 a noise of exactly q/4 decodes asymmetrically.
        if self.q % 4 == 0 {
            return bad(format!("modulus {} is a multiple of 4", self.q));
        }
        if self.chi.is_empty() {
            return bad("empty noise table".into());
        }
        if self.chi.iter().any(|&x| 2 * x.unsigned_abs() >= self.q) {
            return bad("noise table entries must satisfy |x| < q/2".into());
        }
        let total = (self.chi.len() as u128).checked_pow(2 * self.n as u32 + 1);
        if total.map_or(true, |t| t > MAX_RANDOMNESS as u128) {
            return bad("randomness space exceeds 2^40".into());
        }
        Ok(())
    }

    pub fn decode_randomness(&self, r: Randomness) -> LweRandomness {
        let base = self.chi.len() as u64;
        let mut idx = r.0;
        let mut next = || {
            let v = self.chi[(idx % base) as usize];
            idx /= base;
            v
        };
        let r: Vec<i32> = (0..self.n).map(|_| next()).collect();
        let e1: Vec<i32> = (0..self.n).map(|_| next()).collect();
        let e2 = next();
        LweRandomness { r, e1, e2 }
    }

    fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.q as i64) as u32
    }

    fn sample_chi<R: RngCore + ?Sized>(&self, rng: &mut R) -> i32 {
        self.chi[rng.gen_range(0..self.chi.len())]
    }

    /// `<e, r> + e2 - <s, e1>` over the integers: what decryption sees on
    /// top of the encoded bit.
    pub fn decryption_noise(&self, sk: &LweSecretKey, r: Randomness) -> i64 {
        let rr = self.decode_randomness(r);
        let dot = |a: &[i32], b: &[i32]| a.iter().zip(b).map(|(x, y)| *x as i64 * *y as i64).sum::<i64>();
        dot(&sk.e, &rr.r) + rr.e2 as i64 - dot(&sk.s, &rr.e1)
    }

    /// Failure condition from the noise alone: the distance of the encoded
    /// point `noise + m floor(q/2)` from `m q/2`, taken mod `q`, is at least
    /// `q/4`. Works on doubled values to stay in integers.
    pub fn fails_by_noise(&self, m: Message, noise: i64) -> bool {
        let q = self.q as i64;
        let t = (2 * noise - (m.0 as i64) * (q % 2)).rem_euclid(2 * q);
        let t = if t > q { t - 2 * q } else { t };
        2 * t.abs() >= q
    }
}

impl PkeScheme for MicroLwePke {
    type PublicKey = LwePublicKey;
    type SecretKey = LweSecretKey;

    fn name(&self) -> String {
        format!("micro-lwe(n={}, q={}, |chi|={})", self.n, self.q, self.chi.len())
    }

    fn message_space(&self) -> Space {
        Space::with_bits(1).unwrap()
    }

    fn randomness_space(&self) -> Space {
        Space::new((self.chi.len() as u64).pow(2 * self.n as u32 + 1)).unwrap()
    }

    fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> KeyPair<Self> {
        let n = self.n;
        let a: Vec<u32> = (0..n * n).map(|_| rng.gen_range(0..self.q)).collect();
        let s: Vec<i32> = (0..n).map(|_| self.sample_chi(rng)).collect();
        let e: Vec<i32> = (0..n).map(|_| self.sample_chi(rng)).collect();
        let b = (0..n)
            .map(|i| {
                let acc: i64 = (0..n).map(|j| a[i * n + j] as i64 * s[j] as i64).sum();
                self.reduce(acc + e[i] as i64)
            })
            .collect();
        let pk = LwePublicKey { a, b };
        KeyPair { pk: pk.clone(), sk: LweSecretKey { s, e, pk } }
    }

    fn encrypt(&self, pk: &LwePublicKey, m: Message, r: Randomness) -> Ciphertext {
        let n = self.n;
        let rr = self.decode_randomness(r);
        let mut out = Vec::with_capacity(2 * (n + 1));
        for j in 0..n {
            let acc: i64 = (0..n).map(|i| pk.a[i * n + j] as i64 * rr.r[i] as i64).sum();
            out.extend_from_slice(&(self.reduce(acc + rr.e1[j] as i64) as u16).to_be_bytes());
        }
        let acc: i64 = (0..n).map(|i| pk.b[i] as i64 * rr.r[i] as i64).sum();
        let v = acc + rr.e2 as i64 + (m.0 as i64) * (self.q as i64 / 2);
        out.extend_from_slice(&(self.reduce(v) as u16).to_be_bytes());
        Ciphertext(out)
    }

    fn decrypt(&self, sk: &LweSecretKey, c: &Ciphertext) -> Option<Message> {
        let n = self.n;
        let b = c.as_bytes();
        if b.len() != 2 * (n + 1) {
            return None;
        }
        let coords: Vec<i64> = b.chunks(2).map(|w| u16::from_be_bytes([w[0], w[1]]) as i64).collect();
        if coords.iter().any(|&x| x >= self.q as i64) {
            return None;
        }
        let su: i64 = (0..n).map(|j| sk.s[j] as i64 * coords[j]).sum();
        let q = self.q as i64;
        let x = (coords[n] - su).rem_euclid(q);
        let x = if 2 * x > q { x - q } else { x };
        Some(Message(if 4 * x.abs() < q { 0 } else { 1 }))
    }

    fn public_key_bytes(&self, pk: &LwePublicKey) -> Vec<u8> {
        pk.a.iter().chain(&pk.b).flat_map(|x| (*x as u16).to_be_bytes()).collect()
    }
}

impl FailureScore for MicroLwePke {
    /// Squared norm of the randomness: larger noise vectors fail more often.
    fn failure_score(&self, _m: Message, r: Randomness) -> f64 {
        let rr = self.decode_randomness(r);
        let sq = |v: &[i32]| v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>();
        sq(&rr.r) + sq(&rr.e1) + (rr.e2 as f64).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn test_failure_iff_noise_reaches_quarter_modulus() {
        for (n, q, chi) in [
            (2usize, 17u32, vec![-1, 0, 1]),
            (1, 10, vec![-2, -1, 0, 1, 2]),
            (2, 13, vec![-2, 0, 2]),
            (1, 7, vec![-3, -1, 0, 1, 3]),
        ] {
            let s = MicroLwePke::new(n, q, chi).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(q as u64);
            let mut failures = 0;
            for _ in 0..20 {
                let keys = s.keygen(&mut rng);
                for r in s.randomness_space().iter() {
                    for m in [Message(0), Message(1)] {
                        let dec = s.decrypt(&keys.sk, &s.encrypt(&keys.pk, m, Randomness(r)));
                        let noise = s.decryption_noise(&keys.sk, Randomness(r));
                        assert_eq!(dec != Some(m), s.fails_by_noise(m, noise), "q={q} m={m:?} noise={noise}");
                        failures += (dec != Some(m)) as u32;
                    }
                }
            }
            // every parameter set above can fail
            assert!(failures > 0, "q={q}");
        }
    }

    #[test]
    fn test_small_noise_is_correct() {
        let s = MicroLwePke::new(2, 257, vec![-1, 0, 1]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let keys = s.keygen(&mut rng);
        for r in s.randomness_space().iter() {
            for m in [Message(0), Message(1)] {
                assert_eq!(s.decrypt(&keys.sk, &s.encrypt(&keys.pk, m, Randomness(r))), Some(m));
            }
        }
    }

    #[test]
    fn test_rejects_bad_parameters() {
        assert!(MicroLwePke::new(0, 17, vec![0]).is_err());
        assert!(MicroLwePke::new(2, 16, vec![0]).is_err());
        assert!(MicroLwePke::new(2, 258, vec![0]).is_err());
        assert!(MicroLwePke::new(2, 17, vec![]).is_err());
        assert!(MicroLwePke::new(2, 17, vec![9]).is_err());
        assert!(MicroLwePke::new(8, 257, vec![-3, -2, -1, 0, 1, 2]).is_err());
    }

    #[test]
    fn test_malformed_ciphertext_rejects() {
        let s = MicroLwePke::new(2, 17, vec![-1, 0, 1]).unwrap();
        let keys = s.keygen(&mut ChaCha20Rng::seed_from_u64(0));
        assert_eq!(s.decrypt(&keys.sk, &Ciphertext(vec![0; 5])), None);
        assert_eq!(s.decrypt(&keys.sk, &Ciphertext(vec![0, 17, 0, 0, 0, 0])), None);
    }
}
