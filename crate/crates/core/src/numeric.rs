//! Extended-precision arithmetic for bound evaluation.
//!
//! [`Real`] is the primary path: a binary float with a 128-bit mantissa and a
//! 32-bit exponent, so terms like `2^-15616` stay representable. Every
//! operation rounds once to nearest, ties to even.
//!
//! [`Enclosure`] is the independent cross-check path: exact rational intervals
//! whose endpoints are rounded outward to 320 significant bits after each
//! operation. A correct primary value always lies inside the enclosure up to
//! the primary path's own rounding.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Mantissa bits of [`Real`].
pub const PRECISION: usize = 128;
/// Rounding applied by every [`Real`] operation.
pub const ROUNDING: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_word(0, PRECISION))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_word(1, PRECISION))
    }

    pub fn from_u64(v: u64) -> Self {
        Real(BigFloat::from_u64(v, PRECISION))
    }

    pub fn from_u128(v: u128) -> Self {
        Real(BigFloat::from_u128(v, PRECISION))
    }

    /// Exact: every finite `f64` fits in 128 mantissa bits.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite input {v}");
        if v == 0.0 {
            return Self::zero();
        }
        // exact decomposition; the library conversion flushes subnormals
        let bits = v.to_bits();
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_field == 0 { (frac, -1074) } else { (frac | (1 << 52), exp_field - 1075) };
        let lead = mant.leading_zeros();
        let f = BigFloat::from_words(&[0, mant << lead], Sign::Pos, (exp + 64 - lead as i64) as i32);
        Real(if v < 0.0 { f.neg() } else { f })
    }

    /// Rounds `v` once to 128 bits.
    pub fn from_biguint(v: &BigUint) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        let words = v.to_u64_digits();
        let exp = (words.len() * 64) as i32;
        let mut f = BigFloat::from_words(&words, Sign::Pos, exp);
        f.set_precision(PRECISION, ROUNDING).expect("precision");
        Real(f)
    }

    pub fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        Self::from_biguint(num).div(&Self::from_biguint(den))
    }

    /// `2^e`, exact.
    pub fn pow2(e: i64) -> Self {
        let exp = i32::try_from(e + 1).expect("exponent within i32 range");
        Real(BigFloat::from_words(&[0, 1u64 << 63], Sign::Pos, exp))
    }

    pub fn add(&self, o: &Real) -> Real {
        Real(self.0.add(&o.0, PRECISION, ROUNDING))
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real(self.0.sub(&o.0, PRECISION, ROUNDING))
    }

    pub fn mul(&self, o: &Real) -> Real {
        Real(self.0.mul(&o.0, PRECISION, ROUNDING))
    }

    pub fn div(&self, o: &Real) -> Real {
        Real(self.0.div(&o.0, PRECISION, ROUNDING))
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.sqrt(PRECISION, ROUNDING))
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Real {
        CONSTS.with(|cc| Real(self.0.ln(PRECISION, ROUNDING, &mut cc.borrow_mut())))
    }

    pub fn mul_u128(&self, v: u128) -> Real {
        self.mul(&Real::from_u128(v))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn min(self, o: Real) -> Real {
        if o < self {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Real) -> Real {
        if o > self {
            o
        } else {
            self
        }
    }

    /// `min(1, max(0, self))`.
    pub fn clamp_unit(&self) -> Real {
        if self.is_negative() {
            Real::zero()
        } else if *self > Real::one() {
            Real::one()
        } else {
            self.clone()
        }
    }

    /// Mantissa as an integer and the binary exponent of its lowest bit.
    fn parts(&self) -> Option<(BigUint, i64, bool)> {
        if self.0.is_zero() {
            return None;
        }
        let (words, _, sign, e, _) = self.0.as_raw_parts().expect("finite value");
        let mant = BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let shift = e as i64 - (words.len() * 64) as i64;
        Some((mant, shift, sign == Sign::Neg))
    }

    /// Exact rational value.
    pub fn to_ratio(&self) -> BigRational {
        match self.parts() {
            None => BigRational::zero(),
            Some((mant, shift, neg)) => {
                let m = BigInt::from(mant);
                let m = if neg { -m } else { m };
                if shift >= 0 {
                    BigRational::from_integer(m << shift as usize)
                } else {
                    BigRational::new(m, BigInt::one() << (-shift) as usize)
                }
            }
        }
    }

    /// Nearest `f64`; underflows to zero below the subnormal range.
    pub fn to_f64(&self) -> f64 {
        match self.parts() {
            None => 0.0,
            Some((mant, shift, neg)) => {
                let bits = mant.bits() as i64;
                let top = if bits > 64 {
                    (&mant >> (bits - 64) as usize).to_u64().unwrap()
                } else {
                    mant.to_u64().unwrap()
                };
                let scale = shift + (bits - 64).max(0);
                let v = ldexp(top as f64, scale);
                if neg {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// `log2(self)` as an `f64`, valid far outside the `f64` value range.
    pub fn log2_f64(&self) -> f64 {
        match self.parts() {
            None => f64::NEG_INFINITY,
            Some((mant, shift, _)) => {
                let bits = mant.bits() as i64;
                let top = (&mant >> (bits - 53).max(0) as usize).to_u64().unwrap() as f64;
                top.log2() + (shift + (bits - 53).max(0)) as f64
            }
        }
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    /// Exact text form `[-]<hex mantissa>p<binary exponent>`, or `0`.
    pub fn to_exact_string(&self) -> String {
        match self.parts() {
            None => "0".into(),
            Some((mant, shift, neg)) => {
                let tz = mant.trailing_zeros().unwrap_or(0);
                let mant = mant >> tz as usize;
                format!("{}{:x}p{}", if neg { "-" } else { "" }, mant, shift + tz as i64)
            }
        }
    }

    /// Inverse of [`Real::to_exact_string`].
    pub fn from_exact_string(s: &str) -> Result<Real> {
        if s == "0" {
            return Ok(Real::zero());
        }
        let bad = || Error::Domain(format!("malformed exact value {s:?}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, s),
        };
        let (m, e) = body.split_once('p').ok_or_else(bad)?;
        let mant = BigUint::parse_bytes(m.as_bytes(), 16).ok_or_else(bad)?;
        if mant.bits() > PRECISION as u64 {
            return Err(bad());
        }
        let e: i64 = e.parse().map_err(|_| bad())?;
        let v = Real::from_biguint(&mant).mul(&Real::pow2(e));
        Ok(if neg { Real::zero().sub(&v) } else { v })
    }

    /// `2^x` for finite `x`; the fractional part goes through repeated
    /// square roots of 2, one per fraction bit.
    pub fn exp2(x: f64) -> Real {
        assert!(x.is_finite(), "non-finite exponent {x}");
        let int = x.floor();
        let mut frac = x - int;
        let mut acc = Real::pow2(int as i64);
        let mut j = 0;
        while frac > 0.0 {
            frac *= 2.0;
            if frac >= 1.0 {
                acc = acc.mul(&real_root(j));
                frac -= 1.0;
            }
            j += 1;
        }
        acc
    }
}

/// `2^(2^-(j+1))`, i.e. `j + 1` square roots of 2, each rounded.
fn real_root(j: usize) -> Real {
    static ROOTS: OnceLock<Mutex<Vec<Real>>> = OnceLock::new();
    let mut roots = ROOTS.get_or_init(|| Mutex::new(Vec::new())).lock().unwrap();
    while roots.len() <= j {
        let prev = roots.last().cloned().unwrap_or_else(|| Real::from_u64(2));
        roots.push(prev.sqrt());
    }
    roots[j].clone()
}

/// The enclosure counterpart of [`real_root`].
fn enclosure_root(j: usize) -> Enclosure {
    static ROOTS: OnceLock<Mutex<Vec<Enclosure>>> = OnceLock::new();
    let mut roots = ROOTS.get_or_init(|| Mutex::new(Vec::new())).lock().unwrap();
    while roots.len() <= j {
        let prev = roots.last().cloned().unwrap_or_else(|| Enclosure::from_u128(2));
        roots.push(prev.sqrt());
    }
    roots[j].clone()
}

fn ldexp(x: f64, mut k: i64) -> f64 {
    let mut v = x;
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
        if v == 0.0 {
            return 0.0;
        }
    }
    v * 2f64.powi(k as i32)
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        write!(f, "{}", self.0)
    }
}

/// Significant bits kept by [`Enclosure`] endpoints.
const ENCLOSURE_BITS: i64 = 320;

/// A closed rational interval `[lo, hi]` with `0 <= lo <= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn round_dyadic(x: &BigRational, up: bool) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let n = x.numer().abs().to_biguint().unwrap();
    let d = x.denom().to_biguint().unwrap();
    let shift = ENCLOSURE_BITS - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if shift >= 0 {
        (n << shift as usize, d)
    } else {
        (n, d << (-shift) as usize)
    };
    let (q, r) = num.div_rem(&den);
    let m = if up && !r.is_zero() { q + 1u32 } else { q };
    let m = BigInt::from(m);
    if shift >= 0 {
        BigRational::new(m, BigInt::one() << shift as usize)
    } else {
        BigRational::from_integer(m << (-shift) as usize)
    }
}

fn sqrt_bound(x: &BigRational, up: bool) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    // sqrt(n/d) = sqrt(n d) / d, scaled by 2^B for precision.
    let n = x.numer().to_biguint().unwrap();
    let d = x.denom().to_biguint().unwrap();
    let b = (ENCLOSURE_BITS as u64 + d.bits()) as usize;
    let s = ((&n * &d) << (2 * b)).sqrt();
    let s = if up { s + 1u32 } else { s };
    BigRational::new(BigInt::from(s), BigInt::from(d << b))
}

impl Enclosure {
    pub fn exact(v: BigRational) -> Self {
        assert!(!v.is_negative(), "enclosures are non-negative");
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::exact(BigRational::one())
    }

    pub fn from_u128(v: u128) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(v.clone())))
    }

    /// Exact conversion; `f64` values are dyadic rationals.
    pub fn from_f64(v: f64) -> Self {
        Self::exact(BigRational::from_float(v).expect("finite input"))
    }

    fn outward(lo: BigRational, hi: BigRational) -> Self {
        Enclosure {
            lo: round_dyadic(&lo, false),
            hi: round_dyadic(&hi, true),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::outward(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::outward(&self.lo * &o.lo, &self.hi * &o.hi)
    }

    /// Division by an interval bounded away from zero.
    pub fn div(&self, o: &Self) -> Self {
        assert!(o.lo.is_positive(), "division by an interval touching zero");
        Self::outward(&self.lo / &o.hi, &self.hi / &o.lo)
    }

    pub fn sqrt(&self) -> Self {
        Self::outward(sqrt_bound(&self.lo, false), sqrt_bound(&self.hi, true))
    }

    pub fn min_one(&self) -> Self {
        let one = BigRational::one();
        Enclosure {
            lo: if self.lo > one { one.clone() } else { self.lo.clone() },
            hi: if self.hi > one { one } else { self.hi.clone() },
        }
    }

    /// `2^x` for a dyadic rational `x` (any finite `f64` qualifies).
    pub fn pow2(x: &BigRational) -> Result<Self> {
        let den = x.denom().to_biguint().unwrap();
        if den.count_ones() != 1 {
            return Err(Error::Domain(format!("exponent {x} is not dyadic")));
        }
        let k = den.bits() - 1;
        let int = x.floor().to_integer();
        let frac_num = (x - BigRational::from_integer(int.clone()))
            * BigRational::from_integer(BigInt::one() << k as usize);
        let frac_num = frac_num.to_integer().to_biguint().unwrap();
        let int = int.to_i64().ok_or_else(|| Error::Domain("exponent out of range".into()))?;
        let base = if int >= 0 {
            BigRational::from_integer(BigInt::one() << int as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-int) as usize)
        };
        let mut acc = Self::one();
        // 2^(b / 2^k) = prod over set bits j of b of 2^(2^(j-k)).
        for j in 0..k {
            if frac_num.bit(j) {
                // bit j carries weight 2^(j-k), i.e. the (k-j)-th square root of 2.
                acc = acc.mul(&enclosure_root((k - j - 1) as usize));
            }
        }
        // the exact power last keeps the products above small
        Ok(acc.mul(&Self::exact(base)))
    }

    /// Natural log of an interval inside `[1, f64::MAX]`. Rationals have no
    /// logarithm, so the endpoints come from `f64` and are widened by a few
    /// ulps.
    pub fn ln(&self) -> Result<Self> {
        let lo = self.lo.to_f64().unwrap_or(f64::INFINITY);
        let hi = self.hi.to_f64().unwrap_or(f64::INFINITY);
        if self.lo < BigRational::one() || !hi.is_finite() {
            return Err(Error::Domain("logarithm argument outside [1, 2^1024)".into()));
        }
        // covers the endpoint rounding to f64 and the error of ln itself
        let slack = |v: f64| 8.0 * f64::EPSILON * (v + 1.0);
        let (l, h) = (lo.ln(), hi.ln());
        let (l, h) = ((l - slack(l)).max(0.0), h + slack(h));
        Ok(Enclosure {
            lo: BigRational::from_float(l).unwrap(),
            hi: BigRational::from_float(h).unwrap(),
        })
    }

    /// True when `v` lies in `[lo (1 - rel), hi (1 + rel)]`.
    pub fn contains_within(&self, v: &BigRational, rel: f64) -> bool {
        let r = BigRational::from_float(rel).unwrap();
        let one = BigRational::one();
        let lo = &self.lo * (&one - &r);
        let hi = &self.hi * (&one + &r);
        *v >= lo && *v <= hi
    }

    /// Relative width `(hi - lo) / lo`, as an `f64`.
    pub fn relative_width(&self) -> f64 {
        if self.lo.is_zero() {
            return if self.hi.is_zero() { 0.0 } else { f64::INFINITY };
        }
        ((&self.hi - &self.lo) / &self.lo).to_f64().unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_pow2_is_exact() {
        let v = Real::pow2(-10240);
        assert_eq!(v.log2_f64(), -10240.0);
        let r = v.to_ratio();
        assert_eq!(r, BigRational::new(BigInt::one(), BigInt::one() << 10240usize));
        assert_eq!(Real::pow2(3).to_f64(), 8.0);
    }

    #[test]
    fn test_from_f64_roundtrip() {
        for x in [0.0, 1.0, 0.1, -0.1, -7e-310, 3.5e-300, 1e300, 2f64.powi(-1074)] {
            assert_eq!(Real::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn test_biguint_conversion() {
        let big = BigUint::one() << 300usize;
        assert_eq!(Real::from_biguint(&big).log2_f64(), 300.0);
        let odd = (BigUint::one() << 200usize) + 1u32;
        // rounds to 2^200 at 128 bits
        assert_eq!(Real::from_biguint(&odd), Real::pow2(200));
    }

    #[test]
    fn test_ln_and_sqrt_values() {
        let ln2 = Real::from_u64(2).ln().to_f64();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-16);
        let s = Real::from_u64(2).sqrt().to_f64();
        assert_eq!(s, std::f64::consts::SQRT_2);
    }

    #[test]
    fn test_ordering_and_clamp() {
        assert!(Real::pow2(-5) < Real::pow2(-4));
        assert_eq!(Real::from_u64(7).clamp_unit(), Real::one());
        assert_eq!(Real::zero().sub(&Real::one()).clamp_unit(), Real::zero());
    }

    #[test]
    fn test_enclosure_sqrt_brackets() {
        let e = Enclosure::from_u128(2).sqrt();
        let lo = e.lo.to_f64().unwrap();
        let hi = e.hi.to_f64().unwrap();
        assert!(lo <= std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= hi);
        assert!(e.relative_width() < 1e-90);
        // lo^2 <= 2 <= hi^2 exactly
        let two = BigRational::from_integer(BigInt::from(2));
        assert!(&e.lo * &e.lo <= two && &e.hi * &e.hi >= two);
    }

    #[test]
    fn test_enclosure_pow2_fractional() {
        let x = BigRational::from_float(-0.5f64).unwrap();
        let e = Enclosure::pow2(&x).unwrap();
        let v = std::f64::consts::FRAC_1_SQRT_2;
        assert!(e.contains_within(&BigRational::from_float(v).unwrap(), 1e-15));
        let big = BigRational::from_float(-5055.5f64).unwrap();
        let e = Enclosure::pow2(&big).unwrap();
        let r = Real::pow2(-5056).mul(&Real::from_u64(2).sqrt());
        assert!(e.contains_within(&r.to_ratio(), 1e-30));
    }

    #[test]
    fn test_enclosure_rejects_non_dyadic_exponent() {
        let x = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(Enclosure::pow2(&x).is_err());
    }

    #[test]
    fn test_exact_string_round_trip() {
        for v in [Real::zero(), Real::pow2(-10240), Real::from_f64(-0.1), Real::from_u64(3).sqrt()] {
            let s = v.to_exact_string();
            assert_eq!(Real::from_exact_string(&s).unwrap(), v, "{s}");
        }
        assert_eq!(Real::from_u64(6).to_exact_string(), "3p1");
        assert!(Real::from_exact_string("zz").is_err());
    }

    #[test]
    fn test_exp2_fraction() {
        let v = Real::exp2(-0.5).to_f64();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(Real::exp2(-5120.0), Real::pow2(-5120));
    }

    #[test]
    fn test_enclosure_ln_brackets() {
        let e = Enclosure::from_u128(2).ln().unwrap();
        let ln2 = BigRational::from_float(std::f64::consts::LN_2).unwrap();
        assert!(e.lo <= ln2 && ln2 <= e.hi);
        assert!(e.relative_width() < 1e-14);
        assert!(Enclosure::from_f64(0.5).ln().is_err());
    }
}
