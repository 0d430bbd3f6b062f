//! End-to-end IND-CCA bounds for the KEM, assembled from query budgets,
//! scheme statistics and assumed advantages.
//!
//! Every term records its inputs as exact strings and is evaluated from them
//! alone, so a stored report can be re-evaluated bit for bit. Advantages can
//! be given as `"unknown"`; such terms keep a symbolic part `c * Adv` or
//! `c * sqrt(Adv)` and the total is printed as a formula.
//!
//! Terms are evaluated twice: with [`Real`] (128-bit mantissa, wide binary
//! exponent) for the reported value, and with [`Enclosure`] (outward-rounded
//! rationals) as a cross-check.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{Enclosure, Real};
use crate::stats::{gaussian_beta_min, SEARCH_CONSTANT};

/// A non-negative integer that may exceed `u64`, written in configs as an
/// integer or as `"2^k"`, `"a*2^k"` or a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Count(pub BigUint);

impl Count {
    pub fn from_u64(v: u64) -> Self {
        Count(BigUint::from(v))
    }

    pub fn pow2(k: u32) -> Self {
        Count(BigUint::one() << k as usize)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse count {s:?}"));
        let s = s.trim();
        let (coeff, rest) = match s.split_once('*') {
            Some((a, b)) => (a.trim().parse::<BigUint>().map_err(|_| bad())?, b.trim()),
            None => (BigUint::one(), s),
        };
        if let Some(k) = rest.strip_prefix("2^") {
            let k: u32 = k.trim().parse().map_err(|_| bad())?;
            return Ok(Count(coeff << k as usize));
        }
        if s.contains('*') {
            return Err(bad());
        }
        Ok(Count(s.parse::<BigUint>().map_err(|_| bad())?))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.0;
        if v.bits() > 20 && v.count_ones() == 1 {
            write!(f, "2^{}", v.bits() - 1)
        } else {
            write!(f, "{v}")
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) if v < 1 << 20 => s.serialize_u64(v),
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Count;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a string like \"2^64\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Count, E> {
                Ok(Count::from_u64(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Count, E> {
                u64::try_from(v).map(Count::from_u64).map_err(|_| E::custom("negative count"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Count, E> {
                Count::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// An assumed adversary advantage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Advantage {
    Known(f64),
    Unknown,
}

impl Advantage {
    fn to_input(self) -> String {
        match self {
            Advantage::Known(v) => format!("{v:?}"),
            Advantage::Unknown => "unknown".into(),
        }
    }
}

impl Serialize for Advantage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Advantage::Known(v) => s.serialize_f64(*v),
            Advantage::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for Advantage {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Advantage;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a probability or \"unknown\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Advantage, E> {
                Ok(Advantage::Known(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Advantage, E> {
                Ok(Advantage::Known(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Advantage, E> {
                Ok(Advantage::Known(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Advantage, E> {
                match v {
                    "unknown" => Ok(Advantage::Unknown),
                    _ => v.parse().map(Advantage::Known).map_err(|_| E::custom(format!("bad advantage {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Rom,
    #[default]
    Qrom,
}

/// Which failure term the QROM assembly uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureRoute {
    /// `(q_D + 1) Adv_FFP-CPA` with the matching spreadness term.
    FfpCpa,
    /// Chebyshev `ε_δ` from `δ_ik` and `σ`.
    #[default]
    Chebyshev,
    /// Gaussian-tail `ε_δ` from `δ_ik` and `β`.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub failure_route: FailureRoute,
    pub q_g: Count,
    pub q_h: Count,
    pub q_d: Count,
    /// Query depth; defaults to `q_G + q_H` (sequential classical queries).
    #[serde(default)]
    pub depth: Option<Count>,
    /// Query width; defaults to 1.
    #[serde(default)]
    pub width: Option<Count>,
    pub message_space: Count,
    /// Spreadness in bits.
    pub gamma: f64,
    #[serde(default)]
    pub delta_ik: Option<f64>,
    /// The `δ_rk` of the Chebyshev `ε_δ`; defaults to `delta_ik`.
    #[serde(default)]
    pub delta_rk: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub adv_ow: Option<Advantage>,
    #[serde(default)]
    pub adv_ind: Option<Advantage>,
    #[serde(default)]
    pub adv_ffp_cpa: Option<Advantage>,
    #[serde(default)]
    pub adv_ffp_ng: Option<Advantage>,
}

impl BoundInputs {
    /// Zero budgets and no advantages; callers fill in what they have.
    pub fn new(model: Model, message_space: Count, gamma: f64) -> Self {
        BoundInputs {
            model,
            failure_route: FailureRoute::default(),
            q_g: Count::from_u64(0),
            q_h: Count::from_u64(0),
            q_d: Count::from_u64(0),
            depth: None,
            width: None,
            message_space,
            gamma,
            delta_ik: None,
            delta_rk: None,
            sigma: None,
            beta: None,
            adv_ow: None,
            adv_ind: None,
            adv_ffp_cpa: None,
            adv_ffp_ng: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: Option<f64>, what: &str| match v {
            Some(x) if !(0.0..=1.0).contains(&x) => Err(Error::Domain(format!("{what} = {x} is not a probability"))),
            _ => Ok(()),
        };
        for (a, what) in [
            (self.adv_ow, "adv_ow"),
            (self.adv_ind, "adv_ind"),
            (self.adv_ffp_cpa, "adv_ffp_cpa"),
            (self.adv_ffp_ng, "adv_ffp_ng"),
        ] {
            if let Some(Advantage::Known(x)) = a {
                prob(Some(x), what)?;
            }
        }
        prob(self.delta_ik, "delta_ik")?;
        prob(self.delta_rk, "delta_rk")?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Domain(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.message_space.is_zero() {
            return Err(Error::Domain("message space is empty".into()));
        }
        if matches!(self.sigma, Some(s) if !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::Domain("sigma must be non-negative".into()));
        }
        Ok(())
    }

    fn depth(&self) -> Count {
        self.depth.clone().unwrap_or_else(|| Count(&self.q_g.0 + &self.q_h.0))
    }

    fn width(&self) -> Count {
        self.width.clone().unwrap_or_else(|| Count::from_u64(1))
    }
}

/// Arithmetic shared by both evaluation paths.
pub trait Num: Clone {
    fn from_f64(v: f64) -> Self;
    fn from_count(v: &BigUint) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp2(x: f64) -> Result<Self>;
    fn ln(&self) -> Result<Self>;

    fn int(v: u64) -> Self {
        Self::from_count(&BigUint::from(v))
    }
}

impl Num for Real {
    fn from_f64(v: f64) -> Self {
        Real::from_f64(v)
    }
    fn from_count(v: &BigUint) -> Self {
        Real::from_biguint(v)
    }
    fn add(&self, o: &Self) -> Self {
        Real::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Real::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Real::div(self, o)
    }
    fn sqrt(&self) -> Self {
        Real::sqrt(self)
    }
    fn exp2(x: f64) -> Result<Self> {
        Ok(Real::exp2(x))
    }
    fn ln(&self) -> Result<Self> {
        Ok(Real::ln(self))
    }
}

impl Num for Enclosure {
    fn from_f64(v: f64) -> Self {
        Enclosure::from_f64(v)
    }
    fn from_count(v: &BigUint) -> Self {
        Enclosure::from_biguint(v)
    }
    fn add(&self, o: &Self) -> Self {
        Enclosure::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Enclosure::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Enclosure::div(self, o)
    }
    fn sqrt(&self) -> Self {
        Enclosure::sqrt(self)
    }
    fn exp2(x: f64) -> Result<Self> {
        Enclosure::pow2(&BigRational::from_float(x).ok_or_else(|| Error::Domain("non-finite exponent".into()))?)
    }
    fn ln(&self) -> Result<Self> {
        Enclosure::ln(self)
    }
}

/// `coefficient * Adv` or `coefficient * sqrt(Adv)` for an unknown advantage.
#[derive(Clone, Debug)]
pub struct SymbolicPart<N> {
    pub coefficient: N,
    pub variable: String,
    pub sqrt: bool,
}

#[derive(Clone, Debug)]
pub struct Value<N> {
    pub known: N,
    pub symbolic: Vec<SymbolicPart<N>>,
}

impl<N: Num> Value<N> {
    fn known(v: N) -> Self {
        Value { known: v, symbolic: Vec::new() }
    }

    /// `c * a` or `c * sqrt(a)`, symbolic when `a` is unknown.
    fn times_adv(c: N, adv: Advantage, name: &str, sqrt: bool) -> Self {
        match adv {
            Advantage::Known(a) => {
                let a = N::from_f64(a);
                Value::known(c.mul(&if sqrt { a.sqrt() } else { a }))
            }
            Advantage::Unknown => Value {
                known: N::int(0),
                symbolic: vec![SymbolicPart { coefficient: c, variable: name.into(), sqrt }],
            },
        }
    }

    fn plus(mut self, o: Value<N>) -> Self {
        self.known = self.known.add(&o.known);
        for part in o.symbolic {
            match self.symbolic.iter_mut().find(|p| p.variable == part.variable && p.sqrt == part.sqrt) {
                Some(p) => p.coefficient = p.coefficient.add(&part.coefficient),
                None => self.symbolic.push(part),
            }
        }
        self
    }
}

/// Term inputs, stored as exact strings.
type Inputs = BTreeMap<String, String>;

struct Args<'a>(&'a Inputs);

impl Args<'_> {
    fn get(&self, k: &str) -> Result<&str> {
        self.0.get(k).map(String::as_str).ok_or_else(|| Error::MissingInput(k.into()))
    }

    fn count<N: Num>(&self, k: &str) -> Result<N> {
        let v = Count::parse(self.get(k)?).map_err(|_| Error::Domain(format!("bad count for {k}")))?;
        Ok(N::from_count(&v.0))
    }

    fn real(&self, k: &str) -> Result<f64> {
        self.get(k)?.parse().map_err(|_| Error::Domain(format!("bad number for {k}")))
    }

    fn adv(&self, k: &str) -> Result<Advantage> {
        match self.get(k)? {
            "unknown" => Ok(Advantage::Unknown),
            s => s.parse().map(Advantage::Known).map_err(|_| Error::Domain(format!("bad advantage for {k}"))),
        }
    }
}

/// Formula identifiers with their human-readable forms.
pub const FORMULAS: [(&str, &str); 10] = [
    ("rom.passive.ow", "(q_G + q_H + q_D + 1) * Adv_OW"),
    ("rom.passive.ind", "3 * Adv_IND + (2 (q_G + q_H + q_D) + 1) / |M|"),
    ("rom.spread", "2 q_D 2^-gamma"),
    ("ffp-cpa", "(q_D + 1) * Adv_FFP-CPA"),
    ("qrom.passive.ind", "4 sqrt((d + q_D) Adv_IND) + 8 (q_G + q_H + q_D) / sqrt|M|"),
    ("qrom.passive.ow", "8 (d + q_D) sqrt(w Adv_OW)"),
    ("qrom.spread.ffp-cpa", "24 q_D (q_G + 4 q_D) 2^(-gamma/2)"),
    ("qrom.spread.ffp-ng", "24 q_D (q_G + 2 q_D) 2^(-gamma/2) + 4 q_D 2^-gamma"),
    ("qrom.failure.chebyshev", "(q_D + 1) (2 Adv_FFP-NG + delta_ik + (3 + 2 delta_rk) sqrt(C) q_G sigma)"),
    ("qrom.failure.gaussian", "(q_D + 1) (2 Adv_FFP-NG + delta_ik + 2 beta^-1/2 sqrt(ln(2 C sqrt(beta)) + 2 ln q_G))"),
];

pub fn formula_text(id: &str) -> Option<&'static str> {
    FORMULAS.iter().find(|(i, _)| *i == id).map(|(_, t)| *t)
}

/// Evaluates a formula from its recorded inputs.
pub fn evaluate<N: Num>(formula_id: &str, inputs: &Inputs) -> Result<Value<N>> {
    let a = Args(inputs);
    let one = N::int(1);
    Ok(match formula_id {
        "rom.passive.ow" => {
            let c = a.count::<N>("q_g")?.add(&a.count("q_h")?).add(&a.count("q_d")?).add(&one);
            Value::times_adv(c, a.adv("adv_ow")?, "Adv_OW", false)
        }
        "rom.passive.ind" => {
            let q = a.count::<N>("q_g")?.add(&a.count("q_h")?).add(&a.count("q_d")?);
            let extra = N::int(2).mul(&q).add(&one).div(&a.count("message_space")?);
            Value::times_adv(N::int(3), a.adv("adv_ind")?, "Adv_IND", false).plus(Value::known(extra))
        }
        "rom.spread" => Value::known(N::int(2).mul(&a.count("q_d")?).mul(&N::exp2(-a.real("gamma")?)?)),
        "ffp-cpa" => Value::times_adv(a.count::<N>("q_d")?.add(&one), a.adv("adv_ffp_cpa")?, "Adv_FFP-CPA", false),
        "qrom.passive.ind" => {
            let dq = a.count::<N>("depth")?.add(&a.count("q_d")?);
            let q = a.count::<N>("q_g")?.add(&a.count("q_h")?).add(&a.count("q_d")?);
            let extra = N::int(8).mul(&q).div(&a.count::<N>("message_space")?.sqrt());
            Value::times_adv(N::int(4).mul(&dq.sqrt()), a.adv("adv_ind")?, "Adv_IND", true).plus(Value::known(extra))
        }
        "qrom.passive.ow" => {
            let dq = a.count::<N>("depth")?.add(&a.count("q_d")?);
            let c = N::int(8).mul(&dq).mul(&a.count::<N>("width")?.sqrt());
            Value::times_adv(c, a.adv("adv_ow")?, "Adv_OW", true)
        }
        "qrom.spread.ffp-cpa" => {
            let qd = a.count::<N>("q_d")?;
            let inner = a.count::<N>("q_g")?.add(&N::int(4).mul(&qd));
            Value::known(N::int(24).mul(&qd).mul(&inner).mul(&N::exp2(-a.real("gamma")? / 2.0)?))
        }
        "qrom.spread.ffp-ng" => {
            let gamma = a.real("gamma")?;
            let qd = a.count::<N>("q_d")?;
            let inner = a.count::<N>("q_g")?.add(&N::int(2).mul(&qd));
            let first = N::int(24).mul(&qd).mul(&inner).mul(&N::exp2(-gamma / 2.0)?);
            Value::known(first.add(&N::int(4).mul(&qd).mul(&N::exp2(-gamma)?)))
        }
        "qrom.failure.chebyshev" => {
            let mult = a.count::<N>("q_d")?.add(&one);
            let x = N::int(SEARCH_CONSTANT).sqrt().mul(&a.count("q_g")?).mul(&N::from_f64(a.real("sigma")?));
            let lead = N::int(3).add(&N::int(2).mul(&N::from_f64(a.real("delta_rk")?)));
            let eps = N::from_f64(a.real("delta_ik")?).add(&lead.mul(&x));
            Value::known(mult.mul(&eps)).plus(Value::times_adv(
                N::int(2).mul(&mult),
                a.adv("adv_ffp_ng")?,
                "Adv_FFP-NG",
                false,
            ))
        }
        "qrom.failure.gaussian" => {
            let mult = a.count::<N>("q_d")?.add(&one);
            let beta = N::from_f64(a.real("beta")?);
            let eta2 = N::int(2 * SEARCH_CONSTANT).mul(&beta.sqrt());
            let q_g = a.count::<N>("q_g")?;
            // ln q_G is added separately so the product stays in range
            let inner = eta2.ln()?.add(&N::int(2).mul(&q_g.ln()?));
            let eps = N::from_f64(a.real("delta_ik")?).add(&N::int(2).mul(&inner.sqrt()).div(&beta.sqrt()));
            Value::known(mult.mul(&eps)).plus(Value::times_adv(
                N::int(2).mul(&mult),
                a.adv("adv_ffp_ng")?,
                "Adv_FFP-NG",
                false,
            ))
        }
        other => return Err(Error::Domain(format!("unknown formula {other}"))),
    })
}

/// A value as exact text, `f64` (may underflow to 0) and `log2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Number {
    pub exact: String,
    pub value: f64,
    /// `null` in JSON for a zero value.
    #[serde(with = "log2_serde")]
    pub log2: f64,
}

mod log2_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl Number {
    pub fn new(v: &Real) -> Self {
        Number { exact: v.to_exact_string(), value: v.to_f64(), log2: v.log2_f64() }
    }

    pub fn real(&self) -> Result<Real> {
        Real::from_exact_string(&self.exact)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value == 0.0 && self.log2 == f64::NEG_INFINITY {
            f.write_str("0")
        } else if self.value != 0.0 && self.value.abs() >= 1e-300 {
            write!(f, "{:.6e} (2^{:.3})", self.value, self.log2)
        } else {
            write!(f, "2^{:.3}", self.log2)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicNumber {
    pub coefficient: Number,
    pub variable: String,
    pub sqrt: bool,
}

impl fmt::Display for SymbolicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sqrt {
            write!(f, "{} * sqrt({})", self.coefficient, self.variable)
        } else {
            write!(f, "{} * {}", self.coefficient, self.variable)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub known: Number,
    pub symbolic: Vec<SymbolicNumber>,
}

impl TermValue {
    fn new(v: &Value<Real>) -> Self {
        TermValue {
            known: Number::new(&v.known),
            symbolic: v
                .symbolic
                .iter()
                .map(|p| SymbolicNumber { coefficient: Number::new(&p.coefficient), variable: p.variable.clone(), sqrt: p.sqrt })
                .collect(),
        }
    }

    pub fn is_known(&self) -> bool {
        self.symbolic.is_empty()
    }

    /// `known + Σ coefficient * variable`.
    pub fn formula(&self) -> String {
        let mut parts = vec![self.known.to_string()];
        parts.extend(self.symbolic.iter().map(|s| s.to_string()));
        parts.join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub formula_id: String,
    pub formula: String,
    pub inputs: Inputs,
    pub value: TermValue,
}

impl Term {
    fn evaluate(name: &str, formula_id: &str, inputs: Inputs) -> Result<Term> {
        let v = evaluate::<Real>(formula_id, &inputs)?;
        Ok(Term {
            name: name.into(),
            formula_id: formula_id.into(),
            formula: formula_text(formula_id).unwrap_or_default().into(),
            inputs,
            value: TermValue::new(&v),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub model: Model,
    /// `ind` or `ow`: which passive-security route bounds the CPA part.
    pub route: String,
    pub failure_route: FailureRoute,
    pub terms: Vec<Term>,
    /// Unclamped sum of the terms.
    pub sum: TermValue,
    /// `min(1, sum)` when fully known; 1 when marked trivial.
    pub total: Option<Number>,
    pub trivial: bool,
    pub diagnostics: Vec<String>,
}

impl BoundReport {
    fn assemble(model: Model, route: &str, failure_route: FailureRoute, terms: Vec<Term>, diagnostics: Vec<String>) -> Result<Self> {
        let trivial = diagnostics.iter().any(|d| d == CHEBYSHEV_PRECONDITION);
        let sum = sum_terms(&terms)?;
        let total = total_of(&sum, trivial)?;
        Ok(BoundReport {
            model,
            route: route.into(),
            failure_route,
            sum,
            total,
            trivial,
            terms,
            diagnostics,
        })
    }

    /// The total as text; a formula when some advantage is unknown.
    pub fn total_formula(&self) -> String {
        match &self.total {
            Some(t) => t.to_string(),
            None => format!("min(1, {})", self.sum.formula()),
        }
    }
}

fn sum_terms(terms: &[Term]) -> Result<TermValue> {
    let mut acc = Value::<Real>::known(Real::zero());
    for t in terms {
        acc = acc.plus(value_from_term(&t.value)?);
    }
    Ok(TermValue::new(&acc))
}

fn value_from_term(t: &TermValue) -> Result<Value<Real>> {
    Ok(Value {
        known: t.known.real()?,
        symbolic: t
            .symbolic
            .iter()
            .map(|s| Ok(SymbolicPart { coefficient: s.coefficient.real()?, variable: s.variable.clone(), sqrt: s.sqrt }))
            .collect::<Result<_>>()?,
    })
}

fn total_of(sum: &TermValue, trivial: bool) -> Result<Option<Number>> {
    if trivial {
        return Ok(Some(Number::new(&Real::one())));
    }
    if !sum.is_known() {
        // an unknown advantage can still be dominated by a known part >= 1
        let known = sum.known.real()?;
        return Ok((known >= Real::one()).then(|| Number::new(&Real::one())));
    }
    Ok(Some(Number::new(&sum.known.real()?.clamp_unit())))
}

/// Diagnostic attached when `√C q_G σ > 1/2`.
pub const CHEBYSHEV_PRECONDITION: &str = "chebyshev-precondition-failed";

/// All routes of one bound, and the best fully known total among them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub inputs: BoundInputs,
    pub reports: Vec<BoundReport>,
    /// Routes that could not be evaluated, with the reason.
    pub errors: Vec<String>,
    pub best_route: Option<String>,
    pub best_total: Option<Number>,
}

impl BoundSet {
    fn new(inputs: &BoundInputs, results: Vec<(&str, Result<BoundReport>)>) -> Result<Self> {
        let mut reports = Vec::new();
        let mut errors = Vec::new();
        let mut first_err = None;
        for (route, r) in results {
            match r {
                Ok(rep) => reports.push(rep),
                Err(e) => {
                    errors.push(format!("{route}: {e}"));
                    first_err.get_or_insert(e);
                }
            }
        }
        if reports.is_empty() {
            return Err(first_err.unwrap_or_else(|| Error::Invariant("no routes evaluated".into())));
        }
        let mut best: Option<(String, Real, Number)> = None;
        for r in &reports {
            if let Some(t) = &r.total {
                let v = t.real()?;
                if best.as_ref().map_or(true, |(_, b, _)| v < *b) {
                    best = Some((r.route.clone(), v, t.clone()));
                }
            }
        }
        let (best_route, best_total) = match best {
            Some((r, _, n)) => (Some(r), Some(n)),
            None => (None, None),
        };
        Ok(BoundSet { inputs: inputs.clone(), reports, errors, best_route, best_total })
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingInput(name.into()))
}

fn inputs_of(pairs: &[(&str, String)]) -> Inputs {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn f(v: f64) -> String {
    format!("{v:?}")
}

fn c(v: &Count) -> String {
    v.0.to_string()
}

fn rom_passive(inp: &BoundInputs, route: &str) -> Result<Term> {
    match route {
        "ow" => Term::evaluate(
            "passive",
            "rom.passive.ow",
            inputs_of(&[
                ("q_g", c(&inp.q_g)),
                ("q_h", c(&inp.q_h)),
                ("q_d", c(&inp.q_d)),
                ("adv_ow", need(inp.adv_ow, "adv_ow")?.to_input()),
            ]),
        ),
        _ => Term::evaluate(
            "passive",
            "rom.passive.ind",
            inputs_of(&[
                ("q_g", c(&inp.q_g)),
                ("q_h", c(&inp.q_h)),
                ("q_d", c(&inp.q_d)),
                ("message_space", c(&inp.message_space)),
                ("adv_ind", need(inp.adv_ind, "adv_ind")?.to_input()),
            ]),
        ),
    }
}

fn ffp_cpa_term(inp: &BoundInputs) -> Result<Term> {
    Term::evaluate(
        "failure",
        "ffp-cpa",
        inputs_of(&[("q_d", c(&inp.q_d)), ("adv_ffp_cpa", need(inp.adv_ffp_cpa, "adv_ffp_cpa")?.to_input())]),
    )
}

/// Classical random-oracle bound, both passive routes.
pub fn rom_main_bound(inp: &BoundInputs) -> Result<BoundSet> {
    inp.validate()?;
    let route = |r: &str| -> Result<BoundReport> {
        let terms = vec![
            rom_passive(inp, r)?,
            ffp_cpa_term(inp)?,
            Term::evaluate("spread", "rom.spread", inputs_of(&[("q_d", c(&inp.q_d)), ("gamma", f(inp.gamma))]))?,
        ];
        BoundReport::assemble(Model::Rom, r, FailureRoute::FfpCpa, terms, vec![])
    };
    BoundSet::new(inp, vec![("ow", route("ow")), ("ind", route("ind"))])
}

/// The two candidates for the passive QROM term, IND route first.
pub fn qrom_passive_terms(inp: &BoundInputs) -> Result<(Result<Term>, Result<Term>)> {
    inp.validate()?;
    let ind = need(inp.adv_ind, "adv_ind").and_then(|adv| {
        Term::evaluate(
            "passive",
            "qrom.passive.ind",
            inputs_of(&[
                ("depth", c(&inp.depth())),
                ("q_g", c(&inp.q_g)),
                ("q_h", c(&inp.q_h)),
                ("q_d", c(&inp.q_d)),
                ("message_space", c(&inp.message_space)),
                ("adv_ind", adv.to_input()),
            ]),
        )
    });
    let ow = need(inp.adv_ow, "adv_ow").and_then(|adv| {
        Term::evaluate(
            "passive",
            "qrom.passive.ow",
            inputs_of(&[
                ("depth", c(&inp.depth())),
                ("q_d", c(&inp.q_d)),
                ("width", c(&inp.width())),
                ("adv_ow", adv.to_input()),
            ]),
        )
    });
    Ok((ind, ow))
}

fn qrom_assemble(
    inp: &BoundInputs,
    failure_route: FailureRoute,
    failure: &dyn Fn() -> Result<(Vec<Term>, Vec<String>)>,
) -> Result<BoundSet> {
    let (ind, ow) = qrom_passive_terms(inp)?;
    let route = |name: &str, passive: Result<Term>| -> Result<BoundReport> {
        let mut terms = vec![passive?];
        let (more, diag) = failure()?;
        terms.extend(more);
        BoundReport::assemble(Model::Qrom, name, failure_route, terms, diag)
    };
    BoundSet::new(inp, vec![("ind", route("ind", ind)), ("ow", route("ow", ow))])
}

/// QROM bound through `FFP-CPA`.
pub fn qrom_bound_ffpcpa(inp: &BoundInputs) -> Result<BoundSet> {
    qrom_assemble(inp, FailureRoute::FfpCpa, &|| {
        Ok((
            vec![
                ffp_cpa_term(inp)?,
                Term::evaluate(
                    "spread",
                    "qrom.spread.ffp-cpa",
                    inputs_of(&[("q_g", c(&inp.q_g)), ("q_d", c(&inp.q_d)), ("gamma", f(inp.gamma))]),
                )?,
            ],
            vec![],
        ))
    })
}

fn ng_spread(inp: &BoundInputs) -> Result<Term> {
    Term::evaluate(
        "spread",
        "qrom.spread.ffp-ng",
        inputs_of(&[("q_g", c(&inp.q_g)), ("q_d", c(&inp.q_d)), ("gamma", f(inp.gamma))]),
    )
}

/// `√C q_G σ <= 1/2`, decided exactly.
pub fn chebyshev_precondition(q_g: &Count, sigma: f64) -> bool {
    // 304 q^2 σ^2 <= 1/4
    let s = BigRational::from_float(sigma).expect("finite sigma");
    let q = BigRational::from_integer(q_g.0.clone().into());
    let lhs = BigRational::from_integer(SEARCH_CONSTANT.into()) * &q * &q * &s * &s;
    lhs <= BigRational::new(1.into(), 4.into())
}

/// QROM bound through `FFP-NG` with the Chebyshev `ε_δ`.
pub fn qrom_main_bound(inp: &BoundInputs) -> Result<BoundSet> {
    qrom_assemble(inp, FailureRoute::Chebyshev, &|| {
        let delta = need(inp.delta_ik, "delta_ik")?;
        let sigma = need(inp.sigma, "sigma")?;
        let delta_rk = inp.delta_rk.unwrap_or(delta);
        let diag = if chebyshev_precondition(&inp.q_g, sigma) { vec![] } else { vec![CHEBYSHEV_PRECONDITION.to_string()] };
        let failure = Term::evaluate(
            "failure",
            "qrom.failure.chebyshev",
            inputs_of(&[
                ("q_g", c(&inp.q_g)),
                ("q_d", c(&inp.q_d)),
                ("delta_ik", f(delta)),
                ("delta_rk", f(delta_rk)),
                ("sigma", f(sigma)),
                ("adv_ffp_ng", need(inp.adv_ffp_ng, "adv_ffp_ng")?.to_input()),
            ]),
        )?;
        Ok((vec![failure, ng_spread(inp)?], diag))
    })
}

/// QROM bound through `FFP-NG` with the Gaussian-tail `ε_δ`.
pub fn qrom_main_bound_gaussian(inp: &BoundInputs) -> Result<BoundSet> {
    let beta = need(inp.beta, "beta")?;
    if !beta.is_finite() || beta < gaussian_beta_min() {
        return Err(Error::Domain(format!("beta = {beta} is below e/(2C) = {}", gaussian_beta_min())));
    }
    if inp.q_g.is_zero() {
        return Err(Error::Domain("the Gaussian failure term needs q_G >= 1".into()));
    }
    qrom_assemble(inp, FailureRoute::Gaussian, &|| {
        let failure = Term::evaluate(
            "failure",
            "qrom.failure.gaussian",
            inputs_of(&[
                ("q_g", c(&inp.q_g)),
                ("q_d", c(&inp.q_d)),
                ("delta_ik", f(need(inp.delta_ik, "delta_ik")?)),
                ("beta", f(beta)),
                ("adv_ffp_ng", need(inp.adv_ffp_ng, "adv_ffp_ng")?.to_input()),
            ]),
        )?;
        Ok((vec![failure, ng_spread(inp)?], vec![]))
    })
}

fn eps_delta(formula_id: &str, mut inputs: Inputs) -> Result<Real> {
    inputs.insert("q_d".into(), "0".into());
    inputs.insert("adv_ffp_ng".into(), "0.0".into());
    Ok(evaluate::<Real>(formula_id, &inputs)?.known)
}

/// The Chebyshev failure term `ε_δ` alone.
pub fn eps_delta_chebyshev(q_g: &Count, delta: f64, delta_rk: f64, sigma: f64) -> Result<Real> {
    eps_delta(
        "qrom.failure.chebyshev",
        inputs_of(&[("q_g", c(q_g)), ("delta_ik", f(delta)), ("delta_rk", f(delta_rk)), ("sigma", f(sigma))]),
    )
}

/// The Gaussian-tail failure term `ε_δ` alone.
pub fn eps_delta_gaussian(q_g: &Count, delta: f64, beta: f64) -> Result<Real> {
    if q_g.is_zero() || !(beta >= gaussian_beta_min()) {
        return Err(Error::Domain("the Gaussian failure term needs q_G >= 1 and beta >= e/(2C)".into()));
    }
    eps_delta("qrom.failure.gaussian", inputs_of(&[("q_g", c(q_g)), ("delta_ik", f(delta)), ("beta", f(beta))]))
}

/// Smallest `k <= max_log_q` at which the Gaussian `ε_δ` is below the
/// Chebyshev one for `q_G = 2^k`.
pub fn gaussian_crossover(delta: f64, sigma: f64, beta: f64, max_log_q: u32) -> Result<Option<u32>> {
    for k in 0..=max_log_q {
        let q = Count::pow2(k);
        if eps_delta_gaussian(&q, delta, beta)? < eps_delta_chebyshev(&q, delta, delta, sigma)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Dispatches on the model and failure route.
pub fn compute_bounds(inp: &BoundInputs) -> Result<BoundSet> {
    match (inp.model, inp.failure_route) {
        (Model::Rom, FailureRoute::FfpCpa) => rom_main_bound(inp),
        (Model::Rom, r) => Err(Error::Config(format!("failure route {r:?} needs model qrom"))),
        (Model::Qrom, FailureRoute::FfpCpa) => qrom_bound_ffpcpa(inp),
        (Model::Qrom, FailureRoute::Chebyshev) => qrom_main_bound(inp),
        (Model::Qrom, FailureRoute::Gaussian) => qrom_main_bound_gaussian(inp),
    }
}

/// Re-evaluates every term from its recorded inputs and the sum and total
/// from the terms; any difference is an invariant failure.
pub fn verify_report(r: &BoundReport) -> Result<()> {
    for t in &r.terms {
        let again = TermValue::new(&evaluate::<Real>(&t.formula_id, &t.inputs)?);
        if again != t.value {
            return Err(Error::Invariant(format!("term {} does not recompute", t.formula_id)));
        }
    }
    let sum = sum_terms(&r.terms)?;
    if sum != r.sum || total_of(&sum, r.trivial)? != r.total {
        return Err(Error::Invariant("report total does not recompute from its terms".into()));
    }
    Ok(())
}

/// Largest relative distance of a reported value from its enclosure.
fn distance(v: &Real, e: &Enclosure) -> f64 {
    let x = v.to_ratio();
    if x >= e.lo && x <= e.hi {
        return 0.0;
    }
    let (edge, gap) = if x < e.lo { (&e.lo, &e.lo - &x) } else { (&e.hi, &x - &e.hi) };
    if edge.is_zero() {
        return f64::INFINITY;
    }
    (gap / edge).to_f64().unwrap_or(f64::INFINITY)
}

/// Evaluates every term on the rational path and returns the largest
/// relative deviation of a reported number (known part or coefficient) from
/// its enclosure, together with the largest relative enclosure width.
pub fn crosscheck(r: &BoundReport) -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut width = 0.0f64;
    for t in &r.terms {
        let e = evaluate::<Enclosure>(&t.formula_id, &t.inputs)?;
        worst = worst.max(distance(&t.value.known.real()?, &e.known));
        width = width.max(e.known.relative_width());
        for (s, es) in t.value.symbolic.iter().zip(&e.symbolic) {
            worst = worst.max(distance(&s.coefficient.real()?, &es.coefficient));
            width = width.max(es.coefficient.relative_width());
        }
    }
    Ok((worst, width))
}
