//! Slopes on the torus and the arithmetic of the Farey complex.
//!
//! A simple closed curve on the torus is determined up to homotopy by its
//! slope `p/q` in `Q ∪ {∞}`. Everything here is exact: numerators and
//! denominators are arbitrary-precision integers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A reduced slope `p/q` with `q >= 0`; `1/0` is the slope at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Slope {
    p: BigInt,
    q: BigInt,
}

impl Slope {
    /// Reduces `p/q` to canonical form. Rejects `0/0`.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        reduce(p.into(), q.into())
    }

    pub fn infinity() -> Self {
        Slope {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Slope {
            p: n.into(),
            q: BigInt::one(),
        }
    }

    /// Builds a slope from parts already known to be reduced. Only used on
    /// hot paths where the caller maintains the invariant.
    pub(crate) fn from_reduced(p: BigInt, q: BigInt) -> Self {
        debug_assert!(!q.is_negative());
        debug_assert!(p.gcd(&q).is_one());
        Slope { p, q }
    }

    pub fn numer(&self) -> &BigInt {
        &self.p
    }

    pub fn denom(&self) -> &BigInt {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// Signed determinant `p1·q2 − q1·p2`.
    pub fn cross(&self, other: &Slope) -> BigInt {
        &self.p * &other.q - &self.q * &other.p
    }

    /// Approximate real value; `+inf` for `1/0`.
    pub fn to_f64(&self) -> f64 {
        if self.is_infinity() {
            f64::INFINITY
        } else {
            big_to_f64(&self.p) / big_to_f64(&self.q)
        }
    }
}

pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Real order on `Q ∪ {∞}` with `∞` placed above every rational.
impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_infinity(), other.is_infinity()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => (&self.p * &other.q).cmp(&(&other.p * &self.q)),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseSlope(s.to_string());
        let t = s.trim();
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (t, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        reduce(p, q)
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical reduced slope for the pair `(p, q)`.
///
/// The sign lives on the numerator and every `(p, 0)` collapses to `1/0`.
pub fn reduce(p: BigInt, q: BigInt) -> Result<Slope> {
    if q.is_zero() {
        if p.is_zero() {
            return Err(Error::ZeroSlope);
        }
        return Ok(Slope::infinity());
    }
    let g = p.gcd(&q);
    let (mut p, mut q) = (p / &g, q / &g);
    if q.is_negative() {
        p = -p;
        q = -q;
    }
    Ok(Slope { p, q })
}

/// Geometric intersection number `|p·b − q·a|` of the curves `p/q` and `a/b`.
pub fn iota(s1: &Slope, s2: &Slope) -> BigUint {
    s1.cross(s2).into_parts().1
}

/// Farey sum `(p1 + p2)/(q1 + q2)` of the canonical representatives.
pub fn mediant(s1: &Slope, s2: &Slope) -> Result<Slope> {
    if s1 == s2 {
        return Err(Error::EqualSlopes(s1.to_string()));
    }
    reduce(&s1.p + &s2.p, &s1.q + &s2.q)
}

/// Both third vertices of the Farey triangles over the edge `{s1, s2}`.
///
/// For a Farey edge these are `(p+a)/(q+b)` and `(p−a)/(q−b)`; the pair is
/// independent of the sign chosen for either representative.
pub fn farey_apexes(s1: &Slope, s2: &Slope) -> Result<(Slope, Slope)> {
    if s1 == s2 {
        return Err(Error::EqualSlopes(s1.to_string()));
    }
    Ok((
        reduce(&s1.p + &s2.p, &s1.q + &s2.q)?,
        reduce(&s1.p - &s2.p, &s1.q - &s2.q)?,
    ))
}

pub fn is_farey_edge(s1: &Slope, s2: &Slope) -> bool {
    iota(s1, s2).is_one()
}

/// Run lengths `(ℓ1, …, ℓs)` of a left/right turn sequence. Every run is
/// at least 1; the empty sequence is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TurnSequence(Vec<u64>);

impl TurnSequence {
    pub fn new(runs: Vec<u64>) -> Result<Self> {
        if runs.contains(&0) {
            return Err(Error::Invariant(format!(
                "turn sequence {runs:?} has a zero-length run"
            )));
        }
        Ok(TurnSequence(runs))
    }

    pub fn empty() -> Self {
        TurnSequence(Vec::new())
    }

    pub fn runs(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Self {
        TurnSequence(self.0.iter().rev().copied().collect())
    }
}

/// Continuant `K(ℓ1, …, ℓs)`: the numerator of `ℓ1 + 1/(ℓ2 + 1/(… + 1/ℓs))`.
///
/// `K() = 1`, `K(ℓ1) = ℓ1`, `K_i = ℓ_i·K_{i−1} + K_{i−2}`.
pub fn continuant(t: &TurnSequence) -> BigUint {
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for &l in t.runs() {
        let next = &cur * l + &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// An element of `GL(2, Z)` with determinant ±1, acting by `z ↦ (az+b)/(cz+d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMap {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl UnimodularMap {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        let det = &a * &d - &b * &c;
        if det.abs() != BigInt::one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(UnimodularMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        UnimodularMap {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    /// A determinant-one map sending `s` to `1/0`, built from the extended
    /// Euclidean algorithm on `(p, q)`.
    pub fn normalizing(s: &Slope) -> Self {
        if s.is_infinity() {
            return Self::identity();
        }
        // x·p + y·q = 1, then [[x, y], [−q, p]] has determinant 1 and kills p/q.
        let ext = s.p.extended_gcd(&s.q);
        let (x, y) = if ext.gcd.is_negative() {
            (-ext.x, -ext.y)
        } else {
            (ext.x, ext.y)
        };
        UnimodularMap {
            a: x,
            b: y,
            c: -s.q.clone(),
            d: s.p.clone(),
        }
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn determinant(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.determinant();
        UnimodularMap {
            a: &self.d * &det,
            b: -&self.b * &det,
            c: -&self.c * &det,
            d: &self.a * &det,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &UnimodularMap) -> Self {
        UnimodularMap {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn apply(&self, s: &Slope) -> Slope {
        let p = &self.a * &s.p + &self.b * &s.q;
        let q = &self.c * &s.p + &self.d * &s.q;
        // An invertible integer matrix maps a primitive vector to a primitive vector.
        let (p, q) = if q.is_negative() || (q.is_zero() && p.is_negative()) {
            (-p, -q)
        } else {
            (p, q)
        };
        if q.is_zero() {
            Slope::infinity()
        } else {
            Slope::from_reduced(p, q)
        }
    }

    /// The map as an `f64` Möbius transformation on the upper half-plane.
    /// Orientation-reversing maps are composed with `z ↦ −z̄`.
    pub fn apply_point(&self, x: f64, y: f64) -> (f64, f64) {
        let (a, b, c, d) = (
            big_to_f64(&self.a),
            big_to_f64(&self.b),
            big_to_f64(&self.c),
            big_to_f64(&self.d),
        );
        let (re, im) = (c * x + d, c * y);
        let den = re * re + im * im;
        let num_re = a * x + b;
        let num_im = a * y;
        let u = (num_re * re + num_im * im) / den;
        let v = (num_im * re - num_re * im) / den;
        if self.determinant().sign() == Sign::Minus {
            (u, -v)
        } else {
            (u, v)
        }
    }
}

pub fn apply_map(m: &UnimodularMap, s: &Slope) -> Slope {
    m.apply(s)
}
