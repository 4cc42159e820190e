//! Exact arithmetic over `Q` seen inside `Q_p`.
//!
//! Every quantity in the crate is an exact rational. Absolute values are never
//! materialised as floats: `|x| = p^(-v_p(x))` is carried by the valuation
//! `v_p(x)`, and comparisons of absolute values are comparisons of valuations
//! with the order reversed.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number. All matrices, coefficients and apartment
/// coordinates are built from this.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A rational prime, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as an exact rational; `e` may be negative.
    pub fn pow(self, e: i64) -> Rational {
        let base = self.to_bigint();
        let mag = num_traits::pow(base, e.unsigned_abs() as usize);
        if e >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational::new(BigInt::one(), mag)
        }
    }

    /// `p^e` as an integer, `e >= 0`.
    pub fn pow_int(self, e: u32) -> BigInt {
        num_traits::pow(self.to_bigint(), e as usize)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `v_p(n)` for a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let pb = p.to_bigint();
    let mut m = n.abs();
    let mut v = 0u64;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// Integer valuation of a nonzero rational, `None` for zero.
pub fn ord(x: &Rational, p: Prime) -> Option<i64> {
    let vn = int_valuation(x.numer(), p)? as i64;
    let vd = int_valuation(x.denom(), p).expect("denominator is nonzero") as i64;
    Some(vn - vd)
}

/// `v_p(x)` with `+inf` for zero.
pub fn valuation_of(x: &Rational, p: Prime) -> Valuation {
    match ord(x, p) {
        Some(v) => Valuation::from_int(v),
        None => Valuation::Infinite,
    }
}

/// Bit length of the larger of numerator and denominator.
pub fn bit_length(x: &Rational) -> u64 {
    x.numer().bits().max(x.denom().bits())
}

pub fn check_bit_length(x: &Rational, cap: u64) -> Result<()> {
    let bits = bit_length(x);
    if bits > cap {
        Err(Error::BitLengthExceeded { bits, cap })
    } else {
        Ok(())
    }
}

/// The representative of `b mod p^a Z_p` with finite base-`p` expansion
/// `sum_{k=v}^{a-1} d_k p^k`, `0 <= d_k < p`. Zero when `v_p(b) >= a`.
pub fn reduce_mod_p_power(b: &Rational, p: Prime, a: i64) -> Rational {
    let v = match ord(b, p) {
        None => return Rational::zero(),
        Some(v) if v >= a => return Rational::zero(),
        Some(v) => v,
    };
    let unit = b / p.pow(v);
    let modulus = p.pow_int((a - v) as u32);
    let num = unit.numer().mod_floor(&modulus);
    let den_inv = mod_inverse(unit.denom(), &modulus);
    let digits = (num * den_inv).mod_floor(&modulus);
    Rational::from_integer(digits) * p.pow(v)
}

fn mod_inverse(x: &BigInt, m: &BigInt) -> BigInt {
    let e = x.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "unit part must be invertible");
    e.x.mod_floor(m)
}

/// Valuation in `Q ∪ {+inf}`. Ordered with `Infinite` on top, so that
/// `a <= b` means `|a| >= |b|` for the absolute values they describe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
}

impl Valuation {
    pub fn zero() -> Self {
        Valuation::Finite(Rational::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Valuation::Finite(rat(v))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(q) => Some(q),
            Valuation::Infinite => None,
        }
    }

    /// Finite value, panicking on `+inf`. Use where the caller has already
    /// excluded zero.
    pub fn expect_finite(&self, what: &str) -> Rational {
        match self {
            Valuation::Finite(q) => q.clone(),
            Valuation::Infinite => panic!("{what}: valuation is +inf"),
        }
    }

    /// Exponent `e` with `|x| = p^e`, or `None` for `|x| = 0`.
    pub fn abs_exponent(&self) -> Option<Rational> {
        self.finite().map(|q| -q.clone())
    }

    /// `|a| >= |b|`.
    pub fn abs_ge(&self, other: &Valuation) -> bool {
        self <= other
    }

    /// Compare absolute values rather than valuations.
    pub fn cmp_abs(&self, other: &Valuation) -> Ordering {
        other.cmp(self)
    }

    /// Valuation of a quotient `x / y`; `y` must be nonzero.
    pub fn minus(&self, other: &Valuation) -> Valuation {
        match (self, other) {
            (_, Valuation::Infinite) => panic!("division by a zero absolute value"),
            (Valuation::Infinite, _) => Valuation::Infinite,
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a - b),
        }
    }

    pub fn plus_rational(&self, q: &Rational) -> Valuation {
        match self {
            Valuation::Infinite => Valuation::Infinite,
            Valuation::Finite(a) => Valuation::Finite(a + q),
        }
    }
}

impl Add for &Valuation {
    type Output = Valuation;
    fn add(self, rhs: &Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        &self + &rhs
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinite => write!(f, "inf"),
            Valuation::Finite(q) => write!(f, "{}", format_rational(q)),
        }
    }
}

impl FromStr for Valuation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "+inf" {
            Ok(Valuation::Infinite)
        } else {
            parse_rational(t).map(Valuation::Finite)
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Infinite => s.serialize_str("inf"),
            Valuation::Finite(q) => s.serialize_str(&format_rational(q)),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical text form used in every JSON document: `n` or `n/d` in lowest
/// terms.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Accepts `n`, `-n`, `n/d`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Serde adapters for rationals stored as `num/den` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_option_rational {
    use super::*;

    pub fn serialize<S: serde::Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_rational_rows {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// An element of `Q ⊂ Q_p`, always in lowest terms with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    value: Rational,
    prime: Prime,
}

impl PadicScalar {
    pub fn new(numerator: i64, denominator: i64, prime: Prime) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_rational(ratio(numerator, denominator), prime))
    }

    pub fn from_bigints(numerator: BigInt, denominator: BigInt, prime: Prime) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_rational(Rational::new(numerator, denominator), prime))
    }

    pub fn from_rational(value: Rational, prime: Prime) -> Self {
        // Ratio::new already reduces; values built through arithmetic stay reduced.
        PadicScalar { value, prime }
    }

    pub fn from_int(n: i64, prime: Prime) -> Self {
        Self::from_rational(rat(n), prime)
    }

    pub fn zero(prime: Prime) -> Self {
        Self::from_int(0, prime)
    }

    pub fn one(prime: Prime) -> Self {
        Self::from_int(1, prime)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn into_value(self) -> Rational {
        self.value
    }

    pub fn numerator(&self) -> &BigInt {
        self.value.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.value.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `v_p(numerator) - v_p(denominator)`, `+inf` for zero.
    pub fn valuation(&self) -> Valuation {
        valuation_of(&self.value, self.prime)
    }

    /// `|x| = p^(-v)` reported through its valuation `v`.
    pub fn abs_log(&self) -> Valuation {
        self.valuation()
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch {
                left: self.prime.get(),
                right: other.prime.get(),
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::from_rational(&self.value + &other.value, self.prime))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::from_rational(&self.value - &other.value, self.prime))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::from_rational(&self.value * &other.value, self.prime))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_rational(self.value.recip(), self.prime))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inv()?)
    }

    pub fn check_bits(&self, cap: u64) -> Result<()> {
        check_bit_length(&self.value, cap)
    }

    /// `(numerator, denominator)` as `i64` when they fit.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.numerator().to_i64()?, self.denominator().to_i64()?))
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.value))
    }
}

/// Operator forms panic on mismatched primes; use the `try_*` methods when the
/// primes come from untrusted input.
impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_add(rhs).expect("mismatched primes")
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_sub(rhs).expect("mismatched primes")
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_mul(rhs).expect("mismatched primes")
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::from_rational(-self.value.clone(), self.prime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn primes_are_checked() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(97).is_ok());
        assert!(matches!(Prime::new(1), Err(Error::NotPrime(1))));
        assert!(matches!(Prime::new(91), Err(Error::NotPrime(91))));
    }

    #[test]
    fn valuation_examples() {
        // 12 = 2^2 * 3
        assert_eq!(PadicScalar::from_int(12, p(2)).valuation(), Valuation::from_int(2));
        assert_eq!(PadicScalar::zero(p(5)).valuation(), Valuation::Infinite);
        assert_eq!(PadicScalar::new(1, 3, p(3)).unwrap().valuation(), Valuation::from_int(-1));
    }

    #[test]
    fn abs_log_examples() {
        assert_eq!(PadicScalar::from_int(9, p(3)).abs_log(), Valuation::from_int(2));
        assert_eq!(PadicScalar::one(p(3)).abs_log(), Valuation::zero());
        // 3/4 at p = 2: |x| = 4
        let x = PadicScalar::new(3, 4, p(2)).unwrap();
        assert_eq!(x.abs_log(), Valuation::from_int(-2));
        assert_eq!(x.abs_log().abs_exponent(), Some(rat(2)));
    }

    #[test]
    fn field_operations() {
        let q = p(3);
        let half = PadicScalar::new(1, 2, q).unwrap();
        assert_eq!(&half + &half, PadicScalar::one(q));
        let three = PadicScalar::from_int(3, q);
        assert_eq!(&three * &three.inv().unwrap(), PadicScalar::one(q));
        let s = PadicScalar::one(q).try_add(&three).unwrap();
        assert_eq!(s.valuation(), Valuation::zero());
        assert!(matches!(PadicScalar::zero(q).inv(), Err(Error::DivisionByZero)));
        assert!(matches!(PadicScalar::new(1, 0, q), Err(Error::DivisionByZero)));
        let other = PadicScalar::one(p(5));
        assert!(matches!(half.try_add(&other), Err(Error::PrimeMismatch { .. })));
    }

    #[test]
    fn canonical_form() {
        let x = PadicScalar::new(-6, -4, p(2)).unwrap();
        assert_eq!(x.numerator(), &BigInt::from(3));
        assert_eq!(x.denominator(), &BigInt::from(2));
    }

    #[test]
    fn valuation_order_reverses_absolute_value() {
        let a = Valuation::from_int(-1);
        let b = Valuation::from_int(2);
        assert!(a.abs_ge(&b));
        assert!(b.abs_ge(&Valuation::Infinite));
        assert_eq!(a.cmp_abs(&b), Ordering::Greater);
    }

    #[test]
    fn reduction_mod_prime_powers() {
        let q = p(3);
        // 10 = 1 + 0*3 + 1*9, mod 9 -> 1
        assert_eq!(reduce_mod_p_power(&rat(10), q, 2), rat(1));
        // 1/2 = 2 + 1*3 + ... in Z_3; mod 9 -> 5
        assert_eq!(reduce_mod_p_power(&ratio(1, 2), q, 2), rat(5));
        // 1/3 mod 3^1 stays 1/3
        assert_eq!(reduce_mod_p_power(&ratio(1, 3), q, 1), ratio(1, 3));
        assert_eq!(reduce_mod_p_power(&rat(9), q, 2), rat(0));
        // negative exponent: 7/9 mod 3^-1 = 7/9 - 2/3 ... digits below 1/3
        let r = reduce_mod_p_power(&ratio(7, 9), q, -1);
        assert_eq!(r, ratio(1, 9));
    }

    #[test]
    fn rational_text_round_trip() {
        let q = ratio(-7, 12);
        assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        assert_eq!(parse_rational("5").unwrap(), rat(5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!("inf".parse::<Valuation>().unwrap(), Valuation::Infinite);
    }
}
