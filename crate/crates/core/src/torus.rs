//! Split tori of `SL_n`: characters, apartment points, Laurent polynomials and
//! their Gauss seminorms.
//!
//! Coordinates: the diagonal torus of `SL_n` is parametrised by
//! `t_1, ..., t_{n-1}` with `t_n = (t_1 ... t_{n-1})^{-1}`, so a character is an
//! integer vector of length `n - 1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{
    ord, parse_rational, format_rational, serde_rational_vec, valuation_of, Prime, Rational, Valuation,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn zero(rank: usize) -> Self {
        Character(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Character) -> Character {
        Character(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Character) -> Character {
        Character(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Character {
        Character(self.0.iter().map(|a| -a).collect())
    }

    /// The character `t^alpha` of a monomial in all `n` diagonal entries.
    pub fn from_monomial(alpha: &[i64]) -> Character {
        let n = alpha.len();
        let last = alpha[n - 1];
        Character(alpha[..n - 1].iter().map(|a| a - last).collect())
    }

    /// The character `t_i` of the `i`-th diagonal entry, `0 <= i < n`.
    pub fn coordinate(n: usize, i: usize) -> Character {
        if i + 1 == n {
            Character(vec![-1; n - 1])
        } else {
            let mut c = vec![0; n - 1];
            c[i] = 1;
            Character(c)
        }
    }

    /// `χ(μ)` for a torus element.
    pub fn eval(&self, mu: &TorusElement) -> Result<Rational> {
        check_rank(self.rank(), mu.rank())?;
        let mut out = Rational::one();
        for (c, x) in self.0.iter().zip(&mu.entries) {
            out *= pow_signed(x, *c);
        }
        Ok(out)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub(crate) fn pow_signed(x: &Rational, e: i64) -> Rational {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

fn check_rank(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ApartmentPoint(#[serde(with = "serde_rational_vec")] pub Vec<Rational>);

impl ApartmentPoint {
    pub fn origin(rank: usize) -> Self {
        ApartmentPoint(vec![Rational::zero(); rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn midpoint(&self, other: &ApartmentPoint) -> ApartmentPoint {
        let half = Rational::new(1.into(), 2.into());
        ApartmentPoint(self.0.iter().zip(&other.0).map(|(a, b)| (a + b) * &half).collect())
    }

    pub fn sub(&self, other: &ApartmentPoint) -> ApartmentPoint {
        ApartmentPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// `⟨χ, λ⟩`.
pub fn pairing(chi: &Character, lambda: &ApartmentPoint) -> Result<Rational> {
    check_rank(chi.rank(), lambda.rank())?;
    Ok(chi
        .0
        .iter()
        .zip(&lambda.0)
        .fold(Rational::zero(), |acc, (c, l)| acc + l * Rational::from_integer((*c).into())))
}

/// An element of the diagonal torus of `SL_n`, stored by its first `n - 1`
/// entries; the last one is determined by `det = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusElement {
    entries: Vec<Rational>,
    prime: Prime,
}

impl TorusElement {
    /// From all `n` diagonal entries; their product must be 1.
    pub fn new(diagonal: Vec<Rational>, prime: Prime) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::EmptyInput);
        }
        if diagonal.iter().any(Zero::is_zero) {
            return Err(Error::DivisionByZero);
        }
        let det: Rational = diagonal.iter().product();
        if !det.is_one() {
            return Err(Error::NotSpecialLinear(format_rational(&det)));
        }
        let n = diagonal.len();
        Ok(TorusElement {
            entries: diagonal[..n - 1].to_vec(),
            prime,
        })
    }

    /// From `t_1..t_{n-1}`, completing with `t_n`.
    pub fn from_free(entries: Vec<Rational>, prime: Prime) -> Result<Self> {
        if entries.iter().any(Zero::is_zero) {
            return Err(Error::DivisionByZero);
        }
        Ok(TorusElement { entries, prime })
    }

    pub fn identity(rank: usize, prime: Prime) -> Self {
        TorusElement {
            entries: vec![Rational::one(); rank],
            prime,
        }
    }

    /// `diag(p^k, p^-k)` in `SL_2`.
    pub fn sl2_power(k: i64, prime: Prime) -> Self {
        TorusElement {
            entries: vec![prime.pow(k)],
            prime,
        }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn free_entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        let mut d = self.entries.clone();
        let prod: Rational = self.entries.iter().product();
        d.push(prod.recip());
        d
    }

    pub fn inverse(&self) -> Self {
        TorusElement {
            entries: self.entries.iter().map(Rational::recip).collect(),
            prime: self.prime,
        }
    }

    pub fn mul(&self, other: &TorusElement) -> Self {
        TorusElement {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).collect(),
            prime: self.prime,
        }
    }

    /// `λ(μ)`, defined by `⟨χ, λ(μ)⟩ = v_p(χ(μ))`.
    pub fn cocharacter_point(&self) -> ApartmentPoint {
        ApartmentPoint(
            self.entries
                .iter()
                .map(|x| Rational::from_integer(ord(x, self.prime).expect("torus entries are nonzero").into()))
                .collect(),
        )
    }
}

/// `λ - λ(μ)`: the point whose Gauss seminorm agrees with the translate of
/// `θ(λ)` by `μ` (see [`LaurentPolynomial::translate`]).
pub fn translate_action(lambda: &ApartmentPoint, mu: &TorusElement) -> Result<ApartmentPoint> {
    check_rank(lambda.rank(), mu.rank())?;
    Ok(lambda.sub(&mu.cocharacter_point()))
}

/// A Laurent polynomial `Σ a_χ χ` over `Q`, no zero coefficients stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPolynomial {
    rank: usize,
    prime: Prime,
    terms: BTreeMap<Character, Rational>,
}

impl LaurentPolynomial {
    pub fn zero(rank: usize, prime: Prime) -> Self {
        LaurentPolynomial {
            rank,
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(a: Rational, rank: usize, prime: Prime) -> Self {
        Self::monomial(a, Character::zero(rank), prime)
    }

    pub fn monomial(a: Rational, chi: Character, prime: Prime) -> Self {
        let mut f = Self::zero(chi.rank(), prime);
        f.add_term(chi, a);
        f
    }

    pub fn from_terms(
        rank: usize,
        prime: Prime,
        terms: impl IntoIterator<Item = (Character, Rational)>,
    ) -> Result<Self> {
        let mut f = Self::zero(rank, prime);
        for (chi, a) in terms {
            check_rank(rank, chi.rank())?;
            f.add_term(chi, a);
        }
        Ok(f)
    }

    pub(crate) fn add_term(&mut self, chi: Character, a: Rational) {
        if a.is_zero() {
            return;
        }
        match self.terms.entry(chi) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += a;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(a);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Character, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, chi: &Character) -> Rational {
        self.terms.get(chi).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> Vec<Character> {
        self.terms.keys().cloned().collect()
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime.get(),
                right: other.prime.get(),
            });
        }
        check_rank(self.rank, other.rank)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (chi, a) in &other.terms {
            out.add_term(chi.clone(), a.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = Self::zero(self.rank, self.prime);
        for (c1, a1) in &self.terms {
            for (c2, a2) in &other.terms {
                out.add_term(c1.add(c2), a1 * a2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero(self.rank, self.prime);
        for (chi, a) in &self.terms {
            out.add_term(chi.clone(), a * s);
        }
        out
    }

    /// Evaluation at a torus element.
    pub fn eval(&self, mu: &TorusElement) -> Result<Rational> {
        let mut out = Rational::zero();
        for (chi, a) in &self.terms {
            out += a * chi.eval(mu)?;
        }
        Ok(out)
    }

    /// The function `t ↦ f(μ^{-1} t)`: coefficients `a_χ χ(μ)^{-1}`.
    pub fn translate(&self, mu: &TorusElement) -> Result<Self> {
        check_rank(self.rank, mu.rank())?;
        let mut out = Self::zero(self.rank, self.prime);
        for (chi, a) in &self.terms {
            out.add_term(chi.clone(), a / chi.eval(mu)?);
        }
        Ok(out)
    }

    /// `min_χ (v_p(a_χ) + ⟨χ, λ⟩)`, `+inf` for the zero polynomial.
    pub fn gauss_eval(&self, lambda: &ApartmentPoint) -> Result<Valuation> {
        check_rank(self.rank, lambda.rank())?;
        let mut best = Valuation::Infinite;
        for (chi, a) in &self.terms {
            let v = valuation_of(a, self.prime).plus_rational(&pairing(chi, lambda)?);
            if v < best {
                best = v;
            }
        }
        Ok(best)
    }

    pub fn tropicalize(&self) -> Result<MaxAffineFunction> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(MaxAffineFunction {
            pieces: self
                .terms
                .iter()
                .map(|(chi, a)| AffinePiece {
                    offset: Rational::from_integer(ord(a, self.prime).expect("nonzero coefficient").into()),
                    slope: chi.clone(),
                })
                .collect(),
        })
    }
}

impl Serialize for LaurentPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rec = PolyRecord {
            rank: self.rank,
            p: self.prime,
            terms: self
                .terms
                .iter()
                .map(|(chi, a)| TermRecord {
                    chi: chi.clone(),
                    coeff: format_rational(a),
                })
                .collect(),
        };
        rec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = PolyRecord::deserialize(d)?;
        let terms = rec
            .terms
            .into_iter()
            .map(|t| parse_rational(&t.coeff).map(|a| (t.chi, a)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        LaurentPolynomial::from_terms(rec.rank, rec.p, terms).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRecord {
    rank: usize,
    p: Prime,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    chi: Character,
    coeff: String,
}

/// One affine piece `λ ↦ offset + ⟨slope, λ⟩` of a tropicalisation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(with = "crate::padic::serde_rational")]
    pub offset: Rational,
    pub slope: Character,
}

/// `λ ↦ min_pieces (offset + ⟨slope, λ⟩)`, the valuation form of the
/// logarithm of a Gauss seminorm.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaxAffineFunction {
    pub pieces: Vec<AffinePiece>,
}

impl MaxAffineFunction {
    pub fn value(&self, lambda: &ApartmentPoint) -> Result<Valuation> {
        let mut best = Valuation::Infinite;
        for piece in &self.pieces {
            let v = Valuation::Finite(&piece.offset + pairing(&piece.slope, lambda)?);
            if v < best {
                best = v;
            }
        }
        Ok(best)
    }
}

/// Whether `g((λ0+λ1)/2) >= (g(λ0) + g(λ1))/2` for `g = gauss_eval(f, ·)`,
/// i.e. `log |f|` is midpoint convex along the segment.
pub fn check_midpoint_convexity(
    f: &LaurentPolynomial,
    lambda0: &ApartmentPoint,
    lambda1: &ApartmentPoint,
) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let g0 = f.gauss_eval(lambda0)?.expect_finite("nonzero polynomial");
    let g1 = f.gauss_eval(lambda1)?.expect_finite("nonzero polynomial");
    let gm = f.gauss_eval(&lambda0.midpoint(lambda1))?.expect_finite("nonzero polynomial");
    Ok(gm * Rational::from_integer(2.into()) >= g0 + g1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, ratio};
    use proptest::prelude::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn chi(v: &[i64]) -> Character {
        Character(v.to_vec())
    }

    fn pt(v: &[(i64, i64)]) -> ApartmentPoint {
        ApartmentPoint(v.iter().map(|&(n, d)| ratio(n, d)).collect())
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&chi(&[1, -1]), &pt(&[(1, 1), (0, 1)])).unwrap(), rat(1));
        assert_eq!(pairing(&chi(&[0, 0]), &pt(&[(5, 3), (-2, 7)])).unwrap(), rat(0));
        assert_eq!(pairing(&chi(&[2, -2]), &pt(&[(1, 2), (-1, 2)])).unwrap(), rat(2));
        assert!(pairing(&chi(&[1]), &pt(&[(1, 1), (0, 1)])).is_err());
    }

    #[test]
    fn gauss_examples() {
        let p = p3();
        let lam = pt(&[(3, 1)]);
        let c = LaurentPolynomial::constant(rat(18), 1, p);
        assert_eq!(c.gauss_eval(&lam).unwrap(), Valuation::from_int(2));
        let x = LaurentPolynomial::monomial(rat(1), chi(&[1]), p);
        assert_eq!(x.gauss_eval(&pt(&[(1, 1)])).unwrap(), Valuation::from_int(1));
        let f = LaurentPolynomial::from_terms(1, p, [(chi(&[0]), rat(1)), (chi(&[1]), rat(3))]).unwrap();
        assert_eq!(f.gauss_eval(&pt(&[(-2, 1)])).unwrap(), Valuation::from_int(-1));
        assert_eq!(LaurentPolynomial::zero(1, p).gauss_eval(&lam).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn translate_examples() {
        let p = p3();
        let lam = pt(&[(2, 3)]);
        assert_eq!(translate_action(&lam, &TorusElement::identity(1, p)).unwrap(), lam);
        let mu = TorusElement::sl2_power(1, p);
        assert_eq!(translate_action(&ApartmentPoint::origin(1), &mu).unwrap(), pt(&[(-1, 1)]));
        let unit = TorusElement::new(vec![rat(2), ratio(1, 2)], p).unwrap();
        assert_eq!(translate_action(&lam, &unit).unwrap(), lam);
        assert!(matches!(
            TorusElement::new(vec![rat(2), rat(2)], p),
            Err(Error::NotSpecialLinear(_))
        ));
    }

    #[test]
    fn tropicalize_examples() {
        let p = p3();
        let one = LaurentPolynomial::constant(rat(1), 1, p).tropicalize().unwrap();
        assert_eq!(one.pieces, vec![AffinePiece { offset: rat(0), slope: chi(&[0]) }]);
        let f = LaurentPolynomial::from_terms(1, p, [(chi(&[0]), rat(1)), (chi(&[1]), rat(3))]).unwrap();
        let t = f.tropicalize().unwrap();
        assert_eq!(
            t.pieces,
            vec![
                AffinePiece { offset: rat(0), slope: chi(&[0]) },
                AffinePiece { offset: rat(1), slope: chi(&[1]) },
            ]
        );
        assert!(matches!(LaurentPolynomial::zero(1, p).tropicalize(), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn convexity_examples() {
        let p = p3();
        let single = LaurentPolynomial::monomial(rat(9), chi(&[2]), p);
        let (a, b) = (pt(&[(-3, 1)]), pt(&[(5, 2)]));
        let ga = single.gauss_eval(&a).unwrap().expect_finite("");
        let gb = single.gauss_eval(&b).unwrap().expect_finite("");
        let gm = single.gauss_eval(&a.midpoint(&b)).unwrap().expect_finite("");
        assert_eq!(gm * rat(2), ga + gb);
        let f = LaurentPolynomial::from_terms(1, p, [(chi(&[0]), rat(1)), (chi(&[1]), rat(1))]).unwrap();
        let (l0, l1) = (pt(&[(-1, 1)]), pt(&[(1, 1)]));
        // g(l0) = -1, g(l1) = 0, g(0) = 0 > -1/2
        assert!(check_midpoint_convexity(&f, &l0, &l1).unwrap());
        assert_eq!(f.gauss_eval(&l0.midpoint(&l1)).unwrap(), Valuation::zero());
    }

    #[test]
    fn serde_round_trip() {
        let f = LaurentPolynomial::from_terms(2, p3(), [(chi(&[0, 1]), ratio(1, 3)), (chi(&[-1, 2]), rat(5))]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: LaurentPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    fn poly(rank: usize) -> impl Strategy<Value = LaurentPolynomial> {
        prop::collection::vec(
            (prop::collection::vec(-3i64..=3, rank), -40i64..40, 1i64..20),
            1..5,
        )
        .prop_map(move |ts| {
            LaurentPolynomial::from_terms(
                rank,
                p3(),
                ts.into_iter().map(|(c, n, d)| (Character(c), ratio(n, d))),
            )
            .unwrap()
        })
    }

    fn point(rank: usize) -> impl Strategy<Value = ApartmentPoint> {
        prop::collection::vec((-8i64..8, 1i64..5), rank)
            .prop_map(|v| ApartmentPoint(v.into_iter().map(|(n, d)| ratio(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn multiplicative(f in poly(2), g in poly(2), l in point(2)) {
            let fg = f.mul(&g).unwrap();
            prop_assert_eq!(fg.gauss_eval(&l).unwrap(), f.gauss_eval(&l).unwrap() + g.gauss_eval(&l).unwrap());
        }

        #[test]
        fn ultrametric(f in poly(2), g in poly(2), l in point(2)) {
            let s = f.add(&g).unwrap();
            prop_assert!(s.gauss_eval(&l).unwrap() >= f.gauss_eval(&l).unwrap().min(g.gauss_eval(&l).unwrap()));
        }

        #[test]
        fn tropical_value_matches(f in poly(2), l in point(2)) {
            prop_assume!(!f.is_zero());
            prop_assert_eq!(f.tropicalize().unwrap().value(&l).unwrap(), f.gauss_eval(&l).unwrap());
        }

        #[test]
        fn equivariance(f in poly(1), k in -4i64..4, u in 1i64..8, l in point(1)) {
            prop_assume!(u % 3 != 0);
            let mu = TorusElement::from_free(vec![p3().pow(k) * rat(u)], p3()).unwrap();
            let lhs = f.translate(&mu).unwrap().gauss_eval(&l).unwrap();
            prop_assert_eq!(lhs, f.gauss_eval(&translate_action(&l, &mu).unwrap()).unwrap());
        }

        #[test]
        fn midpoint_convex(f in poly(2), a in point(2), b in point(2)) {
            prop_assume!(!f.is_zero());
            prop_assert!(check_midpoint_convexity(&f, &a, &b).unwrap());
        }
    }
}
