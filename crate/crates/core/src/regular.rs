//! Regular functions on `SL_n` as polynomials in the `n^2` matrix entries.
//!
//! No relation `det = 1` is imposed: functions are manipulated through
//! representatives. Every function the stability machinery builds is
//! homogeneous, and for homogeneous representatives the weighted Gauss norm
//! below coincides with the value of the corresponding building seminorm.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{valuation_of, Prime, Rational, Valuation};
use crate::torus::{pairing, ApartmentPoint, Character, LaurentPolynomial};

/// Minimal commutative-ring interface shared by scalars and polynomials, so
/// representations can be built over either.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, q: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn scale(&self, q: &Rational) -> Self {
        self * q
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Determinant by cofactor expansion; fine for the small sizes used here.
pub fn det_generic<R: Ring>(m: &[Vec<R>]) -> R {
    let n = m.len();
    match n {
        0 => panic!("empty matrix"),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = m[0][0].zero_like();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let term = m[0][j].mul(&det_generic(&minor(m, 0, j)));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

fn minor<R: Ring>(m: &[Vec<R>], row: usize, col: usize) -> Vec<Vec<R>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Classical adjugate; equals the inverse on `SL_n`.
pub fn adjugate<R: Ring>(m: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![m[0][0].one_like()]];
    }
    let mut out = vec![vec![m[0][0].zero_like(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let c = det_generic(&minor(m, j, i));
            *slot = if (i + j) % 2 == 0 { c } else { c.neg() };
        }
    }
    out
}

pub fn matmul_generic<R: Ring>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..k).fold(a[0][0].zero_like(), |acc, l| {
                        if a[i][l].is_zero() || b[l][j].is_zero() {
                            acc
                        } else {
                            acc.add(&a[i][l].mul(&b[l][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

type Exponent = Vec<u16>;

/// A polynomial in the entries `x_ij` of an `n × n` matrix; variable `x_ij`
/// has index `i*n + j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixPoly {
    n: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl MatrixPoly {
    pub fn zero(n: usize) -> Self {
        MatrixPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut f = Self::zero(n);
        f.add_term(vec![0; n * n], c);
        f
    }

    pub fn var(n: usize, i: usize, j: usize) -> Self {
        let mut e = vec![0; n * n];
        e[i * n + j] = 1;
        let mut f = Self::zero(n);
        f.add_term(e, Rational::one());
        f
    }

    /// The generic matrix `(x_ij)`.
    pub fn generic_matrix(n: usize) -> Vec<Vec<MatrixPoly>> {
        (0..n).map(|i| (0..n).map(|j| Self::var(n, i, j)).collect()).collect()
    }

    pub fn trace(n: usize) -> Self {
        (0..n).fold(Self::zero(n), |acc, i| Ring::add(&acc, &Self::var(n, i, i)))
    }

    pub fn det(n: usize) -> Self {
        det_generic(&Self::generic_matrix(n))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u16>, Rational)>) -> Result<Self> {
        let mut f = Self::zero(n);
        for (e, c) in terms {
            if e.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    found: e.len(),
                });
            }
            f.add_term(e, c);
        }
        Ok(f)
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if Zero::is_zero(&c) {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if Zero::is_zero(o.get()) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u16]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree if all monomials share it.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn eval(&self, g: &Matrix) -> Result<Rational> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.rows(),
            });
        }
        let vals = g.entries();
        let mut out = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in vals.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow(x.clone(), k as usize);
                }
            }
            out += term;
        }
        Ok(out)
    }

    /// Substitute each variable by a polynomial.
    fn substitute(&self, images: &[MatrixPoly]) -> MatrixPoly {
        let mut cache: HashMap<(usize, u16), MatrixPoly> = HashMap::new();
        let mut out = MatrixPoly::zero(self.n);
        for (e, c) in &self.terms {
            let mut term = MatrixPoly::constant(self.n, c.clone());
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let power = cache
                    .entry((v, k))
                    .or_insert_with(|| (0..k).fold(MatrixPoly::constant(self.n, Rational::one()), |acc, _| acc.mul(&images[v])))
                    .clone();
                term = term.mul(&power);
            }
            out = Ring::add(&out, &term);
        }
        out
    }

    fn check_matrix(&self, g: &Matrix) -> Result<()> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.rows(),
            });
        }
        Ok(())
    }

    /// `x ↦ F(g x)`.
    pub fn left_translate(&self, g: &Matrix) -> Result<MatrixPoly> {
        self.check_matrix(g)?;
        let n = self.n;
        let images: Vec<MatrixPoly> = (0..n * n)
            .map(|v| {
                let (i, j) = (v / n, v % n);
                (0..n).fold(MatrixPoly::zero(n), |acc, k| {
                    Ring::add(&acc, &MatrixPoly::var(n, k, j).scale(g.get(i, k)))
                })
            })
            .collect();
        Ok(self.substitute(&images))
    }

    /// `x ↦ F(x g)`.
    pub fn right_translate(&self, g: &Matrix) -> Result<MatrixPoly> {
        self.check_matrix(g)?;
        let n = self.n;
        let images: Vec<MatrixPoly> = (0..n * n)
            .map(|v| {
                let (i, j) = (v / n, v % n);
                (0..n).fold(MatrixPoly::zero(n), |acc, k| {
                    Ring::add(&acc, &MatrixPoly::var(n, i, k).scale(g.get(k, j)))
                })
            })
            .collect();
        Ok(self.substitute(&images))
    }

    /// Restriction to the diagonal torus: off-diagonal entries vanish and
    /// `x_ii ↦ t_i`.
    pub fn restrict_to_torus(&self, prime: Prime) -> LaurentPolynomial {
        let n = self.n;
        let mut out = LaurentPolynomial::zero(n - 1, prime);
        for (e, c) in &self.terms {
            let off_diagonal = (0..n * n).any(|v| v / n != v % n && e[v] > 0);
            if off_diagonal {
                continue;
            }
            let alpha: Vec<i64> = (0..n).map(|i| e[i * n + i] as i64).collect();
            out.add_term(Character::from_monomial(&alpha), c.clone());
        }
        out
    }

    /// The torus character of a monomial under left multiplication: row sums
    /// `r_i`, giving `(r_i - r_n)_{i<n}`.
    pub fn row_character(n: usize, e: &[u16]) -> Character {
        let rows: Vec<i64> = (0..n).map(|i| (0..n).map(|j| e[i * n + j] as i64).sum()).collect();
        Character::from_monomial(&rows)
    }

    /// Weighted Gauss norm: `min_α (v_p(c_α) + ⟨rowchar(α), λ⟩)`.
    pub fn gauss(&self, lambda: &ApartmentPoint, prime: Prime) -> Result<Valuation> {
        let mut best = Valuation::Infinite;
        for (e, c) in &self.terms {
            let w = pairing(&Self::row_character(self.n, e), lambda)?;
            let v = valuation_of(c, prime).plus_rational(&w);
            if v < best {
                best = v;
            }
        }
        Ok(best)
    }
}

impl Ring for MatrixPoly {
    fn zero_like(&self) -> Self {
        MatrixPoly::zero(self.n)
    }

    fn one_like(&self) -> Self {
        MatrixPoly::constant(self.n, Rational::one())
    }

    fn add(&self, other: &Self) -> Self {
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (e, c) in &small.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = MatrixPoly::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    fn scale(&self, q: &Rational) -> Self {
        let mut out = MatrixPoly::zero(self.n);
        if Zero::is_zero(q) {
            return out;
        }
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c * q);
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
