//! Representations of `SL_n`, their adjoint action on `gl(V)`, torus weight
//! decompositions, the Reynolds projectors onto the centraliser `z` and onto
//! constants, and the coefficient modules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::MatrixGroupElement;
use crate::linalg::Matrix;
use crate::padic::{ord, Prime, Rational};
use crate::regular::{adjugate, MatrixPoly, Ring};
use crate::torus::{Character, LaurentPolynomial, TorusElement};

/// An endomorphism of `V` in the standard basis.
pub type EndoMatrix = Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RepTag {
    Standard,
    /// Conjugation on `gl_n`, the `n^2 - 1` dimensional adjoint
    /// representation plus the trivial line of scalars.
    Adjoint,
    /// Homogeneous binary forms of degree `d` (only for `SL_2`).
    Sym(u32),
}

impl fmt::Display for RepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepTag::Standard => write!(f, "standard"),
            RepTag::Adjoint => write!(f, "adjoint"),
            RepTag::Sym(d) => write!(f, "sym{d}"),
        }
    }
}

impl FromStr for RepTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "std" => Ok(RepTag::Standard),
            "adjoint" | "ad" => Ok(RepTag::Adjoint),
            _ => s
                .strip_prefix("sym")
                .and_then(|d| d.trim_start_matches(['_', '-']).parse().ok())
                .map(RepTag::Sym)
                .ok_or_else(|| Error::InvalidRep(format!("unknown tag {s:?}"))),
        }
    }
}

impl Serialize for RepTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RepTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RepRecord", into = "RepRecord")]
pub struct RepSpec {
    n: usize,
    tag: RepTag,
    prime: Prime,
}

#[derive(Serialize, Deserialize)]
struct RepRecord {
    n: usize,
    tag: RepTag,
    p: Prime,
    #[serde(default, skip_deserializing)]
    dimension: usize,
}

impl TryFrom<RepRecord> for RepSpec {
    type Error = Error;
    fn try_from(r: RepRecord) -> Result<Self> {
        RepSpec::new(r.n, r.tag, r.p)
    }
}

impl From<RepSpec> for RepRecord {
    fn from(r: RepSpec) -> Self {
        RepRecord {
            n: r.n,
            tag: r.tag,
            p: r.prime,
            dimension: r.dim(),
        }
    }
}

impl RepSpec {
    pub fn new(n: usize, tag: RepTag, prime: Prime) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRep("group rank must be positive".into()));
        }
        if let RepTag::Sym(_) = tag {
            if n != 2 {
                return Err(Error::InvalidRep("symmetric powers are implemented for SL_2 only".into()));
            }
        }
        Ok(RepSpec { n, tag, prime })
    }

    pub fn sl2(tag: RepTag, prime: Prime) -> Self {
        Self::new(2, tag, prime).expect("valid for SL_2")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> RepTag {
        self.tag
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn dim(&self) -> usize {
        match self.tag {
            RepTag::Standard => self.n,
            RepTag::Adjoint => self.n * self.n,
            RepTag::Sym(d) => d as usize + 1,
        }
    }

    pub fn torus_rank(&self) -> usize {
        self.n - 1
    }

    /// `ρ(g)` for a matrix over any ring, assuming `det g = 1`.
    pub fn rho<R: Ring>(&self, g: &[Vec<R>]) -> Result<Vec<Vec<R>>> {
        if g.len() != self.n || g.iter().any(|r| r.len() != self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.len(),
            });
        }
        Ok(match self.tag {
            RepTag::Standard => g.to_vec(),
            RepTag::Adjoint => {
                let n = self.n;
                let inv = adjugate(g);
                let mut out = vec![vec![g[0][0].zero_like(); n * n]; n * n];
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                out[i * n + j][k * n + l] = g[i][k].mul(&inv[l][j]);
                            }
                        }
                    }
                }
                out
            }
            RepTag::Sym(d) => sym_power(g, d as usize),
        })
    }

    pub fn rho_matrix(&self, g: &MatrixGroupElement) -> Result<Matrix> {
        self.check_prime(g.prime())?;
        Matrix::from_rows(self.rho(&g.matrix().to_rows())?)
    }

    /// `ρ` of the generic matrix, entries as polynomials in `x_ij`.
    pub fn rho_generic(&self) -> Vec<Vec<MatrixPoly>> {
        self.rho(&MatrixPoly::generic_matrix(self.n)).expect("square")
    }

    /// `ρ(x^{-1})` for the generic `x` of determinant one.
    pub fn rho_generic_inverse(&self) -> Vec<Vec<MatrixPoly>> {
        self.rho(&adjugate(&MatrixPoly::generic_matrix(self.n))).expect("square")
    }

    /// Torus weights of the standard basis of `V`.
    pub fn weights(&self) -> Vec<Character> {
        let n = self.n;
        match self.tag {
            RepTag::Standard => (0..n).map(|i| Character::coordinate(n, i)).collect(),
            RepTag::Adjoint => (0..n * n)
                .map(|v| Character::coordinate(n, v / n).sub(&Character::coordinate(n, v % n)))
                .collect(),
            RepTag::Sym(d) => (0..=d as i64).map(|k| Character(vec![d as i64 - 2 * k])).collect(),
        }
    }

    pub fn check_prime(&self, p: Prime) -> Result<()> {
        if p != self.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime.get(),
                right: p.get(),
            });
        }
        Ok(())
    }

    fn check_endo(&self, e: &EndoMatrix) -> Result<()> {
        let m = self.dim();
        if e.rows() != m || e.cols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: e.rows(),
            });
        }
        Ok(())
    }

    fn check_vector(&self, v: &[Rational]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of SL_{} over Q_{}", self.tag, self.n, self.prime)
    }
}

/// `e_k = x^{d-k} y^k ↦ (a x + c y)^{d-k} (b x + d y)^k`.
fn sym_power<R: Ring>(g: &[Vec<R>], d: usize) -> Vec<Vec<R>> {
    let zero = g[0][0].zero_like();
    let one = g[0][0].one_like();
    let first = [g[0][0].clone(), g[1][0].clone()];
    let second = [g[0][1].clone(), g[1][1].clone()];
    let mul = |p: &[R], q: &[R]| -> Vec<R> {
        let mut out = vec![zero.clone(); p.len() + q.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        out
    };
    let pow = |base: &[R], k: usize| (0..k).fold(vec![one.clone()], |acc, _| mul(&acc, base));
    let mut out = vec![vec![zero.clone(); d + 1]; d + 1];
    for k in 0..=d {
        let column = mul(&pow(&first, d - k), &pow(&second, k));
        for (i, c) in column.into_iter().enumerate() {
            out[i][k] = c;
        }
    }
    out
}

/// `Ad_ρ(g)(e) = ρ(g) e ρ(g)^{-1}`.
pub fn adjoint_action(rho: &RepSpec, g: &MatrixGroupElement, e: &EndoMatrix) -> Result<EndoMatrix> {
    rho.check_endo(e)?;
    let r = rho.rho_matrix(g)?;
    let rinv = rho.rho_matrix(&g.inverse())?;
    r.mul(e)?.mul(&rinv)
}

/// `gl(V)` split into torus weight spaces, spanned by elementary matrices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDecomposition {
    pub dimension: usize,
    pub spaces: BTreeMap<Character, Vec<(usize, usize)>>,
}

impl WeightDecomposition {
    pub fn zero_space(&self) -> &[(usize, usize)] {
        self.spaces
            .iter()
            .find(|(chi, _)| chi.is_trivial())
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    /// `z`: entries `(i, j)` with equal weights.
    pub fn in_centralizer(&self, i: usize, j: usize) -> bool {
        self.zero_space().contains(&(i, j))
    }

    pub fn total_dimension(&self) -> usize {
        self.spaces.values().map(Vec::len).sum()
    }

    /// The weight-zero component.
    pub fn project_z(&self, e: &EndoMatrix) -> Result<EndoMatrix> {
        if e.rows() != self.dimension || e.cols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: e.rows(),
            });
        }
        let mut out = Matrix::zeros(self.dimension, self.dimension);
        for &(i, j) in self.zero_space() {
            out.set(i, j, e.get(i, j).clone());
        }
        Ok(out)
    }

    /// Same projection for a matrix over any ring.
    pub fn project_z_generic<R: Ring>(&self, e: &[Vec<R>]) -> Vec<Vec<R>> {
        let zero = e[0][0].zero_like();
        let mut out = vec![vec![zero; self.dimension]; self.dimension];
        for &(i, j) in self.zero_space() {
            out[i][j] = e[i][j].clone();
        }
        out
    }

    pub fn weight_list(&self) -> Vec<(Character, usize)> {
        self.spaces.iter().map(|(c, v)| (c.clone(), v.len())).collect()
    }
}

pub fn weight_decompose(rho: &RepSpec) -> WeightDecomposition {
    let w = rho.weights();
    let m = rho.dim();
    let mut spaces: BTreeMap<Character, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..m {
        for j in 0..m {
            spaces.entry(w[i].sub(&w[j])).or_default().push((i, j));
        }
    }
    WeightDecomposition { dimension: m, spaces }
}

pub fn project_z(w: &WeightDecomposition, e: &EndoMatrix) -> Result<EndoMatrix> {
    w.project_z(e)
}

/// A torus element whose characters separate the weights: `t_i` are the
/// first primes different from `p`.
pub fn separating_torus_element(rank: usize, prime: Prime) -> TorusElement {
    let mut entries = Vec::with_capacity(rank);
    let mut q = 2u64;
    while entries.len() < rank {
        if Prime::new(q).is_ok() && q != prime.get() {
            entries.push(Rational::from_integer(q.into()));
        }
        q += 1;
    }
    TorusElement::from_free(entries, prime).expect("nonzero")
}

/// The centraliser of the torus computed directly as the fixed space of
/// conjugation by a separating element, as `(i, j)` positions whose
/// elementary matrix is fixed.
pub fn centralizer_by_fixed_space(rho: &RepSpec) -> Result<Vec<(usize, usize)>> {
    let t = MatrixGroupElement::from_torus(&separating_torus_element(rho.torus_rank(), rho.prime));
    let m = rho.dim();
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let mut e = Matrix::zeros(m, m);
            e.set(i, j, Rational::one());
            if adjoint_action(rho, &t, &e)? == e {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleScope {
    Torus,
    Group,
}

/// `C_H(Ad_ρ)` in the character basis: the span of the weight differences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffModule {
    pub characters: Vec<Character>,
    pub scope: ModuleScope,
    pub rank: usize,
    pub p: Prime,
}

impl CoeffModule {
    pub fn torus(rho: &RepSpec) -> Self {
        let chars: BTreeSet<Character> = weight_decompose(rho).spaces.into_keys().collect();
        CoeffModule {
            characters: chars.into_iter().collect(),
            scope: ModuleScope::Torus,
            rank: rho.torus_rank(),
            p: rho.prime,
        }
    }

    /// A module spanned by the given characters.
    pub fn from_characters(characters: impl IntoIterator<Item = Character>, rank: usize, p: Prime) -> Self {
        let set: BTreeSet<Character> = characters.into_iter().collect();
        CoeffModule {
            characters: set.into_iter().collect(),
            scope: ModuleScope::Torus,
            rank,
            p,
        }
    }

    pub fn dim(&self) -> usize {
        self.characters.len()
    }

    pub fn contains(&self, f: &LaurentPolynomial) -> bool {
        f.terms().all(|(chi, _)| self.characters.binary_search(chi).is_ok())
    }

    pub fn contains_constants(&self) -> bool {
        self.characters.iter().any(Character::is_trivial)
    }

    /// Coordinates in the character basis.
    pub fn coordinates(&self, f: &LaurentPolynomial) -> Result<Vec<Rational>> {
        if !self.contains(f) {
            return Err(Error::NotInModule(format!("support {:?}", f.support())));
        }
        Ok(self.characters.iter().map(|c| f.coefficient(c)).collect())
    }

    pub fn element(&self, coords: &[Rational]) -> Result<LaurentPolynomial> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        LaurentPolynomial::from_terms(self.rank, self.p, self.characters.iter().cloned().zip(coords.iter().cloned()))
    }
}

/// The invariant part: the coefficient of the trivial character.
pub fn project_k(c: &CoeffModule, f: &LaurentPolynomial) -> Result<Rational> {
    if !c.contains(f) {
        return Err(Error::NotInModule(format!("support {:?}", f.support())));
    }
    Ok(f.coefficient(&Character::zero(c.rank)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// `ω ↦ φ(ρ(ω^{-1} y ω) v)`.
    Conjugation,
    /// `ω ↦ φ(ρ(y ω) v)`.
    Plain,
}

/// Expansion of a matrix coefficient over torus characters.
pub fn coefficient_function(
    rho: &RepSpec,
    y: &MatrixGroupElement,
    v: &[Rational],
    phi: &[Rational],
    mode: CoefficientMode,
) -> Result<LaurentPolynomial> {
    rho.check_vector(v)?;
    rho.check_vector(phi)?;
    let r = rho.rho_matrix(y)?;
    let w = rho.weights();
    let m = rho.dim();
    let mut terms = Vec::new();
    for i in 0..m {
        if Zero::is_zero(&phi[i]) {
            continue;
        }
        for j in 0..m {
            if Zero::is_zero(&v[j]) || Zero::is_zero(r.get(i, j)) {
                continue;
            }
            let chi = match mode {
                CoefficientMode::Conjugation => w[j].sub(&w[i]),
                CoefficientMode::Plain => w[j].clone(),
            };
            terms.push((chi, &phi[i] * r.get(i, j) * &v[j]));
        }
    }
    LaurentPolynomial::from_terms(rho.torus_rank(), rho.prime, terms)
}

/// Direct evaluation of `φ(ρ(ω^{-1} y ω) v)`.
pub fn conjugated_coefficient(
    rho: &RepSpec,
    y: &MatrixGroupElement,
    omega: &TorusElement,
    v: &[Rational],
    phi: &[Rational],
) -> Result<Rational> {
    let w = MatrixGroupElement::from_torus(omega);
    let g = w.inverse().mul(y)?.mul(&w)?;
    let image = rho.rho_matrix(&g)?.mul_vec(v)?;
    Ok(dot(phi, &image))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `π_k` of the conjugation coefficient against `φ(π_z(ρ(y)) v)`.
pub fn reynolds_identity_check(rho: &RepSpec, y: &MatrixGroupElement, v: &[Rational], phi: &[Rational]) -> Result<bool> {
    let c = CoeffModule::torus(rho);
    let f = coefficient_function(rho, y, v, phi, CoefficientMode::Conjugation)?;
    let lhs = project_k(&c, &f)?;
    let wd = weight_decompose(rho);
    let z = wd.project_z(&rho.rho_matrix(y)?)?;
    let rhs = dot(phi, &z.mul_vec(v)?);
    Ok(lhs == rhs)
}

/// A finite bounded subset `Ω` of the diagonal torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaSet {
    elements: Vec<TorusElement>,
}

impl OmegaSet {
    pub fn new(elements: Vec<TorusElement>) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyInput)?;
        let (rank, p) = (first.rank(), first.prime());
        for e in &elements {
            if e.prime() != p {
                return Err(Error::PrimeMismatch {
                    left: p.get(),
                    right: e.prime().get(),
                });
            }
            if e.rank() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: e.rank(),
                });
            }
        }
        Ok(OmegaSet { elements })
    }

    /// `{diag(p^j, p^-j) : j ∈ range}` in `SL_2`.
    pub fn translations(prime: Prime, range: std::ops::RangeInclusive<i64>) -> Result<Self> {
        Self::new(range.map(|j| TorusElement::sl2_power(j, prime)).collect())
    }

    /// A centred run of `len` translations, `j = -(len-1)/2, ...`.
    pub fn centered(prime: Prime, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        let lo = -((len as i64 - 1) / 2);
        Self::translations(prime, lo..=lo + len as i64 - 1)
    }

    /// For `SL_n`: `diag(p^{j a_1}, ..., )` along the cocharacter `a`.
    pub fn along_cocharacter(prime: Prime, cochar: &[i64], range: std::ops::RangeInclusive<i64>) -> Result<Self> {
        if cochar.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidRep("cocharacter must have zero sum".into()));
        }
        let n = cochar.len();
        Self::new(
            range
                .map(|j| {
                    TorusElement::from_free(cochar[..n - 1].iter().map(|a| prime.pow(a * j)).collect(), prime)
                        .expect("nonzero")
                })
                .collect(),
        )
    }

    pub fn elements(&self) -> &[TorusElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn prime(&self) -> Prime {
        self.elements[0].prime()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<OmegaSet> {
        OmegaSet::new(idx.iter().map(|&i| self.elements[i].clone()).collect())
    }

    /// Smallest and largest valuation among the diagonal entries.
    pub fn valuation_range(&self) -> (i64, i64) {
        let vals: Vec<i64> = self
            .elements
            .iter()
            .flat_map(|e| e.diagonal())
            .map(|x| ord(&x, self.prime()).expect("nonzero"))
            .collect();
        (*vals.iter().min().unwrap(), *vals.iter().max().unwrap())
    }

    /// Rows indexed by `ω`, columns by the module's characters.
    pub fn evaluation_matrix(&self, c: &CoeffModule) -> Result<Matrix> {
        let mut data = Vec::with_capacity(self.len() * c.dim());
        for w in &self.elements {
            for chi in &c.characters {
                data.push(chi.eval(w)?);
            }
        }
        Matrix::new(self.len(), c.dim(), data)
    }

    pub fn to_group_elements(&self) -> Vec<MatrixGroupElement> {
        self.elements.iter().map(MatrixGroupElement::from_torus).collect()
    }
}

impl Serialize for OmegaSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_group_elements().serialize(s)
    }
}

impl<'de> Deserialize<'de> for OmegaSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let gs = Vec::<MatrixGroupElement>::deserialize(d)?;
        let ts = gs
            .iter()
            .map(|g| g.to_torus().ok_or_else(|| serde::de::Error::custom("omega elements must be diagonal")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        OmegaSet::new(ts).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarCheck {
    pub holds: bool,
    pub rank: usize,
    pub dim: usize,
    /// Indices into `Ω` of a subset whose evaluation rows form a basis.
    pub basis: Option<Vec<usize>>,
}

/// Whether evaluation at `Ω` is injective on the module.
pub fn check_star(omega: &OmegaSet, c: &CoeffModule) -> Result<StarCheck> {
    let m = omega.evaluation_matrix(c)?;
    let basis = m.row_basis();
    let holds = basis.len() == c.dim();
    Ok(StarCheck {
        holds,
        rank: basis.len(),
        dim: c.dim(),
        basis: holds.then_some(basis),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarStarCheck {
    pub holds: bool,
    /// Set when the torus has rank zero and the check is vacuous.
    pub trivial_torus: bool,
    pub complement_weights: Vec<Character>,
    pub centralizer_dim: usize,
}

/// The torus fixed space of `gl(V)` is the weight-zero block, and the
/// complement carries only nonzero weights, so it has no trivial
/// subquotient.
pub fn check_star_star(rho: &RepSpec) -> Result<StarStarCheck> {
    let wd = weight_decompose(rho);
    let complement: Vec<Character> = wd.spaces.keys().filter(|c| !c.is_trivial()).cloned().collect();
    if rho.torus_rank() == 0 {
        return Ok(StarStarCheck {
            holds: true,
            trivial_torus: true,
            complement_weights: complement,
            centralizer_dim: wd.zero_space().len(),
        });
    }
    let mut fixed = centralizer_by_fixed_space(rho)?;
    let mut zero = wd.zero_space().to_vec();
    fixed.sort();
    zero.sort();
    let sum_ok = wd.total_dimension() == rho.dim() * rho.dim();
    Ok(StarStarCheck {
        holds: fixed == zero && sum_ok && complement.iter().all(|c| !c.is_trivial()),
        trivial_torus: false,
        complement_weights: complement,
        centralizer_dim: zero.len(),
    })
}

/// `W_ρ`: the matrix entries of `ρ` as polynomials.
pub fn entry_functions(rho: &RepSpec) -> Vec<MatrixPoly> {
    rho.rho_generic().into_iter().flatten().collect()
}

/// Generators `g ↦ ρ(g)_{ca} ρ(g^{-1})_{bd}` of `C_G(Ad_ρ)`: the coefficient
/// of `E_cd` in `Ad_ρ(g)(E_ab)`.
pub fn group_coefficient_generators(rho: &RepSpec) -> Vec<MatrixPoly> {
    let r = rho.rho_generic();
    let ri = rho.rho_generic_inverse();
    let m = rho.dim();
    let mut out = Vec::with_capacity(m.pow(4));
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let f = Ring::mul(&r[c][a], &ri[b][d]);
                    if f.num_terms() > 0 {
                        out.push(f);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, ratio};
    use proptest::prelude::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn elem(i: usize, j: usize, m: usize) -> Matrix {
        let mut e = Matrix::zeros(m, m);
        e.set(i, j, rat(1));
        e
    }

    fn sl2(a: i64, b: i64, c: i64) -> Option<MatrixGroupElement> {
        if a == 0 {
            return None;
        }
        let d = (rat(1) + rat(b) * rat(c)) / rat(a);
        MatrixGroupElement::sl2(rat(a), rat(b), rat(c), d, p3()).ok()
    }

    fn reps() -> Vec<RepSpec> {
        vec![
            RepSpec::sl2(RepTag::Standard, p3()),
            RepSpec::sl2(RepTag::Adjoint, p3()),
            RepSpec::sl2(RepTag::Sym(3), p3()),
            RepSpec::new(3, RepTag::Standard, p3()).unwrap(),
        ]
    }

    #[test]
    fn tags_parse() {
        assert_eq!("sym4".parse::<RepTag>().unwrap(), RepTag::Sym(4));
        assert_eq!("adjoint".parse::<RepTag>().unwrap(), RepTag::Adjoint);
        assert!("spin".parse::<RepTag>().is_err());
        assert!(RepSpec::new(3, RepTag::Sym(2), p3()).is_err());
        let s = serde_json::to_string(&RepSpec::sl2(RepTag::Sym(2), p3())).unwrap();
        assert_eq!(s, r#"{"n":2,"tag":"sym2","p":3,"dimension":3}"#);
    }

    #[test]
    fn adjoint_examples() {
        let p = p3();
        let rho = RepSpec::sl2(RepTag::Standard, p);
        let e12 = elem(0, 1, 2);
        assert_eq!(adjoint_action(&rho, &MatrixGroupElement::identity(2, p), &e12).unwrap(), e12);
        let t = MatrixGroupElement::sl2_translation(1, p);
        assert_eq!(adjoint_action(&rho, &t, &Matrix::identity(2)).unwrap(), Matrix::identity(2));
        assert_eq!(adjoint_action(&rho, &t, &e12).unwrap(), e12.scale(&rat(9)));
        assert!(adjoint_action(&rho, &t, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn weight_examples() {
        let rho = RepSpec::sl2(RepTag::Standard, p3());
        let wd = weight_decompose(&rho);
        let list: Vec<(i64, usize)> = wd.weight_list().iter().map(|(c, k)| (c.0[0], *k)).collect();
        assert_eq!(list, vec![(-2, 1), (0, 2), (2, 1)]);
        assert_eq!(wd.zero_space(), &[(0, 0), (1, 1)]);
        assert_eq!(wd.total_dimension(), 4);
        let e = elem(0, 0, 2).add(&elem(0, 1, 2)).unwrap();
        assert_eq!(wd.project_z(&e).unwrap(), elem(0, 0, 2));
        assert!(wd.project_z(&elem(0, 1, 2)).unwrap().is_zero());
        let ad = weight_decompose(&RepSpec::sl2(RepTag::Adjoint, p3()));
        assert_eq!(ad.total_dimension(), 16);
        assert_eq!(ad.spaces.len(), 5);
    }

    #[test]
    fn sym_matches_standard_in_degree_one() {
        let g = sl2(2, 1, 1).unwrap();
        let s1 = RepSpec::sl2(RepTag::Sym(1), p3());
        assert_eq!(s1.rho_matrix(&g).unwrap(), *g.matrix());
        let s2 = RepSpec::sl2(RepTag::Sym(2), p3());
        // x^2 ↦ (2x + y)^2
        let r = s2.rho_matrix(&g).unwrap();
        assert_eq!(r.to_rows().iter().map(|row| row[0].clone()).collect::<Vec<_>>(), vec![rat(4), rat(4), rat(1)]);
    }

    #[test]
    fn centralizer_is_weight_zero() {
        for rho in reps() {
            let mut fixed = centralizer_by_fixed_space(&rho).unwrap();
            fixed.sort();
            assert_eq!(fixed, weight_decompose(&rho).zero_space().to_vec(), "{rho}");
        }
    }

    #[test]
    fn coefficient_examples() {
        let p = p3();
        let rho = RepSpec::sl2(RepTag::Standard, p);
        let id = MatrixGroupElement::identity(2, p);
        let (v, phi) = (vec![rat(2), rat(5)], vec![rat(1), rat(3)]);
        let f = coefficient_function(&rho, &id, &v, &phi, CoefficientMode::Conjugation).unwrap();
        assert_eq!(f, LaurentPolynomial::constant(rat(17), 1, p));
        let g = sl2(2, 1, 1).unwrap();
        let f = coefficient_function(&rho, &g, &v, &phi, CoefficientMode::Conjugation).unwrap();
        assert!(f.support().iter().all(|c| [-2, 0, 2].contains(&c.0[0])));
        let e1 = vec![rat(1), rat(0)];
        let e2 = vec![rat(0), rat(1)];
        let single = coefficient_function(&rho, &g, &e2, &e1, CoefficientMode::Conjugation).unwrap();
        assert_eq!(single.num_terms(), 1);
        let c = CoeffModule::torus(&rho);
        assert_eq!(c.dim(), 3);
        assert_eq!(project_k(&c, &LaurentPolynomial::constant(rat(7), 1, p)).unwrap(), rat(7));
        assert_eq!(project_k(&c, &LaurentPolynomial::monomial(rat(7), Character(vec![2]), p)).unwrap(), rat(0));
        let odd = LaurentPolynomial::monomial(rat(1), Character(vec![1]), p);
        assert!(matches!(project_k(&c, &odd), Err(Error::NotInModule(_))));
    }

    #[test]
    fn reynolds_examples() {
        let p = p3();
        let rho = RepSpec::sl2(RepTag::Standard, p);
        let (v, phi) = (vec![rat(2), rat(5)], vec![rat(1), rat(3)]);
        assert!(reynolds_identity_check(&rho, &MatrixGroupElement::identity(2, p), &v, &phi).unwrap());
        assert!(reynolds_identity_check(&rho, &MatrixGroupElement::sl2_translation(2, p), &v, &phi).unwrap());
    }

    #[test]
    fn star_examples() {
        let p = p3();
        let c = CoeffModule::torus(&RepSpec::sl2(RepTag::Standard, p));
        let id = OmegaSet::translations(p, 0..=0).unwrap();
        let s = check_star(&id, &c).unwrap();
        assert!(!s.holds);
        assert_eq!(s.rank, 1);
        let omega = OmegaSet::translations(p, 0..=2).unwrap();
        let s = check_star(&omega, &c).unwrap();
        assert!(s.holds);
        let sub = omega.subset(s.basis.as_ref().unwrap()).unwrap();
        assert!(check_star(&sub, &c).unwrap().holds);
        let ad = CoeffModule::torus(&RepSpec::sl2(RepTag::Adjoint, p));
        assert!(check_star(&OmegaSet::centered(p, 5).unwrap(), &ad).unwrap().holds);
        assert!(!check_star(&OmegaSet::centered(p, 4).unwrap(), &ad).unwrap().holds);
    }

    #[test]
    fn star_star_examples() {
        let p = p3();
        for rho in reps() {
            let s = check_star_star(&rho).unwrap();
            assert!(s.holds && !s.trivial_torus, "{rho}");
        }
        let std = check_star_star(&RepSpec::sl2(RepTag::Standard, p)).unwrap();
        assert_eq!(std.complement_weights, vec![Character(vec![-2]), Character(vec![2])]);
        let trivial = check_star_star(&RepSpec::new(1, RepTag::Standard, p).unwrap()).unwrap();
        assert!(trivial.holds && trivial.trivial_torus);
    }

    #[test]
    fn generators_of_group_module() {
        let rho = RepSpec::sl2(RepTag::Standard, p3());
        let gens = group_coefficient_generators(&rho);
        assert_eq!(gens.len(), 16);
        assert!(gens.iter().all(|f| f.homogeneous_degree() == Some(2)));
        let w = entry_functions(&RepSpec::sl2(RepTag::Adjoint, p3()));
        assert!(w.iter().all(|f| f.num_terms() == 0 || f.homogeneous_degree() == Some(2)));
    }

    fn element() -> impl Strategy<Value = MatrixGroupElement> {
        (-9i64..9, -9i64..9, -9i64..9, 0u32..3).prop_filter_map("det", |(a, b, c, k)| {
            if a == 0 {
                return None;
            }
            let aa = ratio(a, 3i64.pow(k));
            let d = (rat(1) + rat(b) * rat(c)) / &aa;
            MatrixGroupElement::sl2(aa, rat(b), rat(c), d, p3()).ok()
        })
    }

    fn rep() -> impl Strategy<Value = RepSpec> {
        prop_oneof![
            Just(RepSpec::sl2(RepTag::Standard, p3())),
            Just(RepSpec::sl2(RepTag::Adjoint, p3())),
            (0u32..4).prop_map(|d| RepSpec::sl2(RepTag::Sym(d), p3())),
        ]
    }

    fn vector(m: usize) -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-9i64..9, 1i64..4), m).prop_map(|v| v.into_iter().map(|(a, b)| ratio(a, b)).collect())
    }

    proptest! {
        #[test]
        fn rho_is_a_homomorphism(rho in rep(), g in element(), h in element()) {
            let gh = g.mul(&h).unwrap();
            let lhs = rho.rho_matrix(&gh).unwrap();
            let rhs = rho.rho_matrix(&g).unwrap().mul(&rho.rho_matrix(&h).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ad_is_a_homomorphism(rho in rep(), g in element(), h in element(), seed in vector(16)) {
            let m = rho.dim();
            let e = Matrix::new(m, m, seed.iter().cycle().take(m * m).cloned().collect()).unwrap();
            let lhs = adjoint_action(&rho, &g.mul(&h).unwrap(), &e).unwrap();
            let rhs = adjoint_action(&rho, &g, &adjoint_action(&rho, &h, &e).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn projection_is_equivariant(rho in rep(), k in -3i64..3, seed in vector(16)) {
            let m = rho.dim();
            let e = Matrix::new(m, m, seed.iter().cycle().take(m * m).cloned().collect()).unwrap();
            let wd = weight_decompose(&rho);
            let h = MatrixGroupElement::sl2_translation(k, p3());
            let z = wd.project_z(&e).unwrap();
            prop_assert_eq!(wd.project_z(&z).unwrap(), z.clone());
            prop_assert_eq!(wd.project_z(&adjoint_action(&rho, &h, &e).unwrap()).unwrap(), adjoint_action(&rho, &h, &z).unwrap());
        }

        #[test]
        fn expansion_matches_evaluation(rho in rep(), y in element(), k in -3i64..4, v in vector(4), phi in vector(4)) {
            let m = rho.dim();
            let (v, phi) = (&v[..m.min(4)], &phi[..m.min(4)]);
            prop_assume!(v.len() == m);
            let f = coefficient_function(&rho, &y, v, phi, CoefficientMode::Conjugation).unwrap();
            let w = TorusElement::sl2_power(k, p3());
            prop_assert_eq!(f.eval(&w).unwrap(), conjugated_coefficient(&rho, &y, &w, v, phi).unwrap());
            prop_assert!(CoeffModule::torus(&rho).contains(&f));
            let plain = coefficient_function(&rho, &y, v, phi, CoefficientMode::Plain).unwrap();
            let yw = y.mul(&MatrixGroupElement::from_torus(&w)).unwrap();
            let direct = dot(phi, &rho.rho_matrix(&yw).unwrap().mul_vec(v).unwrap());
            prop_assert_eq!(plain.eval(&w).unwrap(), direct);
        }

        #[test]
        fn reynolds_identity_and_conjugation_invariance(rho in rep(), y in element(), k in -3i64..4, v in vector(4), phi in vector(4)) {
            let m = rho.dim();
            prop_assume!(m <= 4);
            let (v, phi) = (&v[..m], &phi[..m]);
            prop_assert!(reynolds_identity_check(&rho, &y, v, phi).unwrap());
            let wd = weight_decompose(&rho);
            let h = MatrixGroupElement::sl2_translation(k, p3());
            let conj = h.mul(&y).unwrap().mul(&h.inverse()).unwrap();
            let a = wd.project_z(&rho.rho_matrix(&y).unwrap()).unwrap().mul_vec(v).unwrap();
            let b = wd.project_z(&rho.rho_matrix(&conj).unwrap()).unwrap().mul_vec(v).unwrap();
            prop_assert_eq!(dot(phi, &a), dot(phi, &b));
        }

        #[test]
        fn project_k_is_linear(a in vector(3), b in vector(3), s in -5i64..5) {
            let c = CoeffModule::torus(&RepSpec::sl2(RepTag::Standard, p3()));
            let f = c.element(&a).unwrap();
            let g = c.element(&b).unwrap();
            let sum = f.add(&g.scale(&rat(s))).unwrap();
            prop_assert_eq!(project_k(&c, &sum).unwrap(), project_k(&c, &f).unwrap() + rat(s) * project_k(&c, &g).unwrap());
        }

        #[test]
        fn generic_rho_matches_numeric(rho in rep(), g in element()) {
            let r = rho.rho_generic();
            let ri = rho.rho_generic_inverse();
            let num = rho.rho_matrix(&g).unwrap();
            let inv = rho.rho_matrix(&g.inverse()).unwrap();
            for i in 0..rho.dim() {
                for j in 0..rho.dim() {
                    prop_assert_eq!(&r[i][j].eval(g.matrix()).unwrap(), num.get(i, j));
                    prop_assert_eq!(&ri[i][j].eval(g.matrix()).unwrap(), inv.get(i, j));
                }
            }
        }
    }
}
