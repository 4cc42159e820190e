//! The Bruhat-Tits tree of `SL_2(Q_p)`.
//!
//! A vertex is the homothety class of a lattice with basis `[[p^a, b], [0, 1]]`,
//! `a ∈ Z`, `b ∈ Z[1/p]` reduced modulo `p^a`. Equivalently it is the disk
//! `{x : v_p(x - b) >= a}` of `Q_p`; the parent of a disk is the disk of
//! radius one step larger, which makes distances and geodesics explicit.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::MatrixGroupElement;
use crate::linalg::Matrix;
use crate::padic::{ord, rat, reduce_mod_p_power, serde_rational, Prime, Rational, Valuation};
use crate::torus::ApartmentPoint;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeClass {
    a: i64,
    #[serde(with = "serde_rational")]
    b: Rational,
    p: Prime,
}

pub type VertexSet = BTreeSet<LatticeClass>;

impl LatticeClass {
    /// The class `[[p^a, b], [0, 1]]`, reducing `b` modulo `p^a`.
    pub fn new(a: i64, b: Rational, prime: Prime) -> Self {
        LatticeClass {
            a,
            b: reduce_mod_p_power(&b, prime, a),
            p: prime,
        }
    }

    /// The standard vertex `o`, class of `Z_p^2`.
    pub fn origin(prime: Prime) -> Self {
        Self::new(0, Rational::zero(), prime)
    }

    /// The vertex `diag(p^a, 1)` of the standard apartment.
    pub fn apartment(a: i64, prime: Prime) -> Self {
        Self::new(a, Rational::zero(), prime)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn basis(&self) -> Matrix {
        Matrix::from_rows(vec![vec![self.p.pow(self.a), self.b.clone()], vec![Rational::zero(), Rational::one()]])
            .expect("2x2")
    }

    pub fn on_standard_apartment(&self) -> bool {
        self.b.is_zero()
    }

    /// Apartment coordinate `a/2` of the torus point whose Gauss seminorm
    /// is attached to `diag(p^a, 1)`.
    pub fn apartment_point(&self) -> ApartmentPoint {
        ApartmentPoint(vec![Rational::new(self.a.into(), 2.into())])
    }

    /// Distance to the standard apartment.
    pub fn depth(&self) -> i64 {
        match ord(&self.b, self.p) {
            None => 0,
            Some(v) => self.a - v,
        }
    }

    /// Nearest vertex of the standard apartment.
    pub fn foot(&self) -> LatticeClass {
        match ord(&self.b, self.p) {
            None => self.clone(),
            Some(v) => LatticeClass::apartment(v, self.p),
        }
    }

    /// The ancestor disk at level `k <= a`.
    pub fn ancestor(&self, k: i64) -> LatticeClass {
        debug_assert!(k <= self.a);
        LatticeClass::new(k, self.b.clone(), self.p)
    }

    pub fn parent(&self) -> LatticeClass {
        self.ancestor(self.a - 1)
    }

    pub fn children(&self) -> Vec<LatticeClass> {
        let step = self.p.pow(self.a);
        (0..self.p.get())
            .map(|j| LatticeClass {
                a: self.a + 1,
                b: &self.b + &step * rat(j as i64),
                p: self.p,
            })
            .collect()
    }

    pub fn neighbors(&self) -> Vec<LatticeClass> {
        let mut out = vec![self.parent()];
        out.extend(self.children());
        out
    }

    fn same_prime(&self, other: &LatticeClass) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        Ok(())
    }

    /// Level of the smallest common ancestor disk.
    fn meet_level(&self, other: &LatticeClass) -> i64 {
        let diff = &self.b - &other.b;
        let mut m = self.a.min(other.a);
        if let Some(v) = ord(&diff, self.p) {
            m = m.min(v);
        }
        m
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[a={}, b={}]", self.a, self.b)
    }
}

/// Column reduction to `[[p^a, b], [0, 1]]` up to `GL_2(Z_p)` on the right and
/// scalars.
pub fn canonicalize(basis: &Matrix, prime: Prime) -> Result<LatticeClass> {
    if basis.rows() != 2 || basis.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: basis.rows(),
        });
    }
    if basis.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let (mut c0, mut c1) = (
        [basis.get(0, 0).clone(), basis.get(1, 0).clone()],
        [basis.get(0, 1).clone(), basis.get(1, 1).clone()],
    );
    // pivot: the bottom entry of least valuation goes to the second column
    let v0 = ord(&c0[1], prime);
    let v1 = ord(&c1[1], prime);
    let swap = match (v0, v1) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    };
    if swap {
        std::mem::swap(&mut c0, &mut c1);
    }
    let f = &c0[1] / &c1[1];
    let top = &c0[0] - &f * &c1[0];
    let b = &c1[0] / &c1[1];
    let x = top / &c1[1];
    let a = ord(&x, prime).expect("nonsingular");
    Ok(LatticeClass::new(a, b, prime))
}

pub fn act(g: &MatrixGroupElement, l: &LatticeClass) -> Result<LatticeClass> {
    if g.prime() != l.p {
        return Err(Error::PrimeMismatch {
            left: g.prime().get(),
            right: l.p.get(),
        });
    }
    if g.size() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: g.size(),
        });
    }
    canonicalize(&g.matrix().mul(&l.basis())?, l.p)
}

/// Distance from the local elementary divisors of the change of basis.
pub fn distance(l1: &LatticeClass, l2: &LatticeClass) -> Result<u64> {
    l1.same_prime(l2)?;
    let change = l1.basis().inverse()?.mul(&l2.basis())?;
    let sv = change.local_smith_valuations(l1.p);
    let lo = sv[0].expect_finite("invertible");
    let hi = sv[1].expect_finite("invertible");
    Ok((hi - lo).to_integer().try_into().expect("nonnegative"))
}

/// The unique path from `l1` to `l2`, both ends included.
pub fn geodesic(l1: &LatticeClass, l2: &LatticeClass) -> Result<Vec<LatticeClass>> {
    l1.same_prime(l2)?;
    let m = l1.meet_level(l2);
    let mut path: Vec<LatticeClass> = (m..=l1.a).rev().map(|k| l1.ancestor(k)).collect();
    path.extend((m + 1..=l2.a).map(|k| l2.ancestor(k)));
    Ok(path)
}

/// Smallest subtree containing the set: the union of geodesics from one
/// member to all others.
pub fn convex_hull(set: &VertexSet) -> Result<VertexSet> {
    let first = set.iter().next().ok_or(Error::EmptyInput)?;
    let mut out = VertexSet::new();
    for l in set {
        out.extend(geodesic(first, l)?);
    }
    Ok(out)
}

/// All vertices within `radius` of `center`.
pub fn ball(center: &LatticeClass, radius: u64) -> VertexSet {
    let mut seen = VertexSet::new();
    seen.insert(center.clone());
    let mut frontier = vec![center.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in v.neighbors() {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Graphviz rendering of the subgraph induced on a vertex set.
pub fn to_dot(set: &VertexSet) -> String {
    let mut s = String::from("graph tree {\n");
    let ids: Vec<&LatticeClass> = set.iter().collect();
    for (i, v) in ids.iter().enumerate() {
        s.push_str(&format!("  v{i} [label=\"a={} b={}\"];\n", v.a, v.b));
    }
    for (i, v) in ids.iter().enumerate() {
        for (j, w) in ids.iter().enumerate().skip(i + 1) {
            if w.a == v.a + 1 && &w.parent() == *v || v.a == w.a + 1 && &v.parent() == *w {
                s.push_str(&format!("  v{i} -- v{j};\n"));
            }
        }
    }
    s.push_str("}\n");
    s
}

/// The two compact groups used: the integral torus `T(Z_p)` (playing `H_o`)
/// and `SL_2(Z_p)` (the stabiliser `G_o` of `o`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactKind {
    Torus,
    Special,
}

/// A compact subgroup of `SL_2(Z_p)` given by topological generators; `level`
/// caps the congruence level used for stabiliser checks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompactGroupSpec {
    pub kind: CompactKind,
    pub level: u32,
    pub p: Prime,
}

pub const DEFAULT_LEVEL_CAP: u32 = 4;

/// Default enumeration budget for explicit orbits.
pub const ORBIT_BUDGET: usize = 200_000;

impl CompactGroupSpec {
    pub fn torus(prime: Prime) -> Self {
        CompactGroupSpec {
            kind: CompactKind::Torus,
            level: DEFAULT_LEVEL_CAP,
            p: prime,
        }
    }

    pub fn special(prime: Prime) -> Self {
        CompactGroupSpec {
            kind: CompactKind::Special,
            level: DEFAULT_LEVEL_CAP,
            p: prime,
        }
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level.max(1);
        self
    }

    /// Topological generators together with their inverses.
    pub fn generators(&self) -> Vec<MatrixGroupElement> {
        let p = self.p;
        let gens = match self.kind {
            CompactKind::Torus => unit_generators(p)
                .into_iter()
                .map(|u| torus_unit(rat(u), p))
                .collect::<Vec<_>>(),
            CompactKind::Special => vec![
                MatrixGroupElement::upper_unipotent(rat(1), p),
                MatrixGroupElement::lower_unipotent(rat(1), p),
            ],
        };
        let mut out = Vec::new();
        for g in gens {
            out.push(g.inverse());
            out.push(g);
        }
        out
    }

    /// Generators of the level-`n` congruence subgroup.
    pub fn congruence_generators(&self, n: u32) -> Vec<MatrixGroupElement> {
        let p = self.p;
        let q = Rational::from_integer(p.pow_int(n));
        let diag = torus_unit(Rational::one() + &q, p);
        match self.kind {
            CompactKind::Torus => vec![diag],
            CompactKind::Special => vec![
                MatrixGroupElement::upper_unipotent(q.clone(), p),
                MatrixGroupElement::lower_unipotent(q, p),
                diag,
            ],
        }
    }

    /// Whether every element of the group fixes `l`. Stabilisers are closed,
    /// so fixing the topological generators suffices.
    pub fn fixes(&self, l: &LatticeClass) -> Result<bool> {
        for g in self.generators() {
            if &act(&g, l)? != l {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest congruence level whose generators fix `l`, up to the cap.
    pub fn stabilizing_level(&self, l: &LatticeClass) -> Result<u32> {
        for n in 1..=self.level {
            let mut ok = true;
            for g in self.congruence_generators(n) {
                if &act(&g, l)? != l {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(n);
            }
        }
        Err(Error::LevelEscalation { cap: self.level })
    }

    /// `min_u v_p(u^2 - 1)` over units: the radius of the torus fixed tube.
    pub fn tube_radius(p: Prime) -> i64 {
        match p.get() {
            2 => 3,
            3 => 1,
            _ => 0,
        }
    }

    /// Nearest point projection onto the fixed subtree.
    pub fn project_to_fixed(&self, l: &LatticeClass) -> LatticeClass {
        match self.kind {
            CompactKind::Special => LatticeClass::origin(self.p),
            CompactKind::Torus => {
                let tau = Self::tube_radius(self.p);
                match ord(&l.b, self.p) {
                    None => l.clone(),
                    Some(v) if l.a - v <= tau => l.clone(),
                    Some(v) => l.ancestor(v + tau),
                }
            }
        }
    }
}

/// `diag(u, u^-1)`.
pub fn torus_unit(u: Rational, prime: Prime) -> MatrixGroupElement {
    let inv = u.recip();
    MatrixGroupElement::sl2(u, Rational::zero(), Rational::zero(), inv, prime).expect("det 1")
}

/// Integers whose classes topologically generate `Z_p^*`.
pub fn unit_generators(p: Prime) -> Vec<i64> {
    let q = p.get() as i64;
    if q == 2 {
        return vec![-1, 5];
    }
    let sq = q * q;
    let phi = q * (q - 1);
    let mut factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    let root = (2..sq)
        .find(|&g| g % q != 0 && factors.iter().all(|&f| mod_pow(g, phi / f, sq) != 1))
        .expect("a primitive root modulo p^2 exists");
    vec![root]
}

fn mod_pow(mut b: i64, mut e: i64, m: i64) -> i64 {
    let mut r = 1i64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as i128 * b as i128 % m as i128) as i64;
        }
        b = (b as i128 * b as i128 % m as i128) as i64;
        e >>= 1;
    }
    r
}

/// Orbit of `l` by closure under the generators. The congruence level that
/// stabilises `l` is checked first against the cap.
pub fn orbit(k: &CompactGroupSpec, l: &LatticeClass) -> Result<VertexSet> {
    orbit_with_budget(k, l, ORBIT_BUDGET)
}

pub fn orbit_with_budget(k: &CompactGroupSpec, l: &LatticeClass, budget: usize) -> Result<VertexSet> {
    if k.p != l.p {
        return Err(Error::PrimeMismatch {
            left: k.p.get(),
            right: l.p.get(),
        });
    }
    k.stabilizing_level(l)?;
    let gens = k.generators();
    let mut seen = VertexSet::new();
    seen.insert(l.clone());
    let mut queue = VecDeque::from([l.clone()]);
    while let Some(v) = queue.pop_front() {
        for g in &gens {
            let w = act(g, &v)?;
            if seen.insert(w.clone()) {
                if seen.len() > budget {
                    return Err(Error::EnumerationBudget {
                        size: seen.len() as u128,
                        budget: budget as u128,
                    });
                }
                queue.push_back(w);
            }
        }
    }
    Ok(seen)
}

/// Orbit through explicit coset representatives of the group modulo the
/// stabilising congruence level; an independent check on [`orbit`].
pub fn orbit_by_cosets(k: &CompactGroupSpec, l: &LatticeClass) -> Result<VertexSet> {
    let n = k.stabilizing_level(l)?;
    let modulus = k.p.pow_int(n);
    let m: i64 = modulus.clone().try_into().map_err(|_| Error::EnumerationBudget {
        size: u128::MAX,
        budget: ORBIT_BUDGET as u128,
    })?;
    let p = k.p.get() as i64;
    let mut out = VertexSet::new();
    match k.kind {
        CompactKind::Torus => {
            for u in (1..m).filter(|u| u % p != 0) {
                out.insert(act(&torus_unit(rat(u), k.p), l)?);
            }
        }
        CompactKind::Special => {
            let size = (m as u128).pow(3);
            if size > ORBIT_BUDGET as u128 * 10 {
                return Err(Error::EnumerationBudget {
                    size,
                    budget: ORBIT_BUDGET as u128 * 10,
                });
            }
            for g in sl2_mod_lifts(k.p, n) {
                out.insert(act(&g, l)?);
            }
        }
    }
    Ok(out)
}

/// Lifts to `SL_2(Z_(p))` of all elements of `SL_2(Z/p^n)`. Entries are the
/// residues in `[0, p^n)`, adjusted in one entry to make the determinant 1.
pub fn sl2_mod_lifts(prime: Prime, n: u32) -> Vec<MatrixGroupElement> {
    let p = prime.get() as i64;
    let m = p.pow(n);
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if a % p != 0 {
                    // d ≡ (1 + bc)/a mod m
                    let d = Rational::new((1 + b * c).into(), a.into());
                    let g = MatrixGroupElement::sl2(rat(a), rat(b), rat(c), d, prime).expect("det 1");
                    out.push(g);
                } else if b % p != 0 {
                    for d in 0..m {
                        // c' = (ad - 1)/b, which is ≡ c exactly when ad - bc ≡ 1
                        if (a * d - b * c - 1).rem_euclid(m) != 0 {
                            continue;
                        }
                        let c2 = Rational::new((a * d - 1).into(), b.into());
                        let g = MatrixGroupElement::sl2(rat(a), rat(b), c2, rat(d), prime).expect("det 1");
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// Number of elements of `SL_2(Z/p^n)`.
pub fn sl2_mod_order(p: Prime, n: u32) -> u128 {
    let q = p.get() as u128;
    q.pow(3 * n - 2) * (q * q - 1)
}

/// A vertex fixed by the group, or an edge whose midpoint is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedPoint {
    Vertex { vertex: LatticeClass },
    Midpoint { left: LatticeClass, right: LatticeClass },
}

/// A fixed point of `K` in a `K`-stable hull, first in canonical order.
pub fn fixed_point_in_hull(k: &CompactGroupSpec, hull: &VertexSet) -> Result<FixedPoint> {
    if hull.is_empty() {
        return Err(Error::EmptyInput);
    }
    let gens = k.generators();
    for v in hull {
        for g in &gens {
            if !hull.contains(&act(g, v)?) {
                return Err(Error::NotStable);
            }
        }
    }
    for v in hull {
        if k.fixes(v)? {
            return Ok(FixedPoint::Vertex { vertex: v.clone() });
        }
    }
    for v in hull {
        let parent = v.parent();
        if !hull.contains(&parent) {
            continue;
        }
        let mut stable = true;
        for g in &gens {
            let (gv, gp) = (act(g, v)?, act(g, &parent)?);
            if !(gv == *v && gp == parent || gv == parent && gp == *v) {
                stable = false;
                break;
            }
        }
        if stable {
            return Ok(FixedPoint::Midpoint {
                left: parent,
                right: v.clone(),
            });
        }
    }
    Err(Error::NoFixedPoint)
}

/// Vertices within `radius` of `o` fixed by `K`, by exhaustive ball scan.
pub fn fixed_locus_window(k: &CompactGroupSpec, radius: u64) -> Result<VertexSet> {
    let mut out = VertexSet::new();
    for v in ball(&LatticeClass::origin(k.p), radius) {
        if k.fixes(&v)? {
            out.insert(v);
        }
    }
    Ok(out)
}

/// The default compact window: the part of the `T(Z_p)`-fixed locus within
/// `1 + τ` of `o`, whose translates by `diag(p^j, p^-j)` cover the locus.
pub fn default_window(prime: Prime) -> Result<VertexSet> {
    let radius = 1 + CompactGroupSpec::tube_radius(prime) as u64;
    fixed_locus_window(&CompactGroupSpec::torus(prime), radius)
}

/// Outcome of the `Y` membership test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// The point `y^{-1} o`.
    pub point: LatticeClass,
    /// The unique point of the hull of `H_o y^{-1} o` fixed by `H_o` and
    /// nearest to `y^{-1} o`; the hull meets the fixed locus only there.
    pub fixed_point: LatticeClass,
    pub witness: Option<LatticeClass>,
    /// Diameter of the hull of the orbit.
    pub hull_diameter: u64,
}

/// Whether the hull of `H_o · y^{-1} o` meets `C`.
///
/// `C` lies in the fixed locus `F` of `H_o`. The orbit of `q = y^{-1} o` has
/// all its points projecting to the same vertex `x` of `F`, and the geodesic
/// between `q` and a translate `hq` that moves the first step from `x`
/// towards `q` passes through `x`; so the hull meets `F` exactly in `x`.
pub fn y_membership(y: &MatrixGroupElement, c: &VertexSet, h: &CompactGroupSpec) -> Result<Membership> {
    if c.is_empty() {
        return Err(Error::EmptyInput);
    }
    let q = act(&y.inverse(), &LatticeClass::origin(h.p))?;
    let x = h.project_to_fixed(&q);
    let diameter = if x == q { 0 } else { 2 * distance(&x, &q)? };
    let member = c.contains(&x);
    Ok(Membership {
        member,
        witness: member.then(|| x.clone()),
        point: q,
        fixed_point: x,
        hull_diameter: diameter,
    })
}

/// The same test through the explicit orbit and hull.
pub fn y_membership_explicit(
    y: &MatrixGroupElement,
    c: &VertexSet,
    h: &CompactGroupSpec,
) -> Result<(bool, Option<LatticeClass>, VertexSet)> {
    if c.is_empty() {
        return Err(Error::EmptyInput);
    }
    let q = act(&y.inverse(), &LatticeClass::origin(h.p))?;
    let hull = convex_hull(&orbit(h, &q)?)?;
    let witness = hull.iter().find(|v| c.contains(*v)).cloned();
    Ok((witness.is_some(), witness, hull))
}

/// `g = y z` with `z = diag(p^j, p^-j)` and `y ∈ Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub y: MatrixGroupElement,
    pub z: MatrixGroupElement,
    pub shift: i64,
    pub witness: LatticeClass,
}

/// Search `z = diag(p^j, p^-j)` with `j = 0, 1, -1, 2, ...` until `g z^{-1}`
/// lies in `Y`. Units of the torus lie in `H_o` and do not change membership,
/// so only the translation part is searched. The bound is half the distance
/// from `o` to `g^{-1} o`, plus one.
pub fn decompose_g(g: &MatrixGroupElement, c: &VertexSet) -> Result<Decomposition> {
    let p = g.prime();
    let h = CompactGroupSpec::torus(p);
    let q = act(&g.inverse(), &LatticeClass::origin(p))?;
    let bound = distance(&LatticeClass::origin(p), &q)? as i64 / 2 + 1;
    for step in 0..=2 * bound {
        let j = if step % 2 == 1 { (step + 1) / 2 } else { -(step / 2) };
        let z = MatrixGroupElement::sl2_translation(j, p);
        let y = g.mul(&z.inverse())?;
        let m = y_membership(&y, c, &h)?;
        if let Some(w) = m.witness {
            return Ok(Decomposition {
                y,
                z,
                shift: j,
                witness: w,
            });
        }
    }
    let x = h.project_to_fixed(&q);
    Err(Error::SearchExhausted {
        bound,
        diameter: if x == q { 0 } else { 2 * distance(&x, &q)? },
    })
}

/// Valuation of the `(i, j)` entry, used by samplers to bound inputs.
pub fn entry_valuation(g: &MatrixGroupElement, i: usize, j: usize) -> Valuation {
    crate::padic::valuation_of(g.entry(i, j), g.prime())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::ratio;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn m(rows: [[Rational; 2]; 2]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Disk-model distance: `a1 + a2 - 2 min(a1, a2, v(b1 - b2))`.
    fn disk_distance(l1: &LatticeClass, l2: &LatticeClass) -> u64 {
        (l1.a + l2.a - 2 * l1.meet_level(l2)) as u64
    }

    #[test]
    fn canonical_forms() {
        let p = p3();
        let o = canonicalize(&Matrix::identity(2), p).unwrap();
        assert_eq!(o, LatticeClass::origin(p));
        let a = canonicalize(&Matrix::diagonal(&[rat(9), rat(3)]), p).unwrap();
        assert_eq!(a, canonicalize(&Matrix::diagonal(&[rat(3), rat(1)]), p).unwrap());
        assert_eq!(a, LatticeClass::apartment(1, p));
        let u = m([[rat(1), rat(1)], [rat(0), rat(1)]]);
        let b = canonicalize(&u.mul(&Matrix::diagonal(&[rat(3), rat(1)])).unwrap(), p).unwrap();
        assert_eq!((b.a(), b.b().clone()), (1, rat(1)));
        assert!(matches!(canonicalize(&Matrix::zeros(2, 2), p), Err(Error::Singular)));
        // diag(1, p) is homothetic to diag(p^-1, 1)
        assert_eq!(canonicalize(&Matrix::diagonal(&[rat(1), rat(3)]), p).unwrap().a(), -1);
    }

    #[test]
    fn distances() {
        let p = p3();
        let o = LatticeClass::origin(p);
        assert_eq!(distance(&o, &o).unwrap(), 0);
        assert_eq!(distance(&o, &LatticeClass::apartment(1, p)).unwrap(), 1);
        assert_eq!(distance(&o, &LatticeClass::apartment(2, p)).unwrap(), 2);
        let q = LatticeClass::origin(Prime::new(5).unwrap());
        assert!(matches!(distance(&o, &q), Err(Error::PrimeMismatch { .. })));
    }

    #[test]
    fn geodesics() {
        let p = p3();
        let o = LatticeClass::origin(p);
        assert_eq!(geodesic(&o, &o).unwrap(), vec![o.clone()]);
        let far = LatticeClass::apartment(2, p);
        assert_eq!(
            geodesic(&o, &far).unwrap(),
            vec![o.clone(), LatticeClass::apartment(1, p), far.clone()]
        );
    }

    #[test]
    fn action_examples() {
        let p = p3();
        let o = LatticeClass::origin(p);
        assert_eq!(act(&MatrixGroupElement::identity(2, p), &o).unwrap(), o);
        let t = MatrixGroupElement::sl2_translation(1, p);
        let to = act(&t, &o).unwrap();
        assert_eq!(to, LatticeClass::apartment(2, p));
        assert_eq!(distance(&o, &to).unwrap(), 2);
    }

    #[test]
    fn orbit_examples() {
        let p = p3();
        let o = LatticeClass::origin(p);
        for k in [CompactGroupSpec::torus(p), CompactGroupSpec::special(p)] {
            assert_eq!(orbit(&k, &o).unwrap(), VertexSet::from([o.clone()]));
        }
        let on_apartment = LatticeClass::apartment(-2, p);
        assert_eq!(
            orbit(&CompactGroupSpec::torus(p), &on_apartment).unwrap(),
            VertexSet::from([on_apartment.clone()])
        );
        // SL_2(Z_p) is transitive on the sphere of radius 1
        let k = CompactGroupSpec::special(p);
        let s = orbit(&k, &LatticeClass::apartment(1, p)).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s, orbit_by_cosets(&k, &LatticeClass::apartment(1, p)).unwrap());
        // torus orbit off the apartment: the squares of (Z/27)^*
        let t = CompactGroupSpec::torus(p);
        let v = LatticeClass::new(3, rat(1), p);
        let ot = orbit(&t, &v).unwrap();
        assert_eq!(ot, orbit_by_cosets(&t, &v).unwrap());
        assert_eq!(ot.len(), 9);
    }

    #[test]
    fn level_escalation() {
        let p = p3();
        let k = CompactGroupSpec::special(p).with_level(2);
        let far = LatticeClass::apartment(5, p);
        assert!(matches!(orbit(&k, &far), Err(Error::LevelEscalation { cap: 2 })));
        assert_eq!(CompactGroupSpec::special(p).stabilizing_level(&LatticeClass::apartment(2, p)).unwrap(), 2);
    }

    #[test]
    fn hulls() {
        let p = p3();
        let o = LatticeClass::origin(p);
        let single = VertexSet::from([o.clone()]);
        assert_eq!(convex_hull(&single).unwrap(), single);
        let far = LatticeClass::apartment(2, p);
        let pair = VertexSet::from([o.clone(), far.clone()]);
        assert_eq!(convex_hull(&pair).unwrap(), geodesic(&o, &far).unwrap().into_iter().collect());
        assert!(matches!(convex_hull(&VertexSet::new()), Err(Error::EmptyInput)));
    }

    #[test]
    fn tube_radius_matches_units() {
        for q in [2u64, 3, 5, 7, 11] {
            let p = Prime::new(q).unwrap();
            let m = p.pow_int(6);
            let mm: i64 = m.try_into().unwrap();
            let tau = (1..mm.min(3000))
                .filter(|u| u % q as i64 != 0)
                .map(|u| ord(&rat(u * u - 1), p).unwrap_or(99))
                .min()
                .unwrap();
            assert_eq!(tau, CompactGroupSpec::tube_radius(p), "p = {q}");
        }
    }

    #[test]
    fn fixed_locus_examples() {
        let p = p3();
        let t = CompactGroupSpec::torus(p);
        assert_eq!(fixed_locus_window(&t, 0).unwrap(), VertexSet::from([LatticeClass::origin(p)]));
        // exhaustive scan: 5 apartment vertices plus 6 at depth 1
        let w = fixed_locus_window(&t, 2).unwrap();
        assert_eq!(w.len(), 11);
        assert_eq!(w.iter().filter(|v| v.on_standard_apartment()).count(), 5);
        let s = CompactGroupSpec::special(p);
        assert_eq!(fixed_locus_window(&s, 3).unwrap(), VertexSet::from([LatticeClass::origin(p)]));
        let p5 = Prime::new(5).unwrap();
        assert_eq!(fixed_locus_window(&CompactGroupSpec::torus(p5), 2).unwrap().len(), 5);
        assert_eq!(default_window(p5).unwrap().len(), 3);
    }

    #[test]
    fn membership_examples() {
        let p = p3();
        let c = default_window(p).unwrap();
        let h = CompactGroupSpec::torus(p);
        let id = MatrixGroupElement::identity(2, p);
        let m = y_membership(&id, &c, &h).unwrap();
        assert!(m.member);
        assert_eq!(m.witness, Some(LatticeClass::origin(p)));
        let far = MatrixGroupElement::sl2_translation(4, p);
        assert!(!y_membership(&far, &c, &h).unwrap().member);
        assert!(!y_membership_explicit(&far, &c, &h).unwrap().0);
    }

    #[test]
    fn decomposition_example() {
        let p = p3();
        let c = default_window(p).unwrap();
        let g = MatrixGroupElement::sl2_translation(3, p);
        let d = decompose_g(&g, &c).unwrap();
        assert_eq!(d.y.mul(&d.z).unwrap(), g);
        assert!(y_membership(&d.y, &c, &CompactGroupSpec::torus(p)).unwrap().member);
        let id = decompose_g(&MatrixGroupElement::identity(2, p), &c).unwrap();
        assert!(id.y.is_identity() && id.z.is_identity());
    }

    #[test]
    fn fixed_point_examples() {
        let p = p3();
        let t = CompactGroupSpec::torus(p);
        let o = LatticeClass::origin(p);
        assert_eq!(
            fixed_point_in_hull(&t, &VertexSet::from([o.clone()])).unwrap(),
            FixedPoint::Vertex { vertex: o.clone() }
        );
        let seg: VertexSet = geodesic(&LatticeClass::apartment(-1, p), &LatticeClass::apartment(2, p))
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(
            fixed_point_in_hull(&t, &seg).unwrap(),
            FixedPoint::Vertex { vertex: LatticeClass::apartment(-1, p) }
        );
        // an edge flipped by the group: [[0,1],[-1,0]] swaps o and diag(p,1)?
        // not in SL_2(Z_p); instead check a non-stable set is rejected
        let lone = VertexSet::from([LatticeClass::new(3, rat(1), p)]);
        assert!(matches!(fixed_point_in_hull(&t, &lone), Err(Error::NotStable)));
    }

    #[test]
    fn serde_vertex() {
        let v = LatticeClass::new(2, ratio(1, 3), p3());
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"a":2,"b":"1/3","p":3}"#);
        assert_eq!(serde_json::from_str::<LatticeClass>(&s).unwrap(), v);
    }

    use proptest::prelude::*;

    fn vertex() -> impl Strategy<Value = LatticeClass> {
        (-4i64..5, -30i64..30, 0u32..3).prop_map(|(a, n, k)| LatticeClass::new(a, ratio(n, 3i64.pow(k)), p3()))
    }

    fn element() -> impl Strategy<Value = MatrixGroupElement> {
        (-20i64..20, -20i64..20, -20i64..20, 0u32..3, 0u32..3).prop_filter_map("det", |(a, b, c, s, t)| {
            if a == 0 {
                return None;
            }
            let p = p3();
            let aa = ratio(a, 3i64.pow(s));
            let bb = ratio(b, 1) * p.pow(t as i64 - 1);
            let cc = rat(c);
            let d = (Rational::one() + &bb * &cc) / &aa;
            MatrixGroupElement::sl2(aa, bb, cc, d, p).ok()
        })
    }

    proptest! {
        #[test]
        fn smith_distance_matches_disks(x in vertex(), y in vertex()) {
            let d = distance(&x, &y).unwrap();
            prop_assert_eq!(d, disk_distance(&x, &y));
            let path = geodesic(&x, &y).unwrap();
            prop_assert_eq!(path.len() as u64, d + 1);
            for w in path.windows(2) {
                prop_assert_eq!(distance(&w[0], &w[1]).unwrap(), 1);
            }
        }

        #[test]
        fn action_is_isometric(g in element(), x in vertex(), y in vertex()) {
            let (gx, gy) = (act(&g, &x).unwrap(), act(&g, &y).unwrap());
            prop_assert_eq!(distance(&gx, &gy).unwrap(), distance(&x, &y).unwrap());
            let mapped: Vec<LatticeClass> = geodesic(&x, &y).unwrap().iter().map(|v| act(&g, v).unwrap()).collect();
            prop_assert_eq!(mapped, geodesic(&gx, &gy).unwrap());
        }

        #[test]
        fn action_is_functorial(g in element(), h in element(), x in vertex()) {
            let gh = g.mul(&h).unwrap();
            prop_assert_eq!(act(&gh, &x).unwrap(), act(&g, &act(&h, &x).unwrap()).unwrap());
        }

        #[test]
        fn canonical_form_is_idempotent(g in element(), x in vertex()) {
            let b = g.matrix().mul(&x.basis()).unwrap();
            let c = canonicalize(&b, p3()).unwrap();
            prop_assert_eq!(canonicalize(&c.basis(), p3()).unwrap(), c.clone());
            // rescaling the basis does not change the class
            prop_assert_eq!(canonicalize(&b.scale(&ratio(9, 2)), p3()).unwrap(), c);
        }

        #[test]
        fn hull_is_idempotent(xs in prop::collection::vec(vertex(), 1..5)) {
            let s: VertexSet = xs.iter().cloned().collect();
            let h = convex_hull(&s).unwrap();
            prop_assert_eq!(convex_hull(&h).unwrap(), h.clone());
            for x in &xs {
                for y in &xs {
                    for v in geodesic(x, y).unwrap() {
                        prop_assert!(h.contains(&v));
                    }
                }
            }
        }

        #[test]
        fn membership_agrees_with_explicit_hull(g in element()) {
            let p = p3();
            let c = default_window(p).unwrap();
            let h = CompactGroupSpec::torus(p).with_level(12);
            let fast = y_membership(&g, &c, &h).unwrap();
            let (member, witness, hull) = y_membership_explicit(&g, &c, &h).unwrap();
            prop_assert_eq!(fast.member, member);
            prop_assert_eq!(fast.witness, witness);
            let fixed: Vec<&LatticeClass> = hull.iter().filter(|v| h.fixes(v).unwrap()).collect();
            prop_assert_eq!(fixed, vec![&fast.fixed_point]);
        }
    }
}
