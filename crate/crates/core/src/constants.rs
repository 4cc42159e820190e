//! The four constants of the stability bound, computed exactly.
//!
//! Every constant is a power `p^e` of the residue prime and is stored by its
//! exponent. Inequalities between absolute values then become inequalities
//! between valuations shifted by exponents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::MatrixGroupElement;
use crate::linalg::Matrix;
use crate::padic::{format_rational, parse_rational, valuation_of, Prime, Rational, Valuation};
use crate::modular::ResidueRing;
use crate::regular::{MatrixPoly, Ring};
use crate::reynolds::{check_star, entry_functions, group_coefficient_generators, CoeffModule, OmegaSet, RepSpec};
use crate::seminorm::{theta_origin, ProjectedOrbitMap};
use crate::torus::{pairing, Character};
use crate::tree::{sl2_mod_order, LatticeClass, VertexSet};
use crate::ultranorm::{operator_norm, DiagonalUltraNorm};

/// A positive constant `p^exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConstantRecord", into = "ConstantRecord")]
pub struct Constant {
    exponent: Rational,
    p: Prime,
}

#[derive(Serialize, Deserialize)]
struct ConstantRecord {
    exponent: String,
    #[serde(default)]
    value: f64,
    p: Prime,
}

impl From<Constant> for ConstantRecord {
    fn from(c: Constant) -> Self {
        ConstantRecord {
            exponent: format_rational(&c.exponent),
            value: c.value(),
            p: c.p,
        }
    }
}

impl TryFrom<ConstantRecord> for Constant {
    type Error = Error;
    fn try_from(r: ConstantRecord) -> Result<Self> {
        Ok(Constant::new(parse_rational(&r.exponent)?, r.p))
    }
}

impl Constant {
    pub fn new(exponent: Rational, p: Prime) -> Self {
        Constant { exponent, p }
    }

    pub fn one(p: Prime) -> Self {
        Constant::new(Rational::zero(), p)
    }

    pub fn exponent(&self) -> &Rational {
        &self.exponent
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn value(&self) -> f64 {
        (self.p.get() as f64).powf(self.exponent.to_f64().unwrap_or(f64::NAN))
    }

    pub fn times(&self, other: &Constant) -> Constant {
        Constant::new(&self.exponent + &other.exponent, self.p)
    }

    pub fn over(&self, other: &Constant) -> Constant {
        Constant::new(&self.exponent - &other.exponent, self.p)
    }

    pub fn inverse(&self) -> Constant {
        Constant::new(-self.exponent.clone(), self.p)
    }

    pub fn max(&self, other: &Constant) -> Constant {
        if self.exponent >= other.exponent {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^({}) ~ {:.6}", self.p.get(), format_rational(&self.exponent), self.value())
    }
}

/// Norm of the invariant projection `π_k : C → k` for the sup over `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    /// `⦀π_k⦀`, or `None` when the module has no invariant part.
    pub operator: Option<Constant>,
    /// The constant used downstream: `⦀π_k⦀`, or 1 when `π_k = 0`.
    pub constant: Constant,
    /// Bound read off the inverse of a square basis block of the evaluation
    /// matrix; at least the exact operator norm.
    pub basis_bound: Option<Constant>,
    /// `1 + ⦀π_k⦀` as an exact rational.
    #[serde(with = "crate::padic::serde_rational")]
    pub additive: Rational,
    pub omega_basis: Vec<usize>,
    /// Coordinates of an element of `C` attaining the operator norm.
    #[serde(with = "crate::padic::serde_rational_vec")]
    pub witness: Vec<Rational>,
}

pub fn compute_c1(omega: &OmegaSet, module: &CoeffModule) -> Result<C1Report> {
    let p = module.p;
    let star = check_star(omega, module)?;
    let basis = star.basis.clone().ok_or(Error::StarConditionFails {
        rank: star.rank,
        dim: star.dim,
    })?;
    let eval = omega.evaluation_matrix(module)?;
    let Some(trivial) = module.characters.iter().position(Character::is_trivial) else {
        return Ok(C1Report {
            operator: None,
            constant: Constant::one(p),
            basis_bound: None,
            additive: Rational::one(),
            omega_basis: basis,
            witness: vec![Rational::zero(); module.dim()],
        });
    };
    // {c : |f_c|_Ω ≤ 1} is spanned by the columns of q; the norm of π_k is the
    // largest |c_trivial| on that lattice.
    let smith = eval.local_smith(p);
    let q = smith
        .integral_preimage_basis()
        .ok_or(Error::StarConditionFails { rank: star.rank, dim: star.dim })?;
    let (col, val) = (0..q.cols())
        .map(|j| (j, valuation_of(q.get(trivial, j), p)))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty module");
    let exponent = -val.expect_finite("invariant coordinate");
    let block = eval.select_rows(&basis).inverse()?;
    let basis_exp = block
        .row(trivial)
        .iter()
        .map(|x| valuation_of(x, p))
        .min()
        .expect("nonempty row")
        .expect_finite("invariant row");
    let operator = Constant::new(exponent, p);
    Ok(C1Report {
        additive: Rational::one() + pow_rational(p, operator.exponent()),
        constant: operator.clone(),
        operator: Some(operator),
        basis_bound: Some(Constant::new(-basis_exp, p)),
        omega_basis: basis,
        witness: (0..q.rows()).map(|i| q.get(i, col).clone()).collect(),
    })
}

fn pow_rational(p: Prime, e: &Rational) -> Rational {
    assert!(e.is_integer(), "integral exponent");
    p.pow(i64::try_from(e.to_integer()).expect("small exponent"))
}

/// `c_2 = min_ω min(⦀ρ(ω)⦀^{-1}, ⦀ρ(ω^{-1})⦀^{-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2Report {
    pub constant: Constant,
    /// The same minimum over `ρ(ω)` alone.
    pub forward_only: Constant,
}

pub fn compute_c2(rho: &RepSpec, omega: &OmegaSet, norm: &DiagonalUltraNorm) -> Result<C2Report> {
    let p = rho.prime();
    if omega.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut both: Option<Rational> = None;
    let mut fwd: Option<Rational> = None;
    for w in omega.elements() {
        let g = MatrixGroupElement::from_torus(w);
        let a = operator_norm(norm, norm, &rho.rho_matrix(&g)?)?.expect_finite("invertible");
        let b = operator_norm(norm, norm, &rho.rho_matrix(&g.inverse())?)?.expect_finite("invertible");
        let m = if a < b { a.clone() } else { b };
        both = Some(both.map_or(m.clone(), |x| if m < x { m.clone() } else { x }));
        fwd = Some(fwd.map_or(a.clone(), |x| if a < x { a.clone() } else { x }));
    }
    Ok(C2Report {
        constant: Constant::new(both.expect("nonempty"), p),
        forward_only: Constant::new(fwd.expect("nonempty"), p),
    })
}

/// Coefficient matrix of a family of polynomials: one row per monomial, one
/// column per polynomial.
pub fn coefficient_matrix(polys: &[MatrixPoly]) -> (Matrix, Vec<Vec<u16>>) {
    let monomials: BTreeSet<Vec<u16>> = polys.iter().flat_map(|f| f.terms().map(|(e, _)| e.clone())).collect();
    let monomials: Vec<Vec<u16>> = monomials.into_iter().collect();
    let mut m = Matrix::zeros(monomials.len(), polys.len());
    for (j, f) in polys.iter().enumerate() {
        for (i, e) in monomials.iter().enumerate() {
            m.set(i, j, f.coefficient(e));
        }
    }
    (m, monomials)
}

/// A linearly independent subfamily spanning the same space.
pub fn independent_subfamily(polys: &[MatrixPoly]) -> Vec<MatrixPoly> {
    let (m, _) = coefficient_matrix(polys);
    m.transpose().row_basis().into_iter().map(|j| polys[j].clone()).collect()
}

/// `max_f (min_k v(f(k)) - θ(o)(f))` over nonzero `f` in the span, the
/// minimum taken over the given elements of `G_o`. `None` when some nonzero
/// `f` vanishes at all of them.
pub fn lattice_gap(family: &[MatrixPoly], points: &[MatrixGroupElement], p: Prime) -> Result<Option<Rational>> {
    if family.is_empty() {
        return Ok(Some(Rational::zero()));
    }
    let (coeffs, _) = coefficient_matrix(family);
    let q = coeffs
        .local_smith(p)
        .integral_preimage_basis()
        .ok_or_else(|| Error::DegenerateProjection("family is not independent".into()))?;
    let mut data = Vec::with_capacity(points.len() * family.len());
    for k in points {
        for f in family {
            data.push(f.eval(k.matrix())?);
        }
    }
    let e = Matrix::new(points.len(), family.len(), data)?.mul(&q)?;
    let vals = e.local_smith_valuations(p);
    if vals.len() < family.len() || vals.iter().any(Valuation::is_infinite) {
        return Ok(None);
    }
    Ok(vals.into_iter().filter_map(|v| v.finite().cloned()).max())
}

/// The family rescaled to a basis of the lattice of its integral-coefficient
/// members.
pub fn integral_basis(family: &[MatrixPoly], p: Prime) -> Result<Vec<MatrixPoly>> {
    let (coeffs, _) = coefficient_matrix(family);
    let q = coeffs
        .local_smith(p)
        .integral_preimage_basis()
        .ok_or_else(|| Error::DegenerateProjection("family is not independent".into()))?;
    Ok((0..q.cols())
        .map(|j| {
            family.iter().enumerate().fold(MatrixPoly::zero(family[0].size()), |acc, (i, f)| {
                let c = q.get(i, j);
                if Zero::is_zero(c) {
                    acc
                } else {
                    Ring::add(&acc, &Ring::scale(f, c))
                }
            })
        })
        .collect())
}

/// [`lattice_gap`] over all of `SL_2(Z/p^N)`, computed modulo `p^N`. Values
/// of `N` mean "at least `N`".
pub fn lattice_gap_mod(basis: &[MatrixPoly], ring: &ResidueRing, points: &[[u64; 4]]) -> Result<u32> {
    if basis.is_empty() {
        return Ok(0);
    }
    let rows = points
        .iter()
        .map(|x| basis.iter().map(|f| ring.eval(f, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let vals = ring.smith_valuations(rows, basis.len());
    if vals.len() < basis.len() {
        return Ok(ring.level());
    }
    Ok(vals.into_iter().max().unwrap_or(0))
}

/// Budget on `|SL_2(Z/p^N)|` for [`compute_c3`].
pub const C3_BUDGET: u128 = 2_000_000;

/// `c_3`, the worst ratio `θ(o)(f) / sup_{G_o} |f|` over the functions the
/// bound feeds into the seminorm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C3Report {
    pub constant: Constant,
    /// Congruence level that certified the value.
    pub level: u32,
    pub residues: usize,
    /// Gap over the matrix entries of `ρ`.
    #[serde(with = "crate::padic::serde_rational")]
    pub entries_gap: Rational,
    /// Gap over the coefficient functions of `Ad_ρ`.
    #[serde(with = "crate::padic::serde_rational")]
    pub group_gap: Rational,
    /// Largest single-generator ratio; a lower bound for the gap.
    #[serde(with = "crate::padic::serde_rational")]
    pub generator_ratio: Rational,
}

/// Escalates the congruence level until the gap is certified. For an
/// integral-coefficient `f`, `f(k) mod p^N` depends on `k mod p^N` only, so a
/// minimum valuation below `N` over `SL_2(Z/p^N)` is the minimum over `G_o`.
pub fn compute_c3(rho: &RepSpec, level_cap: u32) -> Result<C3Report> {
    if rho.n() != 2 {
        return Err(Error::InvalidRep("the seminorm is implemented for SL_2".into()));
    }
    let p = rho.prime();
    let entries = integral_basis(&independent_subfamily(&entry_functions(rho)), p)?;
    let group = integral_basis(&independent_subfamily(&group_coefficient_generators(rho)), p)?;
    for level in 1..=level_cap.max(1) {
        let size = sl2_mod_order(p, level);
        if size > C3_BUDGET {
            return Err(Error::EnumerationBudget { size, budget: C3_BUDGET });
        }
        let ring = ResidueRing::new(p, level)?;
        let points = ring.sl2_elements();
        let a = lattice_gap_mod(&entries, &ring, &points)?;
        let b = lattice_gap_mod(&group, &ring, &points)?;
        let gap = a.max(b);
        if gap >= level {
            continue;
        }
        let mut ratio = 0;
        for f in entries.iter().chain(&group) {
            let gauss = theta_origin(f, p)?.expect_finite("nonzero generator");
            let unit = Ring::scale(f, &p.pow(-i64::try_from(gauss.to_integer()).expect("small")));
            let low = points
                .iter()
                .map(|x| ring.eval(&unit, x).map(|y| ring.valuation(y)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap_or(0);
            ratio = ratio.max(low);
        }
        return Ok(C3Report {
            constant: Constant::new(Rational::from_integer(gap.into()), p),
            level,
            residues: points.len(),
            entries_gap: Rational::from_integer(a.into()),
            group_gap: Rational::from_integer(b.into()),
            generator_ratio: Rational::from_integer(ratio.into()),
        });
    }
    Err(Error::LevelEscalation { cap: level_cap })
}

/// The constant of a single window vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexBound {
    pub vertex: LatticeClass,
    /// `max_v (Ψ(v) - ‖v‖)` in valuations.
    #[serde(with = "crate::padic::serde_rational")]
    pub exponent: Rational,
    /// The same maximum over basis vectors and pairwise sums only.
    #[serde(with = "crate::padic::serde_rational")]
    pub heuristic: Rational,
    /// A unit vector attaining the maximum.
    #[serde(with = "crate::padic::serde_rational_vec")]
    pub witness: Vec<Rational>,
    pub steps: usize,
}

/// Step cap for the threshold search in [`vertex_bound`].
pub const THRESHOLD_STEPS: usize = 512;

struct ProjectionRows {
    matrix: Matrix,
    shifts: Vec<Rational>,
}

fn projection_rows(map: &ProjectedOrbitMap, norm: &DiagonalUltraNorm, vertex: &LatticeClass) -> Result<ProjectionRows> {
    let m = map.rep().dim();
    let b = vertex.b();
    let u = MatrixGroupElement::upper_unipotent(b.clone(), vertex.prime());
    let lambda = vertex.apartment_point();
    let mut rows: BTreeMap<(usize, Vec<u16>), Vec<Rational>> = BTreeMap::new();
    for i in 0..m {
        for j in 0..m {
            let f = map.entry(i, j);
            let f = if Zero::is_zero(b) { f.clone() } else { f.left_translate(u.matrix())? };
            for (e, c) in f.terms() {
                rows.entry((i, e.clone())).or_insert_with(|| vec![Rational::zero(); m])[j] = c.clone();
            }
        }
    }
    let mut data = Vec::with_capacity(rows.len() * m);
    let mut shifts = Vec::with_capacity(rows.len());
    let weights = norm.weights();
    for ((i, e), row) in &rows {
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        let s = Rational::from_integer(weights[*i].ceil().to_integer()) + pairing(&MatrixPoly::row_character(2, e), &lambda)?;
        shifts.push(s);
        for (j, x) in row.iter().enumerate() {
            // v = E u with E = diag(p^{-w_j})
            data.push(x * pow_rational(vertex.prime(), &-weights[j].clone()));
        }
    }
    Ok(ProjectionRows {
        matrix: Matrix::new(shifts.len(), m, data)?,
        shifts,
    })
}

fn psi_of(rows: &ProjectionRows, u: &[Rational], p: Prime) -> Result<Valuation> {
    let image = rows.matrix.mul_vec(u)?;
    Ok(image
        .iter()
        .zip(&rows.shifts)
        .map(|(x, s)| valuation_of(x, p).plus_rational(s))
        .min()
        .unwrap_or(Valuation::Infinite))
}

fn ceil_int(q: &Rational) -> i64 {
    i64::try_from(q.ceil().to_integer()).expect("small exponent")
}

fn feasible(rows: &ProjectionRows, t: &Rational, p: Prime) -> (bool, Option<Vec<Rational>>) {
    let m = rows.matrix.cols();
    let mut a = rows.matrix.clone();
    for (r, s) in rows.shifts.iter().enumerate() {
        let scale = p.pow(-ceil_int(&(t - s)));
        for j in 0..m {
            let x = a.get(r, j) * &scale;
            a.set(r, j, x);
        }
    }
    let smith = a.local_smith(p);
    let best = smith
        .valuations
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.cmp(y.1))
        .map(|(i, v)| (i, v.clone()));
    match best {
        Some((i, v)) if v >= Valuation::zero() => {
            let u = (0..m).map(|r| smith.columns.get(r, i).clone()).collect();
            (true, Some(u))
        }
        _ => (false, None),
    }
}

/// `max_{‖v‖=1} (Ψ(v) - ‖v‖)` at one vertex, where `Ψ(v)` is the valuation
/// of `sup_{φ ∈ B} |φ|(π_z(θ(γ)) v)`.
///
/// Unit vectors are `E u` with `u` primitive integral. The target is at least
/// `t` exactly when some primitive `u` makes every row
/// `p^{-⌈t - s_r⌉} (M E u)_r` integral, which is a Smith-form test.
pub fn vertex_bound(map: &ProjectedOrbitMap, norm: &DiagonalUltraNorm, vertex: &LatticeClass) -> Result<VertexBound> {
    if !norm.has_integer_weights() {
        return Err(Error::InvalidRep("window bound needs a norm with integral weights".into()));
    }
    let p = vertex.prime();
    let m = map.rep().dim();
    let rows = projection_rows(map, norm, vertex)?;
    if rows.matrix.rank() < m {
        return Err(Error::DegenerateProjection(format!("at vertex {vertex:?}")));
    }
    let unit = |j: usize| crate::group::basis_vector(m, j);
    let mut heuristic: Option<Rational> = None;
    let mut candidates: Vec<Vec<Rational>> = (0..m).map(unit).collect();
    for j in 0..m {
        for k in j + 1..m {
            candidates.push(unit(j).iter().zip(unit(k)).map(|(a, b)| a + b).collect());
        }
    }
    let mut witness = unit(0);
    for (idx, u) in candidates.iter().enumerate() {
        let val = psi_of(&rows, u, p)?.expect_finite("full rank");
        if heuristic.as_ref().is_none_or(|h| &val > h) {
            heuristic = Some(val);
            if idx < m {
                witness = u.clone();
            }
        }
    }
    let heuristic = heuristic.expect("nonempty");
    let start = (0..m)
        .map(|j| psi_of(&rows, &unit(j), p).map(|v| v.expect_finite("full rank")))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .expect("nonempty");
    let fractions: BTreeSet<Rational> = rows.shifts.iter().map(|s| s - Rational::from_integer(s.floor().to_integer())).collect();
    let mut best = start.clone();
    let mut steps = 0;
    let mut k = start.floor().to_integer();
    'search: loop {
        for f in &fractions {
            let t = Rational::from_integer(k.clone()) + f;
            if t <= start {
                continue;
            }
            steps += 1;
            if steps > THRESHOLD_STEPS {
                return Err(Error::SearchExhausted {
                    bound: THRESHOLD_STEPS as i64,
                    diameter: 0,
                });
            }
            match feasible(&rows, &t, p) {
                (true, Some(u)) => {
                    best = t;
                    witness = u;
                }
                _ => break 'search,
            }
        }
        k += 1;
    }
    let witness: Vec<Rational> = witness
        .iter()
        .zip(norm.weights())
        .map(|(x, w)| x * pow_rational(p, &-w.clone()))
        .collect();
    Ok(VertexBound {
        vertex: vertex.clone(),
        exponent: best,
        heuristic,
        witness,
        steps,
    })
}

/// `c_4 = max_γ` of the vertex bounds over the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C4Report {
    pub constant: Constant,
    pub heuristic: Constant,
    pub vertices: Vec<VertexBound>,
}

pub fn compute_c4(rho: &RepSpec, norm: &DiagonalUltraNorm, window: &VertexSet) -> Result<C4Report> {
    if window.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p = rho.prime();
    let map = ProjectedOrbitMap::new(rho);
    let vertices = window.iter().map(|g| vertex_bound(&map, norm, g)).collect::<Result<Vec<_>>>()?;
    let top = vertices.iter().map(|b| b.exponent.clone()).max().expect("nonempty");
    let heur = vertices.iter().map(|b| b.heuristic.clone()).max().expect("nonempty");
    Ok(C4Report {
        constant: Constant::new(top, p),
        heuristic: Constant::new(heur, p),
        vertices,
    })
}

/// The assembled constants and the candidate values of the final bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub c1: C1Report,
    pub c2: C2Report,
    pub c3: C3Report,
    pub c4: C4Report,
    pub candidates: Candidates,
}

/// `c_A = c1 c2 c3 / c4`, its reciprocal `c_B`, the product that the chain of
/// inequalities yields, `c1 c3 c4 / c2`, and the safe choice dominating 1,
/// these three and the reciprocal of the last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidates {
    pub c_a: Constant,
    pub c_b: Constant,
    pub c_chain: Constant,
    pub c_safe: Constant,
}

impl Candidates {
    pub fn from_parts(c1: &Constant, c2: &Constant, c3: &Constant, c4: &Constant) -> Self {
        let c_a = c1.times(c2).times(c3).over(c4);
        let c_b = c_a.inverse();
        let c_chain = c1.times(c3).times(c4).over(c2);
        let c_safe = Constant::one(c1.prime()).max(&c_a).max(&c_b).max(&c_chain).max(&c_chain.inverse());
        Candidates { c_a, c_b, c_chain, c_safe }
    }

    pub fn named(&self) -> Vec<(&'static str, &Constant)> {
        vec![
            ("c_a", &self.c_a),
            ("c_b", &self.c_b),
            ("c_chain", &self.c_chain),
            ("c_safe", &self.c_safe),
        ]
    }
}

pub fn compute_constants(
    rho: &RepSpec,
    omega: &OmegaSet,
    norm: &DiagonalUltraNorm,
    window: &VertexSet,
    level_cap: u32,
) -> Result<StabilityConstants> {
    let module = CoeffModule::torus(rho);
    let c1 = compute_c1(omega, &module)?;
    let c2 = compute_c2(rho, omega, norm)?;
    let c3 = compute_c3(rho, level_cap)?;
    let c4 = compute_c4(rho, norm, window)?;
    let candidates = Candidates::from_parts(&c1.constant, &c2.constant, &c3.constant, &c4.constant);
    Ok(StabilityConstants { c1, c2, c3, c4, candidates })
}

impl StabilityConstants {
    pub fn summary(&self) -> Vec<(String, Constant)> {
        let mut out = vec![
            ("c1".to_string(), self.c1.constant.clone()),
            ("c2".to_string(), self.c2.constant.clone()),
            ("c3".to_string(), self.c3.constant.clone()),
            ("c4".to_string(), self.c4.constant.clone()),
        ];
        out.extend(self.candidates.named().into_iter().map(|(n, c)| (n.to_string(), c.clone())));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, ratio};
    use crate::reynolds::RepTag;
    use crate::torus::TorusElement;
    use crate::tree::default_window;

    fn prime(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    #[test]
    fn constant_arithmetic() {
        let p = prime(3);
        let a = Constant::new(rat(2), p);
        let b = Constant::new(ratio(1, 2), p);
        assert_eq!(a.times(&b).exponent(), &ratio(5, 2));
        assert_eq!(a.over(&b).exponent(), &ratio(3, 2));
        assert!((a.value() - 9.0).abs() < 1e-12);
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(serde_json::from_str::<Constant>(&s).unwrap(), b);
    }

    #[test]
    fn c2_of_a_single_translation() {
        let p = prime(3);
        let rho = RepSpec::sl2(RepTag::Standard, p);
        let omega = OmegaSet::new(vec![TorusElement::sl2_power(1, p)]).unwrap();
        let c2 = compute_c2(&rho, &omega, &DiagonalUltraNorm::sup(2, p)).unwrap();
        assert_eq!(c2.constant.exponent(), &rat(-1));
        assert_eq!(c2.forward_only.exponent(), &rat(-1));
        let omega = OmegaSet::centered(p, 3).unwrap();
        let c2 = compute_c2(&rho, &omega, &DiagonalUltraNorm::sup(2, p)).unwrap();
        assert_eq!(c2.constant.exponent(), &rat(-1));
    }

    #[test]
    fn c1_matches_basis_block_on_square_omega() {
        let p = prime(5);
        let rho = RepSpec::sl2(RepTag::Standard, p);
        let module = CoeffModule::torus(&rho);
        let omega = OmegaSet::centered(p, module.dim()).unwrap();
        let r = compute_c1(&omega, &module).unwrap();
        assert_eq!(r.operator.as_ref().unwrap(), r.basis_bound.as_ref().unwrap());
        assert!(r.constant.exponent() >= &rat(0));
    }

    #[test]
    fn c3_for_the_standard_representation() {
        let p = prime(3);
        let r = compute_c3(&RepSpec::sl2(RepTag::Standard, p), 3).unwrap();
        assert_eq!(r.entries_gap, rat(0));
        assert!(r.generator_ratio <= *r.constant.exponent());
        assert!(*r.constant.exponent() < Rational::from_integer(r.level.into()));
    }

    #[test]
    fn modular_gap_matches_rational_gap() {
        for (q, tag, level) in [(3u64, RepTag::Standard, 1u32), (3, RepTag::Standard, 2), (3, RepTag::Adjoint, 2), (5, RepTag::Standard, 1)] {
            let p = prime(q);
            let rho = RepSpec::sl2(tag, p);
            let ring = ResidueRing::new(p, level).unwrap();
            let lifts = crate::tree::sl2_mod_lifts(p, level);
            for family in [entry_functions(&rho), group_coefficient_generators(&rho)] {
                let family = independent_subfamily(&family);
                let exact = lattice_gap(&family, &lifts, p).unwrap();
                let basis = integral_basis(&family, p).unwrap();
                let modular = lattice_gap_mod(&basis, &ring, &ring.sl2_elements()).unwrap();
                let capped = exact.map_or(level, |g| g.to_integer().try_into().map_or(level, |g: u32| g.min(level)));
                assert_eq!(capped, modular, "p={q} {tag} level {level}");
            }
        }
    }

    #[test]
    fn c4_witness_attains_the_bound() {
        for q in [3u64, 5] {
            let p = prime(q);
            for tag in [RepTag::Standard, RepTag::Adjoint] {
                let rho = RepSpec::sl2(tag, p);
                let norm = DiagonalUltraNorm::sup(rho.dim(), p);
                let window = default_window(p).unwrap();
                let map = ProjectedOrbitMap::new(&rho);
                let report = compute_c4(&rho, &norm, &window).unwrap();
                for b in &report.vertices {
                    assert!(b.heuristic <= b.exponent);
                    let psi = map.psi_sup(&b.witness, &b.vertex, &norm).unwrap();
                    let n = norm.eval(&b.witness).unwrap();
                    assert_eq!(n, Valuation::zero());
                    assert_eq!(psi, Valuation::Finite(b.exponent.clone()));
                }
            }
        }
    }
}
