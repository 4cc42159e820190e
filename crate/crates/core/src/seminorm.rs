//! Multiplicative seminorms attached to vertices of the tree, evaluated on
//! regular functions of `SL_2`.
//!
//! The vertex `[[p^a, b], [0, 1]]` is `u_b t o` with `u_b = [[1, b], [0, 1]]`
//! and `t` the torus point `a/2`; its seminorm sends `F` to the Gauss norm at
//! `a/2` of `x ↦ F(u_b x)`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{Prime, Rational, Valuation};
use crate::regular::{MatrixPoly, Ring};
use crate::reynolds::{weight_decompose, RepSpec};
use crate::torus::ApartmentPoint;
use crate::tree::LatticeClass;
use crate::ultranorm::DiagonalUltraNorm;

fn unipotent(b: &Rational) -> Matrix {
    Matrix::from_rows(vec![vec![Rational::one(), b.clone()], vec![Rational::zero(), Rational::one()]]).expect("2x2")
}

/// `θ(L)(F)` as a valuation.
pub fn theta(vertex: &LatticeClass, f: &MatrixPoly) -> Result<Valuation> {
    if f.size() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.size(),
        });
    }
    let shifted = if Zero::is_zero(vertex.b()) {
        f.clone()
    } else {
        f.left_translate(&unipotent(vertex.b()))?
    };
    shifted.gauss(&vertex.apartment_point(), vertex.prime())
}

/// `θ(o)(F)`: the Gauss norm of the coefficients.
pub fn theta_origin(f: &MatrixPoly, p: Prime) -> Result<Valuation> {
    f.gauss(&ApartmentPoint::origin(f.size() - 1), p)
}

/// The vector of functions `x ↦ π_z(ρ(x^{-1})) v`, whose pairings with
/// covectors `φ` give the convex functions `p ↦ |φ(π_z(θ(p)) v)|` on the
/// tree.
#[derive(Clone, Debug)]
pub struct ProjectedOrbitMap {
    rho: RepSpec,
    projected_inverse: Vec<Vec<MatrixPoly>>,
}

impl ProjectedOrbitMap {
    pub fn new(rho: &RepSpec) -> Self {
        let wd = weight_decompose(rho);
        ProjectedOrbitMap {
            rho: rho.clone(),
            projected_inverse: wd.project_z_generic(&rho.rho_generic_inverse()),
        }
    }

    pub fn rep(&self) -> &RepSpec {
        &self.rho
    }

    /// Entry `(i, j)` of `π_z(ρ(x^{-1}))`.
    pub fn entry(&self, i: usize, j: usize) -> &MatrixPoly {
        &self.projected_inverse[i][j]
    }

    pub fn components(&self, v: &[Rational]) -> Result<Vec<MatrixPoly>> {
        let m = self.rho.dim();
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
        Ok(self
            .projected_inverse
            .iter()
            .map(|row| {
                row.iter().zip(v).fold(MatrixPoly::zero(self.rho.n()), |acc, (f, x)| {
                    if Zero::is_zero(x) {
                        acc
                    } else {
                        Ring::add(&acc, &f.scale(x))
                    }
                })
            })
            .collect())
    }

    /// `x ↦ φ(π_z(ρ(x^{-1})) v)`.
    pub fn function(&self, v: &[Rational], phi: &[Rational]) -> Result<MatrixPoly> {
        let comps = self.components(v)?;
        if phi.len() != comps.len() {
            return Err(Error::DimensionMismatch {
                expected: comps.len(),
                found: phi.len(),
            });
        }
        Ok(comps.iter().zip(phi).fold(MatrixPoly::zero(self.rho.n()), |acc, (f, c)| {
            if Zero::is_zero(c) {
                acc
            } else {
                Ring::add(&acc, &f.scale(c))
            }
        }))
    }

    /// `|φ|(π_z(θ(p)) v)` as a valuation.
    pub fn psi(&self, v: &[Rational], phi: &[Rational], vertex: &LatticeClass) -> Result<Valuation> {
        theta(vertex, &self.function(v, phi)?)
    }

    /// `sup_{φ ∈ B} |φ|(π_z(θ(p)) v)` with `B` the dual unit ball of `norm`:
    /// `min_i (⌈w_i⌉ + θ(p)(X_i))`.
    pub fn psi_sup(&self, v: &[Rational], vertex: &LatticeClass, norm: &DiagonalUltraNorm) -> Result<Valuation> {
        let comps = self.components(v)?;
        let mut best = Valuation::Infinite;
        for (f, w) in comps.iter().zip(norm.weights()) {
            let val = theta(vertex, f)?.plus_rational(&Rational::from_integer(w.ceil().to_integer()));
            if val < best {
                best = val;
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MatrixGroupElement;
    use crate::padic::{rat, ratio};
    use crate::reynolds::RepTag;
    use crate::tree::{act, geodesic};
    use proptest::prelude::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn origin_is_the_gauss_norm() {
        let p = p3();
        let o = LatticeClass::origin(p);
        let f = MatrixPoly::var(2, 0, 0).scale(&rat(9));
        assert_eq!(theta(&o, &f).unwrap(), Valuation::from_int(2));
        assert_eq!(theta(&o, &MatrixPoly::trace(2)).unwrap(), Valuation::zero());
        // x_11 at diag(p^a, 1): row weight a/2
        let v = LatticeClass::apartment(2, p);
        assert_eq!(theta(&v, &MatrixPoly::var(2, 0, 0)).unwrap(), Valuation::from_int(1));
        assert_eq!(theta(&v, &MatrixPoly::var(2, 1, 0)).unwrap(), Valuation::from_int(-1));
    }

    #[test]
    fn identity_projection_is_nondegenerate() {
        let rho = RepSpec::sl2(RepTag::Standard, p3());
        let map = ProjectedOrbitMap::new(&rho);
        let o = LatticeClass::origin(p3());
        let v = vec![rat(1), rat(0)];
        let sup = DiagonalUltraNorm::sup(2, p3());
        assert_eq!(map.psi_sup(&v, &o, &sup).unwrap(), Valuation::zero());
    }

    fn element() -> impl Strategy<Value = MatrixGroupElement> {
        (-9i64..9, -9i64..9, -9i64..9, 0u32..3, 0u32..3).prop_filter_map("det", |(a, b, c, k, l)| {
            if a == 0 {
                return None;
            }
            let aa = ratio(a, 3i64.pow(k));
            let bb = ratio(b, 3i64.pow(l));
            let d = (rat(1) + &bb * rat(c)) / &aa;
            MatrixGroupElement::sl2(aa, bb, rat(c), d, p3()).ok()
        })
    }

    fn rep() -> impl Strategy<Value = RepSpec> {
        prop_oneof![Just(RepSpec::sl2(RepTag::Standard, p3())), Just(RepSpec::sl2(RepTag::Adjoint, p3()))]
    }

    fn vector() -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-9i64..9, 0u32..3), 4).prop_map(|v| v.into_iter().map(|(a, k)| ratio(a, 3i64.pow(k))).collect())
    }

    proptest! {
        #[test]
        fn left_action_pulls_back(g in element(), h in element(), c in -5i64..5, d in -5i64..5) {
            let p = p3();
            let f = MatrixPoly::var(2, 0, 0).scale(&rat(c)).add(&MatrixPoly::var(2, 1, 1).scale(&rat(d)));
            let f = Ring::mul(&f, &MatrixPoly::var(2, 0, 1).add(&MatrixPoly::var(2, 1, 0)));
            let l = act(&h, &LatticeClass::origin(p)).unwrap();
            let gl = act(&g, &l).unwrap();
            prop_assert_eq!(theta(&gl, &f).unwrap(), theta(&l, &f.left_translate(g.matrix()).unwrap()).unwrap());
        }

        #[test]
        fn seminorm_is_multiplicative(h in element(), a in -4i64..4, b in -4i64..4) {
            let l = act(&h, &LatticeClass::origin(p3())).unwrap();
            let f = MatrixPoly::var(2, 0, 0).scale(&rat(a)).add(&MatrixPoly::var(2, 0, 1).scale(&ratio(b, 3)));
            let g = MatrixPoly::var(2, 1, 0).add(&MatrixPoly::var(2, 1, 1).scale(&rat(3)));
            let prod = Ring::mul(&f, &g);
            prop_assert_eq!(theta(&l, &prod).unwrap(), &theta(&l, &f).unwrap() + &theta(&l, &g).unwrap());
        }

        #[test]
        fn psi_at_translate_is_right_translate_at_origin(rho in rep(), y in element(), v in vector(), phi in vector()) {
            let p = p3();
            let m = rho.dim();
            let (v, phi) = (&v[..m], &phi[..m]);
            let map = ProjectedOrbitMap::new(&rho);
            let q = act(&y.inverse(), &LatticeClass::origin(p)).unwrap();
            // F(x) = φ(π_z(ρ(x)) v), evaluated along x ↦ x y
            let wd = weight_decompose(&rho);
            let r = wd.project_z_generic(&rho.rho_generic());
            let f = r.iter().zip(phi).fold(MatrixPoly::zero(2), |acc, (row, c)| {
                row.iter().zip(v).fold(acc, |acc, (e, x)| Ring::add(&acc, &e.scale(&(c * x))))
            });
            let direct = theta_origin(&f.right_translate(y.matrix()).unwrap(), p).unwrap();
            prop_assert_eq!(map.psi(v, phi, &q).unwrap(), direct);
        }

        #[test]
        fn psi_is_convex_along_geodesics(rho in rep(), y in element(), v in vector(), phi in vector()) {
            let p = p3();
            let m = rho.dim();
            let map = ProjectedOrbitMap::new(&rho);
            let f = map.function(&v[..m], &phi[..m]).unwrap();
            prop_assume!(f.num_terms() > 0);
            let q = act(&y, &LatticeClass::origin(p)).unwrap();
            let path = geodesic(&LatticeClass::apartment(-3, p), &q).unwrap();
            let vals: Vec<Rational> = path.iter().map(|x| theta(x, &f).unwrap().expect_finite("nonzero")).collect();
            // log |f| convex means valuations are concave along the path
            for w in vals.windows(3) {
                prop_assert!(&w[0] + &w[2] <= &w[1] * rat(2));
            }
        }
    }
}
