//! Random inputs for the verification sweeps.

use num_traits::Zero;
use rand::Rng;

use crate::error::Result;
use crate::group::MatrixGroupElement;
use crate::padic::{rat, valuation_of, Prime, Rational, Valuation};
use crate::tree::{decompose_g, VertexSet};
use crate::ultranorm::DiagonalUltraNorm;

/// Valuation windows for sampled inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleBounds {
    pub group_entries: i64,
    pub vector_entries: i64,
}

impl Default for SampleBounds {
    fn default() -> Self {
        SampleBounds {
            group_entries: 5,
            vector_entries: 3,
        }
    }
}

/// A nonzero integer prime to `p`, of size at most `p^2`.
pub fn random_unit<R: Rng>(rng: &mut R, p: Prime) -> i64 {
    let q = p.get() as i64;
    loop {
        let u = rng.gen_range(1..=q * q);
        if u % q != 0 {
            return if rng.gen_bool(0.5) { -u } else { u };
        }
    }
}

/// A product of elementary matrices with integral entries: an element of
/// `SL_2(Z_p)`.
pub fn random_integral_sl2<R: Rng>(rng: &mut R, p: Prime) -> MatrixGroupElement {
    let q = p.get() as i64;
    let mut g = MatrixGroupElement::identity(2, p);
    for _ in 0..3 {
        let x = rat(rng.gen_range(-q * q..=q * q));
        let e = if rng.gen_bool(0.5) {
            MatrixGroupElement::upper_unipotent(x, p)
        } else {
            MatrixGroupElement::lower_unipotent(x, p)
        };
        g = g.mul(&e).expect("same group");
    }
    let u = rat(random_unit(rng, p));
    g.mul(&crate::tree::torus_unit(u, p)).expect("same group")
}

fn within(g: &MatrixGroupElement, bound: i64) -> bool {
    let lo = Valuation::from_int(-bound);
    let hi = Valuation::from_int(bound);
    g.matrix().entries().iter().all(|x| {
        let v = valuation_of(x, g.prime());
        v.is_infinite() || (lo <= v && v <= hi)
    })
}

/// `k_1 [[p^j, b], [0, p^-j]] k_2` with nonzero entry valuations in
/// `[-bound, bound]`.
pub fn random_group_element<R: Rng>(rng: &mut R, p: Prime, bound: i64) -> MatrixGroupElement {
    let reach = (bound / 2).max(1);
    loop {
        let j = rng.gen_range(-reach..=reach);
        let b = if rng.gen_bool(0.3) {
            Rational::zero()
        } else {
            p.pow(rng.gen_range(-reach..=reach)) * rat(random_unit(rng, p))
        };
        let middle = MatrixGroupElement::sl2_translation(j, p)
            .mul(&MatrixGroupElement::upper_unipotent(b, p))
            .expect("same group");
        let g = random_integral_sl2(rng, p)
            .mul(&middle)
            .and_then(|x| x.mul(&random_integral_sl2(rng, p)))
            .expect("same group");
        if within(&g, bound) {
            return g;
        }
    }
}

/// An element of `Y`, obtained by stripping the torus translation from a
/// random group element.
pub fn random_window_element<R: Rng>(rng: &mut R, p: Prime, bound: i64, window: &VertexSet) -> Result<MatrixGroupElement> {
    let g = random_group_element(rng, p, bound);
    Ok(decompose_g(&g, window)?.y)
}

/// A nonzero vector whose nonzero entries have valuations in
/// `[-bound, bound]`.
pub fn random_vector<R: Rng>(rng: &mut R, p: Prime, m: usize, bound: i64) -> Vec<Rational> {
    loop {
        let v: Vec<Rational> = (0..m)
            .map(|_| {
                if rng.gen_range(0..=m) == 0 {
                    Rational::zero()
                } else {
                    p.pow(rng.gen_range(-bound..=bound)) * rat(random_unit(rng, p))
                }
            })
            .collect();
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

/// A covector in the dual unit ball of `norm` with at least one entry on the
/// boundary.
pub fn random_dual_ball_element<R: Rng>(rng: &mut R, norm: &DiagonalUltraNorm) -> Vec<Rational> {
    let p = norm.prime();
    let m = norm.dimension();
    let edge = rng.gen_range(0..m);
    norm.weights()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let floor = w.ceil().to_integer();
            let floor = i64::try_from(floor).expect("small weight");
            if i == edge {
                p.pow(floor) * rat(random_unit(rng, p))
            } else if rng.gen_bool(0.3) {
                Rational::zero()
            } else {
                p.pow(floor + rng.gen_range(0..=2)) * rat(rng.gen_range(-9..=9))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::sample_rng;
    use crate::tree::{default_window, y_membership, CompactGroupSpec};

    #[test]
    fn samples_respect_bounds() {
        for q in [3u64, 5] {
            let p = Prime::new(q).unwrap();
            let window = default_window(p).unwrap();
            for i in 0..40 {
                let mut rng = sample_rng(11, i);
                let g = random_group_element(&mut rng, p, 5);
                assert!(within(&g, 5));
                assert!(random_integral_sl2(&mut rng, p).is_integral());
                let y = random_window_element(&mut rng, p, 5, &window).unwrap();
                assert!(y_membership(&y, &window, &CompactGroupSpec::torus(p)).unwrap().member);
                let v = random_vector(&mut rng, p, 4, 3);
                assert!(v.iter().all(|x| x.is_zero() || {
                    let e = valuation_of(x, p);
                    Valuation::from_int(-3) <= e && e <= Valuation::from_int(3)
                }));
                let sup = DiagonalUltraNorm::sup(4, p);
                let phi = random_dual_ball_element(&mut rng, &sup);
                assert_eq!(sup.dual_norm(&phi).unwrap(), Valuation::zero());
            }
        }
    }
}
