//! Weighted sup norms on `Q_p^m`, their operator norms and dual unit balls.
//!
//! A norm is stored by the exponents `w_i` with `‖e_i‖ = p^(-w_i)`; all
//! values are reported as valuations (`‖v‖ = p^(-val)`).

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{serde_rational_vec, valuation_of, PadicScalar, Prime, Rational, Valuation};

pub type LinearMap = Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NormRecord", into = "NormRecord")]
pub struct DiagonalUltraNorm {
    weights: Vec<Rational>,
    prime: Prime,
}

#[derive(Serialize, Deserialize)]
struct NormRecord {
    dimension: usize,
    #[serde(with = "serde_rational_vec")]
    weight_exponents: Vec<Rational>,
    p: Prime,
}

impl TryFrom<NormRecord> for DiagonalUltraNorm {
    type Error = Error;
    fn try_from(r: NormRecord) -> Result<Self> {
        if r.weight_exponents.len() != r.dimension {
            return Err(Error::DimensionMismatch {
                expected: r.dimension,
                found: r.weight_exponents.len(),
            });
        }
        DiagonalUltraNorm::new(r.weight_exponents, r.p)
    }
}

impl From<DiagonalUltraNorm> for NormRecord {
    fn from(n: DiagonalUltraNorm) -> Self {
        NormRecord {
            dimension: n.weights.len(),
            weight_exponents: n.weights,
            p: n.prime,
        }
    }
}

/// A vector of scalars sharing one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vector {
    entries: Vec<Rational>,
    prime: Prime,
}

impl Vector {
    pub fn new(entries: Vec<Rational>, prime: Prime) -> Self {
        Vector { entries, prime }
    }

    pub fn from_scalars(scalars: &[PadicScalar]) -> Result<Self> {
        let prime = scalars.first().ok_or(Error::EmptyInput)?.prime();
        if let Some(bad) = scalars.iter().find(|s| s.prime() != prime) {
            return Err(Error::PrimeMismatch {
                left: prime.get(),
                right: bad.prime().get(),
            });
        }
        Ok(Vector {
            entries: scalars.iter().map(|s| s.value().clone()).collect(),
            prime,
        })
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl DiagonalUltraNorm {
    pub fn new(weights: Vec<Rational>, prime: Prime) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(DiagonalUltraNorm { weights, prime })
    }

    /// The sup norm, all weights zero.
    pub fn sup(dimension: usize, prime: Prime) -> Self {
        DiagonalUltraNorm {
            weights: vec![Rational::zero(); dimension.max(1)],
            prime,
        }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn has_integer_weights(&self) -> bool {
        self.weights.iter().all(|w| w.is_integer())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: n,
            });
        }
        Ok(())
    }

    fn check_prime(&self, v: &Vector) -> Result<()> {
        if v.prime != self.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime.get(),
                right: v.prime.get(),
            });
        }
        Ok(())
    }

    /// `min_i (v_p(v_i) + w_i)`.
    pub fn eval(&self, v: &[Rational]) -> Result<Valuation> {
        self.check_len(v.len())?;
        Ok(v.iter()
            .zip(&self.weights)
            .map(|(x, w)| valuation_of(x, self.prime).plus_rational(w))
            .min()
            .unwrap_or(Valuation::Infinite))
    }

    pub fn norm_eval(&self, v: &Vector) -> Result<Valuation> {
        self.check_prime(v)?;
        self.eval(&v.entries)
    }

    /// Valuation of the dual norm `sup_v |φ(v)|/‖v‖` of a covector.
    pub fn dual_norm(&self, phi: &[Rational]) -> Result<Valuation> {
        self.check_len(phi.len())?;
        Ok(phi
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| valuation_of(x, self.prime).plus_rational(&-w.clone()))
            .min()
            .unwrap_or(Valuation::Infinite))
    }

    /// Whether a covector lies in the dual unit ball.
    pub fn in_dual_ball(&self, phi: &[Rational]) -> Result<bool> {
        Ok(self.dual_norm(phi)? >= Valuation::zero())
    }

    /// `sup_{φ ∈ B} |φ(v)|`. The ball is spanned by the scaled coordinate
    /// functionals `p^⌈w_j⌉ e_j^*`, which gives `min_j (⌈w_j⌉ + v_p(v_j))`.
    pub fn dual_ball_sup_slice(&self, v: &[Rational]) -> Result<Valuation> {
        self.check_len(v.len())?;
        Ok(v.iter()
            .zip(&self.weights)
            .map(|(x, w)| valuation_of(x, self.prime).plus_rational(&w.ceil()))
            .min()
            .unwrap_or(Valuation::Infinite))
    }

    pub fn dual_ball_sup(&self, v: &Vector) -> Result<Valuation> {
        self.check_prime(v)?;
        self.dual_ball_sup_slice(&v.entries)
    }

    /// The coordinate functionals attaining the dual-ball supremum.
    pub fn dual_ball_generators(&self) -> Vec<Vec<Rational>> {
        let n = self.dimension();
        (0..n)
            .map(|j| {
                let mut phi = vec![Rational::zero(); n];
                let e = self.weights[j].ceil().to_integer();
                phi[j] = self.prime.pow(i64::try_from(e).expect("weight exponent fits in i64"));
                phi
            })
            .collect()
    }
}

/// Exact operator norm between diagonal norms:
/// `min_{i,j} (v_p(a_ij) + w_dst_i - w_src_j)`.
pub fn operator_norm(src: &DiagonalUltraNorm, dst: &DiagonalUltraNorm, a: &LinearMap) -> Result<Valuation> {
    if src.prime != dst.prime {
        return Err(Error::PrimeMismatch {
            left: src.prime.get(),
            right: dst.prime.get(),
        });
    }
    src.check_len(a.cols())?;
    dst.check_len(a.rows())?;
    let mut best = Valuation::Infinite;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = valuation_of(a.get(i, j), src.prime);
            if v.is_infinite() {
                continue;
            }
            let shifted = v.plus_rational(&(&dst.weights[i] - &src.weights[j]));
            if shifted < best {
                best = shifted;
            }
        }
    }
    Ok(best)
}
