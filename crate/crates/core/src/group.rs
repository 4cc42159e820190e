//! Elements of `SL_n(Q)` viewed inside `SL_n(Q_p)`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{format_rational, serde_rational_rows, valuation_of, Prime, Rational, Valuation};
use crate::torus::TorusElement;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupRecord", into = "GroupRecord")]
pub struct MatrixGroupElement {
    matrix: Matrix,
    prime: Prime,
}

#[derive(Serialize, Deserialize)]
struct GroupRecord {
    p: Prime,
    #[serde(with = "serde_rational_rows")]
    rows: Vec<Vec<Rational>>,
}

impl TryFrom<GroupRecord> for MatrixGroupElement {
    type Error = Error;
    fn try_from(r: GroupRecord) -> Result<Self> {
        MatrixGroupElement::new(Matrix::from_rows(r.rows)?, r.p)
    }
}

impl From<MatrixGroupElement> for GroupRecord {
    fn from(g: MatrixGroupElement) -> Self {
        GroupRecord {
            p: g.prime,
            rows: g.matrix.to_rows(),
        }
    }
}

impl MatrixGroupElement {
    pub fn new(matrix: Matrix, prime: Prime) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let det = matrix.det()?;
        if !det.is_one() {
            return Err(Error::NotSpecialLinear(format_rational(&det)));
        }
        Ok(MatrixGroupElement { matrix, prime })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>, prime: Prime) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, prime)
    }

    /// `[[a, b], [c, d]]`.
    pub fn sl2(a: Rational, b: Rational, c: Rational, d: Rational, prime: Prime) -> Result<Self> {
        Self::from_rows(vec![vec![a, b], vec![c, d]], prime)
    }

    pub fn identity(n: usize, prime: Prime) -> Self {
        MatrixGroupElement {
            matrix: Matrix::identity(n),
            prime,
        }
    }

    pub fn from_torus(mu: &TorusElement) -> Self {
        MatrixGroupElement {
            matrix: Matrix::diagonal(&mu.diagonal()),
            prime: mu.prime(),
        }
    }

    /// `diag(p^k, p^-k)`.
    pub fn sl2_translation(k: i64, prime: Prime) -> Self {
        Self::from_torus(&TorusElement::sl2_power(k, prime))
    }

    /// `[[1, b], [0, 1]]`.
    pub fn upper_unipotent(b: Rational, prime: Prime) -> Self {
        let mut m = Matrix::identity(2);
        m.set(0, 1, b);
        MatrixGroupElement { matrix: m, prime }
    }

    /// `[[1, 0], [c, 1]]`.
    pub fn lower_unipotent(c: Rational, prime: Prime) -> Self {
        let mut m = Matrix::identity(2);
        m.set(1, 0, c);
        MatrixGroupElement { matrix: m, prime }
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        self.matrix.get(i, j)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime.get(),
                right: other.prime.get(),
            });
        }
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                found: other.size(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        Ok(MatrixGroupElement {
            matrix: self.matrix.mul(&other.matrix)?,
            prime: self.prime,
        })
    }

    pub fn inverse(&self) -> Self {
        MatrixGroupElement {
            matrix: self.matrix.inverse().expect("determinant one"),
            prime: self.prime,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == Matrix::identity(self.size())
    }

    /// Smallest entry valuation.
    pub fn min_valuation(&self) -> Valuation {
        self.matrix
            .entries()
            .iter()
            .map(|x| valuation_of(x, self.prime))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// Entries in `Z_(p)`, i.e. the element lies in `SL_n(Z_p)`.
    pub fn is_integral(&self) -> bool {
        self.min_valuation() >= Valuation::zero()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entry(i, j).is_zero()))
    }

    pub fn to_torus(&self) -> Option<TorusElement> {
        if !self.is_diagonal() {
            return None;
        }
        let d: Vec<Rational> = (0..self.size()).map(|i| self.entry(i, i).clone()).collect();
        TorusElement::new(d, self.prime).ok()
    }

    pub fn max_bits(&self) -> u64 {
        self.matrix.entries().iter().map(crate::padic::bit_length).max().unwrap_or(0)
    }
}

impl fmt::Display for MatrixGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

/// The `i`-th standard basis vector of length `m`.
pub fn basis_vector(m: usize, i: usize) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); m];
    e[i] = Rational::one();
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, ratio};

    #[test]
    fn determinant_is_checked() {
        let p = Prime::new(5).unwrap();
        assert!(MatrixGroupElement::sl2(rat(2), rat(1), rat(1), rat(1), p).is_ok());
        assert!(matches!(
            MatrixGroupElement::sl2(rat(2), rat(0), rat(0), rat(1), p),
            Err(Error::NotSpecialLinear(_))
        ));
    }

    #[test]
    fn group_operations() {
        let p = Prime::new(3).unwrap();
        let g = MatrixGroupElement::sl2(rat(2), rat(1), rat(1), rat(1), p).unwrap();
        assert!(g.mul(&g.inverse()).unwrap().is_identity());
        let t = MatrixGroupElement::sl2_translation(2, p);
        assert_eq!(t.entry(1, 1), &ratio(1, 9));
        assert_eq!(t.min_valuation(), Valuation::from_int(-2));
        assert!(!t.is_integral());
        assert_eq!(t.to_torus().unwrap().free_entries(), &[rat(9)]);
        let q = MatrixGroupElement::identity(2, Prime::new(5).unwrap());
        assert!(matches!(g.mul(&q), Err(Error::PrimeMismatch { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let p = Prime::new(3).unwrap();
        let g = MatrixGroupElement::sl2(ratio(1, 3), rat(1), rat(0), rat(3), p).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"p":3,"rows":[["1/3","1"],["0","3"]]}"#);
        assert_eq!(serde_json::from_str::<MatrixGroupElement>(&s).unwrap(), g);
        assert!(serde_json::from_str::<MatrixGroupElement>(r#"{"p":3,"rows":[["1","1"],["0","3"]]}"#).is_err());
    }
}
