//! Dense matrices over `Q`, with the local elementary-divisor computation used
//! for tree distances and lattice feasibility.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{valuation_of, Prime, Rational, Valuation};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Row-vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        self.transpose().mul_vec(v)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let x = m.get(r, j) * &inv;
                m.set(r, j, x);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in c..m.cols {
                        let x = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, x);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(Rational::zero());
            };
            if pr != c {
                m.swap_rows(pr, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..n {
                    let x = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, x);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rational::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    /// Basis of the right kernel `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); self.cols];
                x[f] = Rational::one();
                for (i, &pc) in pivots.iter().enumerate() {
                    x[pc] = -r.get(i, f).clone();
                }
                x
            })
            .collect()
    }

    /// Indices of the first maximal linearly independent family of rows,
    /// scanning in order.
    pub fn row_basis(&self) -> Vec<usize> {
        // Incremental echelon: keep reduced copies of accepted rows.
        let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
        let mut chosen = Vec::new();
        for i in 0..self.rows {
            let mut row = self.row(i).to_vec();
            for (pc, b) in &basis {
                if !row[*pc].is_zero() {
                    let f = row[*pc].clone() / &b[*pc];
                    for (x, y) in row.iter_mut().zip(b) {
                        *x -= &f * y;
                    }
                }
            }
            if let Some(pc) = row.iter().position(|x| !x.is_zero()) {
                basis.push((pc, row));
                chosen.push(i);
            }
        }
        chosen
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Elementary-divisor valuations over `Z_p`, ascending, `+inf` for the
    /// part of the rank deficit. Length `min(rows, cols)`.
    pub fn local_smith_valuations(&self, p: Prime) -> Vec<Valuation> {
        self.local_smith(p).valuations
    }

    /// Local Smith reduction keeping track of the column operations: with
    /// `C = columns`, `A C = R D` for some `R` invertible over `Z_(p)` and `D`
    /// carrying `pivots` on its diagonal.
    pub fn local_smith(&self, p: Prime) -> LocalSmith {
        let mut m = self.clone();
        let mut c = Matrix::identity(m.cols);
        let k = m.rows.min(m.cols);
        let mut valuations = Vec::with_capacity(k);
        let mut pivots = Vec::with_capacity(k);
        for t in 0..k {
            let mut best: Option<(Valuation, usize, usize)> = None;
            for i in t..m.rows {
                for j in t..m.cols {
                    let v = valuation_of(m.get(i, j), p);
                    if v.is_infinite() {
                        continue;
                    }
                    if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                        best = Some((v, i, j));
                    }
                }
            }
            let Some((v, bi, bj)) = best else {
                valuations.extend(std::iter::repeat_n(Valuation::Infinite, k - t));
                break;
            };
            m.swap_rows(t, bi);
            m.swap_cols(t, bj);
            c.swap_cols(t, bj);
            let piv = m.get(t, t).clone();
            for i in t + 1..m.rows {
                if m.get(i, t).is_zero() {
                    continue;
                }
                let f = m.get(i, t) / &piv;
                for j in t..m.cols {
                    let x = m.get(i, j) - &f * m.get(t, j);
                    m.set(i, j, x);
                }
            }
            for j in t + 1..m.cols {
                if m.get(t, j).is_zero() {
                    continue;
                }
                let f = m.get(t, j) / &piv;
                for i in 0..c.rows {
                    let x = c.get(i, j) - &f * c.get(i, t);
                    c.set(i, j, x);
                }
                m.set(t, j, Rational::zero());
            }
            valuations.push(v);
            pivots.push(piv);
        }
        LocalSmith {
            valuations,
            pivots,
            columns: c,
        }
    }
}

/// Output of [`Matrix::local_smith`].
#[derive(Clone, Debug)]
pub struct LocalSmith {
    pub valuations: Vec<Valuation>,
    pub pivots: Vec<Rational>,
    pub columns: Matrix,
}

impl LocalSmith {
    /// For a matrix `A` of full column rank, a basis (as columns) of the
    /// lattice `{u : A u ∈ Z_p^rows}`.
    pub fn integral_preimage_basis(&self) -> Option<Matrix> {
        if self.pivots.len() != self.columns.cols {
            return None;
        }
        let inv: Vec<Rational> = self.pivots.iter().map(|x| x.recip()).collect();
        self.columns.mul(&Matrix::diagonal(&inv)).ok()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, ratio};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1], &[7, 4]]);
        assert_eq!(a.det().unwrap(), rat(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(2));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).inverse(), Err(Error::Singular));
        let b = m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]]);
        assert_eq!(b.det().unwrap(), rat(-3));
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).unwrap().iter().all(Zero::is_zero));
        assert_eq!(a.row_basis(), vec![0, 2]);
    }

    #[test]
    fn smith_valuations() {
        let p = Prime::new(3).unwrap();
        let a = m(&[&[9, 0], &[0, 1]]);
        assert_eq!(
            a.local_smith_valuations(p),
            vec![Valuation::from_int(0), Valuation::from_int(2)]
        );
        // [[3, 1], [0, 3]] has det 9, gcd of entries 1
        let b = m(&[&[3, 1], &[0, 3]]);
        assert_eq!(
            b.local_smith_valuations(p),
            vec![Valuation::from_int(0), Valuation::from_int(2)]
        );
        let c = Matrix::from_rows(vec![vec![ratio(1, 3), rat(0)], vec![rat(0), rat(0)]]).unwrap();
        assert_eq!(
            c.local_smith_valuations(p),
            vec![Valuation::from_int(-1), Valuation::Infinite]
        );
    }

    #[test]
    fn integral_preimage_lattice() {
        let p = Prime::new(3).unwrap();
        let a = Matrix::from_rows(vec![vec![rat(3), rat(0)], vec![rat(0), ratio(1, 3)], vec![rat(1), rat(1)]]).unwrap();
        let q = a.local_smith(p).integral_preimage_basis().unwrap();
        let image = a.mul(&q).unwrap();
        assert!(image.entries().iter().all(|x| valuation_of(x, p) >= Valuation::zero()));
        assert_eq!(image.local_smith_valuations(p), vec![Valuation::zero(), Valuation::zero()]);
    }

    proptest::proptest! {
        #[test]
        fn preimage_basis_is_exact(entries in proptest::collection::vec((-20i64..20, 0u32..3), 6)) {
            let p = Prime::new(3).unwrap();
            let data: Vec<Rational> = entries.iter().map(|&(n, k)| ratio(n, 3i64.pow(k))).collect();
            let a = Matrix::new(3, 2, data).unwrap();
            proptest::prop_assume!(a.rank() == 2);
            let q = a.local_smith(p).integral_preimage_basis().unwrap();
            let image = a.mul(&q).unwrap();
            proptest::prop_assert!(image.entries().iter().all(|x| valuation_of(x, p) >= Valuation::zero()));
            proptest::prop_assert_eq!(image.local_smith_valuations(p), vec![Valuation::zero(), Valuation::zero()]);
            proptest::prop_assert_eq!(a.local_smith(p).valuations, a.local_smith_valuations(p));
        }
    }
}
