//! Arithmetic in `Z/p^N` for valuations that are only needed below `N`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{ord, Prime, Rational, Valuation};
use crate::regular::MatrixPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueRing {
    p: u64,
    level: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(prime: Prime, level: u32) -> Result<Self> {
        let p = prime.get();
        let modulus = p
            .checked_pow(level)
            .filter(|m| *m < (1 << 31))
            .ok_or(Error::BitLengthExceeded {
                bits: u64::from(level) * 64,
                cap: 31,
            })?;
        Ok(ResidueRing { p, level, modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Reduction of a `p`-integral rational.
    pub fn reduce(&self, x: &Rational) -> Result<u64> {
        if x.is_zero() {
            return Ok(0);
        }
        let prime = Prime::new(self.p)?;
        if ord(x, prime).is_some_and(|v| v < 0) {
            return Err(Error::NotInModule(format!("{x} is not p-integral")));
        }
        let m = num_bigint::BigInt::from(self.modulus);
        let num = x.numer().mod_floor(&m).to_u64().expect("reduced");
        let den = x.denom().mod_floor(&m).to_u64().expect("reduced");
        Ok(self.mul(num, self.inverse(den)))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }

    pub fn pow(&self, a: u64, e: u32) -> u64 {
        (0..e).fold(1 % self.modulus, |acc, _| self.mul(acc, a))
    }

    /// Inverse of a unit.
    pub fn inverse(&self, a: u64) -> u64 {
        let g = (a as i64).extended_gcd(&(self.modulus as i64));
        debug_assert_eq!(g.gcd, 1, "not a unit");
        g.x.rem_euclid(self.modulus as i64) as u64
    }

    /// Valuation, with `level` standing for zero.
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.level;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// The elements of `SL_2(Z/p^N)` as `[a, b, c, d]`.
    pub fn sl2_elements(&self) -> Vec<[u64; 4]> {
        let m = self.modulus;
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if a % self.p != 0 {
                    let ainv = self.inverse(a);
                    for c in 0..m {
                        out.push([a, b, c, self.mul(self.add(1, self.mul(b, c)), ainv)]);
                    }
                } else if b % self.p != 0 {
                    let binv = self.inverse(b);
                    for d in 0..m {
                        out.push([a, b, self.mul(self.sub(self.mul(a, d), 1), binv), d]);
                    }
                }
            }
        }
        out
    }

    /// Evaluation of a polynomial with `p`-integral coefficients at a residue
    /// matrix given row by row.
    pub fn eval(&self, f: &MatrixPoly, x: &[u64]) -> Result<u64> {
        let mut acc = 0;
        for (e, c) in f.terms() {
            let mut t = self.reduce(c)?;
            for (xi, k) in x.iter().zip(e) {
                t = self.mul(t, self.pow(*xi, u32::from(*k)));
            }
            acc = self.add(acc, t);
        }
        Ok(acc)
    }

    /// Smith valuations of a matrix over `Z/p^N`, each capped at `N`.
    pub fn smith_valuations(&self, mut rows: Vec<Vec<u64>>, cols: usize) -> Vec<u32> {
        let k = rows.len().min(cols);
        let mut colmap: Vec<usize> = (0..cols).collect();
        let mut out = Vec::with_capacity(k);
        for t in 0..k {
            let mut best: Option<(u32, usize, usize)> = None;
            'scan: for (i, row) in rows.iter().enumerate().skip(t) {
                for (jj, &j) in colmap.iter().enumerate().skip(t) {
                    let v = self.valuation(row[j]);
                    if v < self.level && best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, jj));
                        if v == 0 {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((v, bi, bj)) = best else {
                out.extend(std::iter::repeat_n(self.level, k - t));
                break;
            };
            rows.swap(t, bi);
            colmap.swap(t, bj);
            let pc = colmap[t];
            let pivot = rows[t][pc];
            let unit = self.inverse(pivot / self.p.pow(v));
            let scale = self.p.pow(v);
            for i in t + 1..rows.len() {
                let x = rows[i][pc];
                if x == 0 {
                    continue;
                }
                let f = self.mul(x / scale, unit);
                for jj in t..cols {
                    let j = colmap[jj];
                    let y = self.sub(rows[i][j], self.mul(f, rows[t][j]));
                    rows[i][j] = y;
                }
            }
            out.push(v);
        }
        out
    }
}

/// Values of a fixed set of monomials at every point of `SL_2(Z/p^N)`.
#[derive(Clone, Debug)]
pub struct ResidueTable {
    ring: ResidueRing,
    prime: Prime,
    index: BTreeMap<Vec<u16>, usize>,
    values: Vec<Vec<u64>>,
}

/// `min_k v(f(k))` over `G_o`; `exact` is false when the minimum reached the
/// truncation level and is only a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMinimum {
    pub valuation: Valuation,
    pub exact: bool,
}

impl ResidueTable {
    pub fn new(prime: Prime, level: u32, monomials: impl IntoIterator<Item = Vec<u16>>) -> Result<Self> {
        let ring = ResidueRing::new(prime, level)?;
        let monomials: BTreeSet<Vec<u16>> = monomials.into_iter().collect();
        let index: BTreeMap<Vec<u16>, usize> = monomials.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let values = ring
            .sl2_elements()
            .into_iter()
            .map(|x| {
                monomials
                    .iter()
                    .map(|e| x.iter().zip(e).fold(1 % ring.modulus, |acc, (xi, k)| ring.mul(acc, ring.pow(*xi, u32::from(*k)))))
                    .collect()
            })
            .collect();
        Ok(ResidueTable { ring, prime, index, values })
    }

    /// A table covering every monomial of the given polynomials.
    pub fn for_family(prime: Prime, level: u32, family: &[MatrixPoly]) -> Result<Self> {
        Self::new(prime, level, family.iter().flat_map(|f| f.terms().map(|(e, _)| e.clone())))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn level(&self) -> u32 {
        self.ring.level
    }

    pub fn min_valuation(&self, f: &MatrixPoly) -> Result<GroupMinimum> {
        let Some(gauss) = f.terms().map(|(_, c)| ord(c, self.prime).expect("nonzero coefficient")).min() else {
            return Ok(GroupMinimum {
                valuation: Valuation::Infinite,
                exact: true,
            });
        };
        let scale = self.prime.pow(-gauss);
        let mut coeffs = Vec::with_capacity(f.num_terms());
        for (e, c) in f.terms() {
            let i = *self
                .index
                .get(e)
                .ok_or_else(|| Error::NotInModule("monomial outside the residue table".into()))?;
            coeffs.push((i, self.ring.reduce(&(c * &scale))?));
        }
        let mut low = self.ring.level;
        for row in &self.values {
            let y = coeffs.iter().fold(0, |acc, (i, c)| self.ring.add(acc, self.ring.mul(*c, row[*i])));
            low = low.min(self.ring.valuation(y));
            if low == 0 {
                break;
            }
        }
        Ok(GroupMinimum {
            valuation: Valuation::from_int(gauss + i64::from(low)),
            exact: low < self.ring.level,
        })
    }
}
