//! Full-rank point lattices given by a rational basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    basis: Vec<Point>,
    /// Rows of the inverse of the column-basis matrix.
    inverse: Vec<Vec<Scalar>>,
    det: Scalar,
}

/// Inverse of a square matrix given by rows; `None` if singular.
fn invert(m: &[Vec<Scalar>]) -> Option<(Vec<Vec<Scalar>>, Scalar)> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    let mut det = Scalar::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= &pv;
        for x in a[col].iter_mut() {
            *x /= &pv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some((a.into_iter().map(|r| r[n..].to_vec()).collect(), det))
}

impl Lattice {
    /// Lattice spanned by the given basis vectors (must be full rank).
    pub fn new(basis: Vec<Point>) -> Result<Self> {
        let d = basis.len();
        if d == 0 || basis.iter().any(|b| b.dim() != d) {
            return Err(Error::Invalid("lattice basis must be a square matrix".into()));
        }
        // Column matrix: entry (i, j) is coordinate i of basis vector j.
        let cols: Vec<Vec<Scalar>> = (0..d)
            .map(|i| basis.iter().map(|b| b.0[i].clone()).collect())
            .collect();
        let (inverse, det) =
            invert(&cols).ok_or_else(|| Error::Invalid("lattice basis is not full rank".into()))?;
        Ok(Lattice { basis, inverse, det })
    }

    pub fn integer(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut p = Point::zero(dim);
                p.0[i] = Scalar::one();
                p
            })
            .collect();
        Lattice::new(basis).expect("identity basis")
    }

    /// `k Z^d`
    pub fn scaled_integer(dim: usize, k: i64) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut p = Point::zero(dim);
                p.0[i] = scalar::int(k);
                p
            })
            .collect();
        Lattice::new(basis).expect("scaled basis")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    /// Absolute determinant (covolume).
    pub fn covolume(&self) -> Scalar {
        self.det.abs()
    }

    /// Coordinates of `p` in the basis.
    pub fn coords(&self, p: &Point) -> Vec<Scalar> {
        self.inverse.iter().map(|row| p.dot_coords(row)).collect()
    }

    pub fn point_at(&self, c: &[BigInt]) -> Point {
        let d = self.dim();
        let mut out = Point::zero(d);
        for (b, ci) in self.basis.iter().zip(c) {
            let ci = Scalar::from_integer(ci.clone());
            for i in 0..d {
                out.0[i] += &b.0[i] * &ci;
            }
        }
        out
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.coords(p).iter().all(|c| c.is_integer())
    }

    pub fn is_sublattice_of(&self, sup: &Lattice) -> bool {
        self.dim() == sup.dim() && self.basis.iter().all(|b| sup.contains(b))
    }

    /// Index `[sup : self]` for a sublattice.
    pub fn index_in(&self, sup: &Lattice) -> BigInt {
        (self.covolume() / sup.covolume()).to_integer()
    }

    /// Smallest positive integer `t` with `t * v` in the lattice (for rational `v`).
    pub fn period(&self, v: &Point) -> BigInt {
        let c = self.coords(v);
        let l = scalar::common_denominator(c.iter());
        let ints: Vec<BigInt> = c
            .iter()
            .map(|x| (x * Scalar::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return BigInt::one();
        }
        &l / l.gcd(&g)
    }
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.basis.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let basis = Vec::<Point>::deserialize(d)?;
        Lattice::new(basis).map_err(serde::de::Error::custom)
    }
}
