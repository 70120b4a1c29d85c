use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// The closed halfspace `{x : <x, normal> <= offset}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "scalar::serde_scalar_vec")]
    pub normal: Vec<Scalar>,
    #[serde(with = "scalar::serde_scalar")]
    pub offset: Scalar,
}

impl Halfspace {
    pub fn new(normal: Vec<Scalar>, offset: Scalar) -> Result<Self> {
        if normal.iter().all(Zero::is_zero) {
            return Err(Error::Invalid("halfspace normal is the zero vector".into()));
        }
        Ok(Halfspace { normal, offset })
    }

    pub fn from_ints(normal: &[i64], offset: i64) -> Self {
        Halfspace::new(
            normal.iter().map(|&c| scalar::int(c)).collect(),
            scalar::int(offset),
        )
        .expect("nonzero normal")
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal_point(&self) -> Point {
        Point(self.normal.clone())
    }

    /// `<p, normal> - offset`; nonpositive inside.
    pub fn slack(&self, p: &Point) -> Scalar {
        p.dot_coords(&self.normal) - &self.offset
    }

    pub fn contains(&self, p: &Point) -> bool {
        !self.slack(p).is_positive()
    }

    pub fn on_boundary(&self, p: &Point) -> bool {
        self.slack(p).is_zero()
    }

    /// The complementary closed halfspace `{<x, n> >= offset}`.
    pub fn flipped(&self) -> Halfspace {
        Halfspace {
            normal: self.normal.iter().map(|c| -c).collect(),
            offset: -&self.offset,
        }
    }

    /// Scales the inequality so the normal has coprime integer entries.
    pub fn canonical(&self) -> Halfspace {
        let den = scalar::common_denominator(self.normal.iter().chain(std::iter::once(&self.offset)));
        let ints: Vec<BigInt> = self
            .normal
            .iter()
            .map(|c| (c * Scalar::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let factor = Scalar::new(den, g);
        Halfspace {
            normal: self.normal.iter().map(|c| c * &factor).collect(),
            offset: &self.offset * &factor,
        }
    }

    /// Same point set, compared after canonical scaling.
    pub fn same_set(&self, other: &Halfspace) -> bool {
        self.canonical() == other.canonical()
    }

    /// Closest point of the boundary hyperplane to the origin.
    pub fn foot(&self) -> Point {
        let n = self.normal_point();
        let s = &self.offset / n.norm_squared();
        n.scale(&s)
    }
}

impl fmt::Display for Halfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<x, {}> <= {}", Point(self.normal.clone()), scalar::format(&self.offset))
    }
}

/// A nonzero direction stored as a primitive integer vector (positive rescaling only).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Direction(#[serde(with = "scalar::serde_scalar_vec")] Vec<Scalar>);

impl Direction {
    pub fn new(v: Vec<Scalar>) -> Result<Self> {
        if v.iter().all(Zero::is_zero) {
            return Err(Error::Invalid("direction is the zero vector".into()));
        }
        let den = scalar::common_denominator(v.iter());
        let ints: Vec<BigInt> = v
            .iter()
            .map(|c| (c * Scalar::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c)).abs();
        Ok(Direction(
            ints.into_iter()
                .map(|c| Scalar::from_integer(c / &g))
                .collect(),
        ))
    }

    pub fn from_ints(v: &[i64]) -> Result<Self> {
        Direction::new(v.iter().map(|&c| scalar::int(c)).collect())
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn as_point(&self) -> Point {
        Point(self.0.clone())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Direction {
        Direction(self.0.iter().map(|c| -c).collect())
    }

    pub fn halfspace(&self, alpha: Scalar) -> Halfspace {
        Halfspace {
            normal: self.0.clone(),
            offset: alpha,
        }
    }

    /// True when `self = t * other` for some `t > 0`.
    pub fn positively_parallel(&self, other: &Direction) -> bool {
        self == other
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Point(self.0.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_canonical_scale() {
        let d = Direction::new(vec![scalar::int(1), scalar::ratio(1, 7)]).unwrap();
        assert_eq!(d, Direction::from_ints(&[7, 1]).unwrap());
        let d = Direction::from_ints(&[-4, 6]).unwrap();
        assert_eq!(d.coords(), &[scalar::int(-2), scalar::int(3)]);
        assert!(Direction::from_ints(&[0, 0]).is_err());
    }

    #[test]
    fn halfspace_same_set_under_scaling() {
        let a = Halfspace::new(vec![scalar::int(1), scalar::ratio(1, 7)], scalar::ratio(8, 7)).unwrap();
        let b = Halfspace::from_ints(&[7, 1], 8);
        assert!(a.same_set(&b));
        assert!(!a.same_set(&b.flipped()));
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(Halfspace::new(vec![scalar::int(0), scalar::int(0)], scalar::int(1)).is_err());
    }
}
