use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// A point (or vector) with exact rational coordinates.
///
/// Ordering is lexicographic on the coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Point(pub Vec<Scalar>);

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| scalar::int(c)).collect())
    }

    /// `[(num, den), ...]`
    pub fn from_ratios(coords: &[(i64, i64)]) -> Self {
        Point(coords.iter().map(|&(n, d)| scalar::ratio(n, d)).collect())
    }

    pub fn parse(coords: &[&str]) -> Result<Self> {
        coords.iter().map(|c| scalar::parse(c)).collect::<Result<_>>().map(Point)
    }

    pub fn zero(dim: usize) -> Self {
        Point(vec![Scalar::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn x(&self) -> &Scalar {
        &self.0[0]
    }

    pub fn y(&self) -> &Scalar {
        &self.0[1]
    }

    pub fn z(&self) -> &Scalar {
        &self.0[2]
    }

    pub fn dot(&self, other: &Point) -> Scalar {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn dot_coords(&self, other: &[Scalar]) -> Scalar {
        self.0
            .iter()
            .zip(other)
            .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_squared(&self) -> Scalar {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Scalar) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    /// 2D cross product `self x other` (z-component).
    pub fn cross(&self, other: &Point) -> Scalar {
        &self.0[0] * &other.0[1] - &self.0[1] * &other.0[0]
    }

    /// 2D rotation by +90 degrees.
    pub fn perp(&self) -> Point {
        Point(vec![-self.0[1].clone(), self.0[0].clone()])
    }

    pub fn cross3(&self, other: &Point) -> Point {
        let (a, b) = (&self.0, &other.0);
        Point(vec![
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }

    pub fn max_abs(&self) -> Scalar {
        self.0
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(scalar::to_f64).collect()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        Ok(())
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        let half = scalar::ratio(1, 2);
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a + b) * &half)
                .collect(),
        )
    }
}

/// Sign of the turn `a -> b -> c` in the plane: positive for counterclockwise.
pub fn orient2d(a: &Point, b: &Point, c: &Point) -> Scalar {
    (&b.0[0] - &a.0[0]) * (&c.0[1] - &a.0[1]) - (&b.0[1] - &a.0[1]) * (&c.0[0] - &a.0[0])
}

/// Closed-segment membership for collinear-aware tests.
pub fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    if !orient2d(a, b, p).is_zero() {
        return false;
    }
    (0..a.dim()).all(|i| {
        let (lo, hi) = if a.0[i] <= b.0[i] {
            (&a.0[i], &b.0[i])
        } else {
            (&b.0[i], &a.0[i])
        };
        lo <= &p.0[i] && &p.0[i] <= hi
    })
}

impl<'a> Sub<&'a Point> for &'a Point {
    type Output = Point;
    fn sub(self, rhs: &'a Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl<'a> Add<&'a Point> for &'a Point {
    type Output = Point;
    fn add(self, rhs: &'a Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Mul<&'a Scalar> for &'a Point {
    type Output = Point;
    fn mul(self, rhs: &'a Scalar) -> Point {
        self.scale(rhs)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", scalar::format(c))?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        scalar::serde_scalar_vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        scalar::serde_scalar_vec::deserialize(d).map(Point)
    }
}
