//! Selection: many `r`-tuples whose hull-unions share one large polytope.

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::caratheodory::hull_contains_body;
use super::tverberg::{binomial, for_each_subset, tverberg_partition, TverbergParams};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::geometry::{ConvexBody, Point};
use crate::measures::{Measure, MeasureValue};
use crate::scalar::{self, Scalar};

/// Above this many `r`-tuples the count is sampled.
pub const TUPLE_BUDGET: u128 = 1_000_000;
pub const SAMPLE_TRIALS: usize = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct SelectionResult {
    pub witness: ConvexBody,
    pub achieved: MeasureValue,
    pub tuples: Vec<Vec<usize>>,
    #[serde(with = "scalar::serde_scalar")]
    pub rho_achieved: Scalar,
    pub r: usize,
    pub parts: Vec<Vec<usize>>,
    /// True when the tuples come from random sampling; `rho_achieved` is then only a lower bound.
    pub sampled: bool,
}

/// Whether the members' hull-union contains `witness`.
pub fn tuple_contains(family: &Family, tuple: &[usize], witness: &ConvexBody) -> Result<bool> {
    let mut pts: Vec<Point> = Vec::new();
    for &i in tuple {
        pts.extend_from_slice(family.get(i).vertices().ok_or(Error::Unbounded)?);
    }
    hull_contains_body(&pts, witness)
}

/// Finds a Tverberg witness for `m_parts` parts and lists the `r`-tuples around it.
pub fn selection(
    family: &Family,
    msr: &Measure,
    eps: &Scalar,
    m_parts: usize,
    params: &TverbergParams,
    seed: u64,
) -> Result<SelectionResult> {
    let d = family.dim().ok_or(Error::EmptyInput("empty family"))?;
    let half = eps / scalar::int(2);
    let tv = tverberg_partition(family, m_parts, msr, &half, &half, params)?;
    let r = params.part_size(d).min(family.len());
    let n = family.len();
    let total = binomial(n, r);
    let (tuples, sampled) = if total <= TUPLE_BUDGET {
        let mut all = Vec::with_capacity(total as usize);
        for_each_subset(n, r, &mut |s| {
            all.push(s.to_vec());
            true
        });
        (qualifying(family, all, &tv.witness)?, false)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draws: Vec<Vec<usize>> = (0..SAMPLE_TRIALS)
            .map(|_| {
                let mut t = sample(&mut rng, n, r).into_vec();
                t.sort_unstable();
                t
            })
            .collect();
        draws.sort();
        draws.dedup();
        (qualifying(family, draws, &tv.witness)?, true)
    };
    let rho_achieved = Scalar::new(BigInt::from(tuples.len()), BigInt::from(total));
    Ok(SelectionResult {
        witness: tv.witness,
        achieved: tv.achieved,
        tuples,
        rho_achieved,
        r,
        parts: tv.partition,
        sampled,
    })
}

fn qualifying(family: &Family, candidates: Vec<Vec<usize>>, witness: &ConvexBody) -> Result<Vec<Vec<usize>>> {
    let flags: Vec<bool> = candidates
        .par_iter()
        .map(|t| tuple_contains(family, t, witness))
        .collect::<Result<_>>()?;
    Ok(candidates.into_iter().zip(flags).filter_map(|(t, ok)| ok.then_some(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::orient2d;
    use crate::scalar::{int, ratio};
    use num_traits::Signed;

    fn p(x: i64, y: i64) -> Point {
        Point::from_ints(&[x, y])
    }

    /// Closed-triangle containment by orientation signs.
    fn in_triangle(a: &Point, b: &Point, c: &Point, x: &Point) -> bool {
        let s = [orient2d(a, b, x), orient2d(b, c, x), orient2d(c, a, x)];
        !(s.iter().any(|v| v.is_positive()) && s.iter().any(|v| v.is_negative()))
    }

    fn triangle_count(pts: &[Point], x: &Point) -> usize {
        let n = pts.len();
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if in_triangle(&pts[i], &pts[j], &pts[k], x) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    fn classic(pts: &[Point], m: usize) -> SelectionResult {
        let fam = Family::from_points(pts).unwrap();
        let params = TverbergParams::for_measure(&Measure::Nonempty, 2, int(1), &int(0));
        selection(&fam, &Measure::Nonempty, &int(0), m, &params, 1).unwrap()
    }

    #[test]
    fn convex_nonagon() {
        let pts = vec![p(10, 0), p(8, 6), p(3, 9), p(-3, 9), p(-8, 6), p(-10, 0), p(-8, -6), p(-3, -9), p(6, -8)];
        let s = classic(&pts, 3);
        assert_eq!(s.r, 3);
        let x = s.witness.verts()[0].clone();
        let want = triangle_count(&pts, &x);
        assert!(want >= 1);
        assert_eq!(s.tuples.len(), want);
        assert_eq!(s.rho_achieved, ratio(want as i64, 84));
        assert!(!s.sampled);
    }

    #[test]
    fn identical_members() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2); 14]).unwrap();
        let params = TverbergParams::for_measure(&Measure::Volume, 2, int(4), &ratio(1, 8));
        let s = selection(&fam, &Measure::Volume, &ratio(1, 4), 2, &params, 1).unwrap();
        assert_eq!(s.rho_achieved, int(1));
        assert_eq!(s.tuples.len() as u128, binomial(14, 12));
    }

    #[test]
    fn twelve_points_match_oracle() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..12).map(|_| p(rng.gen_range(-50..=50), rng.gen_range(-50..=50))).collect();
        let s = classic(&pts, 4);
        let x = s.witness.verts()[0].clone();
        assert_eq!(s.tuples.len(), triangle_count(&pts, &x));
        assert_eq!(s.rho_achieved, ratio(s.tuples.len() as i64, 220));
        let fam = Family::from_points(&pts).unwrap();
        for t in &s.tuples {
            assert!(tuple_contains(&fam, t, &s.witness).unwrap());
        }
    }
}
