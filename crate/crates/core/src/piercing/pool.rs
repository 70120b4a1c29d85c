//! Finite candidate pools of large convex sets.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::floating::{floating_body, generic_direction, minimal_v_halfspace, DirectionSet};
use crate::geometry::{arrangement_radius, clip, convex_hull, intersect, ConvexBody, Halfspace};
use crate::measures::{lattice_points, Measure, MeasureValue};
use crate::scalar::{self, Scalar};

pub const MAX_FAMILY: usize = 64;
pub const MAX_POOL: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shrink {
    None,
    FloatingBody,
    LatticeCut,
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub body: ConvexBody,
    /// Members whose intersection generated this candidate.
    pub source: Vec<usize>,
    pub shrink: Shrink,
    pub value: MeasureValue,
    #[serde(with = "scalar::serde_scalar")]
    pub threshold: Scalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidatePool {
    pub candidates: Vec<Candidate>,
    /// `containment[c][j]`: candidate `c` lies in member `j`.
    pub containment: Vec<Vec<bool>>,
    pub s_max: usize,
    /// Radius of the box unbounded members were clipped to, if any.
    #[serde(with = "scalar::serde_opt_scalar")]
    pub box_radius: Option<Scalar>,
}

#[derive(Clone, Debug)]
pub struct PoolOptions {
    pub s_max: usize,
    /// Share of `eps` spent on shrinking candidates.
    pub gamma: Scalar,
    pub directions: DirectionSet,
    pub max_pool: usize,
    pub seed: u64,
}

impl PoolOptions {
    pub fn new(s_max: usize) -> Self {
        PoolOptions {
            s_max,
            gamma: scalar::ratio(1, 2),
            directions: DirectionSet::axis_and_diagonals(),
            max_pool: MAX_POOL,
            seed: 0,
        }
    }
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidates lying in member `j`.
    pub fn inside(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.containment[c][j]).collect()
    }

    /// Members containing candidate `c`.
    pub fn holders(&self, c: usize) -> Vec<usize> {
        self.containment[c].iter().enumerate().filter_map(|(j, &b)| b.then_some(j)).collect()
    }
}

/// Box `[-r, r]^d` as a body.
pub fn centered_box(dim: usize, r: &Scalar) -> Result<ConvexBody> {
    let mut hs = Vec::new();
    for i in 0..dim {
        for s in [1, -1] {
            let mut n = vec![Scalar::zero(); dim];
            n[i] = scalar::int(s);
            hs.push(Halfspace::new(n, r.clone())?);
        }
    }
    ConvexBody::from_halfspaces(dim, hs)
}

/// Clips unbounded members to a box holding every vertex of the joint arrangement.
///
/// Nonempty intersections stay nonempty and bounded members are unchanged.
pub fn bounded_family(family: &Family) -> Result<(Family, Option<Scalar>)> {
    if family.members.iter().all(ConvexBody::is_bounded) {
        return Ok((family.clone(), None));
    }
    let d = family.dim().ok_or(Error::EmptyInput("empty family"))?;
    let hs: Vec<Halfspace> = family.members.iter().flat_map(|b| b.halfspaces().to_vec()).collect();
    let r = arrangement_radius(d, &hs);
    let bx = centered_box(d, &r)?;
    let members = family
        .members
        .iter()
        .map(|b| if b.is_bounded() { Ok(b.clone()) } else { intersect(&[b.clone(), bx.clone()]) })
        .collect::<Result<Vec<_>>>()?;
    Ok((Family { members, labels: family.labels.clone() }, Some(r)))
}

/// The `k`-point minimal cut of `body` along a generic direction, as a hull of lattice points.
pub fn lattice_cut(body: &ConvexBody, msr: &Measure, k: &Scalar, seed: u64) -> Result<ConvexBody> {
    let v = generic_direction(body, msr, seed)?;
    let h = minimal_v_halfspace(body, &v, msr, k)?;
    let pts = lattice_points(&clip(body, &h)?, msr)?;
    convex_hull(&pts)
}

/// Intersections of at most `s_max` members with `f >= lambda`, plus their shrinks.
///
/// Continuous measures add each intersection's floating body at level
/// `gamma * eps`, kept when it still reaches `(1 - gamma eps) lambda`. Lattice
/// counts add the minimal `ceil(lambda)`-point cut; at `eps = 0` the cut
/// replaces the intersection.
pub fn build_pool(
    family: &Family,
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    opts: &PoolOptions,
) -> Result<CandidatePool> {
    if opts.s_max == 0 {
        return Err(Error::Invalid("s_max must be at least 1".into()));
    }
    if family.len() > MAX_FAMILY {
        return Err(Error::FamilyTooLarge(format!("{} members, limit {MAX_FAMILY}", family.len())));
    }
    let (boxed, box_radius) = bounded_family(family)?;
    let n = boxed.len();

    let mut sets: Vec<(Vec<usize>, ConvexBody)> = Vec::new();
    let mut stack: Vec<(Vec<usize>, ConvexBody)> = Vec::new();
    for j in 0..n {
        let b = boxed.get(j).clone();
        if msr.at_least(&b, lambda)? {
            stack.push((vec![j], b));
        }
    }
    while let Some((idx, body)) = stack.pop() {
        if idx.len() < opts.s_max {
            for j in idx.last().unwrap() + 1..n {
                let next = intersect(&[body.clone(), boxed.get(j).clone()])?;
                if !next.is_empty() && msr.at_least(&next, lambda)? {
                    let mut ext = idx.clone();
                    ext.push(j);
                    stack.push((ext, next));
                }
            }
        }
        sets.push((idx, body));
        if sets.len() > opts.max_pool {
            return Err(Error::PoolBudget { count: sets.len(), budget: opts.max_pool });
        }
    }
    sets.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    let sharp = eps.is_zero();
    let shrink_level = &opts.gamma * eps;
    let shrunk_floor = (Scalar::one() - &shrink_level) * lambda;
    let made: Vec<Vec<Candidate>> = sets
        .par_iter()
        .enumerate()
        .map(|(i, (src, body))| -> Result<Vec<Candidate>> {
            let mut out = Vec::new();
            let raw = || -> Result<Candidate> {
                Ok(Candidate {
                    body: body.clone(),
                    source: src.clone(),
                    shrink: Shrink::None,
                    value: msr.evaluate(body)?,
                    threshold: lambda.clone(),
                })
            };
            match msr {
                Measure::LatticeCount(_) => {
                    if !sharp {
                        out.push(raw()?);
                    }
                    let cut = lattice_cut(body, msr, lambda, opts.seed.wrapping_add(i as u64))?;
                    out.push(Candidate {
                        value: msr.evaluate(&cut)?,
                        body: cut,
                        source: src.clone(),
                        shrink: Shrink::LatticeCut,
                        threshold: lambda.clone(),
                    });
                }
                Measure::Volume | Measure::Perimeter { .. } => {
                    out.push(raw()?);
                    if !sharp {
                        let fb = floating_body(body, msr, &shrink_level, &opts.directions)?.body;
                        if msr.at_least(&fb, &shrunk_floor)? {
                            out.push(Candidate {
                                value: msr.evaluate(&fb)?,
                                body: fb,
                                source: src.clone(),
                                shrink: Shrink::FloatingBody,
                                threshold: shrunk_floor.clone(),
                            });
                        }
                    }
                }
                Measure::Nonempty => out.push(raw()?),
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut candidates = Vec::new();
    for c in made.into_iter().flatten() {
        let key = serde_json::to_string(&c.body)?;
        if seen.contains_key(&key) {
            continue;
        }
        seen.insert(key, candidates.len());
        candidates.push(c);
    }
    if candidates.len() > opts.max_pool {
        return Err(Error::PoolBudget { count: candidates.len(), budget: opts.max_pool });
    }
    let containment = containment_matrix(family, &candidates);
    Ok(CandidatePool { candidates, containment, s_max: opts.s_max, box_radius })
}

fn containment_matrix(family: &Family, candidates: &[Candidate]) -> Vec<Vec<bool>> {
    candidates
        .par_iter()
        .map(|c| family.members.iter().map(|f| f.contains_body(&c.body)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::Point;
    use crate::scalar::{int, ratio};

    pub(crate) fn three_squares() -> Family {
        Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2), ConvexBody::rect_i(1, 3, 0, 2), ConvexBody::rect_i(2, 4, 0, 2)])
            .unwrap()
    }

    #[test]
    fn three_squares_pool() {
        let fam = three_squares();
        let pool = build_pool(&fam, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(2)).unwrap();
        let bodies: Vec<&ConvexBody> = pool.candidates.iter().map(|c| &c.body).collect();
        for want in [
            ConvexBody::rect_i(0, 2, 0, 2),
            ConvexBody::rect_i(1, 3, 0, 2),
            ConvexBody::rect_i(2, 4, 0, 2),
            ConvexBody::rect_i(1, 2, 0, 2),
            ConvexBody::rect_i(2, 3, 0, 2),
        ] {
            assert!(bodies.contains(&&want), "missing {want}");
        }
        assert_eq!(pool.len(), 5);
        assert!(pool.candidates.iter().all(|c| c.source != vec![0, 2]));
        assert_eq!(pool.holders(3), vec![0, 1]);
    }

    #[test]
    fn single_body_pool() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2)]).unwrap();
        let pool = build_pool(&fam, &Measure::Volume, &int(1), &ratio(1, 4), &PoolOptions::new(2)).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.candidates[1].shrink, Shrink::FloatingBody);
        assert!(fam.get(0).contains_body(&pool.candidates[1].body));
        assert!(pool.candidates[1].value.certainly_at_least(&ratio(7, 8)));
    }

    #[test]
    fn lattice_sharp_pool_uses_cuts() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 3, 0, 3), ConvexBody::rect_i(2, 5, 1, 4)]).unwrap();
        let pool = build_pool(&fam, &Measure::integer_points(2), &int(1), &int(0), &PoolOptions::new(2)).unwrap();
        assert!(pool.candidates.iter().all(|c| c.shrink == Shrink::LatticeCut && c.body.verts().len() == 1));
        // The pair's cut is a point shared with a single-member cut, so dedup keeps the earlier source.
        assert!((0..pool.len()).any(|c| pool.holders(c) == vec![0, 1]));
    }

    #[test]
    fn matrix_matches_vertex_halfspace_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let members: Vec<ConvexBody> = (0..6)
            .map(|_| {
                let pts: Vec<Point> = (0..5).map(|_| Point::from_ints(&[rng.gen_range(0..12), rng.gen_range(0..12)])).collect();
                convex_hull(&pts).unwrap()
            })
            .filter(|b| b.is_full_dimensional())
            .collect();
        let fam = Family::new(members).unwrap();
        let pool = build_pool(&fam, &Measure::Volume, &int(2), &ratio(1, 5), &PoolOptions::new(3)).unwrap();
        for (c, row) in pool.candidates.iter().zip(&pool.containment) {
            for (j, &inside) in row.iter().enumerate() {
                let oracle = c.body.verts().iter().all(|v| fam.get(j).halfspaces().iter().all(|h| h.contains(v)));
                assert_eq!(inside, oracle);
            }
        }
    }

    #[test]
    fn pool_budget() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2); 10]).unwrap();
        let mut opts = PoolOptions::new(4);
        opts.max_pool = 20;
        assert!(matches!(
            build_pool(&fam, &Measure::Volume, &int(1), &int(0), &opts),
            Err(Error::PoolBudget { .. })
        ));
    }
}
