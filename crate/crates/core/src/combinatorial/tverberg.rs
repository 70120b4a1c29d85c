//! Quantitative Tverberg partitions, plus the classic point version.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::caratheodory::{colorful_caratheodory, hull_contains_body};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::geometry::{
    convex_hull, intersect, orient2d, polygon, support_vec, ConvexBody, Halfspace, Point, Support,
};
use crate::measures::{default_vertex_budget, inscribed_polytope, InscribeOptions, Measure, MeasureValue};
use crate::scalar::{self, Scalar};

/// Helly number, inscribed-polytope vertex count and size floor used by the
/// quantitative constructions.
#[derive(Clone, Debug, Serialize)]
pub struct TverbergParams {
    pub helly: usize,
    pub caratheodory: usize,
    #[serde(with = "scalar::serde_scalar")]
    pub lambda: Scalar,
}

impl TverbergParams {
    /// Defaults for a measure in dimension `d`. The Helly number is `2d`
    /// (`2^d` for lattice counts, `d + 1` for nonemptiness); the vertex count
    /// is what an inscribed polytope needs at accuracy `eps2` (`ceil(lambda)`
    /// lattice points, a single point for nonemptiness).
    pub fn for_measure(m: &Measure, d: usize, lambda: Scalar, eps2: &Scalar) -> Self {
        let (helly, caratheodory) = match m {
            Measure::Nonempty => (d + 1, 1),
            Measure::LatticeCount(_) => {
                let c = scalar::ceil_to_u64(&lambda).unwrap_or(u64::MAX) as usize;
                (1 << d, c.max(1))
            }
            _ => (2 * d, default_vertex_budget(d, eps2)),
        };
        TverbergParams { helly, caratheodory, lambda }
    }

    /// Most members a single extracted part needs: `max(d c, d + 1)`.
    pub fn part_size(&self, d: usize) -> usize {
        d.saturating_mul(self.caratheodory).max(d + 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TverbergResult {
    pub partition: Vec<Vec<usize>>,
    pub witness: ConvexBody,
    pub achieved: MeasureValue,
    /// The central region all part hulls contain (general mode only).
    pub central: Option<ConvexBody>,
}

/// Hull of the union of the indexed members' vertices.
pub fn union_hull(family: &Family, idx: &[usize]) -> Result<ConvexBody> {
    let pts: Vec<Point> = union_points(family, idx)?;
    if pts.is_empty() {
        return Ok(ConvexBody::empty(family.dim().unwrap_or(2)));
    }
    convex_hull(&pts)
}

fn union_points(family: &Family, idx: &[usize]) -> Result<Vec<Point>> {
    let mut pts = Vec::new();
    for &i in idx {
        pts.extend_from_slice(family.get(i).vertices().ok_or(Error::Unbounded)?);
    }
    Ok(pts)
}

/// Whether `P` lies in `conv(u A)` for every part.
pub fn verify_partition(family: &Family, partition: &[Vec<usize>], witness: &ConvexBody) -> Result<bool> {
    let mut seen = vec![false; family.len()];
    for part in partition {
        for &i in part {
            if i >= seen.len() || seen[i] {
                return Ok(false);
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Ok(false);
    }
    for part in partition {
        if !hull_contains_body(&union_points(family, part)?, witness)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Splits `T` into `m` parts whose hull-unions share a large polytope.
pub fn tverberg_partition(
    family: &Family,
    m: usize,
    msr: &Measure,
    eps1: &Scalar,
    eps2: &Scalar,
    params: &TverbergParams,
) -> Result<TverbergResult> {
    if m == 0 {
        return Err(Error::Invalid("at least one part is needed".into()));
    }
    let d = family.dim().ok_or(Error::EmptyInput("empty family"))?;
    if matches!(msr, Measure::Nonempty) {
        if let Some(points) = family.as_points() {
            let (partition, point) = classic_tverberg(&points, m)?;
            let witness = ConvexBody::point(point)?;
            return Ok(TverbergResult { partition, witness, achieved: MeasureValue::Exact(Scalar::one()), central: None });
        }
    }
    general_tverberg(family, d, m, msr, eps1, eps2, params)
}

fn general_tverberg(
    family: &Family,
    d: usize,
    m: usize,
    msr: &Measure,
    eps1: &Scalar,
    eps2: &Scalar,
    params: &TverbergParams,
) -> Result<TverbergResult> {
    let n = family.len();
    let part = params.part_size(d);
    let removed = (m - 1).saturating_mul(part);
    if n <= removed {
        return Err(Error::TverbergPrecondition(format!(
            "{n} members cannot be split into {m} parts of up to {part} members plus a remainder"
        )));
    }
    for (i, b) in family.members.iter().enumerate() {
        if !b.is_bounded() {
            return Err(Error::TverbergPrecondition(format!("member {i} is unbounded")));
        }
    }
    let s = n - removed;
    let central = central_region(family, s)?;
    let required = (Scalar::one() - eps1) * &params.lambda;
    if !msr.at_least(&central, &required)? {
        return Err(Error::CentralRegionTooSmall {
            achieved: msr.evaluate(&central)?.to_string(),
            required: scalar::format(&required),
        });
    }
    let opts = InscribeOptions { target: Some(required), budget: Some(params.caratheodory), direction: None };
    let inscribed = inscribed_polytope(msr, &central, eps2, &opts)?;
    let witness = inscribed.body;
    let targets: Vec<Point> = witness.verts().to_vec();

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut partition = Vec::with_capacity(m);
    for _ in 1..m {
        let chosen = if params.caratheodory == 1 {
            minimal_part(family, &remaining, &witness, part)?
        } else {
            caratheodory_part(family, &remaining, &targets)?
        };
        remaining.retain(|i| !chosen.contains(i));
        partition.push(chosen);
    }
    partition.push(remaining);
    let achieved = msr.evaluate(&witness)?;
    Ok(TverbergResult { partition, witness, achieved, central: Some(central) })
}

/// Smallest (then lexicographically first) subset of `pool` whose hull-union contains `witness`.
fn minimal_part(family: &Family, pool: &[usize], witness: &ConvexBody, max_size: usize) -> Result<Vec<usize>> {
    for size in 1..=max_size.min(pool.len()) {
        let mut found = None;
        for_each_subset(pool.len(), size, &mut |sub| {
            let idx: Vec<usize> = sub.iter().map(|&i| pool[i]).collect();
            match union_points(family, &idx).and_then(|pts| hull_contains_body(&pts, witness)) {
                Ok(true) => {
                    found = Some(Ok(idx));
                    false
                }
                Ok(false) => true,
                Err(e) => {
                    found = Some(Err(e));
                    false
                }
            }
        });
        if let Some(r) = found {
            return r;
        }
    }
    Err(Error::TverbergPrecondition("no part contains the witness".into()))
}

/// A part from Caratheodory over the pooled vertices (all classes equal).
fn caratheodory_part(family: &Family, pool: &[usize], targets: &[Point]) -> Result<Vec<usize>> {
    let mut owners = Vec::new();
    let mut pts = Vec::new();
    for &i in pool {
        for v in family.get(i).verts() {
            owners.push(i);
            pts.push(v.clone());
        }
    }
    let d = targets[0].dim();
    let classes = vec![pts.clone(); (targets.len() * d).max(d + 1)];
    let choice = colorful_caratheodory(targets, &classes)?;
    let mut part: Vec<usize> = choice.indices.iter().map(|&j| owners[j]).collect();
    part.sort_unstable();
    part.dedup();
    Ok(part)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it returns false.
pub fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `n \cap conv(u A)` over all `s`-subsets `A`, in the plane.
///
/// A point leaves `conv(u A)` exactly when some direction `u` separates it,
/// so the region is cut out by `<x, u> <= (n - s + 1)`-th largest member
/// support in direction `u`. These order statistics only change slope at
/// directions orthogonal to a difference of two member vertices, so those
/// directions suffice.
pub fn central_region(family: &Family, s: usize) -> Result<ConvexBody> {
    let d = family.dim().ok_or(Error::EmptyInput("empty family"))?;
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let n = family.len();
    if s == 0 || s > n {
        return Err(Error::Invalid(format!("subfamily size {s} out of range")));
    }
    if s == n {
        return union_hull(family, &(0..n).collect::<Vec<_>>());
    }
    let mut verts: Vec<Point> = Vec::new();
    for b in &family.members {
        verts.extend_from_slice(b.vertices().ok_or(Error::Unbounded)?);
    }
    verts.sort();
    verts.dedup();
    let mut dirs: Vec<Point> = vec![
        Point::from_ints(&[1, 0]),
        Point::from_ints(&[-1, 0]),
        Point::from_ints(&[0, 1]),
        Point::from_ints(&[0, -1]),
    ];
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let e = &verts[j] - &verts[i];
            let perp = e.perp();
            dirs.push(perp.clone());
            dirs.push(-&perp);
        }
    }
    let mut hs = Vec::with_capacity(dirs.len());
    for u in dirs {
        let mut sup: Vec<Scalar> = family
            .members
            .iter()
            .map(|b| match support_vec(b, &u.0) {
                Support::Finite(v) => v,
                _ => unreachable!("bounded nonempty members"),
            })
            .collect();
        sup.sort_by(|a, b| b.cmp(a));
        hs.push(Halfspace::new(u.0, sup[n - s].clone())?);
    }
    // Start from the hull of everything so the result is bounded.
    let all = union_hull(family, &(0..n).collect::<Vec<_>>())?;
    let mut ring = all.verts().to_vec();
    for h in &hs {
        ring = polygon::clip(&ring, h);
        if ring.is_empty() {
            return Ok(ConvexBody::empty(2));
        }
    }
    convex_hull(&ring)
}

/// Classic Tverberg for a point set in the plane.
///
/// Tries candidate common points (input points, then crossings of lines
/// through input pairs, nearest the centroid first) and packs `m` disjoint
/// minimal sets whose hulls contain the candidate: singletons, segments or
/// triangles. Any vertex of the common region of a valid partition is such a
/// candidate, so the search is complete.
pub fn classic_tverberg(points: &[Point], m: usize) -> Result<(Vec<Vec<usize>>, Point)> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("no points"));
    }
    let d = points[0].dim();
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    if m == 1 {
        return Ok((vec![(0..n).collect()], points[0].clone()));
    }
    let centroid = points
        .iter()
        .fold(Point::zero(2), |acc, p| &acc + p)
        .scale(&scalar::ratio(1, n as i64));
    let mut cands: Vec<Point> = points.to_vec();
    let mut lines = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if points[i] != points[j] {
                lines.push((i, j));
            }
        }
    }
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let (p, q) = (&points[lines[a].0], &points[lines[a].1]);
            let (r, s) = (&points[lines[b].0], &points[lines[b].1]);
            if let Some(x) = line_crossing(p, q, r, s) {
                cands.push(x);
            }
        }
    }
    cands.sort_by(|a, b| {
        (a - &centroid).norm_squared().cmp(&(b - &centroid).norm_squared()).then(a.cmp(b))
    });
    cands.dedup();
    for c in &cands {
        if let Some(parts) = pack_parts(points, c, m) {
            return Ok((parts, c.clone()));
        }
    }
    Err(Error::TverbergPrecondition(format!("no partition of {n} points into {m} parts with a common point")))
}

fn line_crossing(p: &Point, q: &Point, r: &Point, s: &Point) -> Option<Point> {
    let d1 = q - p;
    let d2 = s - r;
    let den = d1.cross(&d2);
    if den.is_zero() {
        return None;
    }
    let t = (r - p).cross(&d2) / den;
    Some(p + &d1.scale(&t))
}

/// Minimal subsets whose hull contains `c`, then a backtracking packing of `m` disjoint ones.
fn pack_parts(points: &[Point], c: &Point, m: usize) -> Option<Vec<Vec<usize>>> {
    let n = points.len();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if &points[i] == c {
            sets.push(vec![i]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if &points[i] != c && &points[j] != c && crate::geometry::on_segment(&points[i], &points[j], c) {
                sets.push(vec![i, j]);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, e) = (&points[i], &points[j], &points[k]);
                let o = orient2d(a, b, e);
                if o.is_zero() {
                    continue;
                }
                let s1 = orient2d(a, b, c);
                let s2 = orient2d(b, e, c);
                let s3 = orient2d(e, a, c);
                let strictly = |s: &Scalar| if o.is_positive() { s.is_positive() } else { s.is_negative() };
                // Interior points only; boundary points are already covered by segments.
                if strictly(&s1) && strictly(&s2) && strictly(&s3) {
                    sets.push(vec![i, j, k]);
                }
            }
        }
    }
    if sets.len() < m {
        return None;
    }
    let mut used = vec![false; n];
    let mut chosen: Vec<usize> = Vec::new();
    if !backtrack(&sets, m, 0, &mut used, &mut chosen) {
        return None;
    }
    let mut parts: Vec<Vec<usize>> = chosen.iter().map(|&s| sets[s].clone()).collect();
    let leftovers: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
    parts.last_mut().unwrap().extend(leftovers);
    for p in &mut parts {
        p.sort_unstable();
    }
    Some(parts)
}

fn backtrack(sets: &[Vec<usize>], m: usize, start: usize, used: &mut [bool], chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == m {
        return true;
    }
    for s in start..sets.len() {
        if sets[s].iter().any(|&i| used[i]) {
            continue;
        }
        for &i in &sets[s] {
            used[i] = true;
        }
        chosen.push(s);
        if backtrack(sets, m, s + 1, used, chosen) {
            return true;
        }
        chosen.pop();
        for &i in &sets[s] {
            used[i] = false;
        }
    }
    false
}

/// Whether the hulls of the parts share a point (exact intersection).
pub fn parts_intersect(points: &[Point], parts: &[Vec<usize>]) -> Result<bool> {
    let hulls: Vec<ConvexBody> = parts
        .iter()
        .map(|p| convex_hull(&p.iter().map(|&i| points[i].clone()).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    Ok(!intersect(&hulls)?.is_empty())
}
