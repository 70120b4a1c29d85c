//! Planar primitives on canonical vertex lists.
//!
//! A canonical polygon is a list of distinct points in counterclockwise order,
//! starting at the lexicographically smallest one, with no three consecutive
//! points collinear. Lists of length 0, 1 and 2 stand for the empty set, a
//! point and a segment.

use num_traits::{Signed, Zero};

use super::point::{orient2d, Point};
use super::Halfspace;
use crate::scalar::{self, Scalar};

/// Andrew's monotone chain on exact coordinates; returns the canonical hull.
pub fn hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2
            && !orient2d(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !orient2d(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.truncate(1);
    }
    lower
}

/// Twice the signed area (shoelace).
pub fn double_area(poly: &[Point]) -> Scalar {
    if poly.len() < 3 {
        return Scalar::zero();
    }
    let mut acc = Scalar::zero();
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        acc += a.cross(b);
    }
    acc
}

pub fn area(poly: &[Point]) -> Scalar {
    double_area(poly) / scalar::int(2)
}

/// Closed containment in a canonical polygon.
pub fn contains(poly: &[Point], p: &Point) -> bool {
    match poly.len() {
        0 => false,
        1 => &poly[0] == p,
        2 => super::point::on_segment(&poly[0], &poly[1], p),
        n => (0..n).all(|i| !orient2d(&poly[i], &poly[(i + 1) % n], p).is_negative()),
    }
}

/// Clips a canonical polygon by a closed halfplane.
pub fn clip(poly: &[Point], h: &Halfspace) -> Vec<Point> {
    let n = poly.len();
    if n == 0 {
        return Vec::new();
    }
    let slacks: Vec<Scalar> = poly.iter().map(|p| h.slack(p)).collect();
    if slacks.iter().all(|s| !s.is_positive()) {
        return poly.to_vec();
    }
    if slacks.iter().all(|s| s.is_positive()) {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n + 1);
    let edges = if n == 2 { 1 } else { n };
    if n == 1 {
        return Vec::new();
    }
    for i in 0..n {
        let a = &poly[i];
        let sa = &slacks[i];
        if !sa.is_positive() {
            out.push(a.clone());
        }
        if i >= edges {
            continue;
        }
        let j = (i + 1) % n;
        let b = &poly[j];
        let sb = &slacks[j];
        if (sa.is_positive() && sb.is_negative()) || (sa.is_negative() && sb.is_positive()) {
            let t = sa / (sa - sb);
            let d = b - a;
            out.push(a + &d.scale(&t));
        }
    }
    hull(&out)
}

/// Outward halfspaces describing a canonical polygon (or point, or segment).
pub fn halfspaces(poly: &[Point]) -> Vec<Halfspace> {
    match poly.len() {
        0 => empty_halfspaces(2),
        1 => point_halfspaces(&poly[0]),
        2 => {
            let (a, b) = (&poly[0], &poly[1]);
            let d = b - a;
            let n = d.perp();
            vec![
                Halfspace { normal: n.0.clone(), offset: n.dot(a) }.canonical(),
                Halfspace { normal: (-&n).0, offset: -n.dot(a) }.canonical(),
                Halfspace { normal: d.0.clone(), offset: d.dot(b) }.canonical(),
                Halfspace { normal: (-&d).0, offset: -d.dot(a) }.canonical(),
            ]
        }
        n => (0..n)
            .map(|i| {
                let a = &poly[i];
                let b = &poly[(i + 1) % n];
                let normal = vec![&b.0[1] - &a.0[1], &a.0[0] - &b.0[0]];
                let offset = a.dot_coords(&normal);
                Halfspace { normal, offset }.canonical()
            })
            .collect(),
    }
}

pub fn point_halfspaces(p: &Point) -> Vec<Halfspace> {
    let d = p.dim();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut e = vec![Scalar::zero(); d];
        e[i] = scalar::int(1);
        out.push(Halfspace { normal: e.clone(), offset: p.0[i].clone() });
        e[i] = scalar::int(-1);
        out.push(Halfspace { normal: e, offset: -&p.0[i] });
    }
    out
}

/// `x_1 <= -1` and `-x_1 <= 0`: an infeasible pair standing for the empty set.
pub fn empty_halfspaces(dim: usize) -> Vec<Halfspace> {
    let mut e = vec![Scalar::zero(); dim];
    e[0] = scalar::int(1);
    let a = Halfspace { normal: e.clone(), offset: scalar::int(-1) };
    e[0] = scalar::int(-1);
    let b = Halfspace { normal: e, offset: Scalar::zero() };
    vec![a, b]
}

/// Square `[-r, r]^2` as a canonical polygon.
pub fn square(r: &Scalar) -> Vec<Point> {
    let m = -r.clone();
    vec![
        Point(vec![m.clone(), m.clone()]),
        Point(vec![r.clone(), m.clone()]),
        Point(vec![r.clone(), r.clone()]),
        Point(vec![m, r.clone()]),
    ]
}

/// Intersection point of the boundary lines of two halfplanes, if not parallel.
pub fn line_intersection(a: &Halfspace, b: &Halfspace) -> Option<Point> {
    let det = &a.normal[0] * &b.normal[1] - &a.normal[1] * &b.normal[0];
    if det.is_zero() {
        return None;
    }
    let x = (&a.offset * &b.normal[1] - &b.offset * &a.normal[1]) / &det;
    let y = (&a.normal[0] * &b.offset - &b.normal[0] * &a.offset) / &det;
    Some(Point(vec![x, y]))
}

/// Euclidean perimeter squared-length terms: returns the squared edge lengths.
pub fn squared_edge_lengths(poly: &[Point]) -> Vec<Scalar> {
    match poly.len() {
        0 | 1 => Vec::new(),
        // A segment is counted from both sides.
        2 => {
            let l = (&poly[1] - &poly[0]).norm_squared();
            vec![l.clone(), l]
        }
        n => (0..n)
            .map(|i| (&poly[(i + 1) % n] - &poly[i]).norm_squared())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::from_ints(&[x, y])).collect()
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let h = hull(&pts(&[(0, 0), (2, 0), (1, 0), (2, 2), (0, 2), (1, 1), (0, 1)]));
        assert_eq!(h, pts(&[(0, 0), (2, 0), (2, 2), (0, 2)]));
    }

    #[test]
    fn hull_of_collinear_points_is_segment() {
        let h = hull(&pts(&[(2, 2), (0, 0), (1, 1), (3, 3)]));
        assert_eq!(h, pts(&[(0, 0), (3, 3)]));
    }

    #[test]
    fn clip_segment_and_point() {
        let seg = pts(&[(0, 0), (4, 0)]);
        let h = Halfspace::from_ints(&[1, 0], 1);
        assert_eq!(clip(&seg, &h), pts(&[(0, 0), (1, 0)]));
        let p = pts(&[(3, 3)]);
        assert!(clip(&p, &h).is_empty());
        assert_eq!(clip(&pts(&[(0, 0)]), &h), pts(&[(0, 0)]));
    }

    #[test]
    fn halfspaces_reproduce_membership() {
        let sq = pts(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let hs = halfspaces(&sq);
        let inside = Point::from_ratios(&[(1, 2), (1, 1)]);
        let outside = Point::from_ratios(&[(3, 2), (1, 2)]);
        assert!(hs.iter().all(|h| h.contains(&inside)));
        assert!(hs.iter().any(|h| !h.contains(&outside)));
    }
}
