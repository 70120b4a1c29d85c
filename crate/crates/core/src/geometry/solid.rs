//! Exact hulls, vertex enumeration and volume in three dimensions.
//!
//! Sizes here are desk-scale, so facets are found by testing every triple of
//! points rather than by an incremental algorithm.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::{polygon, Halfspace, Point};
use crate::scalar::{self, Scalar};

pub struct Hull3 {
    /// Extreme points, sorted lexicographically.
    pub vertices: Vec<Point>,
    /// Irredundant halfspaces (canonical scale).
    pub halfspaces: Vec<Halfspace>,
    /// Facet polygons as vertex loops, only for full-dimensional hulls.
    pub faces: Vec<Vec<Point>>,
    pub affine_dim: usize,
}

fn drop_axis(n: &Point) -> usize {
    (0..3)
        .max_by(|&i, &j| n.0[i].abs().cmp(&n.0[j].abs()).then(j.cmp(&i)))
        .unwrap()
}

fn project(p: &Point, axis: usize) -> Point {
    Point(
        (0..3)
            .filter(|&i| i != axis)
            .map(|i| p.0[i].clone())
            .collect(),
    )
}

/// Hull of coplanar points (plane normal `n`) as a loop of the original points.
fn planar_loop(points: &[Point], n: &Point) -> Vec<Point> {
    let axis = drop_axis(n);
    let projected: Vec<Point> = points.iter().map(|p| project(p, axis)).collect();
    let ring = polygon::hull(&projected);
    ring.iter()
        .map(|q| {
            let idx = projected.iter().position(|p| p == q).unwrap();
            points[idx].clone()
        })
        .collect()
}

fn unit(i: usize) -> Point {
    let mut v = Point::zero(3);
    v.0[i] = scalar::int(1);
    v
}

pub fn hull(points: &[Point]) -> Hull3 {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        return Hull3 {
            vertices: Vec::new(),
            halfspaces: polygon::empty_halfspaces(3),
            faces: Vec::new(),
            affine_dim: 0,
        };
    }
    let a = pts[0].clone();
    let Some(b) = pts.iter().find(|p| **p != a).cloned() else {
        return Hull3 {
            halfspaces: polygon::point_halfspaces(&a),
            vertices: vec![a],
            faces: Vec::new(),
            affine_dim: 0,
        };
    };
    let ab = &b - &a;
    let Some(c) = pts.iter().find(|p| !ab.cross3(&(*p - &a)).is_zero()).cloned() else {
        return segment_hull(&pts, &a, &ab);
    };
    let normal = ab.cross3(&(&c - &a));
    if pts.iter().all(|p| normal.dot(&(p - &a)).is_zero()) {
        return planar_hull(&pts, &normal, &a);
    }

    let mut facets: BTreeSet<(Vec<Scalar>, Scalar)> = BTreeSet::new();
    let mut halfspaces = Vec::new();
    let mut faces = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let e1 = &pts[j] - &pts[i];
                let e2 = &pts[k] - &pts[i];
                let nrm = e1.cross3(&e2);
                if nrm.is_zero() {
                    continue;
                }
                let mut pos = false;
                let mut neg = false;
                for p in &pts {
                    let s = nrm.dot(&(p - &pts[i]));
                    if s.is_positive() {
                        pos = true;
                    } else if s.is_negative() {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
                if pos && neg {
                    continue;
                }
                let outward = if pos { -&nrm } else { nrm };
                let h = Halfspace {
                    offset: outward.dot(&pts[i]),
                    normal: outward.0.clone(),
                }
                .canonical();
                if facets.insert((h.normal.clone(), h.offset.clone())) {
                    let on: Vec<Point> = pts.iter().filter(|p| h.on_boundary(p)).cloned().collect();
                    faces.push(planar_loop(&on, &outward));
                    halfspaces.push(h);
                }
            }
        }
    }
    let mut vertices: Vec<Point> = faces.iter().flatten().cloned().collect();
    vertices.sort();
    vertices.dedup();
    Hull3 {
        vertices,
        halfspaces,
        faces,
        affine_dim: 3,
    }
}

fn segment_hull(pts: &[Point], a: &Point, d: &Point) -> Hull3 {
    let ts: Vec<(Scalar, &Point)> = pts.iter().map(|p| (d.dot(&(p - a)), p)).collect();
    let lo = ts.iter().min_by(|x, y| x.0.cmp(&y.0)).unwrap().1.clone();
    let hi = ts.iter().max_by(|x, y| x.0.cmp(&y.0)).unwrap().1.clone();
    let perps: Vec<Point> = (0..3)
        .map(|i| d.cross3(&unit(i)))
        .filter(|v| !v.is_zero())
        .collect();
    let n1 = perps[0].clone();
    let n2 = perps
        .iter()
        .find(|v| !v.cross3(&n1).is_zero())
        .cloned()
        .unwrap();
    let mut hs = Vec::new();
    for n in [&n1, &n2] {
        hs.push(Halfspace { normal: n.0.clone(), offset: n.dot(a) }.canonical());
        hs.push(Halfspace { normal: (-n).0, offset: -n.dot(a) }.canonical());
    }
    hs.push(Halfspace { normal: d.0.clone(), offset: d.dot(&hi) }.canonical());
    hs.push(Halfspace { normal: (-d).0, offset: -d.dot(&lo) }.canonical());
    let mut vertices = vec![lo, hi];
    vertices.sort();
    Hull3 {
        vertices,
        halfspaces: hs,
        faces: Vec::new(),
        affine_dim: 1,
    }
}

fn planar_hull(pts: &[Point], n: &Point, a: &Point) -> Hull3 {
    let ring = planar_loop(pts, n);
    let mut hs = vec![
        Halfspace { normal: n.0.clone(), offset: n.dot(a) }.canonical(),
        Halfspace { normal: (-n).0, offset: -n.dot(a) }.canonical(),
    ];
    let m = ring.len();
    for i in 0..m {
        let p = &ring[i];
        let q = &ring[(i + 1) % m];
        let mut side = n.cross3(&(q - p));
        // Orient so that the rest of the ring lies inside.
        if ring.iter().any(|r| side.dot(&(r - p)).is_positive()) {
            side = -&side;
        }
        hs.push(Halfspace { offset: side.dot(p), normal: side.0 }.canonical());
    }
    let mut vertices = ring;
    vertices.sort();
    Hull3 {
        vertices,
        halfspaces: hs,
        faces: Vec::new(),
        affine_dim: 2,
    }
}

/// Solves the 3x3 system given by three boundary planes (Cramer's rule).
pub fn plane_intersection(a: &Halfspace, b: &Halfspace, c: &Halfspace) -> Option<Point> {
    let na = Point(a.normal.clone());
    let nb = Point(b.normal.clone());
    let nc = Point(c.normal.clone());
    let det = na.dot(&nb.cross3(&nc));
    if det.is_zero() {
        return None;
    }
    let bc = nb.cross3(&nc);
    let ca = nc.cross3(&na);
    let ab = na.cross3(&nb);
    let p = &(&bc.scale(&a.offset) + &ca.scale(&b.offset)) + &ab.scale(&c.offset);
    Some(p.scale(&(Scalar::from_integer(1.into()) / det)))
}

/// Volume of a full-dimensional hull: cones from the first vertex over fan-triangulated faces.
pub fn volume(h: &Hull3) -> Scalar {
    if h.affine_dim < 3 {
        return Scalar::zero();
    }
    let apex = &h.vertices[0];
    let mut acc = Scalar::zero();
    for face in &h.faces {
        for t in tetrahedra_on_face(apex, face) {
            acc += tetra_volume(&t);
        }
    }
    acc
}

pub fn tetra_volume(t: &[Point]) -> Scalar {
    let a = &t[1] - &t[0];
    let b = &t[2] - &t[0];
    let c = &t[3] - &t[0];
    a.dot(&b.cross3(&c)).abs() / scalar::int(6)
}

/// Fan triangles of `face` coned to `apex`, skipping faces through the apex.
pub fn tetrahedra_on_face(apex: &Point, face: &[Point]) -> Vec<Vec<Point>> {
    if face.contains(apex) {
        return Vec::new();
    }
    (1..face.len().saturating_sub(1))
        .map(|i| {
            vec![
                apex.clone(),
                face[0].clone(),
                face[i].clone(),
                face[i + 1].clone(),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<Point> {
        let mut v = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    v.push(Point::from_ints(&[x, y, z]));
                }
            }
        }
        v
    }

    #[test]
    fn unit_cube_volume_and_facets() {
        let mut pts = cube();
        pts.push(Point::from_ratios(&[(1, 2), (1, 2), (1, 2)]));
        let h = hull(&pts);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.halfspaces.len(), 6);
        assert_eq!(volume(&h), scalar::int(1));
    }

    #[test]
    fn simplex_volume() {
        let pts = vec![
            Point::from_ints(&[0, 0, 0]),
            Point::from_ints(&[1, 0, 0]),
            Point::from_ints(&[0, 1, 0]),
            Point::from_ints(&[0, 0, 1]),
        ];
        assert_eq!(volume(&hull(&pts)), scalar::ratio(1, 6));
    }

    #[test]
    fn degenerate_hulls() {
        let square = vec![
            Point::from_ints(&[0, 0, 1]),
            Point::from_ints(&[1, 0, 1]),
            Point::from_ints(&[1, 1, 1]),
            Point::from_ints(&[0, 1, 1]),
            Point::from_ratios(&[(1, 2), (1, 2), (1, 1)]),
        ];
        let h = hull(&square);
        assert_eq!(h.affine_dim, 2);
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(volume(&h), Scalar::zero());
        let mid = Point::from_ratios(&[(1, 2), (1, 2), (1, 1)]);
        assert!(h.halfspaces.iter().all(|hs| hs.contains(&mid)));
        let off = Point::from_ratios(&[(1, 2), (1, 2), (2, 1)]);
        assert!(h.halfspaces.iter().any(|hs| !hs.contains(&off)));

        let seg = hull(&[Point::from_ints(&[0, 0, 0]), Point::from_ints(&[2, 2, 2]), Point::from_ints(&[1, 1, 1])]);
        assert_eq!(seg.affine_dim, 1);
        assert_eq!(seg.vertices.len(), 2);
        assert!(seg.halfspaces.iter().all(|hs| hs.contains(&Point::from_ints(&[1, 1, 1]))));
        assert!(seg.halfspaces.iter().any(|hs| !hs.contains(&Point::from_ints(&[1, 1, 0]))));
    }
}
