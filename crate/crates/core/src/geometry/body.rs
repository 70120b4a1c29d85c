use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{polygon, solid, Direction, Halfspace, Point};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// A closed convex polyhedron in dimension 2 or 3.
///
/// The halfspace list is always present. Bounded bodies also carry their
/// vertices: in the plane as a canonical counterclockwise ring starting at the
/// lexicographic minimum, in space sorted lexicographically. The empty body is
/// bounded with no vertices.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    dim: usize,
    vertices: Option<Vec<Point>>,
    halfspaces: Vec<Halfspace>,
    bounded: bool,
    /// `None` for the empty body.
    affine_dim: Option<usize>,
}

/// Support value `max <x, v>` over a body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    /// The body is empty.
    NegInfinite,
    Finite(Scalar),
    Infinite,
}

impl Support {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            Support::Finite(s) => Some(s),
            _ => None,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl ConvexBody {
    pub fn empty(dim: usize) -> Self {
        ConvexBody {
            dim,
            vertices: Some(Vec::new()),
            halfspaces: polygon::empty_halfspaces(dim),
            bounded: true,
            affine_dim: None,
        }
    }

    /// Builds a planar body from a canonical ring (see [`polygon`]).
    pub(crate) fn from_ring(ring: Vec<Point>) -> Self {
        if ring.is_empty() {
            return ConvexBody::empty(2);
        }
        let affine_dim = Some(ring.len().min(3) - 1);
        ConvexBody {
            dim: 2,
            halfspaces: polygon::halfspaces(&ring),
            vertices: Some(ring),
            bounded: true,
            affine_dim,
        }
    }

    fn from_hull3(h: solid::Hull3) -> Self {
        if h.vertices.is_empty() {
            return ConvexBody::empty(3);
        }
        ConvexBody {
            dim: 3,
            vertices: Some(h.vertices),
            halfspaces: h.halfspaces,
            bounded: true,
            affine_dim: Some(h.affine_dim),
        }
    }

    /// Axis-parallel box `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: Scalar, x1: Scalar, y0: Scalar, y1: Scalar) -> Self {
        let pts = vec![
            Point(vec![x0.clone(), y0.clone()]),
            Point(vec![x1.clone(), y0]),
            Point(vec![x1, y1.clone()]),
            Point(vec![x0, y1]),
        ];
        ConvexBody::from_ring(polygon::hull(&pts))
    }

    pub fn rect_i(x0: i64, x1: i64, y0: i64, y1: i64) -> Self {
        ConvexBody::rect(scalar::int(x0), scalar::int(x1), scalar::int(y0), scalar::int(y1))
    }

    pub fn polygon_i(pts: &[(i64, i64)]) -> Self {
        let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::from_ints(&[x, y])).collect();
        ConvexBody::from_ring(polygon::hull(&pts))
    }

    pub fn point(p: Point) -> Result<Self> {
        convex_hull(&[p])
    }

    pub fn from_halfspaces(dim: usize, hs: Vec<Halfspace>) -> Result<Self> {
        check_dim(dim)?;
        for h in &hs {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.dim() });
            }
        }
        Ok(match dim {
            2 => intersect2(hs),
            _ => intersect3(hs),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> Option<&[Point]> {
        self.vertices.as_deref()
    }

    /// Vertices of a bounded body; panics on unbounded input.
    pub fn verts(&self) -> &[Point] {
        self.vertices.as_deref().expect("bounded body")
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn is_empty(&self) -> bool {
        self.affine_dim.is_none()
    }

    pub fn affine_dim(&self) -> Option<usize> {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == Some(self.dim)
    }

    pub fn contains(&self, p: &Point) -> bool {
        if self.is_empty() {
            return false;
        }
        self.halfspaces.iter().all(|h| h.contains(p))
    }

    /// `other ⊆ self`, exact.
    pub fn contains_body(&self, other: &ConvexBody) -> bool {
        if other.is_empty() {
            return true;
        }
        if self.is_empty() {
            return false;
        }
        if let Some(vs) = other.vertices() {
            return vs.iter().all(|v| self.contains(v));
        }
        self.halfspaces.iter().all(|h| match support_vec(other, &h.normal) {
            Support::Finite(s) => s <= h.offset,
            Support::NegInfinite => true,
            Support::Infinite => false,
        })
    }

    /// Exact point-set equality.
    pub fn same_set(&self, other: &ConvexBody) -> bool {
        self.dim == other.dim && self.contains_body(other) && other.contains_body(self)
    }

    pub fn translate(&self, t: &Point) -> ConvexBody {
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| Halfspace {
                offset: &h.offset + t.dot_coords(&h.normal),
                normal: h.normal.clone(),
            })
            .collect();
        ConvexBody {
            dim: self.dim,
            vertices: self
                .vertices
                .as_ref()
                .map(|vs| vs.iter().map(|v| v + t).collect()),
            halfspaces,
            bounded: self.bounded,
            affine_dim: self.affine_dim,
        }
    }

    /// Lower and upper corners of the bounding box of a nonempty bounded body.
    pub fn bbox(&self) -> Option<(Point, Point)> {
        let vs = self.vertices()?;
        let first = vs.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for v in vs {
            for i in 0..self.dim {
                if v.0[i] < lo.0[i] {
                    lo.0[i] = v.0[i].clone();
                }
                if v.0[i] > hi.0[i] {
                    hi.0[i] = v.0[i].clone();
                }
            }
        }
        Some((lo, hi))
    }

    /// Vertex average of a nonempty bounded body.
    pub fn centroid_of_vertices(&self) -> Option<Point> {
        let vs = self.vertices()?;
        if vs.is_empty() {
            return None;
        }
        let mut acc = Point::zero(self.dim);
        for v in vs {
            acc = &acc + v;
        }
        Some(acc.scale(&scalar::ratio(1, vs.len() as i64)))
    }
}

impl PartialEq for ConvexBody {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.bounded != other.bounded {
            return false;
        }
        match (&self.vertices, &other.vertices) {
            (Some(a), Some(b)) => a == b,
            _ => self.same_set(other),
        }
    }
}

impl Eq for ConvexBody {}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.vertices {
            Some(vs) if vs.is_empty() => write!(f, "empty"),
            Some(vs) => {
                write!(f, "conv[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            None => write!(f, "unbounded({} halfspaces)", self.halfspaces.len()),
        }
    }
}

/// Convex hull of a nonempty point list in dimension 2 or 3.
pub fn convex_hull(points: &[Point]) -> Result<ConvexBody> {
    let first = points.first().ok_or(Error::EmptyInput("convex_hull needs at least one point"))?;
    let dim = first.dim();
    check_dim(dim)?;
    for p in points {
        p.check_dim(dim)?;
    }
    Ok(match dim {
        2 => ConvexBody::from_ring(polygon::hull(points)),
        _ => ConvexBody::from_hull3(solid::hull(points)),
    })
}

/// Intersection of bodies; the empty list is rejected.
pub fn intersect(bodies: &[ConvexBody]) -> Result<ConvexBody> {
    let first = bodies.first().ok_or(Error::EmptyInput("intersect needs at least one body"))?;
    let dim = first.dim;
    for b in bodies {
        if b.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: b.dim });
        }
    }
    if bodies.iter().any(ConvexBody::is_empty) {
        return Ok(ConvexBody::empty(dim));
    }
    if dim == 2 {
        // Bounded operands: clip the smallest ring by the other halfspaces.
        if let Some(start) = bodies
            .iter()
            .filter(|b| b.bounded)
            .min_by_key(|b| b.verts().len())
        {
            let mut ring = start.verts().to_vec();
            for b in bodies {
                if std::ptr::eq(b, start) {
                    continue;
                }
                for h in &b.halfspaces {
                    ring = polygon::clip(&ring, h);
                    if ring.is_empty() {
                        return Ok(ConvexBody::empty(2));
                    }
                }
            }
            return Ok(ConvexBody::from_ring(ring));
        }
    }
    let hs: Vec<Halfspace> = bodies.iter().flat_map(|b| b.halfspaces.iter().cloned()).collect();
    ConvexBody::from_halfspaces(dim, hs)
}

pub fn clip(body: &ConvexBody, h: &Halfspace) -> Result<ConvexBody> {
    if h.dim() != body.dim {
        return Err(Error::DimensionMismatch { expected: body.dim, got: h.dim() });
    }
    if body.is_empty() {
        return Ok(body.clone());
    }
    if body.dim == 2 && body.bounded {
        return Ok(ConvexBody::from_ring(polygon::clip(body.verts(), h)));
    }
    let mut hs = body.halfspaces.clone();
    hs.push(h.clone());
    ConvexBody::from_halfspaces(body.dim, hs)
}

pub fn contains(body: &ConvexBody, p: &Point) -> Result<bool> {
    p.check_dim(body.dim)?;
    Ok(body.contains(p))
}

pub fn support(body: &ConvexBody, v: &Direction) -> Result<Support> {
    if v.dim() != body.dim {
        return Err(Error::DimensionMismatch { expected: body.dim, got: v.dim() });
    }
    Ok(support_vec(body, v.coords()))
}

/// Support for an arbitrary (not necessarily canonical) vector.
pub fn support_vec(body: &ConvexBody, v: &[Scalar]) -> Support {
    if body.is_empty() {
        return Support::NegInfinite;
    }
    if let Some(vs) = body.vertices() {
        let best = vs.iter().map(|p| p.dot_coords(v)).max().unwrap();
        return Support::Finite(best);
    }
    if recession_generators(body).iter().any(|g| g.dot_coords(v).is_positive()) {
        return Support::Infinite;
    }
    let r = arrangement_radius(body.dim, &body.halfspaces);
    let best = boxed_vertices(body.dim, &body.halfspaces, &r)
        .iter()
        .map(|p| p.dot_coords(v))
        .max();
    best.map_or(Support::NegInfinite, Support::Finite)
}

/// Fan triangulation from the first vertex. Degenerate bodies are returned
/// as a single lower-dimensional simplex.
pub fn triangulate(body: &ConvexBody) -> Result<Vec<Vec<Point>>> {
    let vs = body.vertices().ok_or(Error::Unbounded)?;
    if vs.is_empty() {
        return Ok(Vec::new());
    }
    match (body.dim, body.affine_dim) {
        (2, Some(2)) => Ok((1..vs.len() - 1)
            .map(|i| vec![vs[0].clone(), vs[i].clone(), vs[i + 1].clone()])
            .collect()),
        (3, Some(3)) => {
            let h = solid::hull(vs);
            let apex = &h.vertices[0];
            Ok(h.faces
                .iter()
                .flat_map(|f| solid::tetrahedra_on_face(apex, f))
                .collect())
        }
        (3, Some(2)) => {
            // Planar body in space: fan over the ordered ring.
            let h = solid::hull(vs);
            let a = &h.vertices[0];
            let b = h.vertices.iter().find(|p| *p != a).unwrap();
            let c = h
                .vertices
                .iter()
                .find(|p| !(b - a).cross3(&(*p - a)).is_zero())
                .unwrap();
            let n = (b - a).cross3(&(c - a));
            let ring = ring_in_plane(&h.vertices, &n);
            Ok((1..ring.len() - 1)
                .map(|i| vec![ring[0].clone(), ring[i].clone(), ring[i + 1].clone()])
                .collect())
        }
        _ => Ok(vec![vs.to_vec()]),
    }
}

fn ring_in_plane(points: &[Point], n: &Point) -> Vec<Point> {
    let axis = (0..3).max_by_key(|&i| n.0[i].abs()).unwrap();
    let proj: Vec<Point> = points
        .iter()
        .map(|p| Point((0..3).filter(|&i| i != axis).map(|i| p.0[i].clone()).collect()))
        .collect();
    polygon::hull(&proj)
        .iter()
        .map(|q| points[proj.iter().position(|p| p == q).unwrap()].clone())
        .collect()
}

/// Measure of the simplex spanned by `s` in its own dimension (area for
/// triangles, volume for tetrahedra, zero otherwise).
pub fn simplex_volume(s: &[Point]) -> Scalar {
    match (s.first().map(Point::dim), s.len()) {
        (Some(2), 3) => super::point::orient2d(&s[0], &s[1], &s[2]).abs() / scalar::int(2),
        (Some(3), 4) => solid::tetra_volume(s),
        _ => Scalar::zero(),
    }
}

/// A radius `r` such that the box `[-r, r]^d` strictly contains every vertex
/// of the arrangement of the given boundary hyperplanes and, for each of them,
/// its point closest to the origin.
pub fn arrangement_radius(dim: usize, hs: &[Halfspace]) -> Scalar {
    let mut r = Scalar::zero();
    let mut bump = |p: &Point| {
        let m = p.max_abs();
        if m > r {
            r = m;
        }
    };
    for h in hs {
        bump(&h.foot());
    }
    if dim == 2 {
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                if let Some(p) = polygon::line_intersection(&hs[i], &hs[j]) {
                    bump(&p);
                }
            }
        }
    } else {
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                for k in (j + 1)..hs.len() {
                    if let Some(p) = solid::plane_intersection(&hs[i], &hs[j], &hs[k]) {
                        bump(&p);
                    }
                }
            }
        }
    }
    r + scalar::int(1)
}

fn box_halfspaces(dim: usize, r: &Scalar) -> Vec<Halfspace> {
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1, -1] {
            let mut n = vec![Scalar::zero(); dim];
            n[i] = scalar::int(s);
            out.push(Halfspace { normal: n, offset: r.clone() });
        }
    }
    out
}

/// Vertices of the body cut down to the box `[-r, r]^d`.
pub fn boxed_vertices(dim: usize, hs: &[Halfspace], r: &Scalar) -> Vec<Point> {
    if dim == 2 {
        let mut ring = polygon::square(r);
        for h in hs {
            ring = polygon::clip(&ring, h);
            if ring.is_empty() {
                break;
            }
        }
        return ring;
    }
    let mut all = hs.to_vec();
    all.extend(box_halfspaces(3, r));
    let mut pts = Vec::new();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            for k in (j + 1)..all.len() {
                if let Some(p) = solid::plane_intersection(&all[i], &all[j], &all[k]) {
                    if all.iter().all(|h| h.contains(&p)) {
                        pts.push(p);
                    }
                }
            }
        }
    }
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        return pts;
    }
    solid::hull(&pts).vertices
}

fn touches_box(p: &Point, r: &Scalar) -> bool {
    p.0.iter().any(|c| &c.abs() == r)
}

/// Generators of the recession cone `{y : <n, y> <= 0}` (empty for bounded bodies).
pub fn recession_generators(body: &ConvexBody) -> Vec<Point> {
    if body.bounded {
        return Vec::new();
    }
    let cone: Vec<Halfspace> = body
        .halfspaces
        .iter()
        .map(|h| Halfspace { normal: h.normal.clone(), offset: Scalar::zero() })
        .collect();
    boxed_vertices(body.dim, &cone, &scalar::int(1))
        .into_iter()
        .filter(|p| !p.is_zero())
        .collect()
}

fn dedup_halfspaces(hs: Vec<Halfspace>) -> Vec<Halfspace> {
    let mut out: Vec<Halfspace> = Vec::with_capacity(hs.len());
    for h in hs {
        let c = h.canonical();
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn intersect2(hs: Vec<Halfspace>) -> ConvexBody {
    let hs = dedup_halfspaces(hs);
    if hs.is_empty() {
        return ConvexBody {
            dim: 2,
            vertices: None,
            halfspaces: hs,
            bounded: false,
            affine_dim: Some(2),
        };
    }
    let r = arrangement_radius(2, &hs);
    let ring = boxed_vertices(2, &hs, &r);
    if ring.is_empty() {
        return ConvexBody::empty(2);
    }
    if !ring.iter().any(|p| touches_box(p, &r)) {
        return ConvexBody::from_ring(ring);
    }
    let affine_dim = Some(ring.len().min(3) - 1);
    // Greedy redundancy removal against the boxed reference polygon.
    let mut kept = hs;
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if boxed_vertices(2, &trial, &r) == ring {
            kept = trial;
        } else {
            i += 1;
        }
    }
    ConvexBody {
        dim: 2,
        vertices: None,
        halfspaces: kept,
        bounded: false,
        affine_dim,
    }
}

fn intersect3(hs: Vec<Halfspace>) -> ConvexBody {
    let hs = dedup_halfspaces(hs);
    if hs.is_empty() {
        return ConvexBody {
            dim: 3,
            vertices: None,
            halfspaces: hs,
            bounded: false,
            affine_dim: Some(3),
        };
    }
    let r = arrangement_radius(3, &hs);
    let verts = boxed_vertices(3, &hs, &r);
    if verts.is_empty() {
        return ConvexBody::empty(3);
    }
    if !verts.iter().any(|p| touches_box(p, &r)) {
        return ConvexBody::from_hull3(solid::hull(&verts));
    }
    let affine_dim = Some(solid::hull(&verts).affine_dim);
    ConvexBody {
        dim: 3,
        vertices: None,
        halfspaces: hs,
        bounded: false,
        affine_dim,
    }
}

#[derive(Serialize, Deserialize)]
struct BodyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<Halfspace>>,
}

impl ConvexBody {
    /// Decodes the JSON body encoding. When both representations are given
    /// they must describe the same set.
    pub fn from_json(v: &serde_json::Value) -> Result<ConvexBody> {
        let raw: BodyJson = serde_json::from_value(v.clone())?;
        raw.try_into()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("body serializes")
    }
}

impl TryFrom<BodyJson> for ConvexBody {
    type Error = Error;

    fn try_from(raw: BodyJson) -> Result<ConvexBody> {
        let from_v = match &raw.vertices {
            Some(vs) if vs.is_empty() => Some(ConvexBody::empty(raw.dim.unwrap_or(2))),
            Some(vs) => Some(convex_hull(vs)?),
            None => None,
        };
        let from_h = match raw.halfspaces {
            Some(hs) => {
                let dim = raw
                    .dim
                    .or_else(|| hs.first().map(Halfspace::dim))
                    .or(from_v.as_ref().map(ConvexBody::dim))
                    .ok_or_else(|| Error::Invalid("cannot infer dimension".into()))?;
                Some(ConvexBody::from_halfspaces(dim, hs)?)
            }
            None => None,
        };
        let body = match (from_v, from_h) {
            (Some(v), Some(h)) => {
                if !v.same_set(&h) {
                    return Err(Error::Invalid(
                        "vertex and halfspace representations disagree".into(),
                    ));
                }
                v
            }
            (Some(v), None) => v,
            (None, Some(h)) => h,
            (None, None) => {
                return Err(Error::Invalid("body needs vertices or halfspaces".into()))
            }
        };
        if let Some(d) = raw.dim {
            if d != body.dim {
                return Err(Error::DimensionMismatch { expected: d, got: body.dim });
            }
        }
        Ok(body)
    }
}

impl Serialize for ConvexBody {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = BodyJson {
            dim: Some(self.dim),
            vertices: self.vertices.clone(),
            halfspaces: if self.bounded { None } else { Some(self.halfspaces.clone()) },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BodyJson::deserialize(d)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}
