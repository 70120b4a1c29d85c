//! Seeded family generators. Each one re-checks its planted structure
//! before returning.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::Family;
use crate::geometry::{convex_hull, intersect, orient2d, ConvexBody, Halfspace, Point};
use crate::measures::{lattice_points, Measure};
use crate::scalar::{self, int, ratio, Scalar};

pub const GENERATOR_SCHEMA: &str = "quanthelly.generator/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(default = "generator_schema")]
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: GeneratorKind,
}

fn generator_schema() -> String {
    GENERATOR_SCHEMA.to_string()
}

fn six() -> usize {
    6
}

fn three() -> usize {
    3
}

fn four() -> usize {
    4
}

fn twenty() -> i64 {
    20
}

fn ten() -> i64 {
    10
}

fn yes() -> bool {
    true
}

fn unit() -> Scalar {
    Scalar::one()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Hulls of random point clouds. With `overlap`, every polygon is slid
    /// toward the first until their intersection has at least that area.
    RandomPolygons {
        n: usize,
        #[serde(default = "six")]
        vertices: usize,
        #[serde(default = "twenty")]
        size: i64,
        #[serde(default, with = "scalar::serde_opt_scalar", skip_serializing_if = "Option::is_none")]
        overlap: Option<Scalar>,
    },
    /// Well separated clusters, each sharing a square core of area >= lambda.
    ClusteredVolume {
        #[serde(default = "three")]
        clusters: usize,
        #[serde(default = "four")]
        per_cluster: usize,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
    },
    /// Rectangles in clusters; each cluster's intersection holds exactly one
    /// integer point, its anchor.
    ClusteredLattice {
        #[serde(default = "three")]
        clusters: usize,
        #[serde(default = "four")]
        per_cluster: usize,
    },
    /// The four triangles conv({0,1}^2 minus one corner).
    DoignonWitness,
    /// The four half-planes bounding [0, s]^2.
    BkpCounterexample {
        #[serde(with = "scalar::serde_scalar")]
        side: Scalar,
    },
    /// Random half-planes, all through a common point when `common` is set.
    HalfplaneBundle {
        n: usize,
        #[serde(default = "yes")]
        common: bool,
    },
    /// Random integer points in [-range, range]^2.
    PointCloud {
        n: usize,
        #[serde(default = "ten")]
        range: i64,
        #[serde(default = "yes")]
        general_position: bool,
    },
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec { schema: generator_schema(), seed, kind }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        super::check_schema(v, GENERATOR_SCHEMA)?;
        Ok(serde_json::from_value(v.clone())?)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self.clone() }
    }
}

/// A generated family with its planted structure.
#[derive(Clone, Debug)]
pub struct Generated {
    pub family: Family,
    /// Member indices of each planted cluster (empty when nothing is planted).
    pub clusters: Vec<Vec<usize>>,
    /// A point planted in each cluster's intersection.
    pub anchors: Vec<Point>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Family> {
    generate_planted(spec).map(|g| g.family)
}

pub fn generate_planted(spec: &GeneratorSpec) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = match &spec.kind {
        GeneratorKind::RandomPolygons { n, vertices, size, overlap } => {
            random_polygons(&mut rng, *n, *vertices, *size, overlap.as_ref())?
        }
        GeneratorKind::ClusteredVolume { clusters, per_cluster, lambda } => {
            clustered_volume(&mut rng, *clusters, *per_cluster, lambda)?
        }
        GeneratorKind::ClusteredLattice { clusters, per_cluster } => {
            clustered_lattice(&mut rng, *clusters, *per_cluster)?
        }
        GeneratorKind::DoignonWitness => doignon_witness()?,
        GeneratorKind::BkpCounterexample { side } => bkp_counterexample(side)?,
        GeneratorKind::HalfplaneBundle { n, common } => halfplane_bundle(&mut rng, *n, *common)?,
        GeneratorKind::PointCloud { n, range, general_position } => {
            point_cloud(&mut rng, *n, *range, *general_position)?
        }
    };
    Ok(g)
}

fn plain(family: Family) -> Generated {
    Generated { family, clusters: Vec::new(), anchors: Vec::new() }
}

/// Multiple of 1/4 in [lo, hi].
fn quarter(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Scalar {
    ratio(rng.gen_range(4 * lo..=4 * hi), 4)
}

fn quarter_point(rng: &mut ChaCha8Rng, center: &Point, r: i64) -> Point {
    Point::new(vec![center.x() + quarter(rng, -r, r), center.y() + quarter(rng, -r, r)])
}

fn random_polygons(
    rng: &mut ChaCha8Rng,
    n: usize,
    vertices: usize,
    size: i64,
    overlap: Option<&Scalar>,
) -> Result<Generated> {
    if n == 0 || vertices < 3 || size < 1 {
        return Err(Error::Invalid("random-polygons needs n >= 1, vertices >= 3, size >= 1".into()));
    }
    let r = (size / 4).max(1);
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let center = Point::from_ints(&[rng.gen_range(0..=size), rng.gen_range(0..=size)]);
        let body = loop {
            let pts: Vec<Point> = (0..vertices).map(|_| quarter_point(rng, &center, r)).collect();
            let b = convex_hull(&pts)?;
            if b.is_full_dimensional() {
                break b;
            }
        };
        members.push(body);
    }
    if let Some(target) = overlap {
        let first = members[0].clone();
        let c0 = first.centroid_of_vertices().expect("bounded polygon");
        for body in members.iter_mut().skip(1) {
            let ok = |b: &ConvexBody| -> Result<bool> { Measure::Volume.at_least(&intersect(&[first.clone(), b.clone()])?, target) };
            let mut steps = 0;
            while !ok(body)? {
                let c = body.centroid_of_vertices().expect("bounded polygon");
                let mut shift: Vec<Scalar> = c0.coords().iter().zip(c.coords()).map(|(a, b)| a - b).collect();
                if steps < 12 {
                    for s in &mut shift {
                        *s /= int(2);
                    }
                }
                *body = body.translate(&Point::new(shift));
                steps += 1;
                if steps > 12 {
                    if !ok(body)? {
                        return Err(Error::Invalid(format!("overlap target {target} unreachable")));
                    }
                    break;
                }
            }
        }
    }
    Ok(plain(Family::new(members)?))
}

fn clustered_volume(rng: &mut ChaCha8Rng, clusters: usize, per_cluster: usize, lambda: &Scalar) -> Result<Generated> {
    if clusters == 0 || per_cluster == 0 || !lambda.is_positive() {
        return Err(Error::Invalid("clustered-volume needs clusters, per_cluster >= 1 and lambda > 0".into()));
    }
    let mut side = 1i64;
    while int(side * side) < *lambda {
        side += 1;
    }
    let spacing = 2 * side + 20;
    let mut members = Vec::new();
    let mut groups = Vec::new();
    let mut anchors = Vec::new();
    let mut labels = Vec::new();
    for c in 0..clusters {
        let x0 = spacing * c as i64;
        let core = [(x0, 0), (x0 + side, 0), (x0 + side, side), (x0, side)];
        let mid = Point::from_ratios(&[(2 * x0 + side, 2), (side, 2)]);
        let mut idx = Vec::new();
        for _ in 0..per_cluster {
            let mut pts: Vec<Point> = core.iter().map(|&(x, y)| Point::from_ints(&[x, y])).collect();
            for _ in 0..3 {
                pts.push(quarter_point(rng, &mid, side / 2 + 5));
            }
            idx.push(members.len());
            members.push(convex_hull(&pts)?);
            labels.push(format!("cluster{c}"));
        }
        anchors.push(mid);
        groups.push(idx);
    }
    let family = Family::new(members)?.with_labels(labels)?;
    for g in &groups {
        if !Measure::Volume.at_least(&family.intersection(g)?, lambda)? {
            return Err(Error::Invalid("planted core lost".into()));
        }
    }
    Ok(Generated { family, clusters: groups, anchors })
}

fn clustered_lattice(rng: &mut ChaCha8Rng, clusters: usize, per_cluster: usize) -> Result<Generated> {
    if clusters == 0 || per_cluster == 0 {
        return Err(Error::Invalid("clustered-lattice needs clusters, per_cluster >= 1".into()));
    }
    let zz = Measure::integer_points(2);
    let mut members = Vec::new();
    let mut groups = Vec::new();
    let mut anchors = Vec::new();
    let mut labels = Vec::new();
    for c in 0..clusters {
        let anchor = Point::from_ints(&[10 * c as i64, 0]);
        let mut idx = Vec::new();
        for k in 0..per_cluster {
            // The first member stays within distance 3/4 of the anchor, so the
            // cluster intersection holds no other integer point.
            let (lo, hi) = if k == 0 { (1, 3) } else { (1, 12) };
            let mut e = || ratio(rng.gen_range(lo..=hi), 4);
            let (l, r, b, t) = (e(), e(), e(), e());
            idx.push(members.len());
            members.push(ConvexBody::rect(anchor.x() - l, anchor.x() + r, anchor.y() - b, anchor.y() + t));
            labels.push(format!("cluster{c}"));
        }
        anchors.push(anchor);
        groups.push(idx);
    }
    let family = Family::new(members)?.with_labels(labels)?;
    for (g, a) in groups.iter().zip(&anchors) {
        if lattice_points(&family.intersection(g)?, &zz)? != vec![a.clone()] {
            return Err(Error::Invalid("planted lattice point lost".into()));
        }
    }
    Ok(Generated { family, clusters: groups, anchors })
}

fn doignon_witness() -> Result<Generated> {
    let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
    let members = (0..4)
        .map(|skip| {
            let pts: Vec<(i64, i64)> = (0..4).filter(|&i| i != skip).map(|i| corners[i]).collect();
            ConvexBody::polygon_i(&pts)
        })
        .collect();
    let labels = corners.iter().map(|(x, y)| format!("omit({x},{y})")).collect();
    let family = Family::new(members)?.with_labels(labels)?;
    let zz = Measure::integer_points(2);
    if !lattice_points(&family.intersection(&[0, 1, 2, 3])?, &zz)?.is_empty() {
        return Err(Error::Invalid("doignon witness: full intersection holds a lattice point".into()));
    }
    let mut anchors = Vec::new();
    let mut groups = Vec::new();
    for skip in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
        let corner = Point::from_ints(&[corners[skip].0, corners[skip].1]);
        if !lattice_points(&family.intersection(&idx)?, &zz)?.contains(&corner) {
            return Err(Error::Invalid("doignon witness: omitted corner missing".into()));
        }
        anchors.push(corner);
        groups.push(idx);
    }
    Ok(Generated { family, clusters: groups, anchors })
}

fn bkp_counterexample(side: &Scalar) -> Result<Generated> {
    if !side.is_positive() {
        return Err(Error::Invalid("side must be positive".into()));
    }
    let h = |n: [i64; 2], b: Scalar| Halfspace::new(vec![int(n[0]), int(n[1])], b);
    let members = vec![
        ConvexBody::from_halfspaces(2, vec![h([-1, 0], Scalar::zero())?])?,
        ConvexBody::from_halfspaces(2, vec![h([1, 0], side.clone())?])?,
        ConvexBody::from_halfspaces(2, vec![h([0, -1], Scalar::zero())?])?,
        ConvexBody::from_halfspaces(2, vec![h([0, 1], side.clone())?])?,
    ];
    let family = Family::new(members)?;
    let all = family.intersection(&[0, 1, 2, 3])?;
    if Measure::Volume.evaluate(&all)?.exact() != Some(&(side * side)) {
        return Err(Error::Invalid("bkp: square area mismatch".into()));
    }
    let center = Point::new(vec![side / int(2), side / int(2)]);
    Ok(Generated { family, clusters: vec![vec![0, 1, 2, 3]], anchors: vec![center] })
}

fn halfplane_bundle(rng: &mut ChaCha8Rng, n: usize, common: bool) -> Result<Generated> {
    if n == 0 {
        return Err(Error::Invalid("halfplane-bundle needs n >= 1".into()));
    }
    let p = quarter_point(rng, &Point::zero(2), 2);
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = loop {
            let v = (rng.gen_range(-5..=5i64), rng.gen_range(-5..=5i64));
            if v != (0, 0) {
                break v;
            }
        };
        let normal = vec![int(a), int(b)];
        let offset = if common {
            Point::new(normal.clone()).dot(&p) + int(rng.gen_range(0..=3))
        } else {
            int(rng.gen_range(-5..=5))
        };
        members.push(ConvexBody::from_halfspaces(2, vec![Halfspace::new(normal, offset)?])?);
    }
    let family = Family::new(members)?;
    if !common {
        return Ok(plain(family));
    }
    if !family.members.iter().all(|m| m.contains(&p)) {
        return Err(Error::Invalid("halfplane bundle misses its common point".into()));
    }
    Ok(Generated { family, clusters: vec![(0..n).collect()], anchors: vec![p] })
}

fn point_cloud(rng: &mut ChaCha8Rng, n: usize, range: i64, general: bool) -> Result<Generated> {
    if n == 0 || range < 1 {
        return Err(Error::Invalid("point-cloud needs n >= 1 and range >= 1".into()));
    }
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0u64;
    while pts.len() < n {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Invalid(format!("cannot place {n} points in range {range}")));
        }
        let p = Point::from_ints(&[rng.gen_range(-range..=range), rng.gen_range(-range..=range)]);
        if pts.contains(&p) {
            continue;
        }
        if general && collinear_with_any(&pts, &p) {
            continue;
        }
        pts.push(p);
    }
    if general && !in_general_position(&pts) {
        return Err(Error::Invalid("point cloud not in general position".into()));
    }
    Ok(plain(Family::from_points(&pts)?))
}

fn collinear_with_any(pts: &[Point], p: &Point) -> bool {
    (0..pts.len()).any(|i| (i + 1..pts.len()).any(|j| orient2d(&pts[i], &pts[j], p).is_zero()))
}

pub fn in_general_position(pts: &[Point]) -> bool {
    (0..pts.len()).all(|k| !collinear_with_any(&pts[..k], &pts[k]))
}
