//! Monotone set functions on convex bodies: volume, perimeter, lattice-point
//! count over `S = L \ (L_1 u ... u L_m)`, and the nonemptiness indicator.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{
    arrangement_radius, boxed_vertices, convex_hull, intersect, polygon, recession_generators,
    simplex_volume, triangulate, ConvexBody, Direction, Point,
};
use crate::lattice::Lattice;
use crate::scalar::{self, Scalar};

/// Largest number of lattice rows scanned before giving up.
const ENUMERATION_BUDGET: u64 = 50_000_000;
const MIN_BITS: u32 = 64;
const MAX_BITS: u32 = 1 << 14;

pub fn default_tolerance() -> Scalar {
    Scalar::new(BigInt::one(), BigInt::one() << 40)
}

/// The discrete set `S = L \ (L_1 u ... u L_m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSet {
    pub lattice: Lattice,
    pub excluded: Vec<Lattice>,
}

impl LatticeSet {
    pub fn new(lattice: Lattice, excluded: Vec<Lattice>) -> Result<Self> {
        for (i, sub) in excluded.iter().enumerate() {
            if !sub.is_sublattice_of(&lattice) {
                return Err(Error::Invalid(format!("excluded lattice {i} is not a sublattice")));
            }
        }
        Ok(LatticeSet { lattice, excluded })
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.lattice.contains(p) && !self.excluded.iter().any(|l| l.contains(p))
    }

    /// A multiple of every index `[L : L_i]`, so `N * L` lies in each `L_i`.
    fn exclusion_period(&self) -> BigInt {
        self.excluded
            .iter()
            .fold(BigInt::one(), |acc, l| acc.lcm(&l.index_in(&self.lattice)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    Volume,
    /// Boundary length in the plane, evaluated to the given relative tolerance.
    Perimeter { tol: Scalar },
    LatticeCount(LatticeSet),
    /// 1 on nonempty bodies, 0 on the empty body.
    Nonempty,
}

/// A measure value: exact, infinite, or (perimeter only) a certified interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureValue {
    Exact(Scalar),
    Interval { lo: Scalar, hi: Scalar },
    Infinite,
}

impl MeasureValue {
    pub fn lower(&self) -> Option<&Scalar> {
        match self {
            MeasureValue::Exact(x) => Some(x),
            MeasureValue::Interval { lo, .. } => Some(lo),
            MeasureValue::Infinite => None,
        }
    }

    pub fn upper(&self) -> Option<&Scalar> {
        match self {
            MeasureValue::Exact(x) => Some(x),
            MeasureValue::Interval { hi, .. } => Some(hi),
            MeasureValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, MeasureValue::Infinite)
    }

    pub fn exact(&self) -> Option<&Scalar> {
        match self {
            MeasureValue::Exact(x) => Some(x),
            _ => None,
        }
    }

    /// True if the value is certainly at least `t`.
    pub fn certainly_at_least(&self, t: &Scalar) -> bool {
        self.lower().map_or(true, |lo| lo >= t)
    }

    /// True if the value is certainly below `t`.
    pub fn certainly_below(&self, t: &Scalar) -> bool {
        self.upper().map_or(false, |hi| hi < t)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MeasureValue::Exact(x) => scalar::to_f64(x),
            MeasureValue::Interval { lo, hi } => (scalar::to_f64(lo) + scalar::to_f64(hi)) / 2.0,
            MeasureValue::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Exact(x) => write!(f, "{}", scalar::format(x)),
            MeasureValue::Interval { lo, hi } => {
                write!(f, "[{}, {}]", scalar::format(lo), scalar::format(hi))
            }
            MeasureValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for MeasureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MeasureValue::Exact(x) => s.serialize_str(&scalar::format(x)),
            MeasureValue::Infinite => s.serialize_str("inf"),
            MeasureValue::Interval { lo, hi } => {
                [scalar::format(lo), scalar::format(hi)].serialize(s)
            }
        }
    }
}

/// Size floor `lambda > 0` and loss `0 <= eps < 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub lambda: Scalar,
    pub eps: Scalar,
}

impl Threshold {
    pub fn new(lambda: Scalar, eps: Scalar) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::Invalid("lambda must be positive".into()));
        }
        if eps.is_negative() || eps >= Scalar::one() {
            return Err(Error::Invalid("eps must lie in [0, 1)".into()));
        }
        Ok(Threshold { lambda, eps })
    }

    /// `(1 - eps) * lambda`
    pub fn relaxed(&self) -> Scalar {
        (Scalar::one() - &self.eps) * &self.lambda
    }
}

/// Edge lengths of a ring as square roots of exact squared lengths.
struct PerimeterSum {
    squares: Vec<Scalar>,
}

impl PerimeterSum {
    fn new(ring: &[Point]) -> Self {
        PerimeterSum { squares: polygon::squared_edge_lengths(ring) }
    }

    fn bounds(&self, bits: u32) -> (Scalar, Scalar) {
        let mut lo = Scalar::zero();
        let mut hi = Scalar::zero();
        for sq in &self.squares {
            let (l, h) = scalar::sqrt_bounds(sq, bits);
            lo += l;
            hi += h;
        }
        (lo, hi)
    }

    fn approx(&self) -> f64 {
        self.squares.iter().map(|s| scalar::to_f64(s).sqrt()).sum()
    }
}

fn perimeter_value(ring: &[Point], tol: &Scalar) -> Result<MeasureValue> {
    let sum = PerimeterSum::new(ring);
    let mut bits = MIN_BITS;
    loop {
        let (lo, hi) = sum.bounds(bits);
        if lo == hi {
            return Ok(MeasureValue::Exact(lo));
        }
        if &hi - &lo <= tol * &lo {
            return Ok(MeasureValue::Interval { lo, hi });
        }
        if bits >= MAX_BITS {
            return Err(Error::PrecisionBudget { bits: u64::from(bits) });
        }
        bits *= 2;
    }
}

/// Decides `perimeter(ring) >= t` by refinement.
fn perimeter_at_least(ring: &[Point], t: &Scalar) -> Result<bool> {
    let sum = PerimeterSum::new(ring);
    let mut bits = MIN_BITS;
    loop {
        let (lo, hi) = sum.bounds(bits);
        if &lo >= t {
            return Ok(true);
        }
        if &hi < t {
            return Ok(false);
        }
        if bits >= MAX_BITS {
            return Err(Error::Undecided { threshold: t.clone() });
        }
        bits *= 2;
    }
}

/// Corner box `[lo, hi]` as a body.
pub(crate) fn box_body(lo: &Point, hi: &Point) -> Result<ConvexBody> {
    let d = lo.dim();
    let corners: Vec<Point> = (0..(1usize << d))
        .map(|mask| {
            Point(
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { hi.0[i].clone() } else { lo.0[i].clone() })
                    .collect(),
            )
        })
        .collect();
    convex_hull(&corners)
}

impl Measure {
    pub fn volume() -> Self {
        Measure::Volume
    }

    pub fn perimeter() -> Self {
        Measure::Perimeter { tol: default_tolerance() }
    }

    pub fn nonempty() -> Self {
        Measure::Nonempty
    }

    /// Lattice-point count over `Z^d`.
    pub fn integer_points(dim: usize) -> Self {
        Measure::LatticeCount(LatticeSet {
            lattice: Lattice::integer(dim),
            excluded: Vec::new(),
        })
    }

    pub fn lattice(lattice: Lattice, excluded: Vec<Lattice>) -> Result<Self> {
        Ok(Measure::LatticeCount(LatticeSet::new(lattice, excluded)?))
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Measure::Volume | Measure::Perimeter { .. })
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Measure::LatticeCount(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Volume => "volume",
            Measure::Perimeter { .. } => "perimeter",
            Measure::LatticeCount(_) => "lattice",
            Measure::Nonempty => "nonempty",
        }
    }

    fn check(&self, k: &ConvexBody) -> Result<()> {
        match self {
            Measure::Perimeter { .. } if k.dim() != 2 => Err(Error::UnsupportedDimension(k.dim())),
            Measure::LatticeCount(s) if s.dim() != k.dim() => {
                Err(Error::DimensionMismatch { expected: s.dim(), got: k.dim() })
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, k: &ConvexBody) -> Result<MeasureValue> {
        self.check(k)?;
        if k.is_empty() {
            return Ok(MeasureValue::Exact(Scalar::zero()));
        }
        match self {
            Measure::Nonempty => Ok(MeasureValue::Exact(Scalar::one())),
            Measure::Volume => {
                if !k.is_bounded() {
                    return Ok(if k.is_full_dimensional() {
                        MeasureValue::Infinite
                    } else {
                        MeasureValue::Exact(Scalar::zero())
                    });
                }
                let total = triangulate(k)?.iter().map(|s| simplex_volume(s)).sum();
                Ok(MeasureValue::Exact(total))
            }
            Measure::Perimeter { tol } => {
                if !k.is_bounded() {
                    return Ok(MeasureValue::Infinite);
                }
                perimeter_value(k.verts(), tol)
            }
            Measure::LatticeCount(s) => {
                if !k.is_bounded() {
                    return lattice_count_unbounded(k, s);
                }
                let n = enumerate(k, s)?.len();
                Ok(MeasureValue::Exact(Scalar::from_integer(n.into())))
            }
        }
    }

    /// Decides `f(K) >= t` exactly, refining perimeter intervals as needed.
    pub fn at_least(&self, k: &ConvexBody, t: &Scalar) -> Result<bool> {
        self.check(k)?;
        match self {
            Measure::Perimeter { .. } if k.is_bounded() && !k.is_empty() => {
                perimeter_at_least(k.verts(), t)
            }
            _ => Ok(self.evaluate(k)?.certainly_at_least(t)),
        }
    }

    /// Orders `f(A)` against `f(B)`; equal irrational perimeters are reported as undecided.
    pub fn compare(&self, a: &ConvexBody, b: &ConvexBody) -> Result<Ordering> {
        self.check(a)?;
        self.check(b)?;
        if let Measure::Perimeter { .. } = self {
            if a.is_bounded() && b.is_bounded() && !a.is_empty() && !b.is_empty() {
                let sa = PerimeterSum::new(a.verts());
                let sb = PerimeterSum::new(b.verts());
                let mut bits = MIN_BITS;
                loop {
                    let (alo, ahi) = sa.bounds(bits);
                    let (blo, bhi) = sb.bounds(bits);
                    if ahi < blo {
                        return Ok(Ordering::Less);
                    }
                    if bhi < alo {
                        return Ok(Ordering::Greater);
                    }
                    if alo == ahi && blo == bhi && alo == blo {
                        return Ok(Ordering::Equal);
                    }
                    if bits >= MAX_BITS {
                        return Err(Error::Undecided { threshold: blo });
                    }
                    bits *= 2;
                }
            }
        }
        let va = self.evaluate(a)?;
        let vb = self.evaluate(b)?;
        Ok(match (va.upper(), vb.upper()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(x), Some(y)) => x.cmp(y),
        })
    }

    /// Floating-point estimate, used only to rank candidates.
    pub fn approx(&self, k: &ConvexBody) -> Result<f64> {
        match self {
            Measure::Perimeter { .. } if k.is_bounded() && !k.is_empty() => {
                Ok(PerimeterSum::new(k.verts()).approx())
            }
            _ => Ok(self.evaluate(k)?.to_f64()),
        }
    }
}

/// Integer points of the body in lattice coordinates; all output points are in `S`.
fn enumerate(k: &ConvexBody, s: &LatticeSet) -> Result<Vec<Point>> {
    if k.is_empty() {
        return Ok(Vec::new());
    }
    let verts = k.vertices().ok_or(Error::Unbounded)?;
    let d = s.dim();
    let lat = &s.lattice;
    let coords: Vec<Vec<Scalar>> = verts.iter().map(|v| lat.coords(v)).collect();
    let lo: Vec<BigInt> = (0..d)
        .map(|i| coords.iter().map(|c| c[i].clone()).min().unwrap().ceil().to_integer())
        .collect();
    let hi: Vec<BigInt> = (0..d)
        .map(|i| coords.iter().map(|c| c[i].clone()).max().unwrap().floor().to_integer())
        .collect();
    if (0..d).any(|i| lo[i] > hi[i]) {
        return Ok(Vec::new());
    }
    let rows: BigInt = (0..d - 1).map(|i| &hi[i] - &lo[i] + 1).product();
    if rows > BigInt::from(ENUMERATION_BUDGET) {
        return Err(Error::Invalid(format!("lattice enumeration over {rows} rows exceeds budget")));
    }
    // Constraints in lattice coordinates: <B c, n> <= o  iff  <c, B^T n> <= o.
    let cons: Vec<(Vec<Scalar>, Scalar)> = k
        .halfspaces()
        .iter()
        .map(|h| {
            let n = Point(h.normal.clone());
            (lat.basis().iter().map(|b| b.dot(&n)).collect(), h.offset.clone())
        })
        .collect();
    let last = d - 1;
    let mut out = Vec::new();
    let mut c: Vec<BigInt> = lo.clone();
    'rows: loop {
        // Interval of the last coordinate allowed by every constraint.
        let mut lo_l = Scalar::from_integer(lo[last].clone());
        let mut hi_l = Scalar::from_integer(hi[last].clone());
        let mut feasible = true;
        for (a, o) in &cons {
            let mut rest = o.clone();
            for i in 0..last {
                rest -= &a[i] * Scalar::from_integer(c[i].clone());
            }
            let al = &a[last];
            if al.is_zero() {
                if rest.is_negative() {
                    feasible = false;
                    break;
                }
            } else if al.is_positive() {
                let b = &rest / al;
                if b < hi_l {
                    hi_l = b;
                }
            } else {
                let b = &rest / al;
                if b > lo_l {
                    lo_l = b;
                }
            }
        }
        if feasible {
            let mut t = lo_l.ceil().to_integer();
            let end = hi_l.floor().to_integer();
            while t <= end {
                c[last] = t.clone();
                let p = lat.point_at(&c);
                if !s.excluded.iter().any(|l| l.contains(&p)) {
                    debug_assert!(k.contains(&p));
                    out.push(p);
                }
                t += 1;
            }
        }
        // Advance the odometer over the leading coordinates.
        let mut i = 0;
        loop {
            if i == last {
                break 'rows;
            }
            if c[i] < hi[i] {
                c[i] += 1;
                break;
            }
            c[i] = lo[i].clone();
            i += 1;
        }
    }
    out.sort();
    Ok(out)
}

/// Points of `S` in a bounded body, sorted lexicographically.
pub fn lattice_points(k: &ConvexBody, m: &Measure) -> Result<Vec<Point>> {
    match m {
        Measure::LatticeCount(s) => {
            m.check(k)?;
            if !k.is_bounded() {
                return Err(Error::Unbounded);
            }
            enumerate(k, s)
        }
        _ => Err(Error::Invalid("lattice_points needs a lattice measure".into())),
    }
}

/// `|K n S|` for unbounded `K`.
///
/// Write `x = q + sum mu_i g_i` with `q` in the boxed part of `K` and `g_i`
/// recession generators. Subtracting multiples of `N t_i g_i` (with `t_i g_i`
/// in `L` and `N L` inside every excluded lattice) keeps membership in `S`, so
/// `S n K` is nonempty iff it meets the bounded window
/// `B0 + sum [0, N t_i] g_i`, and then it is infinite.
fn lattice_count_unbounded(k: &ConvexBody, s: &LatticeSet) -> Result<MeasureValue> {
    let d = k.dim();
    let r = arrangement_radius(d, k.halfspaces());
    let base = boxed_vertices(d, k.halfspaces(), &r);
    let gens = recession_generators(k);
    let n = Scalar::from_integer(s.exclusion_period());
    let steps: Vec<Point> = gens
        .iter()
        .map(|g| g.scale(&(&n * Scalar::from_integer(s.lattice.period(g)))))
        .collect();
    let mut corners = base.clone();
    for mask in 1..(1usize << steps.len()) {
        let shift = steps
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(Point::zero(d), |acc, (_, v)| &acc + v);
        corners.extend(base.iter().map(|q| q + &shift));
    }
    let lo = Point((0..d).map(|i| corners.iter().map(|p| p.0[i].clone()).min().unwrap()).collect());
    let hi = Point((0..d).map(|i| corners.iter().map(|p| p.0[i].clone()).max().unwrap()).collect());
    let window = intersect(&[k.clone(), box_body(&lo, &hi)?])?;
    if enumerate(&window, s)?.is_empty() {
        Ok(MeasureValue::Exact(Scalar::zero()))
    } else {
        Ok(MeasureValue::Infinite)
    }
}

/// Result of [`inscribed_polytope`].
#[derive(Clone, Debug)]
pub struct Inscribed {
    pub body: ConvexBody,
    pub vertex_count: usize,
    pub value: MeasureValue,
    /// The value `(1 - eps) * target` that was certified.
    pub goal: Scalar,
}

#[derive(Clone, Debug, Default)]
pub struct InscribeOptions {
    /// Reference value; defaults to `f(K)`.
    pub target: Option<Scalar>,
    /// Vertex cap; defaults to [`default_vertex_budget`].
    pub budget: Option<usize>,
    /// Order lattice points along this direction instead of lexicographically.
    pub direction: Option<Direction>,
}

/// `max(ceil((2d / eps)^((d-1)/2)), d + 1)`; unlimited for `eps = 0`.
pub fn default_vertex_budget(d: usize, eps: &Scalar) -> usize {
    if eps.is_zero() {
        return usize::MAX;
    }
    let base = 2.0 * d as f64 / scalar::to_f64(eps);
    let bound = base.powf((d as f64 - 1.0) / 2.0);
    // Guard against float noise on exact powers.
    let c = (bound - 1e-9).ceil().max(0.0);
    (c as usize).max(d + 1)
}

fn hull_vertex_count(b: &ConvexBody) -> usize {
    b.vertices().map_or(0, <[Point]>::len)
}

/// A polytope `P` inside `K` with few vertices and `f(P) >= (1 - eps) * target`.
pub fn inscribed_polytope(
    m: &Measure,
    k: &ConvexBody,
    eps: &Scalar,
    opts: &InscribeOptions,
) -> Result<Inscribed> {
    if eps.is_negative() || eps >= &Scalar::one() {
        return Err(Error::Invalid("eps must lie in [0, 1)".into()));
    }
    let full = m.evaluate(k)?;
    if full.is_infinite() {
        return Err(Error::InfiniteMeasure);
    }
    let available = full.lower().cloned().unwrap_or_default();
    if !full.upper().is_some_and(|u| u.is_positive()) {
        return Err(Error::Invalid("inscribed polytope needs a positive measure".into()));
    }
    let target = opts.target.clone().unwrap_or_else(|| available.clone());
    if !m.at_least(k, &target)? {
        return Err(Error::TargetTooLarge {
            target: scalar::format(&target),
            available: full.to_string(),
        });
    }
    let goal = (Scalar::one() - eps) * &target;
    let budget = opts.budget.unwrap_or_else(|| default_vertex_budget(k.dim(), eps));

    match m {
        Measure::Nonempty => {
            let p = if k.is_bounded() {
                k.verts()[0].clone()
            } else {
                let r = arrangement_radius(k.dim(), k.halfspaces());
                boxed_vertices(k.dim(), k.halfspaces(), &r)[0].clone()
            };
            let body = ConvexBody::point(p)?;
            Ok(Inscribed { value: m.evaluate(&body)?, body, vertex_count: 1, goal })
        }
        Measure::LatticeCount(_) => {
            let mut pts = lattice_points(k, m)?;
            if let Some(v) = &opts.direction {
                pts.sort_by(|a, b| a.dot_coords(v.coords()).cmp(&b.dot_coords(v.coords())).then(a.cmp(b)));
            }
            let need = goal.ceil().to_integer().to_usize().unwrap_or(usize::MAX).max(1);
            if need > pts.len() {
                return Err(Error::TargetTooLarge {
                    target: scalar::format(&goal),
                    available: pts.len().to_string(),
                });
            }
            let body = convex_hull(&pts[..need])?;
            let value = m.evaluate(&body)?;
            let vertex_count = hull_vertex_count(&body);
            if vertex_count > budget {
                return Err(Error::VertexBudget { budget, achieved: value.to_string() });
            }
            Ok(Inscribed { body, vertex_count, value, goal })
        }
        Measure::Volume | Measure::Perimeter { .. } => {
            let mut verts = k.vertices().ok_or(Error::Unbounded)?.to_vec();
            let mut reached_goal = true;
            while verts.len() > 1 {
                let mut best: Option<(f64, usize, ConvexBody)> = None;
                for i in 0..verts.len() {
                    let mut trial = verts.clone();
                    trial.remove(i);
                    let body = convex_hull(&trial)?;
                    let v = m.approx(&body)?;
                    if best.as_ref().map_or(true, |(bv, _, _)| v > *bv) {
                        best = Some((v, i, body));
                    }
                }
                let (_, i, body) = best.expect("at least one vertex");
                let keep_going = m.at_least(&body, &goal)?;
                if !keep_going {
                    if verts.len() <= budget {
                        break;
                    }
                    // Over budget: keep shrinking to report the ratio at the cap.
                    reached_goal = false;
                }
                verts.remove(i);
                if !reached_goal && verts.len() <= budget {
                    break;
                }
            }
            let body = convex_hull(&verts)?;
            let value = m.evaluate(&body)?;
            if !reached_goal {
                let ratio = value.to_f64() / scalar::to_f64(&target);
                return Err(Error::VertexBudget { budget, achieved: format!("{ratio:.6}") });
            }
            let vertex_count = hull_vertex_count(&body);
            Ok(Inscribed { body, vertex_count, value, goal })
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureJson {
    Volume,
    Perimeter {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<String>,
    },
    Lattice {
        basis: Lattice,
        #[serde(default)]
        excluded: Vec<Lattice>,
    },
    Nonempty,
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match self {
            Measure::Volume => MeasureJson::Volume,
            Measure::Perimeter { tol } => MeasureJson::Perimeter { tol: Some(scalar::format(tol)) },
            Measure::LatticeCount(set) => MeasureJson::Lattice {
                basis: set.lattice.clone(),
                excluded: set.excluded.clone(),
            },
            Measure::Nonempty => MeasureJson::Nonempty,
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        Ok(match MeasureJson::deserialize(d)? {
            MeasureJson::Volume => Measure::Volume,
            MeasureJson::Nonempty => Measure::Nonempty,
            MeasureJson::Perimeter { tol } => {
                let tol = match tol {
                    Some(t) => scalar::parse(&t).map_err(D::Error::custom)?,
                    None => default_tolerance(),
                };
                if !tol.is_positive() {
                    return Err(D::Error::custom("perimeter tolerance must be positive"));
                }
                Measure::Perimeter { tol }
            }
            MeasureJson::Lattice { basis, excluded } => {
                Measure::lattice(basis, excluded).map_err(D::Error::custom)?
            }
        })
    }
}
