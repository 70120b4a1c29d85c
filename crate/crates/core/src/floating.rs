//! Floating bodies as intersections of containment-minimal directional cuts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{clip, intersect, ConvexBody, Direction, Halfspace, Point};
use crate::measures::{box_body, lattice_points, Measure, MeasureValue};
use crate::scalar::{self, Scalar};

/// Relative bisection tolerance on the cut offset.
pub fn default_bisection_tolerance() -> Scalar {
    Scalar::new(BigInt::one(), BigInt::one() << 40)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Axis,
    Farey(u32),
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionSet {
    pub directions: Vec<Direction>,
    pub scheme: Scheme,
}

impl DirectionSet {
    /// `+-e_i` for every axis.
    pub fn axis(dim: usize) -> Self {
        let mut directions = Vec::new();
        for i in 0..dim {
            for s in [1, -1] {
                let mut v = vec![0; dim];
                v[i] = s;
                directions.push(Direction::from_ints(&v).expect("unit vector"));
            }
        }
        DirectionSet { directions, scheme: Scheme::Axis }
    }

    /// All primitive integer vectors `(a, b)` with `max(|a|, |b|) <= n`, by angle.
    pub fn farey(n: u32) -> Self {
        let n = i64::from(n.max(1));
        let mut dirs: Vec<(f64, Direction)> = Vec::new();
        for a in -n..=n {
            for b in -n..=n {
                if (a, b) != (0, 0) && a.gcd(&b) == 1 {
                    let angle = (b as f64).atan2(a as f64);
                    dirs.push((angle, Direction::from_ints(&[a, b]).unwrap()));
                }
            }
        }
        dirs.sort_by(|x, y| x.0.total_cmp(&y.0));
        DirectionSet {
            directions: dirs.into_iter().map(|(_, d)| d).collect(),
            scheme: Scheme::Farey(n as u32),
        }
    }

    pub fn custom(directions: Vec<Direction>) -> Result<Self> {
        let first = directions.first().ok_or(Error::EmptyInput("direction set is empty"))?;
        let d = first.dim();
        for (i, v) in directions.iter().enumerate() {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
            }
            if directions[..i].iter().any(|w| w.positively_parallel(v)) {
                return Err(Error::Invalid(format!("direction {v} repeated")));
            }
        }
        Ok(DirectionSet { directions, scheme: Scheme::Custom })
    }

    /// Axis directions together with the four diagonals (plane only).
    pub fn axis_and_diagonals() -> Self {
        let mut dirs = DirectionSet::axis(2).directions;
        for v in [[1, 1], [-1, -1], [1, -1], [-1, 1]] {
            dirs.push(Direction::from_ints(&v).unwrap());
        }
        DirectionSet { directions: dirs, scheme: Scheme::Custom }
    }

    /// Parses `axis`, `diag`, `farey:N` or `v1;v2;...` with comma-separated coordinates.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let t = text.trim();
        if t == "axis" {
            return Ok(DirectionSet::axis(dim));
        }
        if dim != 2 && (t == "diag" || t.starts_with("farey")) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if t == "diag" {
            return Ok(DirectionSet::axis_and_diagonals());
        }
        if let Some(n) = t.strip_prefix("farey:") {
            let n: u32 = n.trim().parse().map_err(|_| Error::Parse(text.to_string()))?;
            return Ok(DirectionSet::farey(n));
        }
        let dirs = t
            .split(';')
            .map(|v| {
                let coords = v.split(',').map(scalar::parse).collect::<Result<Vec<_>>>()?;
                Direction::new(coords)
            })
            .collect::<Result<Vec<_>>>()?;
        DirectionSet::custom(dirs)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Replaces every direction that is not generic for `K` by a nearby generic one.
    pub fn generic_for(&self, k: &ConvexBody, m: &Measure, seed: u64) -> Result<Self> {
        if !m.is_discrete() {
            return Ok(self.clone());
        }
        let pts = working_points(k, m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let den = perturbation_denominator(&pts);
        let mut out: Vec<Direction> = Vec::with_capacity(self.len());
        for v in &self.directions {
            let mut cand = v.clone();
            while !is_generic_on(&pts, &cand) || out.iter().any(|w| w.positively_parallel(&cand)) {
                let coords = v
                    .coords()
                    .iter()
                    .map(|c| c + Scalar::new(BigInt::from(rng.gen_range(-3i64..=3)), den.clone()))
                    .collect();
                cand = Direction::new(coords)?;
            }
            out.push(cand);
        }
        let scheme = if out == self.directions { self.scheme.clone() } else { Scheme::Custom };
        Ok(DirectionSet { directions: out, scheme })
    }
}

/// Points of `S` in the bounding box of `K`, against which genericity is checked.
fn working_points(k: &ConvexBody, m: &Measure) -> Result<Vec<Point>> {
    let Some((lo, hi)) = k.bbox() else {
        return Ok(Vec::new());
    };
    lattice_points(&box_body(&lo, &hi)?, m)
}

/// A denominator above `(2 B)^2`, `B` the coordinate bound of the points.
fn perturbation_denominator(pts: &[Point]) -> BigInt {
    let b = pts
        .iter()
        .map(Point::max_abs)
        .max()
        .unwrap_or_else(Scalar::one)
        .ceil()
        .to_integer()
        .max(BigInt::one());
    let two_b: BigInt = b * 2;
    &two_b * &two_b + 1
}

fn is_generic_on(pts: &[Point], v: &Direction) -> bool {
    let mut vals: Vec<Scalar> = pts.iter().map(|p| p.dot_coords(v.coords())).collect();
    vals.sort();
    vals.windows(2).all(|w| w[0] != w[1])
}

/// True if no two points of `S` in the bounding box of `K` share a level of `v`.
pub fn is_generic(k: &ConvexBody, m: &Measure, v: &Direction) -> Result<bool> {
    Ok(is_generic_on(&working_points(k, m)?, v))
}

/// A generic direction `(1, q)` in the plane for a discrete measure.
pub fn generic_direction(k: &ConvexBody, m: &Measure, seed: u64) -> Result<Direction> {
    if k.dim() != 2 {
        return Err(Error::UnsupportedDimension(k.dim()));
    }
    let pts = working_points(k, m)?;
    let den = perturbation_denominator(&pts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let num = BigInt::from(rng.gen_range(1u64..=1_000_000));
        let v = Direction::new(vec![Scalar::one(), Scalar::new(num, den.clone())])?;
        if is_generic_on(&pts, &v) {
            return Ok(v);
        }
    }
}

fn level_range(k: &ConvexBody, v: &Direction) -> Result<(Scalar, Scalar)> {
    let verts = k.vertices().ok_or(Error::Unbounded)?;
    let vals: Vec<Scalar> = verts.iter().map(|p| p.dot_coords(v.coords())).collect();
    Ok((vals.iter().min().unwrap().clone(), vals.iter().max().unwrap().clone()))
}

fn cut_value_at_least(k: &ConvexBody, v: &Direction, m: &Measure, alpha: &Scalar, t: &Scalar) -> Result<bool> {
    m.at_least(&clip(k, &v.halfspace(alpha.clone()))?, t)
}

fn area_below(k: &ConvexBody, v: &Direction, alpha: &Scalar) -> Result<Scalar> {
    let cut = clip(k, &v.halfspace(alpha.clone()))?;
    Ok(Measure::Volume.evaluate(&cut)?.exact().cloned().unwrap_or_default())
}

/// The area below level `lo + s (hi - lo)` as `c0 + c1 s + c2 s^2`.
///
/// Between consecutive vertex levels the area profile is quadratic, so
/// three samples determine it exactly.
struct AreaProfile {
    lo: Scalar,
    h: Scalar,
    c0: Scalar,
    c1: Scalar,
    c2: Scalar,
}

impl AreaProfile {
    fn fit(k: &ConvexBody, v: &Direction, lo: &Scalar, hi: &Scalar) -> Result<Self> {
        let two = scalar::int(2);
        let mid = (lo + hi) / &two;
        let g0 = area_below(k, v, lo)?;
        let g1 = area_below(k, v, &mid)?;
        let g2 = area_below(k, v, hi)?;
        Ok(AreaProfile {
            lo: lo.clone(),
            h: hi - lo,
            c2: &two * (&g2 - &two * &g1 + &g0),
            c1: scalar::int(4) * &g1 - &g2 - scalar::int(3) * &g0,
            c0: g0,
        })
    }

    fn at(&self, alpha: &Scalar) -> Scalar {
        let s = (alpha - &self.lo) / &self.h;
        &self.c0 + (&self.c1 + &self.c2 * &s) * &s
    }

    /// Exact rational root in the stretch, if there is one.
    fn root(&self, target: &Scalar) -> Option<Scalar> {
        let (a, b, c) = (&self.c2, &self.c1, &self.c0 - target);
        let two = scalar::int(2);
        let s = if a.is_zero() {
            if b.is_zero() {
                return None;
            }
            -&c / b
        } else {
            let disc = b * b - scalar::int(4) * a * &c;
            let root = scalar::exact_sqrt(&disc)?;
            let cands = [(-b + &root) / (&two * a), (-b - &root) / (&two * a)];
            cands.into_iter().filter(|s| !s.is_negative() && s <= &Scalar::one()).min()?
        };
        Some(&self.lo + s * &self.h)
    }
}

/// The smallest cut `{<x, v> <= alpha}` keeping `f >= target` of `K`.
///
/// Continuous measures return the certified upper end of a bisection bracket
/// (exact when the area profile has a rational root); discrete measures cut
/// right after the `ceil(target)`-th point of `S n K` in the order of `v`.
pub fn minimal_v_halfspace(k: &ConvexBody, v: &Direction, m: &Measure, target: &Scalar) -> Result<Halfspace> {
    minimal_v_halfspace_tol(k, v, m, target, &default_bisection_tolerance())
}

pub fn minimal_v_halfspace_tol(
    k: &ConvexBody,
    v: &Direction,
    m: &Measure,
    target: &Scalar,
    tol: &Scalar,
) -> Result<Halfspace> {
    if v.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: v.dim() });
    }
    if !target.is_positive() {
        return Err(Error::Invalid("target must be positive".into()));
    }
    let full = m.evaluate(k)?;
    if full.is_infinite() {
        return Err(Error::InfiniteMeasure);
    }
    if !m.at_least(k, target)? {
        return Err(Error::TargetTooLarge { target: scalar::format(target), available: full.to_string() });
    }
    match m {
        Measure::Nonempty => {
            let (lo, _) = level_range(k, v)?;
            Ok(v.halfspace(lo))
        }
        Measure::LatticeCount(_) => {
            let mut vals: Vec<Scalar> = lattice_points(k, m)?
                .iter()
                .map(|p| p.dot_coords(v.coords()))
                .collect();
            vals.sort();
            if vals.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NonGenericDirection);
            }
            let need = target.ceil().to_integer().to_usize().unwrap_or(usize::MAX);
            Ok(v.halfspace(vals[need - 1].clone()))
        }
        Measure::Volume | Measure::Perimeter { .. } => {
            let (min_level, max_level) = level_range(k, v)?;
            if cut_value_at_least(k, v, m, &min_level, target)? {
                return Ok(v.halfspace(min_level));
            }
            // Narrow to consecutive vertex levels first.
            let mut levels: Vec<Scalar> = k.verts().iter().map(|p| p.dot_coords(v.coords())).collect();
            levels.sort();
            levels.dedup();
            let mut lo = min_level.clone();
            let mut hi = max_level.clone();
            for w in levels.windows(2) {
                if cut_value_at_least(k, v, m, &w[1], target)? {
                    lo = w[0].clone();
                    hi = w[1].clone();
                    break;
                }
            }
            let profile = if matches!(m, Measure::Volume) && k.dim() == 2 {
                let p = AreaProfile::fit(k, v, &lo, &hi)?;
                if let Some(alpha) = p.root(target) {
                    // The fit is exact, but re-check against the clipped body anyway.
                    if area_below(k, v, &alpha)? == *target {
                        return Ok(v.halfspace(alpha));
                    }
                }
                Some(p)
            } else {
                None
            };
            let width = tol * (&max_level - &min_level);
            let two = scalar::int(2);
            while &hi - &lo > width {
                let mid = (&lo + &hi) / &two;
                let enough = match &profile {
                    Some(p) => p.at(&mid) >= *target,
                    None => cut_value_at_least(k, v, m, &mid, target)?,
                };
                if enough {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(v.halfspace(hi))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FloatingBodyResult {
    pub body: ConvexBody,
    /// `1 - f(body) / f(K)`
    pub delta: MeasureValue,
    pub cuts: Vec<(Direction, Halfspace)>,
    /// The value each cut preserves.
    #[serde(with = "scalar::serde_scalar")]
    pub target: Scalar,
}

/// Level each cut must preserve: `(1 - eps) f(K)`, rounded up to a whole
/// point count for discrete measures and taken from the lower end of a
/// perimeter interval.
pub fn cut_target(m: &Measure, full: &MeasureValue, eps: &Scalar) -> Result<Scalar> {
    let base = full.lower().ok_or(Error::InfiniteMeasure)?;
    let t = (Scalar::one() - eps) * base;
    Ok(if m.is_discrete() { t.ceil() } else { t })
}

fn delta_of(full: &MeasureValue, part: &MeasureValue) -> MeasureValue {
    let one = Scalar::one();
    match (full, part) {
        (MeasureValue::Exact(f), MeasureValue::Exact(p)) => MeasureValue::Exact(&one - p / f),
        _ => {
            let (flo, fhi) = (full.lower().unwrap(), full.upper().unwrap());
            let (plo, phi) = (part.lower().unwrap(), part.upper().unwrap());
            let lo = &one - phi / flo;
            let hi = &one - plo / fhi;
            if lo == hi {
                MeasureValue::Exact(lo)
            } else {
                MeasureValue::Interval { lo: lo.max(Scalar::zero()), hi: hi.min(one) }
            }
        }
    }
}

/// `K(f, eps)` restricted to the directions in `D`, an outer approximation.
pub fn floating_body(k: &ConvexBody, m: &Measure, eps: &Scalar, dirs: &DirectionSet) -> Result<FloatingBodyResult> {
    if !eps.is_positive() || eps >= &Scalar::one() {
        return Err(Error::Invalid("eps must lie in (0, 1)".into()));
    }
    floating_body_at(k, m, eps, dirs)
}

/// As [`floating_body`] but also accepts `eps = 0` (the sharp discrete path).
pub fn floating_body_at(k: &ConvexBody, m: &Measure, eps: &Scalar, dirs: &DirectionSet) -> Result<FloatingBodyResult> {
    if eps.is_negative() || eps >= &Scalar::one() {
        return Err(Error::Invalid("eps must lie in [0, 1)".into()));
    }
    let full = m.evaluate(k)?;
    if full.is_infinite() {
        return Err(Error::InfiniteMeasure);
    }
    if !full.upper().is_some_and(|u| u.is_positive()) {
        return Err(Error::Invalid("floating body needs a positive measure".into()));
    }
    let target = cut_target(m, &full, eps)?;
    let cuts: Vec<(Direction, Halfspace)> = dirs
        .directions
        .par_iter()
        .map(|v| minimal_v_halfspace(k, v, m, &target).map(|h| (v.clone(), h)))
        .collect::<Result<_>>()?;
    let mut body = k.clone();
    for (_, h) in &cuts {
        body = clip(&body, h)?;
    }
    let part = m.evaluate(&body)?;
    Ok(FloatingBodyResult { delta: delta_of(&full, &part), body, cuts, target })
}

/// Whether `f(A n K) >= (1 - eps) f(K)` implies `K(f, eps) c A` for this
/// direction set. Vacuously true when the hypothesis fails.
pub fn check_separation(
    k: &ConvexBody,
    m: &Measure,
    eps: &Scalar,
    dirs: &DirectionSet,
    a: &ConvexBody,
) -> Result<bool> {
    let full = m.evaluate(k)?;
    let target = cut_target(m, &full, eps)?;
    let inside = intersect(&[a.clone(), k.clone()])?;
    if !m.at_least(&inside, &target)? {
        return Ok(true);
    }
    let fb = floating_body(k, m, eps, dirs)?;
    Ok(a.contains_body(&fb.body))
}
