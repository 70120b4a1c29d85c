//! Colorful Caratheodory selection with several targets.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, ConvexBody, Point};
use crate::scalar::Scalar;

/// Largest product of class sizes searched exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;
const PIVOT_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pivot,
    Exhaustive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColorfulChoice {
    /// Index into each class.
    pub indices: Vec<usize>,
    pub points: Vec<Point>,
    pub method: Method,
    pub pivots: usize,
}

/// Nearest point of `conv(points)` to `t` and the indices of a minimal
/// subset carrying it. Exact: projects onto the affine hull of every
/// affinely independent subset and keeps the feasible projections.
pub fn closest_point(points: &[Point], t: &Point) -> (Point, Vec<usize>) {
    let d = t.dim();
    let mut best: Option<(Scalar, Point, Vec<usize>)> = None;
    let n = points.len();
    for mask in 1u64..(1u64 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if idx.len() > d + 1 {
            continue;
        }
        let Some((y, coeffs)) = project(points, &idx, t) else {
            continue;
        };
        if coeffs.iter().any(Signed::is_negative) {
            continue;
        }
        let support: Vec<usize> = idx
            .iter()
            .zip(&coeffs)
            .filter(|(_, c)| c.is_positive())
            .map(|(&i, _)| i)
            .collect();
        let dist = (&y - t).norm_squared();
        let better = match &best {
            None => true,
            Some((bd, _, bs)) => dist < *bd || (dist == *bd && support.len() < bs.len()),
        };
        if better {
            best = Some((dist, y, support));
        }
    }
    let (_, y, s) = best.expect("nonempty point list");
    (y, s)
}

/// Orthogonal projection of `t` on the affine hull of the chosen points with
/// barycentric coefficients; `None` if they are affinely dependent.
fn project(points: &[Point], idx: &[usize], t: &Point) -> Option<(Point, Vec<Scalar>)> {
    let p0 = &points[idx[0]];
    let e: Vec<Point> = idx[1..].iter().map(|&i| &points[i] - p0).collect();
    let k = e.len();
    let rhs: Vec<Scalar> = e.iter().map(|ei| ei.dot(&(t - p0))).collect();
    let mut g: Vec<Vec<Scalar>> = (0..k)
        .map(|i| {
            let mut row: Vec<Scalar> = (0..k).map(|j| e[i].dot(&e[j])).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for col in 0..k {
        let p = (col..k).find(|&r| !g[r][col].is_zero())?;
        g.swap(col, p);
        let pv = g[col][col].clone();
        for x in g[col].iter_mut() {
            *x /= &pv;
        }
        let prow = g[col].clone();
        for (r, row) in g.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    let lambda: Vec<Scalar> = g.iter().map(|r| r[k].clone()).collect();
    let mut y = p0.clone();
    for (l, ei) in lambda.iter().zip(&e) {
        y = &y + &ei.scale(l);
    }
    let mut coeffs = vec![Scalar::one() - lambda.iter().sum::<Scalar>()];
    coeffs.extend(lambda);
    Some((y, coeffs))
}

fn hull_contains_all(points: &[Point], targets: &[Point]) -> Result<bool> {
    let h = convex_hull(points)?;
    Ok(targets.iter().all(|t| h.contains(t)))
}

fn potential(points: &[Point], targets: &[Point]) -> Scalar {
    targets
        .iter()
        .map(|t| (&closest_point(points, t).0 - t).norm_squared())
        .sum()
}

/// Picks one point from each class so that all targets lie in the hull of
/// the picks. Needs at least `max(k d, d + 1)` classes, each containing every
/// target in its hull.
pub fn colorful_caratheodory(targets: &[Point], classes: &[Vec<Point>]) -> Result<ColorfulChoice> {
    let first = targets.first().ok_or(Error::EmptyInput("no targets"))?;
    let d = first.dim();
    let k = targets.len();
    let need = (k * d).max(d + 1);
    if classes.len() < need {
        return Err(Error::Invalid(format!("{} classes given, {need} needed", classes.len())));
    }
    for (ci, class) in classes.iter().enumerate() {
        if class.is_empty() {
            return Err(Error::CaratheodoryPrecondition { class: ci, target: 0 });
        }
        for p in class.iter().chain(targets) {
            p.check_dim(d)?;
        }
        let h = convex_hull(class)?;
        if let Some(ti) = targets.iter().position(|t| !h.contains(t)) {
            return Err(Error::CaratheodoryPrecondition { class: ci, target: ti });
        }
    }
    match pivot(targets, classes)? {
        Some(choice) => Ok(choice),
        None => exhaustive(targets, classes)?
            .ok_or_else(|| Error::CaratheodoryFailed("pivoting stalled and the search space is too large".into())),
    }
}

/// Barany-style pivoting. For one target it always succeeds; for several
/// targets it follows the summed squared distance and may stall.
fn pivot(targets: &[Point], classes: &[Vec<Point>]) -> Result<Option<ColorfulChoice>> {
    let mut idx: Vec<usize> = vec![0; classes.len()];
    let pick = |idx: &[usize]| -> Vec<Point> { idx.iter().zip(classes).map(|(&i, c)| c[i].clone()).collect() };
    let mut pivots = 0;
    let mut current = potential(&pick(&idx), targets);
    while pivots < PIVOT_CAP {
        let pts = pick(&idx);
        if hull_contains_all(&pts, targets)? {
            return Ok(Some(ColorfulChoice { indices: idx, points: pts, method: Method::Pivot, pivots }));
        }
        // First uncovered target.
        let (y, support, t) = targets
            .iter()
            .find_map(|t| {
                let (y, s) = closest_point(&pts, t);
                (y != *t).then(|| (y, s, t.clone()))
            })
            .expect("some target is uncovered");
        let dir = &t - &y;
        let level = y.dot(&dir);
        if targets.len() == 1 {
            // Swap a class outside the support for its point farthest along t - y.
            let ci = (0..classes.len()).find(|i| !support.contains(i)).expect("support has at most d points");
            let (best, _) = classes[ci]
                .iter()
                .enumerate()
                .map(|(j, p)| (j, p.dot(&dir)))
                .fold(None, |acc: Option<(usize, Scalar)>, (j, v)| match acc {
                    Some((bj, bv)) if bv >= v => Some((bj, bv)),
                    _ => Some((j, v)),
                })
                .unwrap();
            idx[ci] = best;
            pivots += 1;
            continue;
        }
        // Several targets: best single swap beyond the separating line that lowers the potential.
        let mut best: Option<(Scalar, usize, usize)> = None;
        for (ci, class) in classes.iter().enumerate() {
            for (j, p) in class.iter().enumerate() {
                if j == idx[ci] || p.dot(&dir) <= level {
                    continue;
                }
                let mut trial = idx.clone();
                trial[ci] = j;
                let pot = potential(&pick(&trial), targets);
                if best.as_ref().map_or(true, |(b, _, _)| pot < *b) {
                    best = Some((pot, ci, j));
                }
            }
        }
        match best {
            Some((pot, ci, j)) if pot < current => {
                idx[ci] = j;
                current = pot;
                pivots += 1;
            }
            _ => return Ok(None),
        }
    }
    Ok(None)
}

/// Lexicographically first valid choice, if the product of class sizes is small.
pub fn exhaustive(targets: &[Point], classes: &[Vec<Point>]) -> Result<Option<ColorfulChoice>> {
    let total = classes
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
        .unwrap_or(u64::MAX);
    if total > EXHAUSTIVE_LIMIT {
        return Ok(None);
    }
    let mut idx = vec![0usize; classes.len()];
    loop {
        let pts: Vec<Point> = idx.iter().zip(classes).map(|(&i, c)| c[i].clone()).collect();
        if hull_contains_all(&pts, targets)? {
            return Ok(Some(ColorfulChoice { indices: idx, points: pts, method: Method::Exhaustive, pivots: 0 }));
        }
        let mut i = classes.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < classes[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Whether `conv(points)` contains `body`.
pub fn hull_contains_body(points: &[Point], body: &ConvexBody) -> Result<bool> {
    if body.is_empty() {
        return Ok(true);
    }
    if points.is_empty() {
        return Ok(false);
    }
    let verts = body.vertices().ok_or(Error::Unbounded)?;
    hull_contains_all(points, verts)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::from_ints(&[x, y])
    }

    #[test]
    fn identical_classes() {
        let class = vec![p(2, 0), p(-1, 1), p(-1, -1)];
        let c = colorful_caratheodory(&[p(0, 0)], &[class.clone(), class.clone(), class]).unwrap();
        let mut got = c.points.clone();
        got.sort();
        let mut want = vec![p(2, 0), p(-1, 1), p(-1, -1)];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn disjoint_triangles() {
        let classes = vec![
            vec![p(3, 0), p(-1, 2), p(-1, -2)],
            vec![p(-3, 1), p(2, 2), p(1, -3)],
            vec![p(0, 4), p(-4, -1), p(3, -2)],
        ];
        let c = colorful_caratheodory(&[p(0, 0)], &classes).unwrap();
        assert!(hull_contains_all(&c.points, &[p(0, 0)]).unwrap());
        for (i, pt) in c.points.iter().enumerate() {
            assert!(classes[i].contains(pt));
        }
        assert!(exhaustive(&[p(0, 0)], &classes).unwrap().is_some());
    }

    #[test]
    fn two_targets() {
        let class = vec![p(-2, -2), p(3, -2), p(3, 2), p(-2, 2)];
        let classes = vec![class.clone(), class.clone(), class.clone(), class];
        let targets = [p(0, 0), p(1, 0)];
        let c = colorful_caratheodory(&targets, &classes).unwrap();
        assert!(hull_contains_all(&c.points, &targets).unwrap());
    }

    #[test]
    fn precondition_names_class_and_target() {
        let classes = vec![vec![p(1, 1), p(2, 1), p(1, 2)], vec![p(-1, 0), p(1, 0), p(0, 1), p(0, -1)], vec![p(-1, 0), p(1, 0), p(0, 1), p(0, -1)]];
        let err = colorful_caratheodory(&[p(0, 0)], &classes).unwrap_err();
        assert!(matches!(err, Error::CaratheodoryPrecondition { class: 0, target: 0 }));
    }

    #[test]
    fn closest_point_cases() {
        let tri = [p(0, 0), p(4, 0), p(0, 4)];
        let (y, s) = closest_point(&tri, &p(4, 4));
        assert_eq!(y, p(2, 2));
        assert_eq!(s, vec![1, 2]);
        let (y, s) = closest_point(&tri, &p(-1, -1));
        assert_eq!(y, p(0, 0));
        assert_eq!(s, vec![0]);
        let (y, _) = closest_point(&tri, &p(1, 1));
        assert_eq!(y, p(1, 1));
    }

    /// A class of points around the origin whose hull contains every target in `[-1, 1]^2`.
    fn class_around(spread: i64) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-spread..=spread, -spread..=spread), 1..4).prop_map(move |extra| {
            let s = spread;
            let mut pts = vec![p(s, s), p(-s, s), p(-s, -s), p(s, -s)];
            pts.extend(extra.into_iter().map(|(x, y)| p(x, y)));
            pts
        })
    }

    /// Random triangle containing the origin, built from angles spread around the circle.
    fn triangle_around_origin() -> impl Strategy<Value = Vec<Point>> {
        (1i64..6, 1i64..6, 1i64..6, 1i64..6, 1i64..6).prop_map(|(a, b, c, e, f)| vec![p(a, 0), p(-b, c), p(-e, -f)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn single_target_pivoting(classes in prop::collection::vec(triangle_around_origin(), 3)) {
            let t = p(0, 0);
            let c = colorful_caratheodory(&[t.clone()], &classes).unwrap();
            prop_assert!(hull_contains_all(&c.points, &[t.clone()]).unwrap());
            prop_assert!(exhaustive(&[t], &classes).unwrap().is_some());
        }

        #[test]
        fn two_target_choice(classes in prop::collection::vec(class_around(3), 4), tx in -1i64..=1, ty in -1i64..=1) {
            let targets = [p(0, 0), p(tx, ty)];
            let c = colorful_caratheodory(&targets, &classes).unwrap();
            prop_assert!(hull_contains_all(&c.points, &targets).unwrap());
            for (i, pt) in c.points.iter().enumerate() {
                prop_assert!(classes[i].contains(pt));
            }
        }
    }
}
