//! Exact convex-polytope kernel.
//!
//! Everything is exact in the plane (hulls, intersections, clipping, area,
//! lattice operations). In three dimensions hulls, halfspace intersections
//! and volume are exact; other dimensions are rejected.

mod body;
mod halfspace;
mod point;
pub mod polygon;
pub mod solid;

pub use body::{
    arrangement_radius, boxed_vertices, clip, contains, convex_hull, intersect,
    recession_generators, simplex_volume, support, support_vec, triangulate, ConvexBody, Support,
};
pub use halfspace::{Direction, Halfspace};
pub use point::{on_segment, orient2d, Point};

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::*;
    use crate::scalar::{int, ratio, Scalar};

    fn p(x: i64, y: i64) -> Point {
        Point::from_ints(&[x, y])
    }

    /// O(n^3) oracle: a point is a hull vertex iff some line through it has all
    /// other points weakly on one side and it is not between two others.
    fn brute_hull(points: &[Point]) -> Vec<Point> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        let mut out = Vec::new();
        'outer: for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                for (k, c) in pts.iter().enumerate() {
                    if i == j || i == k || j == k {
                        continue;
                    }
                    // a strictly inside triangle bcx or on segment bc
                    if on_segment(b, c, a) {
                        continue 'outer;
                    }
                    for (l, d) in pts.iter().enumerate() {
                        if l == i || l == j || l == k {
                            continue;
                        }
                        let o1 = orient2d(b, c, a);
                        let o2 = orient2d(c, d, a);
                        let o3 = orient2d(d, b, a);
                        let tri = orient2d(b, c, d);
                        if tri.is_zero() {
                            continue;
                        }
                        let s = |x: &Scalar| if tri > Scalar::zero() { x.clone() } else { -x.clone() };
                        if s(&o1) >= Scalar::zero() && s(&o2) >= Scalar::zero() && s(&o3) >= Scalar::zero() {
                            continue 'outer;
                        }
                    }
                }
            }
            out.push(a.clone());
        }
        out
    }

    /// All pairwise boundary-line intersections that satisfy every halfspace.
    fn brute_vertices(hs: &[Halfspace]) -> Vec<Point> {
        let mut out = Vec::new();
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                if let Some(q) = polygon::line_intersection(&hs[i], &hs[j]) {
                    if hs.iter().all(|h| h.contains(&q)) {
                        out.push(q);
                    }
                }
            }
        }
        brute_hull(&out)
    }

    fn shoelace_sorted(points: &[Point]) -> Scalar {
        polygon::area(&polygon::hull(points))
    }

    #[test]
    fn hull_drops_interior_point() {
        let k = convex_hull(&[p(0, 0), p(1, 0), p(0, 1), Point::from_ratios(&[(1, 4), (1, 4)])]).unwrap();
        assert_eq!(k.verts(), &[p(0, 0), p(1, 0), p(0, 1)]);
    }

    #[test]
    fn hull_single_point_and_errors() {
        let k = convex_hull(&[p(0, 0)]).unwrap();
        assert_eq!(k.affine_dim(), Some(0));
        assert_eq!(k.verts(), &[p(0, 0)]);
        assert!(convex_hull(&[]).is_err());
        assert!(convex_hull(&[p(0, 0), Point::from_ints(&[0, 0, 0])]).is_err());
        assert!(convex_hull(&[Point::from_ints(&[0, 0, 0, 0])]).is_err());
    }

    #[test]
    fn intersect_boxes() {
        let a = ConvexBody::rect_i(0, 1, 0, 1);
        let b = ConvexBody::rect(ratio(1, 2), ratio(3, 2), int(0), int(1));
        let c = intersect(&[a.clone(), b]).unwrap();
        assert_eq!(c, ConvexBody::rect(ratio(1, 2), int(1), int(0), int(1)));
        let far = ConvexBody::rect_i(2, 3, 2, 3);
        assert!(intersect(&[a, far]).unwrap().is_empty());
    }

    #[test]
    fn intersect_halfplanes_unbounded_and_bounded() {
        let hs = vec![
            Halfspace::from_ints(&[-1, 0], 0),
            Halfspace::from_ints(&[0, -1], 0),
        ];
        let quadrant = ConvexBody::from_halfspaces(2, hs.clone()).unwrap();
        assert!(!quadrant.is_bounded());
        assert_eq!(support_vec(&quadrant, &[int(1), int(0)]), Support::Infinite);
        assert_eq!(support_vec(&quadrant, &[int(-1), int(-2)]), Support::Finite(int(0)));
        let mut all = hs;
        all.push(Halfspace::from_ints(&[1, 1], 1));
        all.push(Halfspace::from_ints(&[1, 1], 5)); // redundant
        let tri = ConvexBody::from_halfspaces(2, all).unwrap();
        assert!(tri.is_bounded());
        assert_eq!(tri.verts(), &[p(0, 0), p(1, 0), p(0, 1)]);
        assert_eq!(tri.halfspaces().len(), 3);
    }

    #[test]
    fn unbounded_redundancy_removed() {
        let hs = vec![
            Halfspace::from_ints(&[0, 1], 1),
            Halfspace::from_ints(&[0, 1], 3),
            Halfspace::from_ints(&[0, -1], 0),
            Halfspace::from_ints(&[0, 2], 2),
        ];
        let strip = ConvexBody::from_halfspaces(2, hs).unwrap();
        assert!(!strip.is_bounded());
        assert_eq!(strip.halfspaces().len(), 2);
        assert!(strip.contains(&Point::from_ints(&[1000, 1])));
        assert!(!strip.contains(&Point::from_ints(&[0, 2])));
        // Parallel lines far from the origin still intersect the search box.
        let far = ConvexBody::from_halfspaces(
            2,
            vec![Halfspace::from_ints(&[0, 1], 101), Halfspace::from_ints(&[0, -1], -100)],
        )
        .unwrap();
        assert!(!far.is_empty());
        let gone = ConvexBody::from_halfspaces(
            2,
            vec![Halfspace::from_ints(&[0, 1], 99), Halfspace::from_ints(&[0, -1], -100)],
        )
        .unwrap();
        assert!(gone.is_empty());
    }

    #[test]
    fn clip_examples() {
        let sq = ConvexBody::rect_i(0, 1, 0, 1);
        let h = Halfspace::new(vec![int(1), int(0)], ratio(3, 4)).unwrap();
        assert_eq!(clip(&sq, &h).unwrap(), ConvexBody::rect(int(0), ratio(3, 4), int(0), int(1)));
        let tri = ConvexBody::polygon_i(&[(0, 0), (2, 0), (0, 2)]);
        let cut = clip(&tri, &Halfspace::from_ints(&[1, 1], 1)).unwrap();
        assert_eq!(cut, ConvexBody::polygon_i(&[(0, 0), (1, 0), (0, 1)]));
    }

    #[test]
    fn contains_closed_convention() {
        let sq = ConvexBody::rect_i(0, 1, 0, 1);
        assert!(contains(&sq, &Point::from_ratios(&[(1, 2), (1, 2)])).unwrap());
        assert!(!contains(&sq, &p(2, 0)).unwrap());
        assert!(contains(&sq, &Point::from_ratios(&[(1, 1), (1, 2)])).unwrap());
        assert!(contains(&sq, &Point::from_ints(&[0, 0, 0])).is_err());
    }

    #[test]
    fn support_examples() {
        let sq = ConvexBody::rect_i(0, 1, 0, 1);
        assert_eq!(support(&sq, &Direction::from_ints(&[1, 0]).unwrap()).unwrap(), Support::Finite(int(1)));
        assert_eq!(support(&sq, &Direction::from_ints(&[1, 1]).unwrap()).unwrap(), Support::Finite(int(2)));
        assert_eq!(support(&ConvexBody::empty(2), &Direction::from_ints(&[1, 1]).unwrap()).unwrap(), Support::NegInfinite);
    }

    #[test]
    fn triangulate_examples() {
        let sq = ConvexBody::rect_i(0, 1, 0, 1);
        assert_eq!(triangulate(&sq).unwrap().len(), 2);
        let tri = ConvexBody::polygon_i(&[(0, 0), (2, 0), (0, 2)]);
        let t = triangulate(&tri).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(convex_hull(&t[0]).unwrap(), tri);
    }

    #[test]
    fn hexagon_fan_area_matches_shoelace() {
        let hex = ConvexBody::polygon_i(&[(0, 0), (3, -1), (6, 1), (6, 4), (2, 5), (-1, 3)]);
        let total: Scalar = triangulate(&hex).unwrap().iter().map(|s| simplex_volume(s)).sum();
        assert_eq!(total, polygon::area(hex.verts()));
        assert_eq!(hex.verts().len(), 6);
    }

    #[test]
    fn three_d_hull_and_intersection() {
        let mut hs = Vec::new();
        for i in 0..3 {
            let mut n = vec![int(0), int(0), int(0)];
            n[i] = int(1);
            hs.push(Halfspace::new(n.clone(), int(1)).unwrap());
            n[i] = int(-1);
            hs.push(Halfspace::new(n, int(0)).unwrap());
        }
        let cube = ConvexBody::from_halfspaces(3, hs.clone()).unwrap();
        assert!(cube.is_bounded());
        assert_eq!(cube.verts().len(), 8);
        let cut = clip(&cube, &Halfspace::from_ints(&[1, 1, 1], 1)).unwrap();
        assert_eq!(cut.verts().len(), 4);
        let vol: Scalar = triangulate(&cut).unwrap().iter().map(|s| simplex_volume(s)).sum();
        assert_eq!(vol, ratio(1, 6));
        let open = ConvexBody::from_halfspaces(3, hs[..5].to_vec()).unwrap();
        assert!(!open.is_bounded());
        assert!(open.contains(&Point::from_ints(&[0, 0, -50])));
    }

    #[test]
    fn json_round_trip_and_cross_validation() {
        let v = serde_json::json!({"dim": 2, "vertices": [["0","0"],["1","0"],["1/2","1"]]});
        let k = ConvexBody::from_json(&v).unwrap();
        let back = ConvexBody::from_json(&k.to_json()).unwrap();
        assert_eq!(k, back);
        let h = serde_json::json!({"halfspaces": [
            {"normal": ["-1","0"], "offset": "0"},
            {"normal": ["0","-1"], "offset": 0}
        ]});
        let q = ConvexBody::from_json(&h).unwrap();
        assert!(!q.is_bounded());
        assert_eq!(ConvexBody::from_json(&q.to_json()).unwrap(), q);
        let bad = serde_json::json!({"vertices": [["0","0"],["1","0"],["0","1"]],
            "halfspaces": [{"normal": ["1","0"], "offset": "5"}]});
        assert!(ConvexBody::from_json(&bad).is_err());
    }

    fn small_points(n: usize) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-20i64..=20, -20i64..=20, 1i64..=4), 1..n).prop_map(|v| {
            v.into_iter()
                .map(|(x, y, d)| Point::from_ratios(&[(x, d), (y, d)]))
                .collect()
        })
    }

    fn rand_halfspace() -> impl Strategy<Value = Halfspace> {
        (-5i64..=5, -5i64..=5, -20i64..=20)
            .prop_filter("nonzero", |(a, b, _)| *a != 0 || *b != 0)
            .prop_map(|(a, b, c)| Halfspace::from_ints(&[a, b], c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hull_matches_orientation_oracle(points in small_points(25)) {
            let k = convex_hull(&points).unwrap();
            let mut got = k.verts().to_vec();
            got.sort();
            let mut want = brute_hull(&points);
            want.sort();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn intersection_matches_pairwise_oracle(hs in prop::collection::vec(rand_halfspace(), 3..8)) {
            // Bundle with a bounding square so the oracle's vertex set is finite.
            let mut all = hs;
            all.extend(polygon::halfspaces(&polygon::square(&int(30))));
            let k = ConvexBody::from_halfspaces(2, all.clone()).unwrap();
            let want = brute_vertices(&all);
            let mut got = k.verts().to_vec();
            got.sort();
            let mut want_sorted = want;
            want_sorted.sort();
            prop_assert_eq!(got, want_sorted);
            for v in k.verts() {
                prop_assert!(all.iter().all(|h| h.contains(v)));
            }
        }

        #[test]
        fn clip_area_matches_reference(points in small_points(12), h in rand_halfspace()) {
            let k = convex_hull(&points).unwrap();
            let c = clip(&k, &h).unwrap();
            let mut hs = k.halfspaces().to_vec();
            hs.push(h.clone());
            let reference = shoelace_sorted(&brute_vertices(&hs));
            let got: Scalar = triangulate(&c).unwrap().iter().map(|s| simplex_volume(s)).sum();
            prop_assert_eq!(got, reference);
            // idempotent
            prop_assert_eq!(clip(&c, &h).unwrap(), c.clone());
            // contained in both operands
            for v in c.verts() {
                prop_assert!(k.contains(v) && h.contains(v));
            }
        }

        #[test]
        fn support_is_attained(points in small_points(15), a in -5i64..=5, b in -5i64..=5) {
            prop_assume!(a != 0 || b != 0);
            let k = convex_hull(&points).unwrap();
            let dir = Direction::from_ints(&[a, b]).unwrap();
            let s = support(&k, &dir).unwrap();
            let s = s.finite().unwrap().clone();
            let vals: Vec<Scalar> = k.verts().iter().map(|v| v.dot_coords(dir.coords())).collect();
            prop_assert!(vals.iter().all(|x| *x <= s));
            prop_assert!(vals.iter().any(|x| *x == s));
            let exhaustive = points.iter().map(|q| q.dot_coords(dir.coords())).max().unwrap();
            prop_assert_eq!(s, exhaustive);
        }

        #[test]
        fn representations_agree(points in small_points(15)) {
            let k = convex_hull(&points).unwrap();
            for v in k.verts() {
                prop_assert!(k.halfspaces().iter().all(|h| h.contains(v)));
            }
            let from_h = ConvexBody::from_halfspaces(2, k.halfspaces().to_vec()).unwrap();
            prop_assert_eq!(from_h, k.clone());
            let fan: Scalar = triangulate(&k).unwrap().iter().map(|s| simplex_volume(s)).sum();
            prop_assert_eq!(fan, polygon::area(k.verts()));
        }
    }
}
