//! Convex polytopes in dimensions 1 and 2, with exact intersection
//! (half-plane clipping) and fan triangulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::{cross2, orient2, RatPoint, Simplex};

/// An interval (dim 1) or a convex polygon (dim 2).
///
/// Canonical form: intervals store sorted endpoints; polygons store
/// counterclockwise vertices starting from the lexicographically least one,
/// with no three consecutive collinear vertices. Equality of the underlying
/// sets is therefore syntactic equality.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConvexPolytope {
    dim: usize,
    vertices: Vec<RatPoint>,
}

/// Exact intersection of two convex polytopes, with degenerate cases kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intersection {
    Empty,
    Point(RatPoint),
    Segment(RatPoint, RatPoint),
    Polytope(ConvexPolytope),
}

impl ConvexPolytope {
    pub fn interval(a: Rational, b: Rational) -> Result<Self> {
        if a == b {
            return Err(Error::DegeneratePolytope("zero-length interval".into()));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Ok(ConvexPolytope {
            dim: 1,
            vertices: vec![RatPoint(vec![lo]), RatPoint(vec![hi])],
        })
    }

    /// Build a polygon from a convex boundary loop (either orientation).
    pub fn polygon(loop_vertices: Vec<RatPoint>) -> Result<Self> {
        let cleaned = clean_loop(loop_vertices);
        if cleaned.len() < 3 {
            return Err(Error::DegeneratePolytope(
                "fewer than three non-collinear vertices".into(),
            ));
        }
        let canon = canonical_ccw(cleaned);
        debug_assert!(is_convex_ccw(&canon));
        Ok(ConvexPolytope {
            dim: 2,
            vertices: canon,
        })
    }

    pub fn from_simplex(s: &Simplex) -> Result<Self> {
        match (s.ambient_dim(), s.order()) {
            (1, 1) => ConvexPolytope::interval(
                s.vertices()[0].coord(0).clone(),
                s.vertices()[1].coord(0).clone(),
            ),
            (2, 2) => ConvexPolytope::polygon(s.vertices().to_vec()),
            _ => Err(Error::UnsupportedDimension(s.ambient_dim())),
        }
    }

    /// The unit cube `[-1,1]^n` as a polytope, n = 1 or 2.
    pub fn cube(dim: usize) -> Result<Self> {
        match dim {
            1 => ConvexPolytope::interval(Rational::from_int(-1), Rational::from_int(1)),
            2 => ConvexPolytope::polygon(vec![
                RatPoint::from_ints(&[-1, -1]),
                RatPoint::from_ints(&[1, -1]),
                RatPoint::from_ints(&[1, 1]),
                RatPoint::from_ints(&[-1, 1]),
            ]),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    /// Length (dim 1) or shoelace area (dim 2).
    pub fn measure(&self) -> Rational {
        match self.dim {
            1 => self.vertices[1].coord(0) - self.vertices[0].coord(0),
            _ => {
                let n = self.vertices.len();
                let twice: Rational = (0..n)
                    .map(|i| cross2(&self.vertices[i], &self.vertices[(i + 1) % n]))
                    .sum();
                twice / Rational::from_int(2)
            }
        }
    }

    pub fn contains(&self, p: &RatPoint) -> bool {
        match self.dim {
            1 => {
                p.coord(0) >= self.vertices[0].coord(0) && p.coord(0) <= self.vertices[1].coord(0)
            }
            _ => {
                let n = self.vertices.len();
                (0..n).all(|i| orient2(&self.vertices[i], &self.vertices[(i + 1) % n], p) >= 0)
            }
        }
    }

    /// Clip by the closed half-plane `normal . x <= offset` (dim 2 only).
    /// Returns the raw surviving boundary chain, possibly degenerate.
    fn clip_halfplane(&self, normal: &RatPoint, offset: &Rational) -> Vec<RatPoint> {
        let n = self.vertices.len();
        let side: Vec<i32> = self
            .vertices
            .iter()
            .map(|v| (offset - normal.dot(v)).signum())
            .collect();
        let mut out = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            let (cur, next) = (&self.vertices[i], &self.vertices[j]);
            if side[i] >= 0 {
                out.push(cur.clone());
            }
            if (side[i] > 0 && side[j] < 0) || (side[i] < 0 && side[j] > 0) {
                // Proper crossing: parametrize cur + t (next - cur).
                let d = next.sub(cur);
                let t = (offset - normal.dot(cur)) / normal.dot(&d);
                out.push(cur.add(&d.scale(&t)));
            }
        }
        out
    }
}

impl std::fmt::Debug for ConvexPolytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "poly{:?}", self.vertices)
    }
}

/// Remove consecutive duplicates and collinear middle vertices from a loop.
fn clean_loop(mut v: Vec<RatPoint>) -> Vec<RatPoint> {
    // Consecutive duplicates (cyclically).
    let mut i = 0;
    while i < v.len() && v.len() > 1 {
        let j = (i + 1) % v.len();
        if v[i] == v[j] {
            v.remove(j);
        } else {
            i += 1;
        }
    }
    // Collinear middles, to a fixed point.
    let mut changed = true;
    while changed && v.len() >= 3 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let prev = &v[(i + n - 1) % n];
            let next = &v[(i + 1) % n];
            if orient2(prev, &v[i], next) == 0 {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    if v.len() >= 3 {
        v
    } else {
        // A fully collinear loop collapses; return the distinct extremes.
        let mut distinct = v;
        distinct.sort();
        distinct.dedup();
        distinct
    }
}

fn canonical_ccw(mut v: Vec<RatPoint>) -> Vec<RatPoint> {
    let n = v.len();
    let twice_area: Rational = (0..n).map(|i| cross2(&v[i], &v[(i + 1) % n])).sum();
    if twice_area.is_negative() {
        v.reverse();
    }
    let least = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    v.rotate_left(least);
    v
}

fn is_convex_ccw(v: &[RatPoint]) -> bool {
    let n = v.len();
    (0..n).all(|i| orient2(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]) > 0)
}

/// Exact intersection keeping degenerate results (shared edges, points).
pub fn intersect_full(p: &ConvexPolytope, q: &ConvexPolytope) -> Result<Intersection> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    match p.dim() {
        1 => {
            let lo = p.vertices[0]
                .coord(0)
                .clone()
                .max(q.vertices[0].coord(0).clone());
            let hi = p.vertices[1]
                .coord(0)
                .clone()
                .min(q.vertices[1].coord(0).clone());
            Ok(if lo > hi {
                Intersection::Empty
            } else if lo == hi {
                Intersection::Point(RatPoint(vec![lo]))
            } else {
                Intersection::Polytope(ConvexPolytope::interval(lo, hi)?)
            })
        }
        2 => {
            let mut chain = p.vertices.clone();
            let nq = q.vertices.len();
            for i in 0..nq {
                let (u, v) = (&q.vertices[i], &q.vertices[(i + 1) % nq]);
                // Inward side of a CCW edge: right normal, normal . x <= normal . u.
                let d = v.sub(u);
                let normal = RatPoint(vec![d.coord(1).clone(), -d.coord(0)]);
                let offset = normal.dot(u);
                let current = ConvexPolytope {
                    dim: 2,
                    vertices: chain,
                };
                chain = current.clip_halfplane(&normal, &offset);
                if chain.is_empty() {
                    return Ok(Intersection::Empty);
                }
            }
            Ok(classify_chain(chain))
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn classify_chain(chain: Vec<RatPoint>) -> Intersection {
    let cleaned = clean_loop(chain);
    match cleaned.len() {
        0 => Intersection::Empty,
        1 => Intersection::Point(cleaned.into_iter().next().unwrap()),
        2 => {
            let mut it = cleaned.into_iter();
            Intersection::Segment(it.next().unwrap(), it.next().unwrap())
        }
        _ => {
            let canon = canonical_ccw(cleaned);
            Intersection::Polytope(ConvexPolytope {
                dim: 2,
                vertices: canon,
            })
        }
    }
}

/// Spec-facing intersection: the full-dimensional intersection in canonical
/// form, or `None` when the interiors are disjoint (zero-measure overlaps
/// count as empty).
pub fn convex_intersect(
    p: &ConvexPolytope,
    q: &ConvexPolytope,
) -> Result<Option<ConvexPolytope>> {
    Ok(match intersect_full(p, q)? {
        Intersection::Polytope(r) => Some(r),
        _ => None,
    })
}

/// Triangulate a polygon by the fan from its first (lexicographically least)
/// vertex; an interval is returned as a single segment. Output simplices are
/// positively oriented and partition the polytope.
pub fn fan_triangulate(p: &ConvexPolytope) -> Result<Vec<Simplex>> {
    match p.dim() {
        1 => Ok(vec![Simplex::segment(
            p.vertices[0].clone(),
            p.vertices[1].clone(),
        )]),
        2 => {
            let v = &p.vertices;
            Ok((1..v.len() - 1)
                .map(|i| Simplex::new(vec![v[0].clone(), v[i].clone(), v[i + 1].clone()]))
                .collect())
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(&[x, y])
    }

    fn square(a: i64, b: i64) -> ConvexPolytope {
        ConvexPolytope::polygon(vec![pt(a, a), pt(b, a), pt(b, b), pt(a, b)]).unwrap()
    }

    #[test]
    fn interval_intersection() {
        let a = ConvexPolytope::interval(rat(0, 1), rat(2, 1)).unwrap();
        let b = ConvexPolytope::interval(rat(1, 1), rat(3, 1)).unwrap();
        match intersect_full(&a, &b).unwrap() {
            Intersection::Polytope(p) => {
                assert_eq!(p.vertices()[0].coord(0), &rat(1, 1));
                assert_eq!(p.vertices()[1].coord(0), &rat(2, 1));
            }
            other => panic!("expected interval, got {other:?}"),
        }
        // Touching intervals meet in a point, reported as empty by the
        // full-dimensional wrapper.
        let c = ConvexPolytope::interval(rat(2, 1), rat(3, 1)).unwrap();
        assert!(convex_intersect(&a, &c).unwrap().is_none());
    }

    #[test]
    fn square_self_intersection_is_identity() {
        let s = square(0, 1);
        let r = convex_intersect(&s, &s).unwrap().unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn square_triangle_overlap_by_hand() {
        // Square (0,0)-(2,2) clipped against triangle (1,1),(3,1),(1,3):
        // quadrilateral (1,1),(2,1),(2,2),(1,2), worked out by clipping the
        // square with the triangle's three half-planes.
        let s = square(0, 2);
        let t = ConvexPolytope::polygon(vec![pt(1, 1), pt(3, 1), pt(1, 3)]).unwrap();
        let r = convex_intersect(&s, &t).unwrap().unwrap();
        assert_eq!(
            r.vertices(),
            &[pt(1, 1), pt(2, 1), pt(2, 2), pt(1, 2)][..]
        );
        assert_eq!(r.measure(), rat(1, 1));
    }

    #[test]
    fn shared_edge_is_degenerate() {
        let a = square(0, 1);
        let b = ConvexPolytope::polygon(vec![pt(1, 0), pt(2, 0), pt(2, 1), pt(1, 1)]).unwrap();
        match intersect_full(&a, &b).unwrap() {
            Intersection::Segment(u, v) => {
                assert_eq!((u, v), (pt(1, 0), pt(1, 1)));
            }
            other => panic!("expected segment, got {other:?}"),
        }
        assert!(convex_intersect(&a, &b).unwrap().is_none());
    }

    #[test]
    fn fan_triangle_count_and_area() {
        let t = ConvexPolytope::polygon(vec![pt(0, 0), pt(1, 0), pt(0, 1)]).unwrap();
        assert_eq!(fan_triangulate(&t).unwrap().len(), 1);

        let q = square(0, 3);
        let tris = fan_triangulate(&q).unwrap();
        assert_eq!(tris.len(), 2);
        let total: Rational = tris.iter().map(|s| s.volume().unwrap()).sum();
        assert_eq!(total, q.measure());

        // Hexagon with rational vertices: 4 triangles, areas sum to shoelace.
        let hex = ConvexPolytope::polygon(vec![
            RatPoint(vec![rat(2, 1), rat(0, 1)]),
            RatPoint(vec![rat(1, 1), rat(7, 4)]),
            RatPoint(vec![rat(-1, 1), rat(7, 4)]),
            RatPoint(vec![rat(-2, 1), rat(0, 1)]),
            RatPoint(vec![rat(-1, 1), rat(-7, 4)]),
            RatPoint(vec![rat(1, 1), rat(-7, 4)]),
        ])
        .unwrap();
        let tris = fan_triangulate(&hex).unwrap();
        assert_eq!(tris.len(), 4);
        let total: Rational = tris.iter().map(|s| s.volume().unwrap()).sum();
        assert_eq!(total, hex.measure());
        assert!(tris.iter().all(|s| s.orientation() > 0));
    }

    #[test]
    fn degenerate_polygon_rejected() {
        assert!(ConvexPolytope::polygon(vec![pt(0, 0), pt(1, 1), pt(2, 2)]).is_err());
    }

    #[test]
    fn canonical_order_is_lex_least_ccw() {
        let p = ConvexPolytope::polygon(vec![pt(1, 1), pt(0, 1), pt(0, 0), pt(1, 0)]).unwrap();
        assert_eq!(p.vertices(), &[pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)][..]);
    }
}
