//! Exact low-dimensional geometric kernel: rational points, matrices, affine
//! maps, and the segment/line predicates everything else is built from.

mod polytope;
mod simplex;

pub use polytope::{fan_triangulate, intersect_full, ConvexPolytope, Intersection};
pub use simplex::Simplex;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A point of `Q^n`. Ordering is lexicographic on coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatPoint(pub Vec<Rational>);

impl RatPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RatPoint(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RatPoint(coords.iter().map(|&c| Rational::from_int(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn origin(dim: usize) -> Self {
        RatPoint(vec![Rational::zero(); dim])
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn add(&self, other: &RatPoint) -> RatPoint {
        RatPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatPoint) -> RatPoint {
        RatPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rational) -> RatPoint {
        RatPoint(self.0.iter().map(|a| a * k).collect())
    }

    pub fn dot(&self, other: &RatPoint) -> Rational {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Sup-norm `max_i |x_i|`.
    pub fn linf_norm(&self) -> Rational {
        self.0
            .iter()
            .map(|c| c.abs())
            .fold(Rational::zero(), Rational::max)
    }

    /// Is the point inside the closed cube `[-1,1]^n`?
    pub fn in_cube(&self) -> bool {
        self.linf_norm() <= Rational::one()
    }

    /// Is the point on the cube boundary?
    pub fn on_cube_boundary(&self) -> bool {
        self.linf_norm() == Rational::one()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }
}

impl PartialOrd for RatPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Square rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatMatrix {
    rows: Vec<Vec<Rational>>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix must be square and nonempty".into()));
        }
        Ok(RatMatrix { rows })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        RatMatrix {
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&v| Rational::from_int(v)).collect())
                .collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        RatMatrix { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
        })
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
                    .collect()
            })
            .collect();
        RatMatrix { rows }
    }

    pub fn mul_vec(&self, v: &RatPoint) -> RatPoint {
        RatPoint(
            self.rows
                .iter()
                .map(|row| row.iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Exact determinant by fraction-free-enough Gaussian elimination
    /// (division is exact over the rationals).
    pub fn det(&self) -> Rational {
        let n = self.n();
        let mut m: Vec<Vec<Rational>> = self.rows.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Rational::zero(),
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det = det * &p;
            for r in (col + 1)..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &p;
                for c in col..n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - &sub;
                }
            }
        }
        det
    }

    /// Exact inverse via Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        let n = self.n();
        let mut m = self.rows.clone();
        let mut inv = RatMatrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(pivot, col);
            inv.swap(pivot, col);
            let p = m[col][col].clone();
            for c in 0..n {
                m[col][c] = &m[col][c] / &p;
                inv[col][c] = &inv[col][c] / &p;
            }
            for r in 0..n {
                if r == col || m[r][col].is_zero() {
                    continue;
                }
                let factor = m[r][col].clone();
                for c in 0..n {
                    let s1 = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - &s1;
                    let s2 = &factor * &inv[col][c];
                    inv[r][c] = &inv[r][c] - &s2;
                }
            }
        }
        Some(RatMatrix { rows: inv })
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.rows
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(Rational::zero(), Rational::max)
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
        }
        write!(f, "]")
    }
}

/// Affine map `x -> Ax + b`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatAffineMap {
    pub linear: RatMatrix,
    pub translation: RatPoint,
}

impl RatAffineMap {
    pub fn new(linear: RatMatrix, translation: RatPoint) -> Self {
        debug_assert_eq!(linear.n(), translation.dim());
        RatAffineMap {
            linear,
            translation,
        }
    }

    pub fn identity(n: usize) -> Self {
        RatAffineMap {
            linear: RatMatrix::identity(n),
            translation: RatPoint::origin(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn apply(&self, x: &RatPoint) -> RatPoint {
        self.linear.mul_vec(x).add(&self.translation)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &RatAffineMap) -> RatAffineMap {
        RatAffineMap {
            linear: self.linear.mul(&inner.linear),
            translation: self.linear.mul_vec(&inner.translation).add(&self.translation),
        }
    }

    pub fn inverse(&self) -> Option<RatAffineMap> {
        let inv = self.linear.inverse()?;
        let t = inv.mul_vec(&self.translation);
        Some(RatAffineMap {
            linear: inv,
            translation: RatPoint(t.0.into_iter().map(|c| -c).collect()),
        })
    }

    pub fn det(&self) -> Rational {
        self.linear.det()
    }

    pub fn is_identity(&self) -> bool {
        self.linear.is_identity() && self.translation.0.iter().all(Rational::is_zero)
    }

    /// The unique affine map sending `src[i] -> dst[i]` for an affinely
    /// independent source tuple of n+1 points in dimension n.
    pub fn interpolating(src: &[RatPoint], dst: &[RatPoint]) -> Result<RatAffineMap> {
        let n = src[0].dim();
        if src.len() != n + 1 || dst.len() != n + 1 {
            return Err(Error::Parse("need n+1 point pairs".into()));
        }
        // Columns of L are determined by edge vectors from the base point.
        let cols: Vec<RatPoint> = (1..=n).map(|i| src[i].sub(&src[0])).collect();
        let basis = RatMatrix {
            rows: (0..n)
                .map(|r| (0..n).map(|c| cols[c].coord(r).clone()).collect())
                .collect(),
        };
        let basis_inv = basis
            .inverse()
            .ok_or_else(|| Error::DegenerateSimplex("affinely dependent source".into()))?;
        let img_cols: Vec<RatPoint> = (1..=n).map(|i| dst[i].sub(&dst[0])).collect();
        let img = RatMatrix {
            rows: (0..n)
                .map(|r| (0..n).map(|c| img_cols[c].coord(r).clone()).collect())
                .collect(),
        };
        let linear = img.mul(&basis_inv);
        let translation = dst[0].sub(&linear.mul_vec(&src[0]));
        Ok(RatAffineMap {
            linear,
            translation,
        })
    }
}

impl fmt::Debug for RatAffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> {:?}x + {:?}", self.linear, self.translation)
    }
}

/// Orientation of the triple `(o, a, b)` in the plane: sign of the cross
/// product `(a-o) x (b-o)`. +1 counterclockwise, -1 clockwise, 0 collinear.
pub fn orient2(o: &RatPoint, a: &RatPoint, b: &RatPoint) -> i32 {
    cross2(&a.sub(o), &b.sub(o)).signum()
}

pub fn cross2(u: &RatPoint, v: &RatPoint) -> Rational {
    u.coord(0) * v.coord(1) - u.coord(1) * v.coord(0)
}

/// Does `p` lie on the closed segment `[a, b]`?
pub fn on_segment(p: &RatPoint, a: &RatPoint, b: &RatPoint) -> bool {
    if orient2(a, b, p) != 0 {
        return false;
    }
    let d = b.sub(a);
    let t = p.sub(a);
    let proj = d.dot(&t);
    proj >= Rational::zero() && proj <= d.dot(&d)
}

/// How two closed segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegMeet {
    /// No common point.
    Disjoint,
    /// Exactly one common point, an endpoint of both.
    SharedEndpoint,
    /// Any other nonempty intersection: a transversal crossing, an endpoint
    /// interior to the other segment, or a collinear overlap.
    Improper,
}

/// Classify the intersection of segments `[a1,b1]` and `[a2,b2]`.
pub fn segments_meet(a1: &RatPoint, b1: &RatPoint, a2: &RatPoint, b2: &RatPoint) -> SegMeet {
    let d1 = orient2(a1, b1, a2);
    let d2 = orient2(a1, b1, b2);
    let d3 = orient2(a2, b2, a1);
    let d4 = orient2(a2, b2, b1);

    if d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0 {
        return SegMeet::Improper; // proper transversal crossing
    }

    let mut touches: Vec<&RatPoint> = Vec::new();
    for (p, a, b) in [
        (a2, a1, b1),
        (b2, a1, b1),
        (a1, a2, b2),
        (b1, a2, b2),
    ] {
        if on_segment(p, a, b) {
            touches.push(p);
        }
    }
    if touches.is_empty() {
        return SegMeet::Disjoint;
    }
    // Collinear overlap: more than one geometric contact point.
    let first = touches[0];
    if touches.iter().any(|p| *p != first) {
        return SegMeet::Improper;
    }
    let shared = (first == a1 || first == b1) && (first == a2 || first == b2);
    if shared {
        SegMeet::SharedEndpoint
    } else {
        SegMeet::Improper
    }
}

/// Canonical representation of a line in the plane: primitive integer
/// coefficients `(a, b, c)` with `a x + b y = c`, leading coefficient
/// positive. Two collinear segments produce identical keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineKey {
    pub a: num_bigint::BigInt,
    pub b: num_bigint::BigInt,
    pub c: num_bigint::BigInt,
}

impl LineKey {
    pub fn through(p: &RatPoint, q: &RatPoint) -> LineKey {
        use num_bigint::BigInt;
        use num_integer::Integer;
        use num_traits::Zero;

        // Direction (dx, dy); normal (dy, -dx); offset normal . p.
        let dx = q.coord(0) - p.coord(0);
        let dy = q.coord(1) - p.coord(1);
        let a = dy.clone();
        let b = -dx;
        let c = &a * p.coord(0) + &b * p.coord(1);
        // Clear denominators.
        let lcm: BigInt = [&a, &b, &c]
            .iter()
            .fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
        let to_int = |r: &Rational| -> BigInt {
            let scaled = r * &Rational::new(lcm.clone(), BigInt::from(1)).unwrap();
            scaled.numer().clone()
        };
        let (mut ia, mut ib, mut ic) = (to_int(&a), to_int(&b), to_int(&c));
        let g = ia.gcd(&ib).gcd(&ic);
        if !g.is_zero() {
            ia /= &g;
            ib /= &g;
            ic /= &g;
        }
        let flip = if ia.is_zero() {
            ib < BigInt::zero()
        } else {
            ia < BigInt::zero()
        };
        if flip {
            ia = -ia;
            ib = -ib;
            ic = -ic;
        }
        LineKey {
            a: ia,
            b: ib,
            c: ic,
        }
    }
}

/// Merge collinear, overlapping-or-touching segments into maximal ones.
/// Lexicographic order on points is monotone along any single line, so the
/// usual interval-merge applies per line.
pub fn merge_collinear(edges: Vec<(RatPoint, RatPoint)>) -> Vec<(RatPoint, RatPoint)> {
    use std::collections::HashMap;
    let mut by_line: HashMap<LineKey, Vec<(RatPoint, RatPoint)>> = HashMap::new();
    for e in edges {
        by_line
            .entry(LineKey::through(&e.0, &e.1))
            .or_default()
            .push(e);
    }
    let mut out = Vec::new();
    for (_, mut segs) in by_line {
        for s in segs.iter_mut() {
            if s.0 > s.1 {
                std::mem::swap(&mut s.0, &mut s.1);
            }
        }
        segs.sort();
        let mut current: Option<(RatPoint, RatPoint)> = None;
        for seg in segs {
            match current.take() {
                None => current = Some(seg),
                Some(mut cur) => {
                    if seg.0 <= cur.1 {
                        if seg.1 > cur.1 {
                            cur.1 = seg.1;
                        }
                        current = Some(cur);
                    } else {
                        out.push(cur);
                        current = Some(seg);
                    }
                }
            }
        }
        if let Some(cur) = current {
            out.push(cur);
        }
    }
    out.sort();
    out
}

/// Axis-aligned rational box, used for overlay pruning and support regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: RatPoint,
    pub max: RatPoint,
}

impl BoundingBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a RatPoint>) -> Option<BoundingBox> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = first.0.clone();
        let mut max = first.0.clone();
        for p in iter {
            for (i, c) in p.0.iter().enumerate() {
                if c < &min[i] {
                    min[i] = c.clone();
                }
                if c > &max[i] {
                    max[i] = c.clone();
                }
            }
        }
        Some(BoundingBox {
            min: RatPoint(min),
            max: RatPoint(max),
        })
    }

    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min
            .0
            .iter()
            .zip(&other.max.0)
            .all(|(lo, hi)| lo <= hi)
            && other
                .min
                .0
                .iter()
                .zip(&self.max.0)
                .all(|(lo, hi)| lo <= hi)
    }

    pub fn contains_point(&self, p: &RatPoint) -> bool {
        p.0.iter()
            .enumerate()
            .all(|(i, c)| c >= &self.min.0[i] && c <= &self.max.0[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(&[x, y])
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let m = RatMatrix::from_rows(vec![
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(3, 1), rat(7, 1)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(m.det(), rat(1, 1));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = RatMatrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.det(), rat(0, 1));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn interpolating_map_hits_targets() {
        let src = [pt(0, 0), pt(1, 0), pt(0, 1)];
        let dst = [pt(1, 1), pt(2, 1), pt(1, 3)];
        let m = RatAffineMap::interpolating(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert_eq!(&m.apply(s), d);
        }
    }

    #[test]
    fn segment_meet_classification() {
        // Proper crossing.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(2, 2), &pt(0, 2), &pt(2, 0)),
            SegMeet::Improper
        );
        // Shared endpoint only.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(1, 0), &pt(1, 0), &pt(2, 1)),
            SegMeet::SharedEndpoint
        );
        // Endpoint interior to the other.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(2, 0), &pt(1, 0), &pt(1, 5)),
            SegMeet::Improper
        );
        // Collinear overlap.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(2, 0), &pt(1, 0), &pt(3, 0)),
            SegMeet::Improper
        );
        // Disjoint.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(1, 0), &pt(0, 1), &pt(1, 1)),
            SegMeet::Disjoint
        );
        // Collinear, touching at shared endpoint.
        assert_eq!(
            segments_meet(&pt(0, 0), &pt(1, 0), &pt(1, 0), &pt(2, 0)),
            SegMeet::SharedEndpoint
        );
    }

    #[test]
    fn line_key_is_canonical() {
        let k1 = LineKey::through(&pt(0, 0), &pt(2, 2));
        let k2 = LineKey::through(&pt(3, 3), &pt(-1, -1));
        assert_eq!(k1, k2);
        let k3 = LineKey::through(
            &RatPoint(vec![rat(1, 2), rat(0, 1)]),
            &RatPoint(vec![rat(1, 2), rat(1, 1)]),
        );
        // Vertical line x = 1/2 -> 2x = 1.
        assert_eq!(k3.a, 2.into());
        assert_eq!(k3.b, 0.into());
        assert_eq!(k3.c, 1.into());
    }
}
