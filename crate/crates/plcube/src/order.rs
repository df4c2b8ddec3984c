//! Order structures: the bi-invariant positive cone on 1D maps (departure
//! slope at the first point leaving the diagonal), the circular order on
//! linear rays through the origin, a cocycle checker for candidate circular
//! orders, and piecewise-projective germ actions of 2D maps at fixed points.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{RatMatrix, RatPoint};
use crate::plmap::{MapKind, PLMap};
use crate::rational::Rational;

/// Sign of a 1D map in the bi-order: zero only for the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderSign {
    Negative,
    Zero,
    Positive,
}

impl OrderSign {
    pub fn value(self) -> i8 {
        match self {
            OrderSign::Negative => -1,
            OrderSign::Zero => 0,
            OrderSign::Positive => 1,
        }
    }
}

/// Sign of a valid 1D map: find the largest x0 with f = id on [-1, x0] and
/// look at the slope just to its right. Slope exactly 1 at the departure
/// point is impossible (that piece would be the identity), which we assert.
pub fn onedim_sign(f: &PLMap) -> Result<OrderSign> {
    if f.dim() != 1 {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    let canon = f.canonicalize()?;
    if canon.is_identity_map() {
        return Ok(OrderSign::Zero);
    }
    let departure = canon
        .cells()
        .iter()
        .find(|c| !c.map.is_identity())
        .expect("nonidentity canonical map has a nonidentity cell");
    let slope = departure.map.linear.get(0, 0);
    assert!(
        !slope.is_one(),
        "departure slope 1 would make the piece the identity"
    );
    Ok(if slope > &Rational::one() {
        OrderSign::Positive
    } else {
        OrderSign::Negative
    })
}

/// Bi-order comparison: f < g iff f^{-1} g lies in the positive cone.
pub fn onedim_compare(f: &PLMap, g: &PLMap) -> Result<Ordering> {
    let quotient = f.inverse()?.compose(g)?;
    Ok(match onedim_sign(&quotient)? {
        OrderSign::Positive => Ordering::Less,
        OrderSign::Zero => Ordering::Equal,
        OrderSign::Negative => Ordering::Greater,
    })
}

/// A ray through the origin: a primitive integer direction vector. Two rays
/// are equal iff they are positive multiples of each other. Serialized as a
/// pair of decimal strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ray {
    x: BigInt,
    y: BigInt,
}

impl Serialize for Ray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x.to_string(), self.y.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[String; 2]>::deserialize(d)?;
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| serde::de::Error::custom(format!("bad integer: {e}")))
        };
        Ray::new(parse(&x)?, parse(&y)?).map_err(serde::de::Error::custom)
    }
}

impl Ray {
    pub fn new(x: BigInt, y: BigInt) -> Result<Ray> {
        if x.is_zero() && y.is_zero() {
            return Err(Error::InvalidSpec("ray direction must be nonzero".into()));
        }
        let g = x.gcd(&y);
        Ok(Ray {
            x: &x / &g,
            y: &y / &g,
        })
    }

    pub fn from_ints(x: i64, y: i64) -> Ray {
        Ray::new(BigInt::from(x), BigInt::from(y)).expect("nonzero")
    }

    /// Direction of a nonzero rational vector.
    pub fn from_point(p: &RatPoint) -> Result<Ray> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: p.dim(),
            });
        }
        let lcm = p.coord(0).denom().lcm(p.coord(1).denom());
        let scale = Rational::new(lcm, BigInt::from(1)).unwrap();
        let x = (p.coord(0) * &scale).numer().clone();
        let y = (p.coord(1) * &scale).numer().clone();
        Ray::new(x, y)
    }

    pub fn opposite(&self) -> Ray {
        Ray {
            x: -self.x.clone(),
            y: -self.y.clone(),
        }
    }

    pub fn rot90(&self) -> Ray {
        Ray {
            x: -self.y.clone(),
            y: self.x.clone(),
        }
    }

    fn cross(&self, other: &Ray) -> BigInt {
        &self.x * &other.y - &self.y * &other.x
    }

    fn dot(&self, other: &Ray) -> BigInt {
        &self.x * &other.x + &self.y * &other.y
    }

    /// Total order by angle in [0, 2pi), measured from the direction (1, 0).
    pub fn angle_cmp(&self, other: &Ray) -> Ordering {
        fn half(r: &Ray) -> u8 {
            if r.y.is_positive() || (r.y.is_zero() && r.x.is_positive()) {
                0
            } else {
                1
            }
        }
        // Within one half-circle, self comes first iff other is strictly
        // counterclockwise of it.
        half(self)
            .cmp(&half(other))
            .then_with(|| self.cross(other).sign_cmp())
    }

    /// Position of `u` going counterclockwise from `self`: 0 at self,
    /// then increasing through the open upper half (0, pi), pi, (pi, 2pi).
    fn ccw_class(&self, u: &Ray) -> u8 {
        if self == u {
            return 0;
        }
        let c = self.cross(u);
        if c.is_positive() {
            1
        } else if c.is_zero() {
            2 // opposite ray
        } else {
            3
        }
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Less
        } else if self.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Greater
        }
    }
}

impl std::fmt::Debug for Ray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ray({}, {})", self.x, self.y)
    }
}

/// The circular order on rays: +1 when (r1, r2, r3) are in counterclockwise
/// cyclic order, -1 clockwise, 0 when any two coincide. Pure integer
/// arithmetic.
pub fn ray_circular_order(r1: &Ray, r2: &Ray, r3: &Ray) -> i8 {
    if r1 == r2 || r2 == r3 || r1 == r3 {
        return 0;
    }
    // Compare counterclockwise positions of r2 and r3 as seen from r1.
    let c2 = r1.ccw_class(r2);
    let c3 = r1.ccw_class(r3);
    match c2.cmp(&c3) {
        Ordering::Less => 1,
        Ordering::Greater => -1,
        Ordering::Equal => {
            // Same open half-plane relative to r1.
            if r2.cross(r3).is_positive() {
                1
            } else {
                -1
            }
        }
    }
}

/// Evaluate the alternating cocycle sum of a black-box 3-argument sign
/// function on a quadruple of distinct elements; true iff it vanishes.
pub fn cocycle_check<T: PartialEq, F: Fn(&T, &T, &T) -> i8>(e: F, q: &[T; 4]) -> Result<bool> {
    for i in 0..4 {
        for j in (i + 1)..4 {
            if q[i] == q[j] {
                return Err(Error::InvalidSpec(
                    "cocycle check requires distinct elements".into(),
                ));
            }
        }
    }
    let sum = i32::from(e(&q[1], &q[2], &q[3])) - i32::from(e(&q[0], &q[2], &q[3]))
        + i32::from(e(&q[0], &q[1], &q[3]))
        - i32::from(e(&q[0], &q[1], &q[2]));
    Ok(sum == 0)
}

/// A 2x2 integer matrix up to positive scaling, acting on rays. Serialized
/// as rows of decimal strings.
#[derive(Clone, PartialEq, Eq)]
pub struct RayMatrix {
    e: [[BigInt; 2]; 2],
}

impl Serialize for RayMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .e
            .iter()
            .map(|r| r.iter().map(BigInt::to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RayMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[String; 2]; 2]>::deserialize(d)?;
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| serde::de::Error::custom(format!("bad integer: {e}")))
        };
        Ok(RayMatrix {
            e: [
                [parse(&rows[0][0])?, parse(&rows[0][1])?],
                [parse(&rows[1][0])?, parse(&rows[1][1])?],
            ],
        })
    }
}

impl RayMatrix {
    pub fn from_rat(m: &RatMatrix) -> Result<RayMatrix> {
        if m.n() != 2 {
            return Err(Error::UnsupportedDimension(m.n()));
        }
        let mut lcm = BigInt::from(1);
        for i in 0..2 {
            for j in 0..2 {
                lcm = lcm.lcm(m.get(i, j).denom());
            }
        }
        let scale = Rational::new(lcm, BigInt::from(1)).unwrap();
        let mut e = [
            [BigInt::zero(), BigInt::zero()],
            [BigInt::zero(), BigInt::zero()],
        ];
        let mut g = BigInt::zero();
        for i in 0..2 {
            for j in 0..2 {
                let v = (m.get(i, j) * &scale).numer().clone();
                g = g.gcd(&v);
                e[i][j] = v;
            }
        }
        if g.is_zero() {
            return Err(Error::InvalidSpec("zero matrix cannot act on rays".into()));
        }
        for row in e.iter_mut() {
            for v in row.iter_mut() {
                *v /= &g;
            }
        }
        Ok(RayMatrix { e })
    }

    pub fn identity() -> RayMatrix {
        RayMatrix {
            e: [
                [BigInt::from(1), BigInt::zero()],
                [BigInt::zero(), BigInt::from(1)],
            ],
        }
    }

    pub fn det(&self) -> BigInt {
        &self.e[0][0] * &self.e[1][1] - &self.e[0][1] * &self.e[1][0]
    }

    pub fn apply(&self, r: &Ray) -> Ray {
        Ray::new(
            &self.e[0][0] * &r.x + &self.e[0][1] * &r.y,
            &self.e[1][0] * &r.x + &self.e[1][1] * &r.y,
        )
        .expect("invertible matrix maps nonzero to nonzero")
    }

    /// Projective inverse: the adjugate, which inverts the ray action for
    /// positive determinant.
    pub fn inverse_ray_map(&self) -> RayMatrix {
        let raw = RayMatrix {
            e: [
                [self.e[1][1].clone(), -self.e[0][1].clone()],
                [-self.e[1][0].clone(), self.e[0][0].clone()],
            ],
        };
        raw.reduced()
    }

    pub fn mul(&self, other: &RayMatrix) -> RayMatrix {
        let mut e = [
            [BigInt::zero(), BigInt::zero()],
            [BigInt::zero(), BigInt::zero()],
        ];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = &self.e[i][0] * &other.e[0][j] + &self.e[i][1] * &other.e[1][j];
            }
        }
        RayMatrix { e }.reduced()
    }

    fn reduced(mut self) -> RayMatrix {
        let mut g = BigInt::zero();
        for row in &self.e {
            for v in row {
                g = g.gcd(v);
            }
        }
        if !g.is_zero() {
            for row in self.e.iter_mut() {
                for v in row.iter_mut() {
                    *v /= &g;
                }
            }
        }
        self
    }
}

impl std::fmt::Debug for RayMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{} {}; {} {}]",
            self.e[0][0], self.e[0][1], self.e[1][0], self.e[1][1]
        )
    }
}

/// A piecewise-projective circle map: counterclockwise arcs, each carrying a
/// ray matrix. A single entry means one matrix on the whole circle. Stored
/// in canonical form, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleMapPP {
    arcs: Vec<(Ray, RayMatrix)>,
}

impl CircleMapPP {
    pub fn identity() -> CircleMapPP {
        CircleMapPP {
            arcs: vec![(Ray::from_ints(1, 0), RayMatrix::identity())],
        }
    }

    /// Arcs as (start, end, matrix) triples; for a single full-circle arc
    /// the start and end coincide.
    pub fn arcs(&self) -> Vec<(Ray, Ray, RayMatrix)> {
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                (
                    self.arcs[i].0.clone(),
                    self.arcs[(i + 1) % n].0.clone(),
                    self.arcs[i].1.clone(),
                )
            })
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Every arc matrix has positive determinant?
    pub fn orientation_preserving(&self) -> bool {
        self.arcs.iter().all(|(_, m)| m.det().is_positive())
    }

    fn canonical(mut arcs: Vec<(Ray, RayMatrix)>) -> CircleMapPP {
        assert!(!arcs.is_empty());
        arcs.sort_by(|a, b| a.0.angle_cmp(&b.0));
        arcs.dedup_by(|a, b| a.0 == b.0);
        // Merge cyclically adjacent arcs with projectively equal matrices.
        let mut merged: Vec<(Ray, RayMatrix)> = Vec::new();
        for arc in arcs {
            match merged.last() {
                Some(last) if last.1 == arc.1 => {}
                _ => merged.push(arc),
            }
        }
        while merged.len() > 1 && merged.first().unwrap().1 == merged.last().unwrap().1 {
            merged.remove(0);
        }
        if merged.len() == 1 {
            merged[0].0 = Ray::from_ints(1, 0);
        } else {
            // Rotate so the lexicographically least start comes first.
            let least = merged
                .iter()
                .enumerate()
                .min_by(|a, b| (&a.1 .0.x, &a.1 .0.y).cmp(&(&b.1 .0.x, &b.1 .0.y)))
                .map(|(i, _)| i)
                .unwrap();
            merged.rotate_left(least);
        }
        CircleMapPP { arcs: merged }
    }

    /// Matrix acting on the arc containing `r`.
    fn matrix_at(&self, r: &Ray) -> &RayMatrix {
        if self.arcs.len() == 1 {
            return &self.arcs[0].1;
        }
        // Arcs are in angle order starting from arcs[0].
        let mut idx = self.arcs.len() - 1;
        for i in 0..self.arcs.len() {
            let rel = self.arcs[0].0.ccw_class(&self.arcs[i].0);
            let relr = self.arcs[0].0.ccw_class(r);
            let before = match rel.cmp(&relr) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    rel == 0 || !self.arcs[i].0.cross(r).is_negative()
                }
            };
            if before {
                idx = i;
            } else {
                break;
            }
        }
        &self.arcs[idx].1
    }

    pub fn apply(&self, r: &Ray) -> Ray {
        self.matrix_at(r).apply(r)
    }

    /// Composition `self ∘ inner`.
    pub fn compose(&self, inner: &CircleMapPP) -> CircleMapPP {
        // Start rays: inner's own starts plus pullbacks of self's starts.
        let mut starts: Vec<Ray> = Vec::new();
        if inner.arcs.len() > 1 {
            starts.extend(inner.arcs.iter().map(|(s, _)| s.clone()));
        } else {
            starts.push(inner.arcs[0].0.clone());
        }
        if self.arcs.len() > 1 {
            for (b, _) in &self.arcs {
                for (_, n) in &inner.arcs {
                    let pre = n.inverse_ray_map().apply(b);
                    // Keep it only if the inner germ actually maps it to b.
                    if &inner.apply(&pre) == b {
                        starts.push(pre);
                    }
                }
            }
        }
        starts.sort_by(Ray::angle_cmp);
        starts.dedup();
        let n = starts.len();
        let mut arcs = Vec::with_capacity(n);
        for i in 0..n {
            let u = &starts[i];
            let v = &starts[(i + 1) % n];
            let sample = interior_ray(u, v, n == 1);
            let inner_m = inner.matrix_at(&sample);
            let image = inner_m.apply(&sample);
            let outer_m = self.matrix_at(&image);
            arcs.push((u.clone(), outer_m.mul(inner_m)));
        }
        CircleMapPP::canonical(arcs)
    }
}

/// A ray strictly inside the counterclockwise arc from `u` to `v`.
fn interior_ray(u: &Ray, v: &Ray, full_circle: bool) -> Ray {
    if full_circle {
        return u.clone();
    }
    if u.cross(v).is_positive() {
        // Short arc: any positive combination is inside.
        Ray::new(&u.x + &v.x, &u.y + &v.y).expect("nonzero")
    } else {
        // Arc spans at least pi; a quarter turn from u is inside.
        u.rot90()
    }
}

/// The projectivized germ of a 2D map at an interior fixed point: the
/// angular sectors of the cells at p, each acting by its linear part on the
/// circle of rays.
pub fn projectivized_germ(f: &PLMap, p: &RatPoint) -> Result<CircleMapPP> {
    if f.dim() != 2 || !matches!(f.kind(), MapKind::Generic) {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    if p.linf_norm() >= Rational::one() {
        return Err(Error::OutOfRange("germ point must be interior".into()));
    }
    if &f.apply(p)? != p {
        return Err(Error::InvalidSpec(format!("{p:?} is not fixed")));
    }
    let holders: Vec<&crate::plmap::Cell> = f
        .cells()
        .iter()
        .filter(|c| c.simplex.contains(p))
        .collect();
    for c in &holders {
        debug_assert_eq!(&c.map.apply(p), p, "continuity at a fixed point");
    }
    match holders.len() {
        0 => Err(Error::PointNotFound),
        1 => {
            let m = RayMatrix::from_rat(&holders[0].map.linear)?;
            Ok(CircleMapPP::canonical(vec![(Ray::from_ints(1, 0), m)]))
        }
        2 => {
            // p interior to the shared edge: two half-circle arcs split
            // along the edge direction.
            let shared: Vec<&RatPoint> = holders[0]
                .simplex
                .vertices()
                .iter()
                .filter(|v| holders[1].simplex.vertices().contains(v))
                .collect();
            if shared.len() != 2 {
                return Err(Error::InvalidSpec(
                    "point sits on the break-locus skeleton".into(),
                ));
            }
            let d = Ray::from_point(&shared[1].sub(shared[0]))?;
            let mut arcs = Vec::new();
            for c in &holders {
                let side = c
                    .simplex
                    .vertices()
                    .iter()
                    .find_map(|w| {
                        let r = w.sub(p);
                        if r.is_zero() {
                            return None;
                        }
                        let cr = crate::geom::cross2(&shared[1].sub(shared[0]), &r);
                        match cr.signum() {
                            1 => Some(true),
                            -1 => Some(false),
                            _ => None,
                        }
                    })
                    .ok_or_else(|| Error::InvalidSpec("degenerate cell at germ point".into()))?;
                let start = if side { d.clone() } else { d.opposite() };
                arcs.push((start, RayMatrix::from_rat(&c.map.linear)?));
            }
            Ok(CircleMapPP::canonical(arcs))
        }
        _ => {
            // p must be a vertex of every cell of its local fan.
            let mut arcs = Vec::new();
            for c in &holders {
                let vs = c.simplex.canonical();
                let vs = vs.vertices();
                let i = vs
                    .iter()
                    .position(|v| v == p)
                    .ok_or_else(|| {
                        Error::InvalidSpec(
                            "point sits on the break-locus skeleton, not a fan vertex".into(),
                        )
                    })?;
                let start = Ray::from_point(&vs[(i + 1) % 3].sub(p))?;
                arcs.push((start, RayMatrix::from_rat(&c.map.linear)?));
            }
            Ok(CircleMapPP::canonical(arcs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{linear_near_zero, pl1d, twist_root, BreakpointSpec, TwistSpec};
    use crate::rational::rat;

    fn sample_f() -> PLMap {
        pl1d(&BreakpointSpec::new(vec![
            (rat(-1, 1), rat(-1, 1)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 1), rat(1, 1)),
        ])
        .unwrap())
        .unwrap()
    }

    #[test]
    fn onedim_signs() {
        assert_eq!(onedim_sign(&PLMap::identity(1)).unwrap(), OrderSign::Zero);
        let f = sample_f();
        assert_eq!(onedim_sign(&f).unwrap(), OrderSign::Positive);
        assert_eq!(
            onedim_sign(&f.inverse().unwrap()).unwrap(),
            OrderSign::Negative
        );
    }

    #[test]
    fn onedim_compare_basics() {
        let f = sample_f();
        assert_eq!(onedim_compare(&f, &f).unwrap(), Ordering::Equal);
        assert_eq!(
            onedim_compare(&PLMap::identity(1), &f).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            onedim_compare(&f, &PLMap::identity(1)).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn ray_order_examples() {
        let e1 = Ray::from_ints(1, 0);
        let e2 = Ray::from_ints(0, 1);
        let w = Ray::from_ints(-1, 0);
        assert_eq!(ray_circular_order(&e1, &e2, &w), 1);
        assert_eq!(ray_circular_order(&e1, &w, &e2), -1);
        // (2, 0) is the same ray as (1, 0).
        assert_eq!(ray_circular_order(&e1, &Ray::from_ints(2, 0), &e2), 0);
        // Scaling invariance of representation.
        assert_eq!(Ray::from_ints(3, 6), Ray::from_ints(1, 2));
        assert_ne!(Ray::from_ints(1, 2), Ray::from_ints(-1, -2));
    }

    #[test]
    fn cocycle_examples() {
        let q = [
            Ray::from_ints(1, 0),
            Ray::from_ints(1, 1),
            Ray::from_ints(0, 1),
            Ray::from_ints(-1, 1),
        ];
        assert!(cocycle_check(|a, b, c| ray_circular_order(a, b, c), &q).unwrap());
        // A first-two-arguments comparison is not a cocycle: the alternating
        // sum reduces to F(s1,s2) - F(s0,s2), nonzero when s1 > s2 > s0.
        let cmp = |a: &i64, b: &i64, _c: &i64| if a < b { 1i8 } else { -1 };
        assert!(!cocycle_check(cmp, &[0i64, 3, 2, 5]).unwrap());
        assert!(cocycle_check(cmp, &[0i64, 1, 2, 3]).unwrap());
        assert!(cocycle_check(cmp, &[0i64, 1, 1, 3]).is_err());
    }

    #[test]
    fn germ_of_identity_and_linear_zone() {
        let id2 = PLMap::identity(2);
        let origin = RatPoint::origin(2);
        let germ = projectivized_germ(&id2, &origin).unwrap();
        assert_eq!(germ, CircleMapPP::identity());
        assert_eq!(germ.arc_count(), 1);

        let m = RatMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        let g = linear_near_zero(&m, &rat(1, 4)).unwrap();
        let germ = projectivized_germ(&g, &origin).unwrap();
        assert_eq!(germ.arc_count(), 1);
        let (_, _, mat) = germ.arcs().into_iter().next().unwrap();
        assert_eq!(mat, RayMatrix::from_rat(&m).unwrap());
        assert!(germ.orientation_preserving());
        // Errors: a moved point has no germ.
        assert!(projectivized_germ(&g, &RatPoint(vec![rat(1, 8), rat(0, 1)])).is_ok());
        let h = twist_root(&TwistSpec::new(rat(1, 2), rat(1, 12)).unwrap()).unwrap();
        assert!(projectivized_germ(&h, &RatPoint(vec![rat(3, 4), rat(0, 1)])).is_err());
    }

    #[test]
    fn germ_composition_compatibility() {
        let origin = RatPoint::origin(2);
        let h = twist_root(&TwistSpec::new(rat(1, 2), rat(1, 12)).unwrap()).unwrap();
        let m = RatMatrix::from_ints(&[&[2, 1], &[1, 1]]);
        let g = linear_near_zero(&m, &rat(1, 4)).unwrap();
        let composed = h.compose(&g).unwrap();
        let lhs = projectivized_germ(&composed, &origin).unwrap();
        let rhs = projectivized_germ(&h, &origin)
            .unwrap()
            .compose(&projectivized_germ(&g, &origin).unwrap());
        assert_eq!(lhs, rhs);
        // The twist germ at the origin is genuinely piecewise.
        assert!(projectivized_germ(&h, &origin).unwrap().arc_count() >= 8);
        // Germ of h composed with the germ of its inverse is the identity.
        let hi = h.inverse().unwrap();
        let round = projectivized_germ(&h, &origin)
            .unwrap()
            .compose(&projectivized_germ(&hi, &origin).unwrap());
        assert_eq!(round, CircleMapPP::identity());
    }

    #[test]
    fn ray_angle_order_is_counterclockwise() {
        let dirs = [
            Ray::from_ints(1, 0),
            Ray::from_ints(3, 1),
            Ray::from_ints(1, 1),
            Ray::from_ints(0, 1),
            Ray::from_ints(-1, 1),
            Ray::from_ints(-1, 0),
            Ray::from_ints(-1, -1),
            Ray::from_ints(0, -1),
            Ray::from_ints(1, -1),
        ];
        for w in dirs.windows(2) {
            assert_eq!(w[0].angle_cmp(&w[1]), Ordering::Less, "{:?} {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn ray_matrix_action() {
        let m = RayMatrix::from_rat(&RatMatrix::from_rows(vec![
            vec![rat(1, 2), rat(0, 1)],
            vec![rat(0, 1), rat(1, 3)],
        ])
        .unwrap())
        .unwrap();
        // Primitive integer form 3, 0; 0, 2.
        assert_eq!(m.apply(&Ray::from_ints(1, 1)), Ray::from_ints(3, 2));
        let inv = m.inverse_ray_map();
        assert_eq!(inv.apply(&m.apply(&Ray::from_ints(5, -7))), Ray::from_ints(5, -7));
    }
}
