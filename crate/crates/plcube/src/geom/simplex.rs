//! Rational simplices of any order inside `Q^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::{orient2, RatMatrix, RatPoint};

/// A simplex given by its vertex list; `k+1` vertices span an order-`k`
/// simplex (point, segment, triangle, ...) in ambient dimension `n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex {
    vertices: Vec<RatPoint>,
}

impl Simplex {
    pub fn new(vertices: Vec<RatPoint>) -> Self {
        debug_assert!(!vertices.is_empty());
        Simplex { vertices }
    }

    pub fn point(p: RatPoint) -> Self {
        Simplex { vertices: vec![p] }
    }

    pub fn segment(a: RatPoint, b: RatPoint) -> Self {
        Simplex {
            vertices: vec![a, b],
        }
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].dim()
    }

    /// Intrinsic order: number of vertices minus one.
    pub fn order(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.order() == self.ambient_dim()
    }

    /// Signed volume scaled by order!: the determinant of the edge vectors
    /// from the first vertex. Zero iff the vertices are affinely dependent.
    pub fn edge_determinant(&self) -> Rational {
        let n = self.order();
        if n == 0 {
            return Rational::one();
        }
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| self.vertices[c + 1].coord(r) - self.vertices[0].coord(r))
                    .collect()
            })
            .collect();
        RatMatrix::from_rows(rows).expect("square").det()
    }

    /// Orientation sign of the vertex order: sign of the edge determinant.
    pub fn orientation(&self) -> i32 {
        self.edge_determinant().signum()
    }

    /// Unsigned volume of a full-dimensional simplex; errors when degenerate.
    pub fn volume(&self) -> Result<Rational> {
        if !self.is_full_dimensional() {
            return Err(Error::DegenerateSimplex(format!(
                "order {} simplex in dimension {}",
                self.order(),
                self.ambient_dim()
            )));
        }
        let det = self.edge_determinant();
        if det.is_zero() {
            return Err(Error::DegenerateSimplex(
                "zero volume: vertices affinely dependent".into(),
            ));
        }
        let mut factorial = Rational::one();
        for k in 2..=self.order() as i64 {
            factorial = factorial * Rational::from_int(k);
        }
        Ok(det.abs() / factorial)
    }

    /// Closed containment test for full-dimensional simplices in dims 1-2.
    pub fn contains(&self, p: &RatPoint) -> bool {
        match (self.ambient_dim(), self.order()) {
            (1, 1) => {
                let (a, b) = (self.vertices[0].coord(0), self.vertices[1].coord(0));
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                p.coord(0) >= lo && p.coord(0) <= hi
            }
            (2, 2) => {
                let or = self.orientation();
                if or == 0 {
                    return false;
                }
                (0..3).all(|i| {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % 3];
                    orient2(a, b, p) * or >= 0
                })
            }
            (2, 1) => super::on_segment(p, &self.vertices[0], &self.vertices[1]),
            (_, 0) => p == &self.vertices[0],
            _ => unimplemented!("containment only in dimensions 1 and 2"),
        }
    }

    /// The facets (order k-1 faces) in deterministic order.
    pub fn facets(&self) -> Vec<Simplex> {
        (0..self.vertices.len())
            .map(|skip| {
                Simplex::new(
                    self.vertices
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, v)| v.clone())
                        .collect(),
                )
            })
            .collect()
    }

    /// Undirected edges as canonically ordered vertex pairs (order >= 1).
    pub fn edges(&self) -> Vec<(RatPoint, RatPoint)> {
        let k = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (&self.vertices[i], &self.vertices[j]);
                if a <= b {
                    out.push((a.clone(), b.clone()));
                } else {
                    out.push((b.clone(), a.clone()));
                }
            }
        }
        out
    }

    /// Vertices rewritten in canonical order: for triangles, counterclockwise
    /// starting from the lexicographically least vertex; for segments, sorted.
    pub fn canonical(&self) -> Simplex {
        let mut v = self.vertices.clone();
        match self.order() {
            0 => {}
            1 => v.sort(),
            2 => {
                if self.orientation() < 0 {
                    v.swap(1, 2);
                }
                let least = v
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                v.rotate_left(least);
            }
            _ => v.sort(),
        }
        Simplex { vertices: v }
    }
}

impl std::fmt::Debug for Simplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn interval_length() {
        let s = Simplex::new(vec![
            RatPoint(vec![rat(-1, 1)]),
            RatPoint(vec![rat(1, 1)]),
        ]);
        assert_eq!(s.volume().unwrap(), rat(2, 1));
    }

    #[test]
    fn half_unit_square() {
        let s = Simplex::new(vec![
            RatPoint::from_ints(&[0, 0]),
            RatPoint::from_ints(&[1, 0]),
            RatPoint::from_ints(&[0, 1]),
        ]);
        assert_eq!(s.volume().unwrap(), rat(1, 2));
        assert_eq!(s.orientation(), 1);
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let s = Simplex::new(vec![
            RatPoint::from_ints(&[0, 0]),
            RatPoint::from_ints(&[1, 1]),
            RatPoint::from_ints(&[1, 1]),
        ]);
        assert!(s.volume().is_err());
    }

    #[test]
    fn triangle_containment_includes_boundary() {
        let s = Simplex::new(vec![
            RatPoint::from_ints(&[0, 0]),
            RatPoint::from_ints(&[2, 0]),
            RatPoint::from_ints(&[0, 2]),
        ]);
        assert!(s.contains(&RatPoint(vec![rat(1, 2), rat(1, 2)])));
        assert!(s.contains(&RatPoint::from_ints(&[1, 1]))); // on hypotenuse
        assert!(!s.contains(&RatPoint::from_ints(&[2, 2])));
    }

    #[test]
    fn canonical_triangle_is_ccw_from_least() {
        let s = Simplex::new(vec![
            RatPoint::from_ints(&[1, 0]),
            RatPoint::from_ints(&[0, 1]),
            RatPoint::from_ints(&[0, 0]),
        ]);
        let c = s.canonical();
        assert_eq!(c.vertices()[0], RatPoint::from_ints(&[0, 0]));
        assert_eq!(c.orientation(), 1);
        assert_eq!(c, c.canonical());
    }
}
