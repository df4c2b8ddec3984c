//! Numerical and polyhedral invariants of a PL map: matrix norm, canonical
//! cell count and breakpoints, volume distortion, fixed sets and frontiers,
//! and the stabilizer witness certifying a nontrivial homomorphism to
//! `R^{n-1} ⋊ R^+` for any nontrivial finitely generated subgroup.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    cross2, intersect_full, merge_collinear, on_segment, ConvexPolytope, Intersection, LineKey,
    RatPoint, Simplex,
};
use crate::plmap::{MapKind, PLMap};
use crate::rational::Rational;

/// A finite union of rational simplices of mixed orders, pairwise
/// interior-disjoint within each order. Pieces are kept sorted, so equal
/// sets in reduced form compare syntactically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedralSet {
    pub pieces: Vec<Simplex>,
}

impl PolyhedralSet {
    pub fn empty() -> Self {
        PolyhedralSet { pieces: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains_point(&self, p: &RatPoint) -> bool {
        self.pieces.iter().any(|s| s.contains(p))
    }

    /// Total measure of the full-dimensional pieces.
    pub fn full_dim_measure(&self, dim: usize) -> Rational {
        self.pieces
            .iter()
            .filter(|s| s.order() == dim)
            .map(|s| s.volume().expect("full-dimensional piece"))
            .sum()
    }

    fn from_pieces(mut pieces: Vec<Simplex>) -> Self {
        pieces.sort_by(sort_key);
        pieces.dedup();
        PolyhedralSet { pieces }
    }
}

fn sort_key(a: &Simplex, b: &Simplex) -> std::cmp::Ordering {
    a.order()
        .cmp(&b.order())
        .then_with(|| a.vertices().cmp(b.vertices()))
}

/// Matrix norm `D`: the largest absolute entry among the linear parts of the
/// cells. For suspensions the cone cells contribute the base linear entries,
/// the base translations, and 1.
pub fn matrix_norm(f: &PLMap) -> Result<Rational> {
    fn norm_data(f: &PLMap) -> (Rational, Rational) {
        match f.kind() {
            MapKind::Generic => {
                let mut ma = Rational::zero();
                let mut mb = Rational::zero();
                for c in f.cells() {
                    ma = ma.max(c.map.linear.max_abs_entry());
                    mb = mb.max(c.map.translation.linf_norm());
                }
                (ma, mb)
            }
            MapKind::Suspension(base) => {
                let (ma, mb) = norm_data(base);
                (ma.max(mb.clone()).max(Rational::one()), mb)
            }
        }
    }
    let (ma, _) = norm_data(f);
    Ok(ma)
}

/// Number of cells of the canonical form: an upper bound for the minimal
/// number of simplices linearizing the map.
pub fn cell_count(f: &PLMap) -> Result<usize> {
    Ok(f.canonicalize()?.cells().len())
}

/// Interior nodes of a 1-dimensional map where the affine piece changes.
pub fn breakpoints(f: &PLMap) -> Result<Vec<Rational>> {
    if f.dim() != 1 {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    Ok(f.break_locus()?
        .points
        .into_iter()
        .map(|p| p.0.into_iter().next().unwrap())
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeCheck {
    pub preserves: bool,
    pub max_det: Rational,
    pub min_det: Rational,
}

/// Does the map preserve the volume form? Reports the extremes of the cell
/// Jacobians in absolute value.
pub fn volume_check(f: &PLMap) -> Result<VolumeCheck> {
    match f.kind() {
        MapKind::Suspension(base) => {
            // Cone cells have the base determinants, the complement is
            // identity.
            let inner = volume_check(base)?;
            Ok(VolumeCheck {
                preserves: inner.preserves,
                max_det: inner.max_det.max(Rational::one()),
                min_det: inner.min_det.min(Rational::one()),
            })
        }
        MapKind::Generic => {
            let dets: Vec<Rational> = f.cells().iter().map(|c| c.map.det().abs()).collect();
            if dets.is_empty() {
                return Err(Error::Invalid("map has no cells".into()));
            }
            let max_det = dets.iter().cloned().fold(Rational::zero(), Rational::max);
            let min_det = dets
                .iter()
                .cloned()
                .fold(max_det.clone(), Rational::min);
            Ok(VolumeCheck {
                preserves: dets.iter().all(Rational::is_one),
                max_det,
                min_det,
            })
        }
    }
}

/// The fixed set `{x : f(x) = x}` as a polyhedral set, computed by solving
/// `(A - I)x = -b` exactly on each cell.
pub fn fixed_set(f: &PLMap) -> Result<PolyhedralSet> {
    let pieces = fixed_pieces(f)?;
    Ok(reduce_pieces(pieces))
}

/// Per-cell fixed pieces before reduction, in cell order.
fn fixed_pieces(f: &PLMap) -> Result<Vec<Simplex>> {
    if !matches!(f.kind(), MapKind::Generic) || f.dim() > 2 {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    let mut pieces = Vec::new();
    for c in f.cells() {
        match f.dim() {
            1 => {
                let slope = c.map.linear.get(0, 0);
                let offset = c.map.translation.coord(0);
                if slope.is_one() {
                    if offset.is_zero() {
                        pieces.push(c.simplex.clone());
                    }
                } else {
                    let x = offset / &(Rational::one() - slope);
                    let p = RatPoint(vec![x]);
                    if c.simplex.contains(&p) {
                        pieces.push(Simplex::point(p));
                    }
                }
            }
            _ => pieces.extend(fixed_in_triangle(c)),
        }
    }
    Ok(pieces)
}

/// Solve `(A - I)x = -b` inside one triangle cell.
fn fixed_in_triangle(c: &crate::plmap::Cell) -> Vec<Simplex> {
    let a = &c.map.linear;
    let b = &c.map.translation;
    let one = Rational::one();
    let m = [
        [a.get(0, 0) - &one, a.get(0, 1).clone()],
        [a.get(1, 0).clone(), a.get(1, 1) - &one],
    ];
    let rhs = [-b.coord(0), -b.coord(1)];
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if !det.is_zero() {
        let x = (&rhs[0] * &m[1][1] - &m[0][1] * &rhs[1]) / &det;
        let y = (&m[0][0] * &rhs[1] - &rhs[0] * &m[1][0]) / &det;
        let p = RatPoint(vec![x, y]);
        if c.simplex.contains(&p) {
            return vec![Simplex::point(p)];
        }
        return Vec::new();
    }
    let row0_zero = m[0][0].is_zero() && m[0][1].is_zero();
    let row1_zero = m[1][0].is_zero() && m[1][1].is_zero();
    if row0_zero && row1_zero {
        // A = I: fixed iff the translation vanishes.
        if rhs[0].is_zero() && rhs[1].is_zero() {
            return vec![c.simplex.clone()];
        }
        return Vec::new();
    }
    // Rank one: a line of solutions when the two equations agree.
    let (norm, off, other, other_off) = if row0_zero {
        (
            RatPoint(vec![m[1][0].clone(), m[1][1].clone()]),
            rhs[1].clone(),
            RatPoint(vec![m[0][0].clone(), m[0][1].clone()]),
            rhs[0].clone(),
        )
    } else {
        (
            RatPoint(vec![m[0][0].clone(), m[0][1].clone()]),
            rhs[0].clone(),
            RatPoint(vec![m[1][0].clone(), m[1][1].clone()]),
            rhs[1].clone(),
        )
    };
    if row0_zero && !rhs[0].is_zero() {
        return Vec::new();
    }
    if row1_zero && !rhs[1].is_zero() {
        return Vec::new();
    }
    if !row0_zero && !row1_zero {
        // Rows proportional; consistency of the right-hand sides:
        // lambda = other / norm componentwise.
        let lambda = if !norm.coord(0).is_zero() {
            other.coord(0) / norm.coord(0)
        } else {
            other.coord(1) / norm.coord(1)
        };
        if other_off != &lambda * &off {
            return Vec::new();
        }
    }
    clip_line_to_triangle(&norm, &off, &c.simplex)
}

/// Intersect the line `norm . x = off` with a triangle.
fn clip_line_to_triangle(norm: &RatPoint, off: &Rational, tri: &Simplex) -> Vec<Simplex> {
    // Point on the line plus direction.
    let dir = RatPoint(vec![-norm.coord(1), norm.coord(0).clone()]);
    let p0 = if !norm.coord(0).is_zero() {
        RatPoint(vec![off / norm.coord(0), Rational::zero()])
    } else {
        RatPoint(vec![Rational::zero(), off / norm.coord(1)])
    };
    // Clip the parameter against the triangle's edges (CCW interior).
    let or = tri.orientation();
    let vs = tri.vertices();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let mut unbounded_lo = true;
    let mut unbounded_hi = true;
    for i in 0..3 {
        let (u, v) = (&vs[i], &vs[(i + 1) % 3]);
        // Inside: or * cross(v - u, x - u) >= 0; affine in t.
        let e = v.sub(u);
        let c0 = cross2(&e, &p0.sub(u)) * Rational::from_int(or as i64);
        let c1 = cross2(&e, &dir) * Rational::from_int(or as i64);
        if c1.is_zero() {
            if c0.is_negative() {
                return Vec::new();
            }
            continue;
        }
        let t = -&c0 / &c1;
        if c1.is_positive() {
            // Constraint t >= t0.
            if unbounded_lo || lo.as_ref().unwrap() < &t {
                lo = Some(t);
                unbounded_lo = false;
            }
        } else if unbounded_hi || hi.as_ref().unwrap() > &t {
            hi = Some(t);
            unbounded_hi = false;
        }
    }
    let (lo, hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => return Vec::new(), // line misses the bounded triangle
    };
    if lo > hi {
        return Vec::new();
    }
    let at = |t: &Rational| p0.add(&dir.scale(t));
    if lo == hi {
        return vec![Simplex::point(at(&lo))];
    }
    vec![Simplex::segment(at(&lo), at(&hi))]
}

/// Reduce a raw piece list: drop lower-order pieces covered by higher ones,
/// merge collinear segments, sort.
fn reduce_pieces(pieces: Vec<Simplex>) -> PolyhedralSet {
    if pieces.iter().any(|p| p.ambient_dim() == 1) {
        return reduce_pieces_1d(pieces);
    }
    let twos: Vec<Simplex> = pieces.iter().filter(|p| p.order() == 2).cloned().collect();
    let in_two = |p: &RatPoint| twos.iter().any(|t| t.contains(p));
    let mut ones: Vec<(RatPoint, RatPoint)> = Vec::new();
    for p in pieces.iter().filter(|p| p.order() == 1) {
        let (u, v) = (&p.vertices()[0], &p.vertices()[1]);
        // A per-cell segment lies inside one closed cell, so coverage by the
        // union of full cells reduces to coverage by a single one.
        let covered = twos
            .iter()
            .any(|t| t.contains(u) && t.contains(v) && t.contains(&u.add(v).scale(&Rational::ratio(1, 2))));
        if !covered {
            ones.push((u.clone(), v.clone()));
        }
    }
    let ones = merge_collinear(ones);
    let on_one = |p: &RatPoint| ones.iter().any(|(u, v)| on_segment(p, u, v));
    let mut out: Vec<Simplex> = Vec::new();
    for p in pieces.iter().filter(|p| p.order() == 0) {
        let v = &p.vertices()[0];
        if !in_two(v) && !on_one(v) {
            out.push(p.clone());
        }
    }
    out.extend(ones.into_iter().map(|(u, v)| Simplex::segment(u, v)));
    out.extend(twos);
    PolyhedralSet::from_pieces(out)
}

fn reduce_pieces_1d(pieces: Vec<Simplex>) -> PolyhedralSet {
    let mut intervals: Vec<(Rational, Rational)> = pieces
        .iter()
        .filter(|p| p.order() == 1)
        .map(|p| order1(&p.vertices()[0], &p.vertices()[1]))
        .collect();
    intervals.sort();
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in intervals {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    let in_interval =
        |x: &Rational| merged.iter().any(|(lo, hi)| lo <= x && x <= hi);
    let mut out: Vec<Simplex> = Vec::new();
    for p in pieces.iter().filter(|p| p.order() == 0) {
        if !in_interval(p.vertices()[0].coord(0)) {
            out.push(p.clone());
        }
    }
    out.extend(
        merged
            .into_iter()
            .map(|(lo, hi)| Simplex::segment(RatPoint(vec![lo]), RatPoint(vec![hi]))),
    );
    PolyhedralSet::from_pieces(out)
}

/// The frontier of the fixed set: boundary faces of full-dimensional fixed
/// pieces that touch moving cells, together with every lower-dimensional
/// fixed piece.
pub fn frontier(f: &PLMap) -> Result<PolyhedralSet> {
    if !matches!(f.kind(), MapKind::Generic) || f.dim() > 2 {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    let fixed = fixed_set(f)?;
    match f.dim() {
        1 => {
            let mut pts: Vec<Simplex> = fixed
                .pieces
                .iter()
                .filter(|p| p.order() == 0)
                .cloned()
                .collect();
            let one = Rational::one();
            for piece in fixed.pieces.iter().filter(|p| p.order() == 1) {
                for v in piece.vertices() {
                    let inside = v.coord(0).abs() < one;
                    let interior_endpoint = inside
                        && !fixed
                            .pieces
                            .iter()
                            .filter(|q| q.order() == 1 && *q != piece)
                            .any(|q| q.contains(v));
                    if interior_endpoint {
                        pts.push(Simplex::point(v.clone()));
                    }
                }
            }
            Ok(PolyhedralSet::from_pieces(pts))
        }
        _ => {
            let mut out: Vec<Simplex> = Vec::new();
            // Full-dimensional fixed pieces are exactly the identity cells of
            // the presentation; a boundary edge is frontier when the complex
            // neighbor across it is not fully fixed.
            let full_cells: Vec<&Simplex> = f
                .cells()
                .iter()
                .filter(|c| c.map.is_identity())
                .map(|c| &c.simplex)
                .collect();
            let moving_cells: Vec<&crate::plmap::Cell> =
                f.cells().iter().filter(|c| !c.map.is_identity()).collect();
            let mut segments: Vec<(RatPoint, RatPoint)> = Vec::new();
            for simplex in &full_cells {
                let vs = simplex.vertices();
                for k in 0..3 {
                    let (u, v) = (&vs[k], &vs[(k + 1) % 3]);
                    let mid = u.add(v).scale(&Rational::ratio(1, 2));
                    let in_moving = moving_cells.iter().any(|c| c.simplex.contains(&mid));
                    if in_moving {
                        segments.push((u.clone(), v.clone()));
                    }
                }
            }
            for piece in fixed.pieces.iter() {
                match piece.order() {
                    0 => out.push(piece.clone()),
                    1 => segments.push((piece.vertices()[0].clone(), piece.vertices()[1].clone())),
                    _ => {}
                }
            }
            let segments = merge_collinear(segments);
            let on_seg = |p: &RatPoint| segments.iter().any(|(u, v)| on_segment(p, u, v));
            out.retain(|p| !on_seg(&p.vertices()[0]));
            out.extend(segments.into_iter().map(|(u, v)| Simplex::segment(u, v)));
            Ok(PolyhedralSet::from_pieces(out))
        }
    }
}

/// Fixed set, frontier and the frontier containment check for a finitely
/// generated group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFixedData {
    pub fixed: PolyhedralSet,
    pub frontier: PolyhedralSet,
    /// Whether fro(G) is contained in the union of the generators'
    /// frontiers, checked exactly.
    pub frontier_contained: bool,
}

/// Exact intersection of the generators' fixed sets, with the frontier of
/// the result and the containment check against the generator frontiers.
pub fn group_fixed_set(gens: &[PLMap]) -> Result<GroupFixedData> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let dim = gens[0].dim();
    for g in gens {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }
    }
    let sets: Vec<PolyhedralSet> = gens.iter().map(fixed_set).collect::<Result<_>>()?;
    let mut acc = sets[0].clone();
    for s in &sets[1..] {
        acc = intersect_sets(&acc, s)?;
    }
    let fro = set_frontier(&acc, dim);
    let gen_frontiers: Vec<PolyhedralSet> = gens.iter().map(frontier).collect::<Result<_>>()?;
    let contained = frontier_contained_in_union(&fro, &gen_frontiers);
    Ok(GroupFixedData {
        fixed: acc,
        frontier: fro,
        frontier_contained: contained,
    })
}

/// Exact pairwise intersection of two polyhedral sets.
fn intersect_sets(a: &PolyhedralSet, b: &PolyhedralSet) -> Result<PolyhedralSet> {
    let mut pieces = Vec::new();
    for p in &a.pieces {
        for q in &b.pieces {
            pieces.extend(intersect_pieces(p, q)?);
        }
    }
    Ok(reduce_pieces(pieces))
}

fn intersect_pieces(p: &Simplex, q: &Simplex) -> Result<Vec<Simplex>> {
    let (p, q) = if p.order() >= q.order() { (p, q) } else { (q, p) };
    match (p.order(), q.order()) {
        (_, 0) => {
            let v = &q.vertices()[0];
            Ok(if p.contains(v) {
                vec![Simplex::point(v.clone())]
            } else {
                vec![]
            })
        }
        (1, 1) => Ok(intersect_segments(p, q)),
        (2, 1) =>

 {
            let (u, v) = (&q.vertices()[0], &q.vertices()[1]);
            // Clip the segment by the triangle, reusing the line clipper on
            // the segment's own parametrization.
            Ok(clip_segment_to_triangle(u, v, p))
        }
        (2, 2) => {
            if p.ambient_dim() == 1 {
                return Err(Error::UnsupportedDimension(1));
            }
            let pp = ConvexPolytope::from_simplex(p)?;
            let qq = ConvexPolytope::from_simplex(q)?;
            Ok(match intersect_full(&pp, &qq)? {
                Intersection::Empty => vec![],
                Intersection::Point(x) => vec![Simplex::point(x)],
                Intersection::Segment(x, y) => vec![Simplex::segment(x, y)],
                Intersection::Polytope(poly) => crate::geom::fan_triangulate(&poly)?,
            })
        }
        _ => Err(Error::UnsupportedDimension(p.ambient_dim())),
    }
}

/// Intersection of two closed segments (2D ambient; 1D handled as segments
/// on the line y = const impossible, so only used in dimension 2, and in
/// dimension 1 via coordinates).
fn intersect_segments(p: &Simplex, q: &Simplex) -> Vec<Simplex> {
    let (a1, b1) = (&p.vertices()[0], &p.vertices()[1]);
    let (a2, b2) = (&q.vertices()[0], &q.vertices()[1]);
    if p.ambient_dim() == 1 {
        let (lo1, hi1) = order1(a1, b1);
        let (lo2, hi2) = order1(a2, b2);
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        return if lo > hi {
            vec![]
        } else if lo == hi {
            vec![Simplex::point(RatPoint(vec![lo]))]
        } else {
            vec![Simplex::segment(RatPoint(vec![lo]), RatPoint(vec![hi]))]
        };
    }
    if LineKey::through(a1, b1) == LineKey::through(a2, b2) {
        // Collinear: merge parameter intervals; lexicographic order is
        // monotone along the line.
        let (lo1, hi1) = order2(a1, b1);
        let (lo2, hi2) = order2(a2, b2);
        let lo = if lo1 >= lo2 { lo1 } else { lo2 };
        let hi = if hi1 <= hi2 { hi1 } else { hi2 };
        return match lo.cmp(hi) {
            std::cmp::Ordering::Greater => vec![],
            std::cmp::Ordering::Equal => vec![Simplex::point(lo.clone())],
            std::cmp::Ordering::Less => vec![Simplex::segment(lo.clone(), hi.clone())],
        };
    }
    // Transversal: solve and check membership in both.
    let d1 = b1.sub(a1);
    let d2 = b2.sub(a2);
    let denom = cross2(&d1, &d2);
    if denom.is_zero() {
        return vec![]; // parallel, distinct lines
    }
    let t = cross2(&a2.sub(a1), &d2) / &denom;
    if t.is_negative() || t > Rational::one() {
        return vec![];
    }
    let x = a1.add(&d1.scale(&t));
    if on_segment(&x, a2, b2) {
        vec![Simplex::point(x)]
    } else {
        vec![]
    }
}

fn order1(a: &RatPoint, b: &RatPoint) -> (Rational, Rational) {
    let (x, y) = (a.coord(0).clone(), b.coord(0).clone());
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

fn order2<'a>(a: &'a RatPoint, b: &'a RatPoint) -> (&'a RatPoint, &'a RatPoint) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn clip_segment_to_triangle(u: &RatPoint, v: &RatPoint, tri: &Simplex) -> Vec<Simplex> {
    let or = tri.orientation();
    let vs = tri.vertices();
    let d = v.sub(u);
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for i in 0..3 {
        let (p, q) = (&vs[i], &vs[(i + 1) % 3]);
        let e = q.sub(p);
        let c0 = cross2(&e, &u.sub(p)) * Rational::from_int(or as i64);
        let c1 = cross2(&e, &d) * Rational::from_int(or as i64);
        if c1.is_zero() {
            if c0.is_negative() {
                return vec![];
            }
            continue;
        }
        let t = -&c0 / &c1;
        if c1.is_positive() {
            if t > lo {
                lo = t;
            }
        } else if t < hi {
            hi = t;
        }
    }
    if lo > hi {
        return vec![];
    }
    let at = |t: &Rational| u.add(&d.scale(t));
    if lo == hi {
        return vec![Simplex::point(at(&lo))];
    }
    vec![Simplex::segment(at(&lo), at(&hi))]
}

/// Frontier of a reduced polyhedral set inside the cube: faces of
/// full-dimensional pieces not shared with another full piece and not on the
/// cube boundary, plus all lower-dimensional pieces.
fn set_frontier(set: &PolyhedralSet, dim: usize) -> PolyhedralSet {
    match dim {
        1 => {
            let mut pts: Vec<Simplex> = set
                .pieces
                .iter()
                .filter(|p| p.order() == 0)
                .cloned()
                .collect();
            let intervals: Vec<&Simplex> =
                set.pieces.iter().filter(|p| p.order() == 1).collect();
            let one = Rational::one();
            for piece in &intervals {
                for v in piece.vertices() {
                    let inside = v.coord(0).abs() < one;
                    let shared = intervals.iter().any(|q| *q != *piece && q.contains(v));
                    if inside && !shared {
                        pts.push(Simplex::point(v.clone()));
                    }
                }
            }
            PolyhedralSet::from_pieces(pts)
        }
        _ => {
            let mut out: Vec<Simplex> = Vec::new();
            let mut segments: Vec<(RatPoint, RatPoint)> = Vec::new();
            let twos: Vec<&Simplex> = set.pieces.iter().filter(|p| p.order() == 2).collect();
            use std::collections::HashMap;
            let mut edge_count: HashMap<(RatPoint, RatPoint), usize> = HashMap::new();
            for t in &twos {
                let vs = t.vertices();
                for k in 0..3 {
                    let (a, b) = (&vs[k], &vs[(k + 1) % 3]);
                    let key = if a <= b {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    };
                    *edge_count.entry(key).or_insert(0) += 1;
                }
            }
            let one = Rational::one();
            for (edge, count) in edge_count {
                if count != 1 {
                    continue;
                }
                let on_cube_side = {
                    let (u, v) = (&edge.0, &edge.1);
                    (0..2).any(|i| {
                        u.coord(i).abs() == one
                            && v.coord(i) == u.coord(i)
                    })
                };
                if !on_cube_side {
                    segments.push(edge);
                }
            }
            for piece in &set.pieces {
                match piece.order() {
                    0 => out.push((*piece).clone()),
                    1 => segments.push((piece.vertices()[0].clone(), piece.vertices()[1].clone())),
                    _ => {}
                }
            }
            let segments = merge_collinear(segments);
            let on_seg = |p: &RatPoint| segments.iter().any(|(u, v)| on_segment(p, u, v));
            out.retain(|p| !on_seg(&p.vertices()[0]));
            out.extend(segments.into_iter().map(|(u, v)| Simplex::segment(u, v)));
            PolyhedralSet::from_pieces(out)
        }
    }
}

/// Is every frontier piece of the group covered by the union of the
/// generators' frontiers?
fn frontier_contained_in_union(fro: &PolyhedralSet, gens: &[PolyhedralSet]) -> bool {
    for piece in &fro.pieces {
        match piece.order() {
            0 => {
                let v = &piece.vertices()[0];
                if !gens.iter().any(|g| g.contains_point(v)) {
                    return false;
                }
            }
            1 => {
                let (u, v) = (&piece.vertices()[0], &piece.vertices()[1]);
                let key = LineKey::through(u, v);
                // Collect collinear generator frontier segments clipped to
                // [u, v] and check they cover it.
                let mut covers: Vec<(RatPoint, RatPoint)> = Vec::new();
                for g in gens {
                    for q in g.pieces.iter().filter(|q| q.order() == 1) {
                        let (a, b) = (&q.vertices()[0], &q.vertices()[1]);
                        if LineKey::through(a, b) != key {
                            continue;
                        }
                        let (lo1, hi1) = order2(u, v);
                        let (lo2, hi2) = order2(a, b);
                        let lo = if lo1 >= lo2 { lo1 } else { lo2 };
                        let hi = if hi1 <= hi2 { hi1 } else { hi2 };
                        if lo < hi {
                            covers.push((lo.clone(), hi.clone()));
                        }
                    }
                }
                let merged = merge_collinear(covers);
                let (lo, hi) = order2(u, v);
                let covered = merged
                    .iter()
                    .any(|(a, b)| a <= lo && b >= hi);
                if !covered {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

/// Dividing hyperplane `normal . x = offset` in primitive integer form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DividingPlane {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

/// One generator's germ on the chosen side of the dividing plane, written in
/// the stabilizer form [[Id, V], [0, a]].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GermDatum {
    pub v: Vec<Rational>,
    pub a: Rational,
}

impl GermDatum {
    pub fn is_trivial(&self) -> bool {
        self.v.iter().all(Rational::is_zero) && self.a.is_one()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub point: RatPoint,
    pub dividing_plane: DividingPlane,
    pub per_generator: Vec<GermDatum>,
    pub nontrivial: bool,
}

/// Find a point on a codimension-1 frontier simplex of fix(G) at which every
/// generator is affine on the chosen side, and read off the stabilizer data
/// (V, a) of each germ. For a nontrivial group some germ is nontrivial,
/// certifying a homomorphism onto a subgroup of `R^{n-1} ⋊ R^+`.
pub fn indicability_witness(gens: &[PLMap]) -> Result<WitnessReport> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    if gens.iter().all(|g| g.is_identity_map()) {
        return Err(Error::TrivialGenerators);
    }
    let dim = gens[0].dim();
    if dim > 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let data = group_fixed_set(gens)?;
    match dim {
        1 => witness_1d(gens, &data),
        _ => witness_2d(gens, &data),
    }
}

fn witness_1d(gens: &[PLMap], data: &GroupFixedData) -> Result<WitnessReport> {
    let one = Rational::one();
    for piece in data.frontier.pieces.iter().filter(|p| p.order() == 0) {
        let p = &piece.vertices()[0];
        // Sides in lexicographic order of the direction.
        for dir in [-1i64, 1] {
            let boundary_block = (dir < 0 && p.coord(0) <= &-one.clone())
                || (dir > 0 && p.coord(0) >= &one);
            if boundary_block {
                continue;
            }
            let mut germs = Vec::new();
            for g in gens {
                let slope = one_sided_slope(g, p.coord(0), dir)?;
                germs.push(GermDatum {
                    v: Vec::new(),
                    a: slope,
                });
            }
            if germs.iter().any(|d| !d.is_trivial()) {
                return Ok(WitnessReport {
                    point: p.clone(),
                    dividing_plane: DividingPlane {
                        normal: vec![Rational::one()],
                        offset: p.coord(0).clone(),
                    },
                    per_generator: germs,
                    nontrivial: true,
                });
            }
        }
    }
    Err(Error::Invalid(
        "no nontrivial germ found on the frontier".into(),
    ))
}

fn one_sided_slope(g: &PLMap, x: &Rational, dir: i64) -> Result<Rational> {
    for c in g.cells() {
        let (lo, hi) = (
            c.simplex.vertices()[0].coord(0).clone(),
            c.simplex.vertices()[1].coord(0).clone(),
        );
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let matches = if dir > 0 {
            &lo <= x && x < &hi
        } else {
            &lo < x && x <= &hi
        };
        if matches {
            return Ok(c.map.linear.get(0, 0).clone());
        }
    }
    Err(Error::PointNotFound)
}

fn witness_2d(gens: &[PLMap], data: &GroupFixedData) -> Result<WitnessReport> {
    let break_loci: Vec<crate::plmap::BreakLocus> = gens
        .iter()
        .map(|g| g.break_locus())
        .collect::<Result<_>>()?;
    for piece in data.frontier.pieces.iter().filter(|p| p.order() == 1) {
        let (u, v) = (&piece.vertices()[0], &piece.vertices()[1]);
        let line = LineKey::through(u, v);
        if let Some(p) = scan_interior_point(u, v, &line, &break_loci) {
            // Primitive normals of the line, in lexicographic order.
            let mut normals = [
                RatPoint(vec![
                    Rational::new(line.a.clone(), 1.into()).unwrap(),
                    Rational::new(line.b.clone(), 1.into()).unwrap(),
                ]),
                RatPoint(vec![
                    Rational::new(-line.a.clone(), 1.into()).unwrap(),
                    Rational::new(-line.b.clone(), 1.into()).unwrap(),
                ]),
            ];
            normals.sort();
            for t in &normals {
                if let Some(germs) = side_germs(gens, &p, u, v, t)? {
                    if germs.iter().any(|d| !d.is_trivial()) {
                        return Ok(WitnessReport {
                            point: p,
                            dividing_plane: DividingPlane {
                                normal: vec![
                                    Rational::new(line.a.clone(), 1.into()).unwrap(),
                                    Rational::new(line.b.clone(), 1.into()).unwrap(),
                                ],
                                offset: Rational::new(line.c.clone(), 1.into()).unwrap(),
                            },
                            per_generator: germs,
                            nontrivial: true,
                        });
                    }
                }
            }
        }
    }
    Err(Error::Invalid(
        "no nontrivial germ found on the frontier".into(),
    ))
}

/// Dyadic scan for an interior point of [u, v] away from transversal break
/// segments and away from the vertices of collinear ones.
fn scan_interior_point(
    u: &RatPoint,
    v: &RatPoint,
    line: &LineKey,
    loci: &[crate::plmap::BreakLocus],
) -> Option<RatPoint> {
    for depth in 1..=20u32 {
        let denom = 1i64 << depth;
        for odd in (1..denom).step_by(2) {
            let lambda = Rational::ratio(odd, denom);
            let p = u.add(&v.sub(u).scale(&lambda));
            let mut clean = true;
            'outer: for locus in loci {
                for (a, b) in &locus.segments {
                    if LineKey::through(a, b) == *line {
                        if p == *a || p == *b {
                            clean = false;
                            break 'outer;
                        }
                    } else if on_segment(&p, a, b) {
                        clean = false;
                        break 'outer;
                    }
                }
            }
            if clean {
                return Some(p);
            }
        }
    }
    None
}

/// Germ data for every generator on the side of the dividing line pointed to
/// by `t`, or None when that side has no cells (outside the cube).
fn side_germs(
    gens: &[PLMap],
    p: &RatPoint,
    u: &RatPoint,
    v: &RatPoint,
    t: &RatPoint,
) -> Result<Option<Vec<GermDatum>>> {
    // d spans the dividing line: rotate t counterclockwise.
    let d = RatPoint(vec![-t.coord(1), t.coord(0).clone()]);
    let mut germs = Vec::new();
    for g in gens {
        let mut chosen: Option<&crate::plmap::Cell> = None;
        let mut containing = 0;
        for c in g.cells() {
            if !c.simplex.contains(p) {
                continue;
            }
            containing += 1;
            let on_side = c
                .simplex
                .vertices()
                .iter()
                .any(|w| t.dot(&w.sub(p)).is_positive());
            if on_side {
                chosen = Some(c);
            }
        }
        let cell = match (chosen, containing) {
            (Some(c), _) => c,
            (None, _) => return Ok(None), // side outside the cube
        };
        let m = &cell.map;
        debug_assert_eq!(&m.apply(p), p, "frontier point must be fixed");
        let ld = m.linear.mul_vec(&d);
        if ld != d {
            // The dividing plane must be tangent; with p avoiding the break
            // loci this cannot happen for a valid frontier piece.
            let _ = (u, v);
            return Err(Error::Invalid(
                "germ does not fix the frontier direction".into(),
            ));
        }
        let lt = m.linear.mul_vec(t);
        // Solve lt = V d + a t exactly.
        let det = cross2(&d, t);
        let a = cross2(&d, &lt) / &det;
        let vcoef = cross2(&lt, t) / &det;
        if !a.is_positive() {
            return Err(Error::Invalid(
                "orientation-preserving germ must have positive transversal eigenvalue".into(),
            ));
        }
        germs.push(GermDatum { v: vec![vcoef], a });
    }
    Ok(Some(germs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{embed_support, pl1d, twist_root, BreakpointSpec, TwistSpec};
    use crate::geom::BoundingBox;
    use crate::rational::rat;

    fn sample_f() -> PLMap {
        let spec = BreakpointSpec::new(vec![
            (rat(-1, 1), rat(-1, 1)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 1), rat(1, 1)),
        ])
        .unwrap();
        pl1d(&spec).unwrap()
    }

    fn standard_twist() -> PLMap {
        twist_root(&TwistSpec::new(rat(1, 2), rat(1, 12)).unwrap()).unwrap()
    }

    fn pt2(xp: i64, xq: i64, yp: i64, yq: i64) -> RatPoint {
        RatPoint(vec![rat(xp, xq), rat(yp, yq)])
    }

    #[test]
    fn matrix_norm_basics() {
        assert_eq!(matrix_norm(&PLMap::identity(2)).unwrap(), rat(1, 1));
        assert_eq!(matrix_norm(&sample_f()).unwrap(), rat(3, 2));
        // The standard twist's largest entry sits on the corner-crossing
        // cells: 2 + c with c = 2/3.
        assert_eq!(matrix_norm(&standard_twist()).unwrap(), rat(8, 3));
    }

    #[test]
    fn matrix_norm_of_linear_zone_matrix_is_its_sup() {
        // The shear matrix itself contributes sup |entries| = 1; the join
        // cells around it push the map's norm above 1.
        let m = crate::geom::RatMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        let g = crate::construct::linear_near_zero(&m, &rat(1, 4)).unwrap();
        assert_eq!(m.max_abs_entry(), rat(1, 1));
        assert!(matrix_norm(&g).unwrap() >= rat(1, 1));
    }

    #[test]
    fn cell_count_and_breakpoints() {
        assert_eq!(cell_count(&PLMap::identity(1)).unwrap(), 1);
        assert_eq!(breakpoints(&PLMap::identity(1)).unwrap(), vec![]);
        let f = sample_f();
        assert_eq!(breakpoints(&f).unwrap(), vec![rat(0, 1)]);
        let ff = f.compose(&f).unwrap();
        assert_eq!(breakpoints(&ff).unwrap(), vec![rat(-1, 3), rat(0, 1)]);
        assert!(breakpoints(&PLMap::identity(2)).is_err());
        // Cell count of a twist is stable under canonicalization: no two
        // adjacent cells share a map.
        let h = standard_twist();
        assert_eq!(cell_count(&h).unwrap(), h.cells().len());
    }

    #[test]
    fn volume_check_examples() {
        assert!(volume_check(&PLMap::identity(2)).unwrap().preserves);
        assert!(volume_check(&standard_twist()).unwrap().preserves);
        let f = sample_f();
        let vc = volume_check(&f).unwrap();
        assert!(!vc.preserves);
        assert_eq!(vc.max_det, rat(3, 2));
        assert_eq!(vc.min_det, rat(1, 2));
    }

    #[test]
    fn fixed_set_of_identity_is_cube() {
        let fs = fixed_set(&PLMap::identity(2)).unwrap();
        assert_eq!(fs.full_dim_measure(2), rat(4, 1));
        assert!(frontier(&PLMap::identity(2)).unwrap().is_empty());
        let fs1 = fixed_set(&PLMap::identity(1)).unwrap();
        assert_eq!(fs1.full_dim_measure(1), rat(2, 1));
    }

    #[test]
    fn fixed_set_of_twist_is_boundary_and_center() {
        // Every interior concentric layer slides, the boundary is fixed, and
        // the center is fixed by continuity.
        let h = standard_twist();
        let fs = fixed_set(&h).unwrap();
        let segs: Vec<&Simplex> = fs.pieces.iter().filter(|p| p.order() == 1).collect();
        assert_eq!(segs.len(), 4, "{:?}", fs.pieces);
        let pts: Vec<&Simplex> = fs.pieces.iter().filter(|p| p.order() == 0).collect();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].vertices()[0], RatPoint::origin(2));
        assert!(fs.pieces.iter().all(|p| p.order() < 2));
        let fro = frontier(&h).unwrap();
        assert_eq!(fro, fs);
    }

    #[test]
    fn fixed_set_of_dehn_twist_adds_inner_square() {
        let h = standard_twist();
        let t = h.power(12).unwrap();
        let fs = fixed_set(&t).unwrap();
        // Inner square of area 1 is fixed, plus the boundary.
        assert_eq!(fs.full_dim_measure(2), rat(1, 1));
        let fro = frontier(&t).unwrap();
        // Frontier: boundary of the inner square plus the cube boundary.
        let segs: Vec<&Simplex> = fro.pieces.iter().filter(|p| p.order() == 1).collect();
        assert_eq!(segs.len(), 8, "{:?}", fro.pieces);
        let expect_inner = Simplex::segment(pt2(-1, 2, -1, 2), pt2(1, 2, -1, 2));
        assert!(fro.pieces.contains(&expect_inner));
    }

    #[test]
    fn group_fixed_set_examples() {
        let id = PLMap::identity(2);
        let data = group_fixed_set(&[id]).unwrap();
        assert_eq!(data.fixed.full_dim_measure(2), rat(4, 1));
        assert!(data.frontier_contained);

        let h = standard_twist();
        let data = group_fixed_set(std::slice::from_ref(&h)).unwrap();
        assert_eq!(
            data.fixed.pieces.iter().filter(|p| p.order() == 1).count(),
            4
        );
        assert!(data.frontier_contained);

        // Twist together with a disjointly embedded twist: the intersection
        // keeps the cube boundary and drops each other's support regions.
        let target = BoundingBox {
            min: pt2(1, 8, -1, 8),
            max: pt2(3, 8, 1, 8),
        };
        let e = embed_support(&h, &target).unwrap();
        let data = group_fixed_set(&[h, e]).unwrap();
        assert!(data.frontier_contained);
        assert_eq!(data.fixed.full_dim_measure(2), rat(0, 1));
        let segs: Vec<&Simplex> = data
            .fixed
            .pieces
            .iter()
            .filter(|p| p.order() == 1)
            .collect();
        assert_eq!(segs.len(), 4, "{:?}", data.fixed.pieces);
        assert!(group_fixed_set(&[]).is_err());
    }

    #[test]
    fn witness_for_1d_map() {
        let f = sample_f();
        let w = indicability_witness(std::slice::from_ref(&f)).unwrap();
        assert!(w.nontrivial);
        assert_eq!(w.point, RatPoint(vec![rat(-1, 1)]));
        assert_eq!(w.per_generator[0].a, rat(3, 2));
        assert!(w.per_generator[0].v.is_empty());
    }

    #[test]
    fn witness_for_twist() {
        let h = standard_twist();
        let w = indicability_witness(std::slice::from_ref(&h)).unwrap();
        assert!(w.nontrivial);
        // Boundary edge witness: shear datum (V, a) = (-2/3, 1).
        assert_eq!(w.per_generator[0].a, rat(1, 1));
        assert_eq!(w.per_generator[0].v, vec![rat(-2, 3)]);
        assert!(w.point.on_cube_boundary());
    }

    #[test]
    fn witness_rejects_trivial_input() {
        assert!(matches!(
            indicability_witness(&[PLMap::identity(2)]),
            Err(Error::TrivialGenerators)
        ));
    }
}
