//! Canonical form of a PL map.
//!
//! The break locus — the union of cell faces across which the affine pieces
//! differ — and the affine map on each complementary region are intrinsic to
//! the function, not to its presentation. Canonicalization recovers exactly
//! that data and re-triangulates each maximal affine region using only its
//! intrinsic boundary vertices: diagonals are inserted greedily in
//! lexicographic order until maximal, which for a convex region reproduces
//! the fan from its least vertex and in general yields a minimal
//! triangulation (no interior vertices survive). Two presentations of the
//! same function therefore canonicalize to identical cell lists.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::geom::{
    cross2, merge_collinear, on_segment, orient2, segments_meet, RatPoint, SegMeet, Simplex,
};
use crate::rational::Rational;

use super::{interval_of, Cell, MapKind, PLMap};

/// The break locus: maximal straight segments (dimension 2) or breakpoints
/// (dimension 1), in canonical sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakLocus {
    pub segments: Vec<(RatPoint, RatPoint)>,
    pub points: Vec<RatPoint>,
}

/// A canonical form together with its hash. The hash is a pure function of
/// the underlying map (not of the presentation), so equal maps always
/// collide; exact `equals` confirmation resolves unequal maps that collide.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub map: PLMap,
    pub hash: u64,
}

impl PLMap {
    /// Merge maximal regions sharing one affine map and re-triangulate them
    /// canonically. Idempotent; equal maps have identical canonical forms.
    /// The input must be valid.
    pub fn canonicalize(&self) -> Result<PLMap> {
        match self.kind() {
            MapKind::Suspension(base) => Ok(PLMap::from_parts(
                self.dim(),
                MapKind::Suspension(Box::new(base.canonicalize()?)),
                Vec::new(),
            )),
            MapKind::Generic => match self.dim() {
                1 => Ok(canonicalize_1d(self)),
                2 => canonicalize_2d(self),
                d => Err(Error::UnsupportedDimension(d)),
            },
        }
    }

    /// The break locus of a valid map (computed from any presentation).
    pub fn break_locus(&self) -> Result<BreakLocus> {
        match self.kind() {
            MapKind::Suspension(_) => Err(Error::UnsupportedDimension(self.dim())),
            MapKind::Generic => match self.dim() {
                1 => {
                    let canon = canonicalize_1d(self);
                    let points = canon
                        .cells()
                        .iter()
                        .skip(1)
                        .map(|c| {
                            let (lo, _) = interval_of(&c.simplex);
                            RatPoint(vec![lo])
                        })
                        .collect();
                    Ok(BreakLocus {
                        segments: Vec::new(),
                        points,
                    })
                }
                2 => {
                    let cells = normalize_ccw(self.cells());
                    let adjacency = EdgeAdjacency::build(&cells);
                    let break_edges = adjacency.break_edges(&cells);
                    Ok(BreakLocus {
                        segments: merge_collinear(break_edges),
                        points: Vec::new(),
                    })
                }
                d => Err(Error::UnsupportedDimension(d)),
            },
        }
    }

    /// Canonical form plus its presentation-independent hash.
    pub fn canonical_form(&self) -> Result<CanonicalForm> {
        let map = self.canonicalize()?;
        let mut hasher = DefaultHasher::new();
        hash_map_structure(&map, &mut hasher);
        Ok(CanonicalForm {
            hash: hasher.finish(),
            map,
        })
    }
}

fn hash_map_structure(map: &PLMap, hasher: &mut DefaultHasher) {
    map.dim().hash(hasher);
    match map.kind() {
        MapKind::Suspension(base) => {
            "suspension".hash(hasher);
            hash_map_structure(base, hasher);
        }
        MapKind::Generic => {
            for c in map.cells() {
                c.simplex.hash(hasher);
                c.map.linear.hash(hasher);
                c.map.translation.hash(hasher);
            }
        }
    }
}

fn canonicalize_1d(map: &PLMap) -> PLMap {
    let mut cells: Vec<Cell> = map
        .cells()
        .iter()
        .map(|c| {
            let (lo, hi) = interval_of(&c.simplex);
            Cell::new(
                Simplex::segment(RatPoint(vec![lo]), RatPoint(vec![hi])),
                c.map.clone(),
            )
        })
        .collect();
    cells.sort_by(|a, b| interval_of(&a.simplex).0.cmp(&interval_of(&b.simplex).0));
    let mut merged: Vec<Cell> = Vec::new();
    for cell in cells {
        match merged.last_mut() {
            Some(last) if last.map == cell.map => {
                let (lo, _) = interval_of(&last.simplex);
                let (_, hi) = interval_of(&cell.simplex);
                last.simplex = Simplex::segment(RatPoint(vec![lo]), RatPoint(vec![hi]));
            }
            _ => merged.push(cell),
        }
    }
    PLMap::generic(1, merged)
}

/// Cells with vertices rewritten counterclockwise.
fn normalize_ccw(cells: &[Cell]) -> Vec<Cell> {
    cells
        .iter()
        .map(|c| {
            let mut v = c.simplex.vertices().to_vec();
            if c.simplex.orientation() < 0 {
                v.swap(1, 2);
            }
            Cell::new(Simplex::new(v), c.map.clone())
        })
        .collect()
}

type Edge = (RatPoint, RatPoint);

fn undirected(u: &RatPoint, v: &RatPoint) -> Edge {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

struct EdgeAdjacency {
    /// Undirected edge -> incident cell indices (1 or 2 in a valid complex).
    incident: HashMap<Edge, Vec<usize>>,
    /// Directed edge -> the unique cell owning it in CCW orientation.
    owner: HashMap<(RatPoint, RatPoint), usize>,
}

impl EdgeAdjacency {
    fn build(cells: &[Cell]) -> Self {
        let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
        let mut owner = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            let vs = c.simplex.vertices();
            for k in 0..3 {
                let (u, v) = (&vs[k], &vs[(k + 1) % 3]);
                incident.entry(undirected(u, v)).or_default().push(i);
                owner.insert((u.clone(), v.clone()), i);
            }
        }
        EdgeAdjacency { incident, owner }
    }

    fn neighbor(&self, cell: usize, u: &RatPoint, v: &RatPoint) -> Option<usize> {
        self.incident
            .get(&undirected(u, v))?
            .iter()
            .copied()
            .find(|&i| i != cell)
    }

    /// Undirected edges across which the affine maps differ.
    fn break_edges(&self, cells: &[Cell]) -> Vec<Edge> {
        let mut out = Vec::new();
        for (edge, inc) in &self.incident {
            if inc.len() == 2 && cells[inc[0]].map != cells[inc[1]].map {
                out.push(edge.clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn canonicalize_2d(map: &PLMap) -> Result<PLMap> {
    let cells = normalize_ccw(map.cells());
    if cells.is_empty() {
        return Err(Error::Invalid("map has no cells".into()));
    }
    let adjacency = EdgeAdjacency::build(&cells);

    // Regions: components of the cell graph linked by equal-map shared edges.
    let mut uf = UnionFind::new(cells.len());
    for (edge, inc) in &adjacency.incident {
        let _ = edge;
        if inc.len() == 2 && cells[inc[0]].map == cells[inc[1]].map {
            uf.union(inc[0], inc[1]);
        }
    }
    let mut regions: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..cells.len() {
        regions.entry(uf.find(i)).or_default().push(i);
    }

    // Directed boundary edges per region (region interior on the left).
    let mut region_boundary: HashMap<usize, Vec<(RatPoint, RatPoint)>> = HashMap::new();
    for (i, c) in cells.iter().enumerate() {
        let root = uf.find(i);
        let vs = c.simplex.vertices();
        for k in 0..3 {
            let (u, v) = (&vs[k], &vs[(k + 1) % 3]);
            let is_boundary = match adjacency.neighbor(i, u, v) {
                None => true,
                Some(j) => uf.find(j) != root,
            };
            if is_boundary {
                region_boundary
                    .entry(root)
                    .or_default()
                    .push((u.clone(), v.clone()));
            }
        }
    }

    // A vertex interior to a single straight run of boundary (exactly two
    // incident boundary edges, collinear, on opposite sides) is an artifact
    // of the presentation, not of the function; drop it everywhere.
    let mut vertex_edges: HashMap<RatPoint, Vec<RatPoint>> = HashMap::new();
    let mut seen: HashSet<Edge> = HashSet::new();
    for edges in region_boundary.values() {
        for (u, v) in edges {
            if seen.insert(undirected(u, v)) {
                vertex_edges.entry(u.clone()).or_default().push(v.clone());
                vertex_edges.entry(v.clone()).or_default().push(u.clone());
            }
        }
    }
    let removable: HashSet<RatPoint> = vertex_edges
        .iter()
        .filter(|(v, others)| {
            others.len() == 2
                && orient2(&others[0], &others[1], v) == 0
                && others[0].sub(v).dot(&others[1].sub(v)).is_negative()
        })
        .map(|(v, _)| v.clone())
        .collect();

    let mut out_cells: Vec<Cell> = Vec::new();
    let mut region_roots: Vec<usize> = regions.keys().copied().collect();
    region_roots.sort();
    for root in region_roots {
        let member_cells: Vec<&Simplex> = regions[&root]
            .iter()
            .map(|&i| &cells[i].simplex)
            .collect();
        let mut boundary = region_boundary.remove(&root).unwrap_or_default();
        splice_removable(&mut boundary, &removable);
        let triangles = triangulate_region(&boundary, &member_cells)?;
        let map_for_region = cells[regions[&root][0]].map.clone();
        for t in triangles {
            out_cells.push(Cell::new(t.canonical(), map_for_region.clone()));
        }
    }
    out_cells.sort_by(|a, b| a.simplex.vertices().cmp(b.simplex.vertices()));
    Ok(PLMap::generic(2, out_cells))
}

/// Remove presentation-only vertices from a directed boundary edge set by
/// splicing their incoming and outgoing edges.
fn splice_removable(boundary: &mut Vec<(RatPoint, RatPoint)>, removable: &HashSet<RatPoint>) {
    let mut todo: Vec<RatPoint> = removable
        .iter()
        .filter(|v| boundary.iter().any(|(u, w)| &u == v || &w == v))
        .cloned()
        .collect();
    todo.sort();
    for v in todo {
        let incoming = boundary.iter().position(|(_, w)| *w == v);
        let outgoing = boundary.iter().position(|(u, _)| *u == v);
        if let (Some(i), Some(o)) = (incoming, outgoing) {
            let start = boundary[i].0.clone();
            let end = boundary[o].1.clone();
            let (hi, lo) = (i.max(o), i.min(o));
            boundary.remove(hi);
            boundary.remove(lo);
            boundary.push((start, end));
        }
    }
    boundary.sort();
}

/// Total order on nonzero direction vectors by angle in [0, 2pi).
fn angle_cmp(a: &RatPoint, b: &RatPoint) -> Ordering {
    fn half(d: &RatPoint) -> u8 {
        let (x, y) = (d.coord(0), d.coord(1));
        // Upper half-circle starts at direction (1,0) inclusive.
        if y.is_positive() || (y.is_zero() && x.is_positive()) {
            0
        } else {
            1
        }
    }
    half(a).cmp(&half(b)).then_with(|| {
        // Same half: counterclockwise order by cross product.
        cross2(b, a).signum().cmp(&0)
    })
}

/// Triangulate one maximal affine region.
///
/// `boundary` holds directed edges with the region on the left (outer chains
/// counterclockwise, hole chains clockwise); `member_cells` are the original
/// triangles of the region, used only for interior membership tests.
fn triangulate_region(
    boundary: &[(RatPoint, RatPoint)],
    member_cells: &[&Simplex],
) -> Result<Vec<Simplex>> {
    if boundary.len() == 3 {
        // Single triangle: emit directly.
        let mut tri: Vec<RatPoint> = boundary.iter().map(|(u, _)| u.clone()).collect();
        tri.sort();
        let s = Simplex::new(tri);
        if s.orientation() != 0 {
            return Ok(vec![s.canonical()]);
        }
    }

    let mut vertices: Vec<RatPoint> = boundary
        .iter()
        .flat_map(|(u, v)| [u.clone(), v.clone()])
        .collect();
    vertices.sort();
    vertices.dedup();

    let undirected_boundary: HashSet<Edge> = boundary
        .iter()
        .map(|(u, v)| undirected(u, v))
        .collect();

    let inside_region = |p: &RatPoint| member_cells.iter().any(|s| s.contains(p));

    // Greedy maximal set of non-crossing diagonals, in lexicographic order.
    let mut accepted: Vec<Edge> = Vec::new();
    let half = Rational::ratio(1, 2);
    for i in 0..vertices.len() {
        'candidate: for j in (i + 1)..vertices.len() {
            let (p, q) = (&vertices[i], &vertices[j]);
            let key = undirected(p, q);
            if undirected_boundary.contains(&key) {
                continue;
            }
            for (a, b) in undirected_boundary.iter().chain(accepted.iter()) {
                if segments_meet(p, q, a, b) == SegMeet::Improper {
                    continue 'candidate;
                }
            }
            for w in &vertices {
                if w != p && w != q && on_segment(w, p, q) {
                    continue 'candidate;
                }
            }
            let midpoint = p.add(q).scale(&half);
            if !inside_region(&midpoint) {
                continue;
            }
            accepted.push(key);
        }
    }

    // Extract the faces of boundary + diagonals and keep the region's side.
    let mut all_edges: Vec<Edge> = undirected_boundary.iter().cloned().collect();
    all_edges.extend(accepted.iter().cloned());
    all_edges.sort();
    let faces = trace_faces(&all_edges);

    let directed_boundary: HashSet<(RatPoint, RatPoint)> = boundary.iter().cloned().collect();
    let mut triangles = Vec::new();
    for face in faces {
        let mut in_region = true;
        for k in 0..face.len() {
            let e = (face[k].clone(), face[(k + 1) % face.len()].clone());
            if directed_boundary.contains(&e) {
                in_region = true;
                break;
            }
            if directed_boundary.contains(&(e.1.clone(), e.0.clone())) {
                in_region = false;
                break;
            }
        }
        if !in_region {
            continue;
        }
        if face.len() != 3 {
            return Err(Error::Invalid(format!(
                "region triangulation left a face with {} vertices",
                face.len()
            )));
        }
        let s = Simplex::new(face);
        if s.orientation() <= 0 {
            continue; // outer face traced clockwise
        }
        triangles.push(s);
    }
    Ok(triangles)
}

/// Face tracing in a planar straight-line graph: returns each face as the
/// cyclic vertex list with the face interior on the left. The unbounded face
/// comes out clockwise (negative orientation) and is filtered by callers.
fn trace_faces(edges: &[Edge]) -> Vec<Vec<RatPoint>> {
    // Outgoing directed edges per vertex, sorted by angle.
    let mut outgoing: HashMap<RatPoint, Vec<RatPoint>> = HashMap::new();
    for (u, v) in edges {
        outgoing.entry(u.clone()).or_default().push(v.clone());
        outgoing.entry(v.clone()).or_default().push(u.clone());
    }
    for (v, targets) in outgoing.iter_mut() {
        targets.sort_by(|a, b| angle_cmp(&a.sub(v), &b.sub(v)).then(a.cmp(b)));
    }

    let mut starts: Vec<(RatPoint, RatPoint)> = Vec::new();
    for (u, v) in edges {
        starts.push((u.clone(), v.clone()));
        starts.push((v.clone(), u.clone()));
    }
    starts.sort();

    let mut visited: HashSet<(RatPoint, RatPoint)> = HashSet::new();
    let mut faces = Vec::new();
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        let mut face = Vec::new();
        let mut current = start.clone();
        loop {
            visited.insert(current.clone());
            face.push(current.0.clone());
            // At the head, turn as sharply clockwise as possible from the
            // reversed edge: the previous entry in counterclockwise order.
            let at = &current.1;
            let targets = &outgoing[at];
            let back = &current.0;
            let idx = targets
                .iter()
                .position(|t| t == back)
                .expect("reverse edge present");
            let next_target = targets[(idx + targets.len() - 1) % targets.len()].clone();
            current = (at.clone(), next_target);
            if current == start {
                break;
            }
        }
        faces.push(face);
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RatAffineMap;
    use crate::plmap::tests::onedim;
    use crate::rational::rat;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(&[x, y])
    }

    /// Identity on a finer triangulation: square cut into 4 triangles
    /// around the center.
    fn fine_identity() -> PLMap {
        let c = pt(0, 0);
        let sq = [pt(-1, -1), pt(1, -1), pt(1, 1), pt(-1, 1)];
        let cells = (0..4)
            .map(|i| {
                Cell::new(
                    Simplex::new(vec![
                        sq[i].clone(),
                        sq[(i + 1) % 4].clone(),
                        c.clone(),
                    ]),
                    RatAffineMap::identity(2),
                )
            })
            .collect();
        PLMap::generic(2, cells)
    }

    #[test]
    fn identity_collapses_to_two_triangles() {
        let fine = fine_identity();
        assert!(fine.validate().passed);
        let canon = fine.canonicalize().unwrap();
        assert_eq!(canon.cells().len(), 2);
        assert_eq!(canon, PLMap::identity(2).canonicalize().unwrap());
        assert!(canon.validate().passed);
        // Idempotent.
        assert_eq!(canon.canonicalize().unwrap(), canon);
    }

    #[test]
    fn one_dim_merge() {
        let f = onedim(&[(-1, 1, -1, 1), (-1, 2, -1, 4), (0, 1, 1, 2), (1, 1, 1, 1)]);
        let canon = f.canonicalize().unwrap();
        assert_eq!(canon.cells().len(), 2);
        let bl = f.break_locus().unwrap();
        assert_eq!(bl.points, vec![RatPoint(vec![rat(0, 1)])]);
    }

    #[test]
    fn canonical_form_is_presentation_independent() {
        let a = PLMap::identity(2).canonical_form().unwrap();
        let b = fine_identity().canonical_form().unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.map, b.map);
    }

    #[test]
    fn merge_collinear_segments() {
        let merged = merge_collinear(vec![
            (pt(0, 0), pt(1, 0)),
            (pt(1, 0), pt(2, 0)),
            (pt(5, 0), pt(6, 0)),
            (pt(0, 1), pt(1, 2)),
        ]);
        assert_eq!(merged.len(), 3);
        assert!(merged.contains(&(pt(0, 0), pt(2, 0))));
    }

    #[test]
    fn angle_order_is_counterclockwise() {
        let dirs = [pt(1, 0), pt(1, 1), pt(0, 1), pt(-1, 0), pt(-1, -1), pt(0, -1)];
        for w in dirs.windows(2) {
            assert_eq!(angle_cmp(&w[0], &w[1]), Ordering::Less, "{:?} {:?}", w[0], w[1]);
        }
    }
}
