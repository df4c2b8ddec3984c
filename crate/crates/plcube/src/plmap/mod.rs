//! PL self-homeomorphisms of the cube `[-1,1]^n` fixed pointwise on the
//! boundary: the group element.
//!
//! A map is a finite list of cells, each a full-dimensional simplex carrying
//! one affine map; the simplices triangulate the cube exactly. Generic cell
//! data exists in dimensions 1 and 2. Dimension n >= 3 maps exist only as
//! tagged suspensions of lower-dimensional maps and delegate their group
//! operations to the base.

mod canonical;

pub use canonical::{BreakLocus, CanonicalForm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    fan_triangulate, intersect_full, BoundingBox, ConvexPolytope, Intersection, RatAffineMap,
    RatPoint, Simplex,
};
use crate::rational::Rational;

/// One affine piece: a simplex and the map applied on it.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub simplex: Simplex,
    pub map: RatAffineMap,
}

impl Cell {
    pub fn new(simplex: Simplex, map: RatAffineMap) -> Self {
        Cell { simplex, map }
    }

    /// The image simplex under this cell's affine map.
    pub fn image_simplex(&self) -> Simplex {
        Simplex::new(
            self.simplex
                .vertices()
                .iter()
                .map(|v| self.map.apply(v))
                .collect(),
        )
    }
}

impl std::fmt::Debug for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} via {:?}", self.simplex, self.map)
    }
}

/// Generic cell data, or a tagged suspension of a lower-dimensional map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MapKind {
    Generic,
    Suspension(Box<PLMap>),
}

#[derive(Clone, PartialEq, Eq)]
pub struct PLMap {
    dim: usize,
    kind: MapKind,
    cells: Vec<Cell>,
}

/// Result of running the structural invariants; failures are data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub check: CheckName,
    pub witness: String,
}

/// The five structural invariants of a PL map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    /// Cells triangulate the cube: volumes sum, interiors disjoint, faces match.
    Covering,
    /// Adjacent cells agree on shared faces.
    Continuity,
    /// Cell determinants are nonzero and share one sign.
    Orientation,
    /// Image simplices triangulate the cube (the map is a bijection).
    Bijectivity,
    /// Cells meeting the boundary restrict to the identity there.
    BoundaryFixed,
}

impl PLMap {
    /// Assemble a map from parts without validating.
    pub fn from_parts(dim: usize, kind: MapKind, cells: Vec<Cell>) -> Self {
        PLMap { dim, kind, cells }
    }

    pub fn generic(dim: usize, cells: Vec<Cell>) -> Self {
        PLMap {
            dim,
            kind: MapKind::Generic,
            cells,
        }
    }

    /// The identity in canonical form: one interval in dimension 1, the
    /// two-triangle fan of the square in dimension 2, suspensions above.
    pub fn identity(dim: usize) -> Self {
        match dim {
            0 => panic!("dimension must be positive"),
            1 => PLMap::generic(
                1,
                vec![Cell::new(
                    Simplex::segment(RatPoint::from_ints(&[-1]), RatPoint::from_ints(&[1])),
                    RatAffineMap::identity(1),
                )],
            ),
            2 => {
                let sq = [
                    RatPoint::from_ints(&[-1, -1]),
                    RatPoint::from_ints(&[1, -1]),
                    RatPoint::from_ints(&[1, 1]),
                    RatPoint::from_ints(&[-1, 1]),
                ];
                PLMap::generic(
                    2,
                    vec![
                        Cell::new(
                            Simplex::new(vec![sq[0].clone(), sq[1].clone(), sq[2].clone()]),
                            RatAffineMap::identity(2),
                        ),
                        Cell::new(
                            Simplex::new(vec![sq[0].clone(), sq[2].clone(), sq[3].clone()]),
                            RatAffineMap::identity(2),
                        ),
                    ],
                )
            }
            n => PLMap {
                dim: n,
                kind: MapKind::Suspension(Box::new(PLMap::identity(n - 1))),
                cells: Vec::new(),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_count_raw(&self) -> usize {
        self.cells.len()
    }

    /// True when every affine piece is the identity (delegates for
    /// suspensions). For valid maps this decides identity as a function.
    pub fn is_identity_map(&self) -> bool {
        match &self.kind {
            MapKind::Suspension(base) => base.is_identity_map(),
            MapKind::Generic => self.cells.iter().all(|c| c.map.is_identity()),
        }
    }

    /// Sign class of the cell determinants (+1/-1); 0 when degenerate.
    pub fn orientation_class(&self) -> i32 {
        match &self.kind {
            MapKind::Suspension(base) => base.orientation_class(),
            MapKind::Generic => self
                .cells
                .first()
                .map(|c| c.map.det().signum())
                .unwrap_or(0),
        }
    }

    /// Evaluate the map at a point of the cube.
    pub fn apply(&self, x: &RatPoint) -> Result<RatPoint> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        if !x.in_cube() {
            return Err(Error::OutsideCube);
        }
        match &self.kind {
            MapKind::Generic => {
                let simplices: Vec<&Simplex> = self.cells.iter().map(|c| &c.simplex).collect();
                let idx = locate(&simplices, x)?;
                Ok(self.cells[idx].map.apply(x))
            }
            MapKind::Suspension(base) => {
                // Split x = (x', s); inside the bipyramid the map cones the
                // base map to the apexes, outside it is the identity.
                let s = x.coord(self.dim - 1).clone();
                let xp = RatPoint(x.0[..self.dim - 1].to_vec());
                let slab = Rational::one() - s.abs();
                if xp.linf_norm() >= slab {
                    return Ok(x.clone());
                }
                let y = xp.scale(&slab.recip());
                let fy = base.apply(&y)?;
                let mut coords = fy.scale(&slab).0;
                coords.push(s);
                Ok(RatPoint(coords))
            }
        }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PLMap) -> Result<PLMap> {
        compose(self, other)
    }

    /// The n-th power (negative n through the inverse), canonicalizing
    /// between steps to keep cell counts near their intrinsic minimum.
    pub fn power(&self, n: i64) -> Result<PLMap> {
        if n == 0 {
            return Ok(PLMap::identity(self.dim));
        }
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..n.unsigned_abs() {
            acc = compose(&acc, &base)?.canonicalize()?;
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<PLMap> {
        match &self.kind {
            MapKind::Suspension(base) => Ok(PLMap {
                dim: self.dim,
                kind: MapKind::Suspension(Box::new(base.inverse()?)),
                cells: Vec::new(),
            }),
            MapKind::Generic => {
                let mut cells = Vec::with_capacity(self.cells.len());
                for (i, c) in self.cells.iter().enumerate() {
                    let inv = c.map.inverse().ok_or_else(|| {
                        Error::Invalid(format!("cell {i} has a singular linear part"))
                    })?;
                    cells.push(Cell::new(c.image_simplex(), inv));
                }
                Ok(PLMap {
                    dim: self.dim,
                    kind: MapKind::Generic,
                    cells,
                })
            }
        }
    }

    /// Functional equality: `f = g` iff `f ∘ g^{-1}` is the identity, which
    /// exact arithmetic decides piece by piece.
    pub fn equals(&self, other: &PLMap) -> Result<bool> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        match (&self.kind, &other.kind) {
            (MapKind::Suspension(a), MapKind::Suspension(b)) => a.equals(b),
            _ => {
                let composed = compose(self, &other.inverse()?)?;
                Ok(composed.is_identity_map())
            }
        }
    }

    /// Run all five structural invariants and report every failure.
    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().passed
    }

    /// Serialize to the canonical JSON text.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PLMap serialization cannot fail")
    }

    /// Parse and validate a map from JSON text.
    pub fn parse_validated(text: &str) -> Result<PLMap> {
        let map: PLMap = serde_json::from_str(text)?;
        let report = map.validate();
        if !report.passed {
            let summary: Vec<String> = report
                .violations
                .iter()
                .take(3)
                .map(|v| format!("{:?}: {}", v.check, v.witness))
                .collect();
            return Err(Error::Invalid(summary.join("; ")));
        }
        Ok(map)
    }
}

impl std::fmt::Debug for PLMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            MapKind::Suspension(base) => write!(f, "suspension of {:?}", base),
            MapKind::Generic => {
                writeln!(f, "PLMap dim {} with {} cells:", self.dim, self.cells.len())?;
                for c in &self.cells {
                    writeln!(f, "  {:?}", c)?;
                }
                Ok(())
            }
        }
    }
}

/// Locate `x` among closed simplices; ties broken by the lowest index.
pub fn locate(cells: &[&Simplex], x: &RatPoint) -> Result<usize> {
    cells
        .iter()
        .position(|s| s.contains(x))
        .ok_or(Error::PointNotFound)
}

/// Spec-facing point location over owned simplices.
pub fn point_locate(cells: &[Simplex], x: &RatPoint) -> Result<usize> {
    let refs: Vec<&Simplex> = cells.iter().collect();
    locate(&refs, x)
}

pub fn cube_volume(dim: usize) -> Rational {
    Rational::from_int(2).pow(dim as i32)
}

fn compose(f: &PLMap, g: &PLMap) -> Result<PLMap> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: g.dim,
        });
    }
    match (&f.kind, &g.kind) {
        (MapKind::Suspension(bf), MapKind::Suspension(bg)) => Ok(PLMap {
            dim: f.dim,
            kind: MapKind::Suspension(Box::new(compose(bf, bg)?)),
            cells: Vec::new(),
        }),
        (MapKind::Generic, MapKind::Generic) => match f.dim {
            1 => compose_1d(f, g),
            2 => compose_2d(f, g),
            d => Err(Error::UnsupportedDimension(d)),
        },
        _ => Err(Error::InvalidSpec(
            "cannot mix generic and suspension maps of equal dimension".into(),
        )),
    }
}

pub(crate) fn interval_of(s: &Simplex) -> (Rational, Rational) {
    let a = s.vertices()[0].coord(0).clone();
    let b = s.vertices()[1].coord(0).clone();
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn compose_1d(f: &PLMap, g: &PLMap) -> Result<PLMap> {
    let mut cells = Vec::new();
    for gc in &g.cells {
        let (a, b) = interval_of(&gc.simplex);
        let ga = gc.map.apply(&RatPoint(vec![a.clone()])).0.remove(0);
        let gb = gc.map.apply(&RatPoint(vec![b.clone()])).0.remove(0);
        let (ilo, ihi) = if ga <= gb { (ga, gb) } else { (gb, ga) };
        let ginv = gc
            .map
            .inverse()
            .ok_or_else(|| Error::Invalid("singular 1D cell".into()))?;
        for fc in &f.cells {
            let (c, d) = interval_of(&fc.simplex);
            let lo = ilo.clone().max(c);
            let hi = ihi.clone().min(d);
            if lo >= hi {
                continue;
            }
            let src_a = ginv.apply(&RatPoint(vec![lo])).0.remove(0);
            let src_b = ginv.apply(&RatPoint(vec![hi])).0.remove(0);
            let (sa, sb) = if src_a <= src_b {
                (src_a, src_b)
            } else {
                (src_b, src_a)
            };
            cells.push(Cell::new(
                Simplex::segment(RatPoint(vec![sa]), RatPoint(vec![sb])),
                fc.map.compose(&gc.map),
            ));
        }
    }
    cells.sort_by(|x, y| interval_of(&x.simplex).0.cmp(&interval_of(&y.simplex).0));
    Ok(PLMap::generic(1, cells))
}

fn compose_2d(f: &PLMap, g: &PLMap) -> Result<PLMap> {
    // Precompute target-side data for f's cells.
    let f_polys: Vec<(ConvexPolytope, BoundingBox)> = f
        .cells
        .iter()
        .map(|c| {
            let poly = ConvexPolytope::from_simplex(&c.simplex)?;
            let bbox = BoundingBox::of_points(c.simplex.vertices()).unwrap();
            Ok((poly, bbox))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for gc in &g.cells {
        let image = gc.image_simplex();
        let g_poly = ConvexPolytope::from_simplex(&image).map_err(|_| {
            Error::Invalid("cell image is degenerate (singular linear part)".into())
        })?;
        let g_bbox = BoundingBox::of_points(image.vertices()).unwrap();
        let ginv = gc
            .map
            .inverse()
            .ok_or_else(|| Error::Invalid("singular cell linear part".into()))?;
        for (fc, (f_poly, f_bbox)) in f.cells.iter().zip(&f_polys) {
            if !g_bbox.intersects(f_bbox) {
                continue;
            }
            let overlap = match intersect_full(&g_poly, f_poly)? {
                Intersection::Polytope(p) => p,
                _ => continue,
            };
            // Pull back to the source chart of g; the overlap there is
            // sigma ∩ g^{-1}(tau), convex because g is affine on sigma.
            let src_loop: Vec<RatPoint> =
                overlap.vertices().iter().map(|v| ginv.apply(v)).collect();
            let src_poly = ConvexPolytope::polygon(src_loop)?;
            let map = fc.map.compose(&gc.map);
            for tri in fan_triangulate(&src_poly)? {
                cells.push(Cell::new(tri, map.clone()));
            }
        }
    }
    Ok(PLMap::generic(2, cells))
}

fn validate(map: &PLMap) -> ValidationReport {
    let mut violations = Vec::new();
    match &map.kind {
        MapKind::Suspension(base) => {
            let inner = validate(base);
            for v in inner.violations {
                violations.push(Violation {
                    check: v.check,
                    witness: format!("suspension base: {}", v.witness),
                });
            }
        }
        MapKind::Generic => {
            if map.dim == 0 || map.dim > 2 {
                violations.push(Violation {
                    check: CheckName::Covering,
                    witness: format!("generic maps support dimensions 1-2, got {}", map.dim),
                });
                return ValidationReport {
                    passed: false,
                    violations,
                };
            }
            check_complex(
                map.dim,
                &map.cells
                    .iter()
                    .map(|c| c.simplex.clone())
                    .collect::<Vec<_>>(),
                CheckName::Covering,
                "source",
                &mut violations,
            );
            check_determinants(map, &mut violations);
            check_continuity(map, &mut violations);
            let images: Vec<Simplex> = map.cells.iter().map(|c| c.image_simplex()).collect();
            check_complex(
                map.dim,
                &images,
                CheckName::Bijectivity,
                "image",
                &mut violations,
            );
            check_boundary_fixed(map, &mut violations);
        }
    }
    ValidationReport {
        passed: violations.is_empty(),
        violations,
    }
}

/// Simplicial-complex checks: volumes sum to the cube volume, everything is
/// inside the cube, interiors are pairwise disjoint, and faces match
/// (intersections of two simplices are common faces).
fn check_complex(
    dim: usize,
    simplices: &[Simplex],
    check: CheckName,
    side: &str,
    violations: &mut Vec<Violation>,
) {
    if simplices.is_empty() {
        violations.push(Violation {
            check,
            witness: format!("{side}: no cells"),
        });
        return;
    }
    let mut total = Rational::zero();
    for (i, s) in simplices.iter().enumerate() {
        if s.ambient_dim() != dim || !s.is_full_dimensional() {
            violations.push(Violation {
                check,
                witness: format!("{side} cell {i}: wrong dimension"),
            });
            return;
        }
        match s.volume() {
            Ok(v) => total += v,
            Err(_) => {
                violations.push(Violation {
                    check,
                    witness: format!("{side} cell {i}: degenerate simplex"),
                });
                return;
            }
        }
        if let Some(v) = s.vertices().iter().find(|v| !v.in_cube()) {
            violations.push(Violation {
                check,
                witness: format!("{side} cell {i}: vertex {v:?} outside the cube"),
            });
        }
    }
    if total != cube_volume(dim) {
        violations.push(Violation {
            check,
            witness: format!(
                "{side}: volumes sum to {total}, expected {}",
                cube_volume(dim)
            ),
        });
    }
    // Pairwise interior-disjointness and face matching.
    if dim == 1 {
        let mut order: Vec<usize> = (0..simplices.len()).collect();
        order.sort_by(|&a, &b| interval_of(&simplices[a]).0.cmp(&interval_of(&simplices[b]).0));
        for w in order.windows(2) {
            let (_, hi) = interval_of(&simplices[w[0]]);
            let (lo2, _) = interval_of(&simplices[w[1]]);
            if hi > lo2 {
                violations.push(Violation {
                    check,
                    witness: format!("{side} cells {} and {} overlap", w[0], w[1]),
                });
            } else if hi < lo2 {
                violations.push(Violation {
                    check,
                    witness: format!("{side}: gap between cells {} and {}", w[0], w[1]),
                });
            }
        }
        return;
    }
    let polys: Vec<Option<ConvexPolytope>> = simplices
        .iter()
        .map(|s| ConvexPolytope::from_simplex(s).ok())
        .collect();
    let bboxes: Vec<BoundingBox> = simplices
        .iter()
        .map(|s| BoundingBox::of_points(s.vertices()).unwrap())
        .collect();
    for i in 0..simplices.len() {
        for j in (i + 1)..simplices.len() {
            if !bboxes[i].intersects(&bboxes[j]) {
                continue;
            }
            let (pi, pj) = match (&polys[i], &polys[j]) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            match intersect_full(pi, pj) {
                Ok(Intersection::Empty) => {}
                Ok(Intersection::Point(p)) => {
                    let is_vertex = |s: &Simplex| s.vertices().contains(&p);
                    if !is_vertex(&simplices[i]) || !is_vertex(&simplices[j]) {
                        violations.push(Violation {
                            check,
                            witness: format!(
                                "{side} cells {i},{j} touch at {p:?} which is not a shared vertex"
                            ),
                        });
                    }
                }
                Ok(Intersection::Segment(u, v)) => {
                    let has_edge =
                        |s: &Simplex| s.vertices().contains(&u) && s.vertices().contains(&v);
                    if !has_edge(&simplices[i]) || !has_edge(&simplices[j]) {
                        violations.push(Violation {
                            check,
                            witness: format!(
                                "{side} cells {i},{j} meet along {u:?}-{v:?} which is not a shared edge"
                            ),
                        });
                    }
                }
                Ok(Intersection::Polytope(_)) => {
                    violations.push(Violation {
                        check,
                        witness: format!("{side} cells {i} and {j} have overlapping interiors"),
                    });
                }
                Err(_) => {}
            }
        }
    }
}

fn check_determinants(map: &PLMap, violations: &mut Vec<Violation>) {
    let mut sign = 0;
    for (i, c) in map.cells.iter().enumerate() {
        let d = c.map.det();
        if d.is_zero() {
            violations.push(Violation {
                check: CheckName::Bijectivity,
                witness: format!("cell {i} has determinant 0"),
            });
            continue;
        }
        let s = d.signum();
        if sign == 0 {
            sign = s;
        } else if s != sign {
            violations.push(Violation {
                check: CheckName::Orientation,
                witness: format!("cell {i} has determinant sign {s}, expected {sign}"),
            });
        }
    }
}

fn check_continuity(map: &PLMap, violations: &mut Vec<Violation>) {
    // Face-to-face complexes agree on a shared face iff they agree on its
    // vertices, and shared face vertices are shared simplex vertices.
    for i in 0..map.cells.len() {
        for j in (i + 1)..map.cells.len() {
            let (a, b) = (&map.cells[i], &map.cells[j]);
            for v in a.simplex.vertices() {
                if b.simplex.vertices().contains(v) && a.map.apply(v) != b.map.apply(v) {
                    violations.push(Violation {
                        check: CheckName::Continuity,
                        witness: format!("cells {i} and {j} disagree at shared vertex {v:?}"),
                    });
                }
            }
        }
    }
}

fn check_boundary_fixed(map: &PLMap, violations: &mut Vec<Violation>) {
    // A convex cell meets the boundary in faces of itself, and an affine map
    // fixing all vertices of a face fixes the face pointwise; so checking
    // boundary vertices suffices.
    for (i, c) in map.cells.iter().enumerate() {
        for v in c.simplex.vertices() {
            if v.on_cube_boundary() && c.map.apply(v) != *v {
                violations.push(Violation {
                    check: CheckName::BoundaryFixed,
                    witness: format!("cell {i} moves boundary vertex {v:?}"),
                });
            }
        }
    }
}

// --- serde: the wire format { dim, kind, cells } with rationals as strings ---

#[derive(Serialize, Deserialize)]
struct CellRepr {
    simplex: Vec<Vec<Rational>>,
    linear: Vec<Vec<Rational>>,
    translation: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KindRepr {
    Tag(String),
    Suspension { suspension_of: Box<MapRepr> },
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    dim: usize,
    kind: KindRepr,
    cells: Vec<CellRepr>,
}

impl From<&PLMap> for MapRepr {
    fn from(m: &PLMap) -> Self {
        MapRepr {
            dim: m.dim,
            kind: match &m.kind {
                MapKind::Generic => KindRepr::Tag("generic".into()),
                MapKind::Suspension(base) => KindRepr::Suspension {
                    suspension_of: Box::new(MapRepr::from(base.as_ref())),
                },
            },
            cells: m
                .cells
                .iter()
                .map(|c| CellRepr {
                    simplex: c.simplex.vertices().iter().map(|v| v.0.clone()).collect(),
                    linear: c.map.linear.rows().to_vec(),
                    translation: c.map.translation.0.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MapRepr> for PLMap {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<PLMap> {
        let kind = match r.kind {
            KindRepr::Tag(tag) if tag == "generic" => MapKind::Generic,
            KindRepr::Tag(tag) => {
                return Err(Error::Parse(format!("unknown map kind {tag:?}")));
            }
            KindRepr::Suspension { suspension_of } => {
                let base = PLMap::try_from(*suspension_of)?;
                if base.dim + 1 != r.dim {
                    return Err(Error::Parse(format!(
                        "suspension of a {}-dimensional map cannot have dim {}",
                        base.dim, r.dim
                    )));
                }
                MapKind::Suspension(Box::new(base))
            }
        };
        let mut cells = Vec::with_capacity(r.cells.len());
        for c in r.cells {
            for v in &c.simplex {
                if v.len() != r.dim {
                    return Err(Error::Parse("vertex dimension mismatch".into()));
                }
            }
            let linear = crate::geom::RatMatrix::from_rows(c.linear)?;
            if linear.n() != r.dim || c.translation.len() != r.dim {
                return Err(Error::Parse("affine map dimension mismatch".into()));
            }
            cells.push(Cell::new(
                Simplex::new(c.simplex.into_iter().map(RatPoint).collect()),
                RatAffineMap::new(linear, RatPoint(c.translation)),
            ));
        }
        Ok(PLMap::from_parts(r.dim, kind, cells))
    }
}

impl Serialize for PLMap {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MapRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PLMap {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = MapRepr::deserialize(deserializer)?;
        PLMap::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::rat;

    /// 1D map from nodes given as (xp, xq, yp, yq) rational pairs.
    pub(crate) fn onedim(nodes: &[(i64, i64, i64, i64)]) -> PLMap {
        let pts: Vec<(Rational, Rational)> = nodes
            .iter()
            .map(|&(xp, xq, yp, yq)| (rat(xp, xq), rat(yp, yq)))
            .collect();
        let mut cells = Vec::new();
        for w in pts.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let slope = (y1 - y0) / (x1 - x0);
            let offset = y0 - &(&slope * x0);
            cells.push(Cell::new(
                Simplex::segment(RatPoint(vec![x0.clone()]), RatPoint(vec![x1.clone()])),
                RatAffineMap::new(
                    crate::geom::RatMatrix::from_rows(vec![vec![slope]]).unwrap(),
                    RatPoint(vec![offset]),
                ),
            ));
        }
        PLMap::generic(1, cells)
    }

    fn sample_f() -> PLMap {
        onedim(&[(-1, 1, -1, 1), (0, 1, 1, 2), (1, 1, 1, 1)])
    }

    #[test]
    fn identity_is_valid_and_identity() {
        for dim in [1, 2] {
            let id = PLMap::identity(dim);
            assert!(id.validate().passed, "{:?}", id.validate().violations);
            assert!(id.is_identity_map());
        }
    }

    #[test]
    fn apply_interpolates() {
        let f = sample_f();
        assert!(f.validate().passed);
        assert_eq!(
            f.apply(&RatPoint(vec![rat(0, 1)])).unwrap(),
            RatPoint(vec![rat(1, 2)])
        );
        // Slope 3/2 on [-1,0]: f(-1/2) = -1/4.
        assert_eq!(
            f.apply(&RatPoint(vec![rat(-1, 2)])).unwrap(),
            RatPoint(vec![rat(-1, 4)])
        );
        assert!(f.apply(&RatPoint(vec![rat(5, 1)])).is_err());
    }

    #[test]
    fn compose_1d_breakpoints_and_slopes() {
        let f = sample_f();
        let ff = f.compose(&f).unwrap();
        assert!(ff.validate().passed);
        // Breakpoints -1/3 and 0 with slopes 9/4, 3/4, 1/4.
        let slopes: Vec<Rational> = ff
            .cells()
            .iter()
            .map(|c| c.map.linear.get(0, 0).clone())
            .collect();
        assert_eq!(slopes, vec![rat(9, 4), rat(3, 4), rat(1, 4)]);
        let breaks: Vec<Rational> = ff.cells()[..2]
            .iter()
            .map(|c| interval_of(&c.simplex).1)
            .collect();
        assert_eq!(breaks, vec![rat(-1, 3), rat(0, 1)]);
        // -1/3 is a breakpoint of f∘f because f carries it onto f's own
        // breakpoint: f(-1/3) = 0.
        assert_eq!(
            f.apply(&RatPoint(vec![rat(-1, 3)])).unwrap(),
            RatPoint(vec![rat(0, 1)])
        );
    }

    #[test]
    fn inverse_reflects_graph() {
        let f = sample_f();
        let inv = f.inverse().unwrap();
        assert!(inv.validate().passed);
        // Breakpoint at 1/2 with slopes 2/3 then 2.
        let slopes: Vec<Rational> = inv
            .cells()
            .iter()
            .map(|c| c.map.linear.get(0, 0).clone())
            .collect();
        assert_eq!(slopes, vec![rat(2, 3), rat(2, 1)]);
        assert!(f.compose(&inv).unwrap().is_identity_map());
        assert!(inv.compose(&f).unwrap().is_identity_map());
        assert_eq!(inv.cell_count_raw(), f.cell_count_raw());
    }

    #[test]
    fn equals_sees_through_retriangulation() {
        let f = sample_f();
        // Same function with a redundant node at -1/2 on the slope-3/2 piece.
        let g = onedim(&[(-1, 1, -1, 1), (-1, 2, -1, 4), (0, 1, 1, 2), (1, 1, 1, 1)]);
        assert!(f.equals(&g).unwrap());
        assert!(!f.equals(&PLMap::identity(1)).unwrap());
        assert!(f.equals(&f).unwrap());
    }

    #[test]
    fn validation_catches_broken_maps() {
        // Determinant zero.
        let mut bad = PLMap::identity(2);
        bad.cells[0].map = RatAffineMap::new(
            crate::geom::RatMatrix::from_ints(&[&[1, 0], &[0, 0]]),
            RatPoint::origin(2),
        );
        let report = bad.validate();
        assert!(!report.passed);
        assert!(report
            .violations
            .iter()
            .any(|v| v.check == CheckName::Bijectivity && v.witness.contains("cell 0")));

        // Mismatched maps on a shared edge.
        let mut bad2 = PLMap::identity(2);
        bad2.cells[1].map = RatAffineMap::new(
            crate::geom::RatMatrix::from_ints(&[&[2, 0], &[0, 1]]),
            RatPoint::origin(2),
        );
        let report2 = bad2.validate();
        assert!(report2
            .violations
            .iter()
            .any(|v| v.check == CheckName::Continuity));

        // Boundary moved.
        let mut bad3 = onedim(&[(-1, 1, -1, 1), (1, 1, 1, 1)]);
        bad3.cells[0].map = RatAffineMap::new(
            crate::geom::RatMatrix::from_ints(&[&[1]]),
            RatPoint(vec![rat(1, 4)]),
        );
        assert!(bad3
            .validate()
            .violations
            .iter()
            .any(|v| v.check == CheckName::BoundaryFixed));
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let f = sample_f();
        let text = f.to_json();
        let back: PLMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"1/2\""));
        assert!(text.contains("\"generic\""));
    }
}
