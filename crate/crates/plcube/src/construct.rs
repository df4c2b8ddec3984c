//! Explicit generators: 1D breakpoint maps, the boundary-fixing rescaling
//! family, suspension to higher dimensions, area-preserving twist roots,
//! support embeddings, the Klein-relation pair, and maps linear near zero.

use crate::error::{Error, Result};
use crate::geom::{BoundingBox, RatAffineMap, RatMatrix, RatPoint, Simplex};
use crate::plmap::{Cell, MapKind, PLMap};
use crate::rational::Rational;

/// Nodes of a 1D PL map: strictly increasing in both coordinates, from
/// (-1,-1) to (1,1).
#[derive(Debug, Clone)]
pub struct BreakpointSpec {
    nodes: Vec<(Rational, Rational)>,
}

impl BreakpointSpec {
    pub fn new(nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidSpec("need at least two nodes".into()));
        }
        let minus_one = Rational::from_int(-1);
        let one = Rational::one();
        if nodes.first() != Some(&(minus_one.clone(), minus_one))
            || nodes.last() != Some(&(one.clone(), one))
        {
            return Err(Error::InvalidSpec(
                "nodes must start at (-1,-1) and end at (1,1)".into(),
            ));
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::InvalidSpec(
                    "nodes must be strictly increasing in x and y".into(),
                ));
            }
        }
        Ok(BreakpointSpec { nodes })
    }

    pub fn nodes(&self) -> &[(Rational, Rational)] {
        &self.nodes
    }
}

/// 1D map interpolating the nodes affinely.
pub fn pl1d(spec: &BreakpointSpec) -> Result<PLMap> {
    let mut cells = Vec::new();
    for w in spec.nodes.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        let slope = (y1 - y0) / (x1 - x0);
        let offset = y0 - &(&slope * x0);
        cells.push(Cell::new(
            Simplex::segment(RatPoint(vec![x0.clone()]), RatPoint(vec![x1.clone()])),
            RatAffineMap::new(
                RatMatrix::from_rows(vec![vec![slope]]).unwrap(),
                RatPoint(vec![offset]),
            ),
        ));
    }
    Ok(PLMap::generic(1, cells))
}

/// The rescaling family `f_t(x) = t f(x/t)` on `|x|_inf <= t`, identity
/// outside. Convention: `f_1 = f` and `f_0 = Id`.
pub fn alexander(f: &PLMap, t: &Rational) -> Result<PLMap> {
    if t.is_negative() || t > &Rational::one() {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, 1]")));
    }
    if t.is_zero() {
        return Ok(PLMap::identity(f.dim()));
    }
    if t.is_one() {
        return Ok(f.clone());
    }
    if !matches!(f.kind(), MapKind::Generic) {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    // Scaled copy: x -> t f(x/t) sends cell t*sigma by (A, t*b).
    let mut cells: Vec<Cell> = f
        .cells()
        .iter()
        .map(|c| {
            Cell::new(
                Simplex::new(
                    c.simplex
                        .vertices()
                        .iter()
                        .map(|v| v.scale(t))
                        .collect(),
                ),
                RatAffineMap::new(c.map.linear.clone(), c.map.translation.scale(t)),
            )
        })
        .collect();
    match f.dim() {
        1 => {
            for (a, b) in [
                (Rational::from_int(-1), -t.clone()),
                (t.clone(), Rational::from_int(1)),
            ] {
                cells.push(Cell::new(
                    Simplex::segment(RatPoint(vec![a]), RatPoint(vec![b])),
                    RatAffineMap::identity(1),
                ));
            }
        }
        2 => {
            // Identity collar between t*dI^2 and dI^2: radial quads between
            // consecutive scaled boundary vertices and their projections.
            let mut rim: Vec<RatPoint> = cells
                .iter()
                .flat_map(|c| c.simplex.vertices().iter().cloned())
                .filter(|v| v.linf_norm() == *t)
                .collect();
            rim.sort_by(|a, b| square_pos(a, t).cmp(&square_pos(b, t)));
            rim.dedup();
            let n = rim.len();
            for i in 0..n {
                let p = &rim[i];
                let q = &rim[(i + 1) % n];
                let p_out = p.scale(&t.recip());
                let q_out = q.scale(&t.recip());
                cells.push(Cell::new(
                    Simplex::new(vec![p.clone(), p_out.clone(), q_out.clone()]),
                    RatAffineMap::identity(2),
                ));
                cells.push(Cell::new(
                    Simplex::new(vec![p.clone(), q_out, q.clone()]),
                    RatAffineMap::identity(2),
                ));
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }
    Ok(PLMap::generic(f.dim(), cells))
}

/// Suspension to one dimension higher: cone each cell to the apexes
/// `(0,...,0,±1)` of the bipyramid over the cube, identity outside. An
/// injective homomorphism.
pub fn suspend(f: &PLMap) -> Result<PLMap> {
    match f.dim() {
        1 => {
            let one = Rational::one();
            let mut cells = Vec::new();
            for c in f.cells() {
                let a = c.simplex.vertices()[0].coord(0).clone();
                let b = c.simplex.vertices()[1].coord(0).clone();
                let slope = c.map.linear.get(0, 0).clone();
                let offset = c.map.translation.coord(0).clone();
                for sign in [one.clone(), -one.clone()] {
                    // On the cone to (0, sign): (x, y) -> (slope x + offset
                    // (1 - sign y), y), checked on the three vertices.
                    let tri = Simplex::new(vec![
                        RatPoint(vec![a.clone(), Rational::zero()]),
                        RatPoint(vec![b.clone(), Rational::zero()]),
                        RatPoint(vec![Rational::zero(), sign.clone()]),
                    ]);
                    let linear = RatMatrix::from_rows(vec![
                        vec![slope.clone(), -(&offset * &sign)],
                        vec![Rational::zero(), Rational::one()],
                    ])
                    .unwrap();
                    let map = RatAffineMap::new(
                        linear,
                        RatPoint(vec![offset.clone(), Rational::zero()]),
                    );
                    cells.push(Cell::new(tri, map));
                }
            }
            // The four corners outside the bipyramid stay put.
            let corners = [
                [[1, 0], [1, 1], [0, 1]],
                [[0, 1], [-1, 1], [-1, 0]],
                [[-1, 0], [-1, -1], [0, -1]],
                [[0, -1], [1, -1], [1, 0]],
            ];
            for tri in corners {
                cells.push(Cell::new(
                    Simplex::new(tri.iter().map(|c| RatPoint::from_ints(c)).collect()),
                    RatAffineMap::identity(2),
                ));
            }
            Ok(PLMap::generic(2, cells))
        }
        _ => Ok(PLMap::from_parts(
            f.dim() + 1,
            MapKind::Suspension(Box::new(f.clone())),
            Vec::new(),
        )),
    }
}

/// Parameters of a PL twist root: `inner` is the half-width of the inner
/// concentric square, `fraction` the signed fraction of the inner perimeter
/// slid at that square (the slide decays affinely to zero at the boundary
/// and extends inside proportionally to each layer's own perimeter).
#[derive(Debug, Clone)]
pub struct TwistSpec {
    inner: Rational,
    fraction: Rational,
}

impl TwistSpec {
    pub fn new(inner: Rational, fraction: Rational) -> Result<Self> {
        if !inner.is_positive() || inner >= Rational::one() {
            return Err(Error::InvalidSpec(format!(
                "inner half-width {inner} must lie in (0, 1)"
            )));
        }
        if fraction.is_zero() {
            return Err(Error::InvalidSpec("fraction must be nonzero".into()));
        }
        Ok(TwistSpec { inner, fraction })
    }

    pub fn inner(&self) -> &Rational {
        &self.inner
    }

    pub fn fraction(&self) -> &Rational {
        &self.fraction
    }
}

/// Counterclockwise arclength position of `p` on the square of half-width
/// `ell`, measured from the corner `(ell, -ell)`.
fn square_pos(p: &RatPoint, ell: &Rational) -> Rational {
    let (x, y) = (p.coord(0), p.coord(1));
    debug_assert_eq!(&p.linf_norm(), ell);
    if x == ell && y < ell {
        y + ell
    } else if y == ell && x > &-ell.clone() {
        Rational::from_int(2) * ell + (ell - x)
    } else if *x == -ell.clone() && y > &-ell.clone() {
        Rational::from_int(4) * ell + (ell - y)
    } else {
        Rational::from_int(6) * ell + (x + ell)
    }
}

/// Inverse of [`square_pos`]; `pos` is taken modulo the perimeter `8 ell`.
fn square_point(pos: &Rational, ell: &Rational) -> RatPoint {
    let perimeter = Rational::from_int(8) * ell;
    let p = pos.rem_euclid(&perimeter);
    let side_len = Rational::from_int(2) * ell;
    let side = (&p / &side_len).floor_int();
    let t = &p - &(Rational::new(side.clone(), 1.into()).unwrap() * &side_len);
    let side: i64 = i64::try_from(&side).unwrap();
    match side {
        0 => RatPoint(vec![ell.clone(), &t - ell]),
        1 => RatPoint(vec![ell - &t, ell.clone()]),
        2 => RatPoint(vec![-ell.clone(), ell - &t]),
        _ => RatPoint(vec![&t - ell, -ell.clone()]),
    }
}

/// Pointwise evaluation of the twist: slide along the concentric square of
/// half-width `l = |p|_inf` by `fraction * 8 l` inside the inner square and
/// by `c (1 - l)` outside it, where `c` matches the two at `l = inner`.
fn twist_point(p: &RatPoint, inner: &Rational, fraction: &Rational, c: &Rational) -> RatPoint {
    let ell = p.linf_norm();
    if ell.is_zero() {
        return p.clone();
    }
    let delta = if ell <= *inner {
        fraction * &(Rational::from_int(8) * &ell)
    } else {
        c * &(Rational::one() - &ell)
    };
    let pos = square_pos(p, &ell) + delta;
    square_point(&pos, &ell)
}

/// The twist root: an area-preserving PL map preserving the foliation by
/// concentric squares. Fractions of modulus >= 1/4 are built as powers of a
/// smaller root (slides along a fixed layer add); negative fractions via the
/// inverse.
pub fn twist_root(spec: &TwistSpec) -> Result<PLMap> {
    let fraction = spec.fraction.abs();
    let quarter = Rational::ratio(1, 4);
    let pieces = if fraction < quarter {
        1
    } else {
        let k = (Rational::from_int(4) * &fraction).floor_int() + 1u32;
        i64::try_from(&k).map_err(|_| Error::InvalidSpec("fraction too large".into()))?
    };
    let base = twist_base(
        &spec.inner,
        &(&fraction / &Rational::from_int(pieces)),
    )?;
    let mut result = if pieces == 1 {
        base
    } else {
        base.power(pieces)?
    };
    if spec.fraction.is_negative() {
        result = result.inverse()?;
    }
    Ok(result)
}

/// Direct cell construction of the twist for `0 < fraction < 1/4`: points
/// slide across at most one corner per layer.
fn twist_base(inner: &Rational, fraction: &Rational) -> Result<PLMap> {
    let one = Rational::one();
    let two = Rational::from_int(2);
    let eight = Rational::from_int(8);
    // Matching constant of the outer zone: c (1 - inner) = fraction * 8 inner.
    let c = fraction * &eight * inner / (&one - inner);
    let interpolate = |tri: &Simplex| -> Result<RatAffineMap> {
        let dst: Vec<RatPoint> = tri
            .vertices()
            .iter()
            .map(|v| twist_point(v, inner, fraction, &c))
            .collect();
        RatAffineMap::interpolating(tri.vertices(), &dst)
    };
    let mut cells: Vec<Cell> = Vec::new();

    // Inner fan: sectors between corner directions and their slide
    // preimages, coned to the origin.
    let delta_in = fraction * &eight * inner;
    let mut positions: Vec<Rational> = Vec::new();
    for k in 0..4 {
        let corner = Rational::from_int(2 * k) * inner;
        positions.push(corner.rem_euclid(&(&eight * inner)));
        positions.push((&corner - &delta_in).rem_euclid(&(&eight * inner)));
    }
    positions.sort();
    positions.dedup();
    let origin = RatPoint::origin(2);
    for i in 0..positions.len() {
        let u = square_point(&positions[i], inner);
        let v = square_point(&positions[(i + 1) % positions.len()], inner);
        let tri = Simplex::new(vec![origin.clone(), u, v]);
        let map = interpolate(&tri)?;
        debug_assert!(map.translation.is_zero());
        cells.push(Cell::new(tri, map));
    }

    // Annulus: per side, the non-crossing quad and the corner-crossing
    // triangle, split along the corner-preimage segment.
    for side in 0..4i64 {
        let start = Rational::from_int(2 * side) * inner;
        let end = Rational::from_int(2 * (side + 1)) * inner;
        let c_in_start = square_point(&start, inner);
        let c_in_end = square_point(&end, inner);
        let c_out_start = c_in_start.scale(&inner.recip());
        let c_out_end = c_in_end.scale(&inner.recip());
        // Preimage of the side-end corner on the inner square.
        let p0 = square_point(&(&end - &delta_in), inner);
        let quad = [
            c_in_start.clone(),
            c_out_start.clone(),
            c_out_end.clone(),
            p0.clone(),
        ];
        // Fan the quad from its first vertex.
        for tri in [
            [&quad[0], &quad[1], &quad[2]],
            [&quad[0], &quad[2], &quad[3]],
        ] {
            let s = Simplex::new(vec![tri[0].clone(), tri[1].clone(), tri[2].clone()]);
            let map = interpolate(&s)?;
            cells.push(Cell::new(s, map));
        }
        let crossing = Simplex::new(vec![p0.clone(), c_out_end.clone(), c_in_end.clone()]);
        let map = interpolate(&crossing)?;
        cells.push(Cell::new(crossing, map));
    }

    let map = PLMap::generic(2, cells);
    debug_assert!(&two * inner > Rational::zero());
    Ok(map)
}

/// Conjugate `f` into an axis-aligned box strictly inside the cube and
/// extend by the identity.
pub fn embed_support(f: &PLMap, target: &BoundingBox) -> Result<PLMap> {
    let dim = f.dim();
    if target.min.dim() != dim || target.max.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: target.min.dim(),
        });
    }
    if f.is_identity_map() {
        return Ok(PLMap::identity(dim));
    }
    if !matches!(f.kind(), MapKind::Generic) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let one = Rational::one();
    let two = Rational::from_int(2);
    for i in 0..dim {
        if target.min.coord(i) <= &-one.clone()
            || target.max.coord(i) >= &one
            || target.min.coord(i) >= target.max.coord(i)
        {
            return Err(Error::OutOfRange(format!(
                "target box must be nondegenerate and strictly inside the cube, got {:?}..{:?}",
                target.min, target.max
            )));
        }
    }
    // T: cube -> box, diagonal scaling plus translation.
    let center = target.min.add(&target.max).scale(&two.recip());
    let widths: Vec<Rational> = (0..dim)
        .map(|i| (target.max.coord(i) - target.min.coord(i)) / &two)
        .collect();
    let fwd = RatAffineMap::new(
        RatMatrix::from_rows(
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if i == j {
                                widths[i].clone()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        )
        .unwrap(),
        center,
    );
    let back = fwd.inverse().expect("diagonal scaling is invertible");

    let mut cells: Vec<Cell> = f
        .cells()
        .iter()
        .map(|c| {
            Cell::new(
                Simplex::new(
                    c.simplex
                        .vertices()
                        .iter()
                        .map(|v| fwd.apply(v))
                        .collect(),
                ),
                fwd.compose(&c.map).compose(&back),
            )
        })
        .collect();

    match dim {
        1 => {
            let (lo, hi) = (target.min.coord(0).clone(), target.max.coord(0).clone());
            cells.push(Cell::new(
                Simplex::segment(RatPoint(vec![Rational::from_int(-1)]), RatPoint(vec![lo])),
                RatAffineMap::identity(1),
            ));
            cells.push(Cell::new(
                Simplex::segment(RatPoint(vec![hi]), RatPoint(vec![Rational::from_int(1)])),
                RatAffineMap::identity(1),
            ));
        }
        2 => {
            let sq = [
                RatPoint::from_ints(&[-1, -1]),
                RatPoint::from_ints(&[1, -1]),
                RatPoint::from_ints(&[1, 1]),
                RatPoint::from_ints(&[-1, 1]),
            ];
            let bx = [
                target.min.clone(),
                RatPoint(vec![target.max.coord(0).clone(), target.min.coord(1).clone()]),
                target.max.clone(),
                RatPoint(vec![target.min.coord(0).clone(), target.max.coord(1).clone()]),
            ];
            // Vertices of the embedded complex on each box side, so the
            // collar matches the inner triangulation face to face.
            let mut box_side_vertices: Vec<Vec<RatPoint>> = vec![Vec::new(); 4];
            for c in &cells {
                for v in c.simplex.vertices() {
                    for side in 0..4 {
                        let (a, b) = (&bx[side], &bx[(side + 1) % 4]);
                        if crate::geom::on_segment(v, a, b) {
                            box_side_vertices[side].push(v.clone());
                        }
                    }
                }
            }
            for side in 0..4 {
                let (a, b) = (&bx[side], &bx[(side + 1) % 4]);
                let dir = b.sub(a);
                box_side_vertices[side].sort_by(|p, q| dir.dot(p).cmp(&dir.dot(q)));
                box_side_vertices[side].dedup();
                // Region loop: square edge, inward connector, box side
                // reversed (with its subdivision points), outward connector.
                let mut loop_pts = vec![sq[side].clone(), sq[(side + 1) % 4].clone()];
                loop_pts.extend(box_side_vertices[side].iter().rev().cloned());
                for w in 1..loop_pts.len() - 1 {
                    cells.push(Cell::new(
                        Simplex::new(vec![
                            loop_pts[0].clone(),
                            loop_pts[w].clone(),
                            loop_pts[w + 1].clone(),
                        ]),
                        RatAffineMap::identity(2),
                    ));
                }
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }
    Ok(PLMap::generic(dim, cells))
}

/// The pair (f, g) with `f^{-1} g f = g^{-1}`: f is the half Dehn twist
/// (rotating the inner square by 180 degrees), g acts by a small twist on
/// one little square and its inverse on the mirror square, so conjugation by
/// f swaps the two supports.
pub fn klein_pair() -> Result<(PLMap, PLMap)> {
    let spec = TwistSpec::new(Rational::ratio(1, 2), Rational::ratio(1, 12))?;
    let h = twist_root(&spec)?;
    let f = h.power(6)?;
    let left = BoundingBox {
        min: RatPoint(vec![Rational::ratio(-3, 8), Rational::ratio(-1, 8)]),
        max: RatPoint(vec![Rational::ratio(-1, 8), Rational::ratio(1, 8)]),
    };
    let right = BoundingBox {
        min: RatPoint(vec![Rational::ratio(1, 8), Rational::ratio(-1, 8)]),
        max: RatPoint(vec![Rational::ratio(3, 8), Rational::ratio(1, 8)]),
    };
    let g = embed_support(&h, &left)?
        .compose(&embed_support(&h.inverse()?, &right)?)?
        .canonicalize()?;
    Ok((f, g))
}

/// A map of the square equal to `x -> Mx` near zero and the identity on the
/// boundary, for `det M > 0`. Joins the scaled square to the boundary corner
/// to corner; when that join folds, M is factored into elementary shears and
/// a positive diagonal applied at nested radii.
pub fn linear_near_zero(m: &RatMatrix, r: &Rational) -> Result<PLMap> {
    if m.n() != 2 {
        return Err(Error::UnsupportedDimension(m.n()));
    }
    if !m.det().is_positive() {
        return Err(Error::OutOfRange(
            "matrix must have positive determinant".into(),
        ));
    }
    if !r.is_positive() || r >= &Rational::one() {
        return Err(Error::OutOfRange(format!("radius {r} outside (0, 1)")));
    }
    if m.is_identity() {
        return Ok(PLMap::identity(2));
    }
    let radius = shrink_radius(m, r, &Rational::one());
    let direct = corner_join(m, &radius);
    if direct.validate().passed {
        return Ok(direct);
    }
    // Factored route: M = E_1 ... E_k with tame elementary factors; apply
    // each at a radius small enough that the inner factor's image stays in
    // the next linear zone, so the germ at 0 is the full product.
    let factors = elementary_factors(m);
    let mut maps: Vec<PLMap> = Vec::new();
    let mut bound = Rational::one();
    let mut radius = r.clone();
    for e in &factors {
        radius = shrink_radius(e, &radius, &bound);
        let piece = corner_join(e, &radius);
        if !piece.validate().passed {
            return Err(Error::Invalid(format!(
                "elementary factor {e:?} folds at radius {radius}"
            )));
        }
        bound = radius.clone();
        maps.push(piece);
    }
    let mut result = maps[0].clone();
    for piece in &maps[1..] {
        result = result.compose(piece)?.canonicalize()?;
    }
    Ok(result)
}

/// Largest radius of the form `r / 2^k` with `M(radius I^2)` inside
/// `bound * I^2` (strictly inside the cube when bound = 1).
fn shrink_radius(m: &RatMatrix, r: &Rational, bound: &Rational) -> Rational {
    let corners = [
        RatPoint::from_ints(&[1, 1]),
        RatPoint::from_ints(&[1, -1]),
    ];
    let reach = corners
        .iter()
        .map(|c| m.mul_vec(c).linf_norm())
        .fold(Rational::zero(), Rational::max);
    let mut radius = r.clone();
    let half = Rational::ratio(1, 2);
    while &radius * &reach >= *bound {
        radius = radius * &half;
    }
    radius
}

/// The 10-cell join: `M` on the scaled square, corner-to-corner quads to the
/// boundary. Valid only when no image triangle folds; callers validate.
fn corner_join(m: &RatMatrix, radius: &Rational) -> PLMap {
    let r = radius;
    let corners_in = [
        RatPoint(vec![r.clone(), -r.clone()]),
        RatPoint(vec![r.clone(), r.clone()]),
        RatPoint(vec![-r.clone(), r.clone()]),
        RatPoint(vec![-r.clone(), -r.clone()]),
    ];
    let corners_out = [
        RatPoint::from_ints(&[1, -1]),
        RatPoint::from_ints(&[1, 1]),
        RatPoint::from_ints(&[-1, 1]),
        RatPoint::from_ints(&[-1, -1]),
    ];
    let zero = RatPoint::origin(2);
    let linear = RatAffineMap::new(m.clone(), zero);
    let mut cells = vec![
        Cell::new(
            Simplex::new(vec![
                corners_in[3].clone(),
                corners_in[0].clone(),
                corners_in[1].clone(),
            ]),
            linear.clone(),
        ),
        Cell::new(
            Simplex::new(vec![
                corners_in[3].clone(),
                corners_in[1].clone(),
                corners_in[2].clone(),
            ]),
            linear,
        ),
    ];
    for side in 0..4 {
        let quad = [
            &corners_in[side],
            &corners_out[side],
            &corners_out[(side + 1) % 4],
            &corners_in[(side + 1) % 4],
        ];
        for tri in [[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]] {
            let s = Simplex::new(vec![tri[0].clone(), tri[1].clone(), tri[2].clone()]);
            let dst: Vec<RatPoint> = s
                .vertices()
                .iter()
                .map(|v| {
                    if v.linf_norm() == *r {
                        m.mul_vec(v)
                    } else {
                        v.clone()
                    }
                })
                .collect();
            match RatAffineMap::interpolating(s.vertices(), &dst) {
                Ok(map) => cells.push(Cell::new(s, map)),
                Err(_) => {
                    // Degenerate target; keep a placeholder the validator
                    // will reject so the caller takes the factored route.
                    cells.push(Cell::new(
                        s,
                        RatAffineMap::new(
                            RatMatrix::from_ints(&[&[0, 0], &[0, 0]]),
                            RatPoint::origin(2),
                        ),
                    ));
                }
            }
        }
    }
    PLMap::generic(2, cells)
}

/// L·D·U factorization into elementary shears (parameters of modulus at
/// most 1/2) and one positive diagonal matrix. Keeps the factor list short
/// so that the nested radii of the corner joins stay coarse.
fn elementary_factors(m: &RatMatrix) -> Vec<RatMatrix> {
    let one = Rational::one();
    let zero = Rational::zero();
    let shear_u = |s: &Rational| {
        RatMatrix::from_rows(vec![
            vec![one.clone(), s.clone()],
            vec![zero.clone(), one.clone()],
        ])
        .unwrap()
    };
    let shear_l = |s: &Rational| {
        RatMatrix::from_rows(vec![
            vec![one.clone(), zero.clone()],
            vec![s.clone(), one.clone()],
        ])
        .unwrap()
    };

    let mut current = m.clone();
    let mut raw: Vec<RatMatrix> = Vec::new();
    // A zero pivot is fixed by one unit shear: M = u(1) (u(1)^{-1} M).
    if current.get(0, 0).is_zero() {
        raw.push(shear_u(&one));
        current = shear_u(&-one.clone()).mul(&current);
    }
    // M' = L D U with small off-diagonal parameters c/a and b/a.
    let a = current.get(0, 0).clone();
    let det = current.det();
    let l_param = current.get(1, 0) / &a;
    let u_param = current.get(0, 1) / &a;
    if !l_param.is_zero() {
        raw.push(shear_l(&l_param));
    }
    let (da, dd) = (a.clone(), &det / &a);
    if da.is_negative() {
        // diag(-p, -q) = (rot 90)^2 diag(p, q); rot 90 is three unit shears.
        for _ in 0..2 {
            raw.push(shear_u(&-one.clone()));
            raw.push(shear_l(&one));
            raw.push(shear_u(&-one.clone()));
        }
        raw.push(
            RatMatrix::from_rows(vec![
                vec![-da.clone(), zero.clone()],
                vec![zero.clone(), -dd.clone()],
            ])
            .unwrap(),
        );
    } else if !da.is_one() || !dd.is_one() {
        raw.push(
            RatMatrix::from_rows(vec![
                vec![da.clone(), zero.clone()],
                vec![zero.clone(), dd.clone()],
            ])
            .unwrap(),
        );
    }
    if !u_param.is_zero() {
        raw.push(shear_u(&u_param));
    }

    // Split strong shears into pieces with parameter of modulus <= 1/2.
    let mut out = Vec::new();
    let half = Rational::ratio(1, 2);
    for e in raw {
        let (u, l) = (e.get(0, 1).clone(), e.get(1, 0).clone());
        let is_shear_u = e.get(0, 0).is_one() && e.get(1, 1).is_one() && l.is_zero();
        let is_shear_l = e.get(0, 0).is_one() && e.get(1, 1).is_one() && u.is_zero();
        let param = if is_shear_u { u } else { l.clone() };
        if (is_shear_u || is_shear_l) && param.abs() > half {
            let k = (&param.abs() / &half).ceil_int();
            let k = i64::try_from(&k).expect("shear split count fits i64");
            let piece = &param / &Rational::from_int(k);
            for _ in 0..k {
                out.push(if is_shear_u {
                    shear_u(&piece)
                } else {
                    shear_l(&piece)
                });
            }
        } else {
            out.push(e);
        }
    }
    debug_assert_eq!(
        out.iter().fold(RatMatrix::identity(2), |acc, e| acc.mul(e)),
        *m
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn spec_nodes(nodes: &[(i64, i64, i64, i64)]) -> BreakpointSpec {
        BreakpointSpec::new(
            nodes
                .iter()
                .map(|&(xp, xq, yp, yq)| (rat(xp, xq), rat(yp, yq)))
                .collect(),
        )
        .unwrap()
    }

    fn sample_f() -> PLMap {
        pl1d(&spec_nodes(&[(-1, 1, -1, 1), (0, 1, 1, 2), (1, 1, 1, 1)])).unwrap()
    }

    fn standard_twist() -> PLMap {
        twist_root(&TwistSpec::new(rat(1, 2), rat(1, 12)).unwrap()).unwrap()
    }

    fn pt2(xp: i64, xq: i64, yp: i64, yq: i64) -> RatPoint {
        RatPoint(vec![rat(xp, xq), rat(yp, yq)])
    }

    #[test]
    fn pl1d_basics() {
        let id = pl1d(&spec_nodes(&[(-1, 1, -1, 1), (1, 1, 1, 1)])).unwrap();
        assert!(id.is_identity_map());
        let f = sample_f();
        assert!(f.validate().passed);
        let slopes: Vec<Rational> = f
            .cells()
            .iter()
            .map(|c| c.map.linear.get(0, 0).clone())
            .collect();
        assert_eq!(slopes, vec![rat(3, 2), rat(1, 2)]);
        assert!(BreakpointSpec::new(vec![
            (rat(-1, 1), rat(-1, 1)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 2), rat(1, 4)),
            (rat(1, 1), rat(1, 1)),
        ])
        .is_err());
    }

    #[test]
    fn alexander_family() {
        let f = sample_f();
        assert!(alexander(&f, &rat(1, 1)).unwrap().equals(&f).unwrap());
        assert!(alexander(&f, &rat(0, 1)).unwrap().is_identity_map());
        let half = alexander(&f, &rat(1, 2)).unwrap();
        assert!(half.validate().passed, "{:?}", half.validate().violations);
        // f_t(0) = t f(0) = 1/4.
        assert_eq!(
            half.apply(&RatPoint(vec![rat(0, 1)])).unwrap(),
            RatPoint(vec![rat(1, 4)])
        );
        // Supported in t I^n.
        assert_eq!(
            half.apply(&RatPoint(vec![rat(3, 4)])).unwrap(),
            RatPoint(vec![rat(3, 4)])
        );
        assert!(alexander(&f, &rat(3, 2)).is_err());

        let h = standard_twist();
        let ht = alexander(&h, &rat(1, 2)).unwrap();
        assert!(ht.validate().passed, "{:?}", ht.validate().violations);
        assert_eq!(ht.apply(&pt2(3, 4, 0, 1)).unwrap(), pt2(3, 4, 0, 1));
    }

    #[test]
    fn suspension_of_1d() {
        assert!(suspend(&PLMap::identity(1)).unwrap().is_identity_map());
        let f = sample_f();
        let sf = suspend(&f).unwrap();
        assert!(sf.validate().passed, "{:?}", sf.validate().violations);
        // Equatorial slice recovers f.
        assert_eq!(sf.apply(&pt2(0, 1, 0, 1)).unwrap(), pt2(1, 2, 0, 1));
        // Outside the bipyramid nothing moves.
        assert_eq!(sf.apply(&pt2(3, 4, 3, 4)).unwrap(), pt2(3, 4, 3, 4));
        // One more level up delegates to the base.
        let ssf = suspend(&sf).unwrap();
        assert_eq!(ssf.dim(), 3);
        let x = RatPoint(vec![rat(0, 1), rat(0, 1), rat(1, 2)]);
        assert_eq!(
            ssf.apply(&x).unwrap(),
            RatPoint(vec![rat(1, 4), rat(0, 1), rat(1, 2)])
        );
    }

    #[test]
    fn twist_is_valid_and_area_preserving() {
        let h = standard_twist();
        let report = h.validate();
        assert!(report.passed, "{:?}", report.violations);
        for c in h.cells() {
            assert_eq!(c.map.det(), rat(1, 1), "cell {:?}", c);
        }
        // Slide distance (2/3)(1 - 3/4) = 1/6 on the right side.
        assert_eq!(h.apply(&pt2(3, 4, 0, 1)).unwrap(), pt2(3, 4, 1, 6));
        // Inner layer slides by fraction * 8 * l = 1/3.
        assert_eq!(h.apply(&pt2(1, 2, 0, 1)).unwrap(), pt2(1, 2, 1, 3));
    }

    #[test]
    fn twist_sixth_power_rotates_inner_square() {
        let h = standard_twist();
        let f = h.power(6).unwrap();
        assert_eq!(f.apply(&pt2(1, 2, 0, 1)).unwrap(), pt2(-1, 2, 0, 1));
        assert_eq!(f.apply(&pt2(1, 4, 1, 4)).unwrap(), pt2(-1, 4, -1, 4));
    }

    #[test]
    fn twist_twelfth_power_is_dehn_twist() {
        let h = standard_twist();
        let t = h.power(12).unwrap();
        assert!(t.validate().passed);
        // Identity on the inner square and the boundary, but not globally.
        assert_eq!(t.apply(&pt2(1, 2, 0, 1)).unwrap(), pt2(1, 2, 0, 1));
        assert_eq!(t.apply(&pt2(1, 4, -1, 4)).unwrap(), pt2(1, 4, -1, 4));
        assert!(!t.is_identity_map());
        // Annulus points move: slide 12 * (2/3)(1/4) = 2 at l = 3/4.
        assert_ne!(t.apply(&pt2(3, 4, 0, 1)).unwrap(), pt2(3, 4, 0, 1));
    }

    #[test]
    fn negative_fraction_is_inverse() {
        let pos = standard_twist();
        let neg = twist_root(&TwistSpec::new(rat(1, 2), rat(-1, 12)).unwrap()).unwrap();
        assert!(pos.compose(&neg).unwrap().is_identity_map());
    }

    #[test]
    fn large_fraction_twist() {
        let t = twist_root(&TwistSpec::new(rat(1, 2), rat(1, 2)).unwrap()).unwrap();
        assert!(t.validate().passed);
        // Inner square rotates by half a turn per layer: slide 4l at layer l.
        assert_eq!(t.apply(&pt2(1, 2, 0, 1)).unwrap(), pt2(-1, 2, 0, 1));
        for c in t.cells() {
            assert_eq!(c.map.det(), rat(1, 1));
        }
    }

    #[test]
    fn embed_support_scales_into_box() {
        let h = standard_twist();
        let target = BoundingBox {
            min: pt2(1, 8, -1, 8),
            max: pt2(3, 8, 1, 8),
        };
        let e = embed_support(&h, &target).unwrap();
        assert!(e.validate().passed, "{:?}", e.validate().violations);
        // Identity outside the box, twisted inside.
        assert_eq!(e.apply(&pt2(-1, 2, 0, 1)).unwrap(), pt2(-1, 2, 0, 1));
        assert_eq!(e.apply(&pt2(3, 4, 3, 4)).unwrap(), pt2(3, 4, 3, 4));
        let center = pt2(1, 4, 0, 1);
        assert_ne!(e.apply(&pt2(7, 32, 0, 1)).unwrap(), pt2(7, 32, 0, 1));
        assert_eq!(e.apply(&center).unwrap(), center); // box center is the twist's fixed origin
        for c in e.cells() {
            assert_eq!(c.map.det(), rat(1, 1));
        }
        assert!(embed_support(&PLMap::identity(2), &target)
            .unwrap()
            .is_identity_map());
    }

    #[test]
    fn linear_near_zero_shear() {
        let m = RatMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        let g = linear_near_zero(&m, &rat(1, 4)).unwrap();
        assert!(g.validate().passed, "{:?}", g.validate().violations);
        // In the linear zone the map is exactly M.
        assert_eq!(g.apply(&pt2(1, 8, 1, 8)).unwrap(), pt2(1, 4, 1, 8));
        // Derivative at zero is M: the cell containing 0 carries M itself.
        let simplices: Vec<&Simplex> = g.cells().iter().map(|c| &c.simplex).collect();
        let at_zero = crate::plmap::locate(&simplices, &RatPoint::origin(2)).unwrap();
        assert_eq!(g.cells()[at_zero].map.linear, m);
        assert!(g.cells()[at_zero].map.translation.is_zero());

        assert!(linear_near_zero(&RatMatrix::from_ints(&[&[1, 0], &[0, -1]]), &rat(1, 4)).is_err());
        assert!(linear_near_zero(&RatMatrix::identity(2), &rat(1, 2))
            .unwrap()
            .is_identity_map());
    }

    #[test]
    fn linear_near_zero_generic_matrix() {
        let m = RatMatrix::from_ints(&[&[2, 3], &[1, 2]]);
        let g = linear_near_zero(&m, &rat(1, 4)).unwrap();
        assert!(g.validate().passed, "{:?}", g.validate().violations);
        let simplices: Vec<&Simplex> = g.cells().iter().map(|c| &c.simplex).collect();
        let at_zero = crate::plmap::locate(&simplices, &RatPoint::origin(2)).unwrap();
        assert_eq!(g.cells()[at_zero].map.linear, m);
    }

    #[test]
    fn klein_relation_holds() {
        let (f, g) = klein_pair().unwrap();
        assert!(!g.is_identity_map());
        // g is the identity outside the two little squares.
        assert_eq!(g.apply(&pt2(0, 1, 0, 1)).unwrap(), pt2(0, 1, 0, 1));
        assert_eq!(g.apply(&pt2(0, 1, 3, 4)).unwrap(), pt2(0, 1, 3, 4));
        // f^{-1} g f = g^{-1}, exactly.
        let lhs = f.inverse().unwrap().compose(&g).unwrap().compose(&f).unwrap();
        assert!(lhs.equals(&g.inverse().unwrap()).unwrap());
    }
}
