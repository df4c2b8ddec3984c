//! Braids traced by tuples of points under an area-preserving 2D map, and
//! the averaged braid-quasimorphism estimator.
//!
//! The isotopy from the identity to `g` is the rescaling family
//! `s -> alexander(g, s)`; along it every point moves on an exact
//! piecewise-affine path in `s`, so crossings of strand pairs are roots of
//! affine functions and are found exactly. A braid word is read off from
//! three stages: straight lines from the basepoints to the sample tuple, the
//! isotopy paths, and straight lines back.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geom::{RatPoint, Simplex};
use crate::invariant::volume_check;
use crate::plmap::{locate, MapKind, PLMap};
use crate::rational::Rational;

/// A word in the Artin generators sigma_1 .. sigma_{n-1}, kept freely
/// reduced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<(usize, i8)>) -> Result<BraidWord> {
        if strands < 2 {
            return Err(Error::InvalidSpec("need at least two strands".into()));
        }
        for &(i, s) in &letters {
            if i == 0 || i >= strands {
                return Err(Error::InvalidSpec(format!(
                    "generator index {i} out of range for {strands} strands"
                )));
            }
            if s != 1 && s != -1 {
                return Err(Error::InvalidSpec("letter sign must be ±1".into()));
            }
        }
        Ok(BraidWord {
            strands,
            letters: free_reduce(letters),
        })
    }

    pub fn empty(strands: usize) -> BraidWord {
        BraidWord {
            strands,
            letters: Vec::new(),
        }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|&(_, s)| i64::from(s)).sum()
    }

    /// Concatenation (this word first), freely reduced.
    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.strands != other.strands {
            return Err(Error::ArityMismatch {
                word: other.strands,
                spec: self.strands,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord {
            strands: self.strands,
            letters: free_reduce(letters),
        })
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            strands: self.strands,
            letters: self
                .letters
                .iter()
                .rev()
                .map(|&(i, s)| (i, -s))
                .collect(),
        }
    }

    /// Canonical text form: signed generator indices, e.g. "1 -2 1".
    pub fn key(&self) -> String {
        self.letters
            .iter()
            .map(|&(i, s)| format!("{}", i as i64 * i64::from(s)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn free_reduce(letters: Vec<(usize, i8)>) -> Vec<(usize, i8)> {
    let mut stack: Vec<(usize, i8)> = Vec::with_capacity(letters.len());
    for l in letters {
        match stack.last() {
            Some(&(i, s)) if i == l.0 && s == -l.1 => {
                stack.pop();
            }
            _ => stack.push(l),
        }
    }
    stack
}

/// An exact piecewise-affine path `s -> u + s v` over subintervals of a
/// parameter range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pieces: Vec<TrajectoryPiece>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPiece {
    pub s_lo: Rational,
    pub s_hi: Rational,
    pub base: RatPoint,
    pub slope: RatPoint,
}

impl TrajectoryPiece {
    fn at(&self, s: &Rational) -> RatPoint {
        self.base.add(&self.slope.scale(s))
    }
}

impl Trajectory {
    pub fn pieces(&self) -> &[TrajectoryPiece] {
        &self.pieces
    }

    pub fn domain(&self) -> (Rational, Rational) {
        (
            self.pieces.first().unwrap().s_lo.clone(),
            self.pieces.last().unwrap().s_hi.clone(),
        )
    }

    pub fn at(&self, s: &Rational) -> RatPoint {
        let piece = self
            .pieces
            .iter()
            .find(|p| &p.s_lo <= s && s <= &p.s_hi)
            .unwrap_or_else(|| panic!("parameter {s} outside trajectory domain"));
        piece.at(s)
    }

    pub fn start(&self) -> RatPoint {
        let p = self.pieces.first().unwrap();
        p.at(&p.s_lo.clone())
    }

    pub fn end(&self) -> RatPoint {
        let p = self.pieces.last().unwrap();
        p.at(&p.s_hi.clone())
    }

    /// Straight segment traversed over [0, 1].
    fn line(from: &RatPoint, to: &RatPoint) -> Trajectory {
        Trajectory {
            pieces: vec![TrajectoryPiece {
                s_lo: Rational::zero(),
                s_hi: Rational::one(),
                base: from.clone(),
                slope: to.sub(from),
            }],
        }
    }

    /// Shift the parameter range by an integer offset (stage chaining).
    fn shifted(&self, offset: i64) -> Trajectory {
        let off = Rational::from_int(offset);
        Trajectory {
            pieces: self
                .pieces
                .iter()
                .map(|p| TrajectoryPiece {
                    s_lo: &p.s_lo + &off,
                    s_hi: &p.s_hi + &off,
                    base: p.base.sub(&p.slope.scale(&off)),
                    slope: p.slope.clone(),
                })
                .collect(),
        }
    }

    fn concat(stages: &[Trajectory]) -> Trajectory {
        let mut pieces = Vec::new();
        for (k, t) in stages.iter().enumerate() {
            pieces.extend(t.shifted(k as i64).pieces);
        }
        Trajectory { pieces }
    }
}

/// The path `s -> alexander(g, s)(x)` for `s` in [0, 1], from `x` to
/// `g(x)`. Within a cell of `g` the path is `A x + s b`, affine in `s`;
/// breakpoints occur where the ray `x/s` leaves a cell and are solved
/// exactly.
pub fn trajectory(g: &PLMap, x: &RatPoint) -> Result<Trajectory> {
    if g.dim() != 2 || !matches!(g.kind(), MapKind::Generic) {
        return Err(Error::UnsupportedDimension(g.dim()));
    }
    if !x.in_cube() {
        return Err(Error::OutsideCube);
    }
    let norm = x.linf_norm();
    let one = Rational::one();
    if norm >= one {
        // Boundary points never move.
        return Ok(Trajectory {
            pieces: vec![TrajectoryPiece {
                s_lo: Rational::zero(),
                s_hi: one,
                base: x.clone(),
                slope: RatPoint::origin(2),
            }],
        });
    }
    if norm.is_zero() {
        // alexander(g, s)(0) = s g(0): one affine piece.
        let g0 = g.apply(x)?;
        return Ok(Trajectory {
            pieces: vec![TrajectoryPiece {
                s_lo: Rational::zero(),
                s_hi: one,
                base: RatPoint::origin(2),
                slope: g0,
            }],
        });
    }
    let mut pieces = vec![TrajectoryPiece {
        s_lo: Rational::zero(),
        s_hi: norm.clone(),
        base: x.clone(),
        slope: RatPoint::origin(2),
    }];
    let mut upper = one.clone();
    // March s downward from 1; y = x/s walks outward along the ray through x.
    while upper > norm {
        let y = x.scale(&upper.recip());
        let mut best: Option<(Rational, usize)> = None;
        for (idx, c) in g.cells().iter().enumerate() {
            if !c.simplex.contains(&y) {
                continue;
            }
            let lo = cell_entry_bound(&c.simplex, x, &norm);
            if &lo < &upper {
                // Prefer the cell valid on a nondegenerate interval below.
                match &best {
                    Some((blo, _)) if blo <= &lo => {}
                    _ => best = Some((lo, idx)),
                }
            }
        }
        let (lo, idx) = best.ok_or_else(|| {
            Error::Invalid("isotopy ray walk stuck: no continuing cell".into())
        })?;
        let cell = &g.cells()[idx];
        let lo = lo.max(norm.clone());
        pieces.push(TrajectoryPiece {
            s_lo: lo.clone(),
            s_hi: upper.clone(),
            base: cell.map.linear.mul_vec(x),
            slope: cell.map.translation.clone(),
        });
        upper = lo;
    }
    pieces.sort_by(|a, b| a.s_lo.cmp(&b.s_lo));
    debug_assert!(pieces
        .windows(2)
        .all(|w| w[0].s_hi == w[1].s_lo && w[0].at(&w[0].s_hi) == w[1].at(&w[1].s_lo)));
    Ok(Trajectory { pieces })
}

/// Smallest s in (0, upper_bound] for which `x/s` stays inside the cell,
/// given that it is inside for the current parameter: the cell constraints
/// `or * cross(e, x/s - u0) >= 0` are affine in s after clearing the
/// positive factor s.
fn cell_entry_bound(simplex: &Simplex, x: &RatPoint, norm: &Rational) -> Rational {
    let or = Rational::from_int(simplex.orientation() as i64);
    let vs = simplex.vertices();
    let mut lo = norm.clone();
    for i in 0..3 {
        let (u, v) = (&vs[i], &vs[(i + 1) % 3]);
        let e = v.sub(u);
        // or * (cross(e, x) - s cross(e, u)) >= 0.
        let a = crate::geom::cross2(&e, x) * &or;
        let b = crate::geom::cross2(&e, u) * &or;
        if b.is_positive() {
            // s <= a/b: no lower constraint.
        } else if b.is_negative() {
            let bound = &a / &b;
            if bound > lo {
                lo = bound;
            }
        } else if a.is_negative() {
            return Rational::from_int(2); // never valid; caller skips
        }
    }
    lo
}

/// One crossing event between two strands.
#[derive(Debug, Clone)]
struct Crossing {
    s: Rational,
    i: usize,
    j: usize,
}

/// Compute the braid traced by moving the basepoints to the sample tuple,
/// applying the isotopy, and moving back. Returns the freely reduced word;
/// genericity violations (shared x-coordinates over an interval, tangencies,
/// collisions, triple crossings) are detected exactly and reported.
pub fn braid_word(g: &PLMap, basepoints: &[RatPoint], samples: &[RatPoint]) -> Result<BraidWord> {
    let n = basepoints.len();
    if n < 2 || samples.len() != n {
        return Err(Error::InvalidSpec(
            "need matching basepoint and sample tuples with at least 2 strands".into(),
        ));
    }
    for pts in [basepoints, samples] {
        for i in 0..n {
            for j in (i + 1)..n {
                if pts[i] == pts[j] {
                    return Err(Error::DegenerateSample(format!(
                        "tuple points {i} and {j} coincide"
                    )));
                }
            }
        }
    }
    // Full timeline [0, 3]: lines in, isotopy, lines back.
    let mut paths = Vec::with_capacity(n);
    for i in 0..n {
        let iso = trajectory(g, &samples[i])?;
        let back = Trajectory::line(&iso.end(), &basepoints[i]);
        let fwd = Trajectory::line(&basepoints[i], &samples[i]);
        paths.push(Trajectory::concat(&[fwd, iso, back]));
    }
    let crossings = find_crossings(&paths)?;
    letters_from_crossings(&paths, crossings, n)
}

fn find_crossings(paths: &[Trajectory]) -> Result<Vec<Crossing>> {
    let n = paths.len();
    let mut crossings: Vec<Crossing> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            crossings.extend(pair_crossings(&paths[i], &paths[j], i, j)?);
        }
    }
    crossings.sort_by(|a, b| a.s.cmp(&b.s).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    Ok(crossings)
}

/// Zeros of the x-difference of two strands, with exact genericity checks.
fn pair_crossings(pi: &Trajectory, pj: &Trajectory, i: usize, j: usize) -> Result<Vec<Crossing>> {
    // Joint subdivision of the two piece lists.
    let mut cuts: Vec<Rational> = pi
        .pieces
        .iter()
        .chain(pj.pieces.iter())
        .flat_map(|p| [p.s_lo.clone(), p.s_hi.clone()])
        .collect();
    cuts.sort();
    cuts.dedup();
    let mut zeros: Vec<Rational> = Vec::new();
    // Slopes of dx on the intervals left and right of each zero candidate.
    for w in cuts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a >= b {
            continue;
        }
        let mid_u = pi_piece(pi, a, b);
        let mid_v = pi_piece(pj, a, b);
        let c0 = mid_u.base.coord(0) - mid_v.base.coord(0);
        let c1 = mid_u.slope.coord(0) - mid_v.slope.coord(0);
        if c1.is_zero() {
            if c0.is_zero() {
                return Err(Error::DegenerateSample(format!(
                    "strands {i},{j} share an x-coordinate over [{a}, {b}]"
                )));
            }
            continue;
        }
        let s = -&c0 / &c1;
        if &s >= a && &s <= b {
            zeros.push(s);
        }
    }
    zeros.sort();
    zeros.dedup();
    let mut out = Vec::new();
    for s in zeros {
        // Transversality: dx changes sign strictly across s.
        let before = dx_sign_near(pi, pj, &s, false)?;
        let after = dx_sign_near(pi, pj, &s, true)?;
        if before == 0 || after == 0 || before == after {
            return Err(Error::DegenerateSample(format!(
                "strands {i},{j} touch tangentially at s = {s}"
            )));
        }
        // Distinct points at the crossing (no collisions).
        if pi.at(&s) == pj.at(&s) {
            return Err(Error::DegenerateSample(format!(
                "strands {i},{j} collide at s = {s}"
            )));
        }
        out.push(Crossing { s, i, j });
    }
    Ok(out)
}

fn pi_piece<'a>(t: &'a Trajectory, a: &Rational, b: &Rational) -> &'a TrajectoryPiece {
    t.pieces
        .iter()
        .find(|p| &p.s_lo <= a && b <= &p.s_hi)
        .expect("joint interval lies in one piece")
}

/// Sign of x_i - x_j just left (or right) of s, read off the adjacent
/// affine pieces.
fn dx_sign_near(pi: &Trajectory, pj: &Trajectory, s: &Rational, right: bool) -> Result<i32> {
    let (d0, d1) = {
        let (lo, hi) = pi.domain();
        let _ = (lo, hi);
        let pick = |t: &Trajectory| -> Option<(Rational, Rational)> {
            for p in &t.pieces {
                let interior = if right {
                    &p.s_lo <= s && s < &p.s_hi
                } else {
                    &p.s_lo < s && s <= &p.s_hi
                };
                if interior {
                    return Some((
                        p.base.coord(0).clone(),
                        p.slope.coord(0).clone(),
                    ));
                }
            }
            None
        };
        match (pick(pi), pick(pj)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(0), // at the very ends of the timeline
        }
    };
    let c0 = &d0.0 - &d1.0;
    let c1 = &d0.1 - &d1.1;
    let at_s = &c0 + &(&c1 * s);
    if !at_s.is_zero() {
        return Ok(at_s.signum());
    }
    Ok(if right { c1.signum() } else { -c1.signum() })
}

fn letters_from_crossings(
    paths: &[Trajectory],
    crossings: Vec<Crossing>,
    n: usize,
) -> Result<BraidWord> {
    let mut letters: Vec<(usize, i8)> = Vec::new();
    let mut k = 0;
    while k < crossings.len() {
        // Group simultaneous crossings.
        let mut group_end = k + 1;
        while group_end < crossings.len() && crossings[group_end].s == crossings[k].s {
            group_end += 1;
        }
        let group = &crossings[k..group_end];
        for a in 0..group.len() {
            for b in (a + 1)..group.len() {
                let (g1, g2) = (&group[a], &group[b]);
                if g1.i == g2.i || g1.i == g2.j || g1.j == g2.i || g1.j == g2.j {
                    return Err(Error::DegenerateSample(format!(
                        "triple crossing at s = {}",
                        g1.s
                    )));
                }
            }
        }
        let s = &group[0].s;
        let xs: Vec<Rational> = (0..n).map(|t| paths[t].at(s).coord(0).clone()).collect();
        let mut group_letters: Vec<(usize, Rational, i8)> = Vec::new();
        for c in group {
            let x_cross = &xs[c.i];
            // Rank of the crossing pair among all strand x-coordinates.
            let mut rank = 0;
            for (t, x) in xs.iter().enumerate() {
                if t == c.i || t == c.j {
                    continue;
                }
                if x == x_cross {
                    return Err(Error::DegenerateSample(format!(
                        "three strands share x at s = {s}"
                    )));
                }
                if x < x_cross {
                    rank += 1;
                }
            }
            // The strand on the left just before the crossing.
            let before = dx_sign_near(&paths[c.i], &paths[c.j], s, false)?;
            let (left, rightstrand) = if before < 0 { (c.i, c.j) } else { (c.j, c.i) };
            let yl = paths[left].at(s).coord(1).clone();
            let yr = paths[rightstrand].at(s).coord(1).clone();
            debug_assert_ne!(yl, yr, "collision was checked earlier");
            let sign = if yl > yr { 1 } else { -1 };
            group_letters.push((rank + 1, x_cross.clone(), sign));
        }
        group_letters.sort_by(|a, b| a.0.cmp(&b.0));
        letters.extend(group_letters.into_iter().map(|(idx, _, sg)| (idx, sg)));
        k = group_end;
    }
    BraidWord::new(n, letters)
}

/// A function on braid words used as the integrand: the built-in choices are
/// homomorphisms (defect zero); plugin tables must declare a defect bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuSpec {
    ExponentSum,
    PairLinking,
    Plugin {
        table: BTreeMap<String, Rational>,
        defect: Rational,
    },
}

impl MuSpec {
    pub fn defect(&self) -> Rational {
        match self {
            MuSpec::ExponentSum | MuSpec::PairLinking => Rational::zero(),
            MuSpec::Plugin { defect, .. } => defect.clone(),
        }
    }
}

/// Evaluate the braid function on a word.
pub fn mu_eval(spec: &MuSpec, w: &BraidWord) -> Result<Rational> {
    match spec {
        MuSpec::ExponentSum => Ok(Rational::from_int(w.exponent_sum())),
        MuSpec::PairLinking => {
            // Per-pair signed crossing counts, halved; tracked through the
            // permutation of strand positions.
            let n = w.strands();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut linking: BTreeMap<(usize, usize), i64> = BTreeMap::new();
            for &(idx, sign) in w.letters() {
                let (a, b) = (perm[idx - 1], perm[idx]);
                let key = (a.min(b), a.max(b));
                *linking.entry(key).or_insert(0) += i64::from(sign);
                perm.swap(idx - 1, idx);
            }
            let total: i64 = linking.values().sum();
            Ok(Rational::ratio(total, 2))
        }
        MuSpec::Plugin { table, .. } => table
            .get(&w.key())
            .cloned()
            .ok_or_else(|| Error::PluginMiss(w.key())),
    }
}

/// Basepoints `((2i - n - 1) / (n + 1), 0)` on the horizontal axis.
pub fn default_basepoints(n: usize) -> Vec<RatPoint> {
    (1..=n as i64)
        .map(|i| {
            RatPoint(vec![
                Rational::ratio(2 * i - n as i64 - 1, n as i64 + 1),
                Rational::zero(),
            ])
        })
        .collect()
}

/// Monte Carlo estimate of the averaged braid function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub estimate: Rational,
    /// Exact sample variance of the scaled per-sample values.
    pub variance: Rational,
    pub samples: usize,
    pub resampled: usize,
    pub strands: usize,
    /// Decimal rendering of the estimate, for display only.
    pub estimate_decimal: f64,
}

impl PhiEstimate {
    /// Squared standard error (variance of the mean), exact.
    pub fn dispersion_squared(&self) -> Rational {
        &self.variance / &Rational::from_int(self.samples as i64)
    }

    /// Is `|estimate - reference|` within `k` dispersion units? Compared in
    /// squares so everything stays rational.
    pub fn within_dispersion(&self, reference: &Rational, k: i64) -> bool {
        let diff = &self.estimate - reference;
        &diff * &diff <= Rational::from_int(k * k) * self.dispersion_squared()
    }
}

const MAX_ATTEMPTS: u64 = 64;
const DYADIC_BITS: u32 = 12;

/// Seeded Monte Carlo estimate of the integral of `mu(braid(g; tuple))` over
/// tuples of distinct interior points, scaled by the cube volume to the n-th
/// power. Deterministic given (inputs, seed, sample count): each sample
/// derives its randomness from its own counter, so the result is independent
/// of scheduling. Degenerate tuples are resampled and counted.
pub fn phi_estimate(
    g: &PLMap,
    spec: &MuSpec,
    strands: usize,
    samples: usize,
    seed: u64,
) -> Result<PhiEstimate> {
    if samples == 0 {
        return Err(Error::InvalidSpec("need at least one sample".into()));
    }
    if !volume_check(g)?.preserves {
        return Err(Error::InvalidSpec(
            "the averaged braid function is defined for area-preserving maps".into(),
        ));
    }
    let basepoints = default_basepoints(strands);
    let results: Vec<Result<(Rational, u64)>> = exec::par_map_range(samples, |i| {
        sample_value(g, spec, &basepoints, strands, seed, i as u64)
    });
    let mut total = Rational::zero();
    let mut values = Vec::with_capacity(samples);
    let mut resampled = 0u64;
    for r in results {
        let (v, attempts) = r?;
        resampled += attempts;
        total += &v;
        values.push(v);
    }
    let scale = crate::plmap::cube_volume(2).pow(strands as i32);
    let n_rat = Rational::from_int(samples as i64);
    let mean = &total / &n_rat;
    let estimate = &scale * &mean;
    let variance = if samples > 1 {
        let mut acc = Rational::zero();
        for v in &values {
            let d = &(&scale * v) - &estimate;
            acc += &d * &d;
        }
        acc / Rational::from_int(samples as i64 - 1)
    } else {
        Rational::zero()
    };
    Ok(PhiEstimate {
        estimate_decimal: estimate.to_f64(),
        estimate,
        variance,
        samples,
        resampled: resampled as usize,
        strands,
    })
}

fn sample_value(
    g: &PLMap,
    spec: &MuSpec,
    basepoints: &[RatPoint],
    strands: usize,
    seed: u64,
    index: u64,
) -> Result<(Rational, u64)> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index * MAX_ATTEMPTS + attempt);
        let tuple: Vec<RatPoint> = (0..strands)
            .map(|_| {
                let denom = 1i64 << DYADIC_BITS;
                let x = rng.random_range(-(denom - 1)..denom);
                let y = rng.random_range(-(denom - 1)..denom);
                RatPoint(vec![Rational::ratio(x, denom), Rational::ratio(y, denom)])
            })
            .collect();
        match braid_word(g, basepoints, &tuple) {
            Ok(w) => return Ok((mu_eval(spec, &w)?, attempt)),
            Err(Error::DegenerateSample(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateSample(format!(
        "sample {index} degenerate after {MAX_ATTEMPTS} attempts"
    )))
}

/// Grid-quadrature reference value for two strands: the average of the
/// integrand over all ordered pairs of grid-cell centers, times 16.
/// Degenerate pairs are skipped and counted. Supports the built-in
/// homomorphism integrands only.
pub fn phi_grid(g: &PLMap, spec: &MuSpec, resolution: usize) -> Result<(Rational, usize)> {
    if matches!(spec, MuSpec::Plugin { .. }) {
        return Err(Error::InvalidSpec(
            "grid quadrature supports the built-in integrands".into(),
        ));
    }
    if !volume_check(g)?.preserves {
        return Err(Error::InvalidSpec(
            "the averaged braid function is defined for area-preserving maps".into(),
        ));
    }
    let res = resolution as i64;
    let basepoints = default_basepoints(2);
    // Grid-cell centers and their isotopy paths, shared by both roles.
    let mut centers = Vec::with_capacity(resolution * resolution);
    for a in 0..res {
        for b in 0..res {
            centers.push(RatPoint(vec![
                Rational::ratio(2 * a + 1 - res, res),
                Rational::ratio(2 * b + 1 - res, res),
            ]));
        }
    }
    let trajs: Vec<Trajectory> =
        exec::par_map(&centers, |p| trajectory(g, p).expect("interior grid point"));
    let m = centers.len();
    // Full two-stage-padded paths per role.
    let path_for = |idx: usize, role: usize| -> Trajectory {
        let iso = &trajs[idx];
        Trajectory::concat(&[
            Trajectory::line(&basepoints[role], &centers[idx]),
            iso.clone(),
            Trajectory::line(&iso.end(), &basepoints[role]),
        ])
    };
    let paths0: Vec<Trajectory> = exec::par_map_range(m, |i| path_for(i, 0));
    let paths1: Vec<Trajectory> = exec::par_map_range(m, |i| path_for(i, 1));
    // Signed crossing sums over unordered pairs; the integrand is symmetric
    // in the two roles for exponent-type integrands.
    let rows: Vec<(Rational, usize)> = exec::par_map_range(m, |i| {
        let mut acc = Rational::zero();
        let mut degenerate = 0usize;
        for j in (i + 1)..m {
            match pair_exponent(&paths0[i], &paths1[j]) {
                Ok(e) => acc += Rational::from_int(e),
                Err(_) => degenerate += 1,
            }
        }
        (acc, degenerate)
    });
    let mut exponent_total = Rational::zero();
    let mut degenerate = 0usize;
    for (acc, d) in rows {
        exponent_total += acc;
        degenerate += d;
    }
    // Ordered pairs double the unordered sum; diagonal pairs are degenerate.
    let ordered_nondegenerate = (m * (m - 1)) - 2 * degenerate;
    if ordered_nondegenerate == 0 {
        return Err(Error::DegenerateSample("all grid pairs degenerate".into()));
    }
    let sum = Rational::from_int(2) * exponent_total;
    let mean_exponent = sum / Rational::from_int(ordered_nondegenerate as i64);
    let mu_mean = match spec {
        MuSpec::ExponentSum => mean_exponent,
        MuSpec::PairLinking => mean_exponent / Rational::from_int(2),
        MuSpec::Plugin { .. } => unreachable!(),
    };
    let scale = crate::plmap::cube_volume(2).pow(2);
    Ok((scale * mu_mean, 2 * degenerate))
}

/// Exponent sum of the 2-strand braid of a pair of full paths.
fn pair_exponent(p0: &Trajectory, p1: &Trajectory) -> Result<i64> {
    let crossings = pair_crossings(p0, p1, 0, 1)?;
    let mut e = 0i64;
    for c in crossings {
        let before = dx_sign_near(p0, p1, &c.s, false)?;
        let (left, right) = if before < 0 { (p0, p1) } else { (p1, p0) };
        let yl = left.at(&c.s).coord(1).clone();
        let yr = right.at(&c.s).coord(1).clone();
        if yl == yr {
            return Err(Error::DegenerateSample("collision".into()));
        }
        e += if yl > yr { 1 } else { -1 };
    }
    Ok(e)
}

/// Least-squares slope of `value` against `n` over exact rationals.
pub fn homogenize(values: &[(i64, Rational)]) -> Result<Rational> {
    if values.len() < 2 {
        return Err(Error::NotEnoughData(
            "need at least two powers to fit a slope".into(),
        ));
    }
    let k = Rational::from_int(values.len() as i64);
    let sum_n: Rational = values.iter().map(|(n, _)| Rational::from_int(*n)).sum();
    let sum_v: Rational = values.iter().map(|(_, v)| v.clone()).sum();
    let sum_nv: Rational = values
        .iter()
        .map(|(n, v)| Rational::from_int(*n) * v)
        .sum();
    let sum_nn: Rational = values
        .iter()
        .map(|(n, _)| Rational::from_int(n * n))
        .sum();
    let denom = &(&k * &sum_nn) - &(&sum_n * &sum_n);
    if denom.is_zero() {
        return Err(Error::NotEnoughData("power indices must differ".into()));
    }
    Ok((&(&k * &sum_nv) - &(&sum_n * &sum_v)) / &denom)
}

/// Convenience: locate a 2D point among a map's cells (used by traces).
pub fn locate_cell(g: &PLMap, x: &RatPoint) -> Result<usize> {
    let simplices: Vec<&Simplex> = g.cells().iter().map(|c| &c.simplex).collect();
    locate(&simplices, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{twist_root, TwistSpec};
    use crate::rational::rat;

    fn pt2(xp: i64, xq: i64, yp: i64, yq: i64) -> RatPoint {
        RatPoint(vec![rat(xp, xq), rat(yp, yq)])
    }

    fn standard_twist() -> PLMap {
        twist_root(&TwistSpec::new(rat(1, 2), rat(1, 12)).unwrap()).unwrap()
    }

    #[test]
    fn free_reduction_and_inverse() {
        let w = BraidWord::new(3, vec![(1, 1), (2, 1), (2, -1), (1, -1), (1, 1)]).unwrap();
        assert_eq!(w.letters(), &[(1, 1)]);
        let u = BraidWord::new(3, vec![(1, 1), (2, -1)]).unwrap();
        assert!(u.concat(&u.inverse()).unwrap().is_empty());
        assert!(BraidWord::new(2, vec![(2, 1)]).is_err());
    }

    #[test]
    fn trajectory_of_identity_is_constant() {
        let id = PLMap::identity(2);
        let x = pt2(1, 3, -1, 5);
        let t = trajectory(&id, &x).unwrap();
        assert_eq!(t.start(), x);
        assert_eq!(t.end(), x);
        assert!(t
            .pieces()
            .iter()
            .all(|p| p.slope.is_zero() || p.at(&p.s_lo) == x));
    }

    #[test]
    fn trajectory_of_twist_endpoint() {
        let h = standard_twist();
        let x = pt2(3, 4, 0, 1);
        let t = trajectory(&h, &x).unwrap();
        assert_eq!(t.start(), x);
        assert_eq!(t.end(), h.apply(&x).unwrap());
        assert_eq!(t.end(), pt2(3, 4, 1, 6));
        // Pieces are continuous and span [0, 1].
        let (lo, hi) = t.domain();
        assert_eq!(lo, rat(0, 1));
        assert_eq!(hi, rat(1, 1));
        assert!(t.pieces().len() >= 2);
    }

    #[test]
    fn identity_braid_is_empty() {
        let base = default_basepoints(2);
        let w = braid_word(&PLMap::identity(2), &base, &base).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn half_twist_winds_sample_pairs() {
        // The 180-degree rotation of the inner square interchanges the two
        // samples; the closing legs return each strand to its own basepoint,
        // so the braid is pure and its exponent sum is even. Whether the
        // return legs undo or double the isotopy's half-turn depends on the
        // side of the axis the samples sit on.
        let f = standard_twist().power(6).unwrap();
        let base = default_basepoints(2);
        let undone = [pt2(-1, 4, 1, 64), pt2(1, 4, -1, 64)];
        let w = braid_word(&f, &base, &undone).unwrap();
        assert!(w.is_empty(), "word {:?}", w);
        let doubled = [pt2(-1, 4, -1, 64), pt2(1, 4, 1, 64)];
        let w = braid_word(&f, &base, &doubled).unwrap();
        assert_eq!(w.exponent_sum().abs(), 2, "word {:?}", w);
        assert_eq!(w.exponent_sum().rem_euclid(2), 0);
    }

    #[test]
    fn braid_composition_cocycle() {
        // braid(g∘h; x) = braid(h; x) · braid(g; h(x)).
        let h = standard_twist();
        let g = h.power(2).unwrap();
        let gh = g.compose(&h).unwrap();
        let base = default_basepoints(2);
        let samples = vec![pt2(-1, 4, 3, 64), pt2(5, 16, -1, 32)];
        let lhs = braid_word(&gh, &base, &samples).unwrap();
        let hx: Vec<RatPoint> = samples.iter().map(|p| h.apply(p).unwrap()).collect();
        let rhs = braid_word(&h, &base, &samples)
            .unwrap()
            .concat(&braid_word(&g, &base, &hx).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mu_eval_examples() {
        let empty = BraidWord::empty(2);
        assert_eq!(mu_eval(&MuSpec::ExponentSum, &empty).unwrap(), rat(0, 1));
        let w = BraidWord::new(2, vec![(1, 1), (1, 1)]).unwrap();
        assert_eq!(mu_eval(&MuSpec::ExponentSum, &w).unwrap(), rat(2, 1));
        assert_eq!(mu_eval(&MuSpec::PairLinking, &w).unwrap(), rat(1, 1));
        let table = BTreeMap::from([(w.key(), rat(7, 2))]);
        let plugin = MuSpec::Plugin {
            table,
            defect: rat(1, 1),
        };
        assert_eq!(mu_eval(&plugin, &w).unwrap(), rat(7, 2));
        assert!(mu_eval(&plugin, &empty).is_err());
    }

    #[test]
    fn builtin_mus_are_homomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 3;
            let mk = |rng: &mut ChaCha8Rng| {
                let letters: Vec<(usize, i8)> = (0..8)
                    .map(|_| {
                        (
                            rng.random_range(1..n),
                            if rng.random_range(0..2) == 0 { 1 } else { -1 },
                        )
                    })
                    .collect();
                BraidWord::new(n, letters).unwrap()
            };
            let w1 = mk(&mut rng);
            let w2 = mk(&mut rng);
            let w12 = w1.concat(&w2).unwrap();
            for spec in [MuSpec::ExponentSum, MuSpec::PairLinking] {
                let lhs = mu_eval(&spec, &w12).unwrap();
                let rhs = mu_eval(&spec, &w1).unwrap() + mu_eval(&spec, &w2).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn phi_of_identity_is_zero() {
        let est = phi_estimate(&PLMap::identity(2), &MuSpec::PairLinking, 2, 32, 11).unwrap();
        assert_eq!(est.estimate, rat(0, 1));
        assert_eq!(est.variance, rat(0, 1));
    }

    #[test]
    fn phi_rejects_non_area_preserving() {
        let f = crate::construct::pl1d(
            &crate::construct::BreakpointSpec::new(vec![
                (rat(-1, 1), rat(-1, 1)),
                (rat(0, 1), rat(1, 2)),
                (rat(1, 1), rat(1, 1)),
            ])
            .unwrap(),
        )
        .unwrap();
        let sf = crate::construct::suspend(&f).unwrap();
        assert!(phi_estimate(&sf, &MuSpec::PairLinking, 2, 4, 0).is_err());
    }

    #[test]
    fn phi_estimate_is_deterministic() {
        let h = standard_twist();
        let a = phi_estimate(&h, &MuSpec::PairLinking, 2, 24, 42).unwrap();
        let b = phi_estimate(&h, &MuSpec::PairLinking, 2, 24, 42).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.variance, b.variance);
    }

    #[test]
    fn homogenize_examples() {
        let vals: Vec<(i64, Rational)> = (1..=5).map(|n| (n, rat(3 * n, 2))).collect();
        assert_eq!(homogenize(&vals).unwrap(), rat(3, 2));
        let zeros: Vec<(i64, Rational)> = (1..=4).map(|n| (n, rat(0, 1))).collect();
        assert_eq!(homogenize(&zeros).unwrap(), rat(0, 1));
        assert!(homogenize(&vals[..1]).is_err());
    }
}

