//! Seeded random generators of valid maps, rays and matrices, used by the
//! verification suites and the CLI's property runners. Everything is
//! deterministic given the RNG state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::construct::{
    alexander, embed_support, linear_near_zero, pl1d, twist_root, BreakpointSpec, TwistSpec,
};
use crate::error::Result;
use crate::geom::{BoundingBox, RatMatrix, RatPoint};
use crate::order::Ray;
use crate::plmap::PLMap;
use crate::rational::Rational;

fn dyadic(rng: &mut ChaCha8Rng, bits: u32) -> Rational {
    let denom = 1i64 << bits;
    Rational::ratio(rng.random_range(-(denom - 1)..denom), denom)
}

/// A random 1D map with up to `max_breaks` dyadic nodes.
pub fn map_1d(rng: &mut ChaCha8Rng, max_breaks: usize) -> Result<PLMap> {
    let k = rng.random_range(1..=max_breaks);
    // Strictly increasing dyadic coordinates in (-1, 1).
    let mut draw_sorted = |k: usize| -> Vec<Rational> {
        let denom = 1i64 << 6;
        let mut vals: Vec<i64> = Vec::new();
        while vals.len() < k {
            let v = rng.random_range(-(denom - 1)..denom);
            if !vals.contains(&v) {
                vals.push(v);
            }
        }
        vals.sort();
        vals.into_iter()
            .map(|v| Rational::ratio(v, denom))
            .collect()
    };
    let xs = draw_sorted(k);
    let ys = draw_sorted(k);
    let mut nodes = vec![(Rational::from_int(-1), Rational::from_int(-1))];
    nodes.extend(xs.into_iter().zip(ys));
    nodes.push((Rational::one(), Rational::one()));
    pl1d(&BreakpointSpec::new(nodes)?)
}

/// A random dyadic box strictly inside the cube.
pub fn interior_box(rng: &mut ChaCha8Rng) -> BoundingBox {
    let denom = 16i64;
    loop {
        let x0 = rng.random_range(-12..8);
        let y0 = rng.random_range(-12..8);
        let w = rng.random_range(2..=4);
        let h = rng.random_range(2..=4);
        if x0 + w < 13 && y0 + h < 13 {
            return BoundingBox {
                min: RatPoint(vec![Rational::ratio(x0, denom), Rational::ratio(y0, denom)]),
                max: RatPoint(vec![
                    Rational::ratio(x0 + w, denom),
                    Rational::ratio(y0 + h, denom),
                ]),
            };
        }
    }
}

/// A random 2D map: a short product of constructor-generated pieces
/// (twist roots, embedded twists, linear germs, rescalings).
pub fn map_2d(rng: &mut ChaCha8Rng, factors: usize) -> Result<PLMap> {
    let mut acc = PLMap::identity(2);
    let f = rng.random_range(1..=factors);
    for _ in 0..f {
        let piece = match rng.random_range(0..4) {
            0 => {
                let inner = Rational::ratio(rng.random_range(1..=2), 4);
                let fraction = Rational::ratio(
                    rng.random_range(1..=2) * if rng.random_range(0..2) == 0 { 1 } else { -1 },
                    12,
                );
                twist_root(&TwistSpec::new(inner, fraction)?)?
            }
            1 => {
                let inner = Rational::ratio(1, 2);
                let fraction = Rational::ratio(1, 8);
                let h = twist_root(&TwistSpec::new(inner, fraction)?)?;
                embed_support(&h, &interior_box(rng))?
            }
            2 => {
                // Unimodular integer matrix with positive determinant.
                let s = rng.random_range(-2..=2i64);
                let t = rng.random_range(-2..=2i64);
                let m = RatMatrix::from_ints(&[&[1, s], &[0, 1]])
                    .mul(&RatMatrix::from_ints(&[&[1, 0], &[t, 1]]));
                linear_near_zero(&m, &Rational::ratio(1, 4))?
            }
            _ => {
                let inner = Rational::ratio(1, 2);
                let h = twist_root(&TwistSpec::new(inner, Rational::ratio(1, 12))?)?;
                alexander(&h, &Rational::ratio(rng.random_range(1..=3), 4))?
            }
        };
        acc = acc.compose(&piece)?.canonicalize()?;
    }
    Ok(acc)
}

/// A random map in the requested dimension.
pub fn map_dim(rng: &mut ChaCha8Rng, dim: usize) -> Result<PLMap> {
    match dim {
        1 => map_1d(rng, 3),
        _ => map_2d(rng, 2),
    }
}

/// A random primitive ray.
pub fn ray(rng: &mut ChaCha8Rng) -> Ray {
    loop {
        let x = rng.random_range(-20i64..=20);
        let y = rng.random_range(-20i64..=20);
        if x != 0 || y != 0 {
            return Ray::new(x.into(), y.into()).unwrap();
        }
    }
}

/// A random rational 2x2 matrix with positive determinant.
pub fn matrix_det_pos(rng: &mut ChaCha8Rng) -> RatMatrix {
    loop {
        let mut entry = || Rational::ratio(rng.random_range(-8i64..=8), rng.random_range(1..=4));
        let m = RatMatrix::from_rows(vec![
            vec![entry(), entry()],
            vec![entry(), entry()],
        ])
        .unwrap();
        if m.det().is_positive() {
            return m;
        }
    }
}

/// A random interior dyadic point of the square.
pub fn interior_point(rng: &mut ChaCha8Rng, bits: u32) -> RatPoint {
    RatPoint(vec![dyadic(rng, bits), dyadic(rng, bits)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_maps_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f = map_1d(&mut rng, 3).unwrap();
            assert!(f.validate().passed);
        }
        for _ in 0..3 {
            let f = map_2d(&mut rng, 2).unwrap();
            assert!(f.validate().passed, "{:?}", f.validate().violations);
        }
    }
}
