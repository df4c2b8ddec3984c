//! Exact-arithmetic computation with piecewise-linear homeomorphisms of cubes.
//!
//! The central object is [`PLMap`]: a self-homeomorphism of the cube
//! `[-1,1]^n` that fixes the boundary pointwise and is affine on each cell of
//! a finite triangulation. All coordinates are arbitrary-precision rationals,
//! so composition, inversion, equality testing and every invariant computed
//! here are exact — repeated runs are bit-identical.
//!
//! Modules:
//! - [`rational`], [`geom`]: the exact scalar/point/matrix/polytope kernel.
//! - [`plmap`]: the group element — validation, application, composition,
//!   inversion, canonical form, equality.
//! - [`construct`]: explicit elements (1D breakpoint maps, twist roots,
//!   suspensions, cube-scaling families, support embeddings, linear germs).
//! - [`invariant`]: matrix norm, cell counts, volume distortion, fixed sets,
//!   frontiers, and the stabilizer witness for local indicability.
//! - [`order`]: the bi-order positive cone in dimension one, circular orders
//!   on rays, cocycle checking, projectivized germs.
//! - [`braid`]: strand tracing under the rescaling isotopy and the averaged
//!   braid-quasimorphism estimator for area-preserving maps.
//! - [`distortion`]: word balls, growth of invariants under powers, exact
//!   verification of growth inequalities.

pub mod braid;
pub mod construct;
pub mod distortion;
pub mod error;
pub mod exec;
pub mod geom;
pub mod invariant;
pub mod order;
pub mod plmap;
pub mod rational;
pub mod sample;

pub use error::{Error, Result};
pub use geom::{ConvexPolytope, RatAffineMap, RatMatrix, RatPoint, Simplex};
pub use plmap::{Cell, MapKind, PLMap, ValidationReport};
pub use rational::Rational;
