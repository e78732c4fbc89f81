//! Certified Simpson-type cubature on rectangles.
//!
//! The crate is organized around one identity. Write Q for the
//! nine-point tensor Simpson rule on a rectangle (mean convention),
//! A for the sum of the two cross terms (the x-mean of the Simpson
//! rule in y plus the y-mean of the Simpson rule in x), and I for the
//! mean integral. Then
//!
//! ```text
//! Q - A + I = (b-a)(d-c) ∫₀¹∫₀¹ p(t) p(s) f_xy(x(t), y(s)) dt ds
//! ```
//!
//! where p is a piecewise linear kernel with mean zero and the maps
//! send the unit square onto the rectangle. The left side is the
//! defect D; the right side makes it computable from the mixed
//! partial alone, which yields a-priori bounds:
//!
//! * corner form: |D| <= 25 (b-a)(d-c)/5184 times the sum of |f_xy|
//!   at the four corners, for |f_xy| convex per variable;
//! * sup form: |D| <= 25 (b-a)(d-c)/1296 times sup |f_xy|.
//!
//! [`cubature`] computes the functionals and verifies the identity
//! against an adaptive Gauss-Legendre oracle, [`bounds`] checks the
//! two bounds plus the midpoint/mean/corner-average chain for
//! co-ordinated convex functions, and [`composite`] sums per-cell
//! bounds into integral enclosures with greedy refinement. [`expr`]
//! supplies a small expression language whose evaluator carries exact
//! mixed partials, so every routine can be driven from a string.

pub mod bounds;
pub mod composite;
pub mod cubature;
mod domain;
mod error;
pub mod expr;
pub mod kernels;
pub mod oracle;

pub use domain::{Function2D, Rectangle, Tolerances, WithMixed};
pub use error::{Error, Result};
