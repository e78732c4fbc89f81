//! Rectangles, tolerances, and the function interface shared by every
//! routine in the crate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[a, b] x [c, d]` with `a < b` and `c < d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Rectangle {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite();
        if !finite || a >= b || c >= d {
            return Err(Error::InvalidRectangle { a, b, c, d });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn mid_x(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn mid_y(&self) -> f64 {
        0.5 * (self.c + self.d)
    }

    /// Corners in the order (a,c), (a,d), (b,c), (b,d).
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.c),
            (self.a, self.d),
            (self.b, self.c),
            (self.b, self.d),
        ]
    }

    /// Maps the kernel coordinate `t` in [0, 1] to `x = t a + (1 - t) b`.
    /// The map runs from `b` at `t = 0` down to `a` at `t = 1`.
    pub fn map_t_to_x(&self, t: f64) -> Result<f64> {
        check_unit("t", t)?;
        Ok(t * self.a + (1.0 - t) * self.b)
    }

    /// Companion of [`map_t_to_x`](Self::map_t_to_x) for the y axis.
    pub fn map_s_to_y(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(s * self.c + (1.0 - s) * self.d)
    }

    /// Splits across the longer side (x wins ties). The shared edge is
    /// the exact midpoint, so the halves tile `self`.
    pub fn bisect(&self) -> (Rectangle, Rectangle) {
        if self.width() >= self.height() {
            let m = self.mid_x();
            (
                Rectangle { a: self.a, b: m, c: self.c, d: self.d },
                Rectangle { a: m, b: self.b, c: self.c, d: self.d },
            )
        } else {
            let m = self.mid_y();
            (
                Rectangle { a: self.a, b: self.b, c: self.c, d: m },
                Rectangle { a: self.a, b: self.b, c: m, d: self.d },
            )
        }
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange { name, value, lo: 0.0, hi: 1.0 });
    }
    Ok(())
}

/// Accuracy knobs used throughout: `oracle` is the absolute tolerance
/// handed to the reference quadrature, `residual` is the extra slack
/// allowed (on top of the propagated oracle error) when an identity is
/// checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    oracle: f64,
    residual: f64,
}

impl Tolerances {
    pub fn new(oracle: f64, residual: f64) -> Result<Self> {
        for (name, value) in [("oracle tolerance", oracle), ("residual tolerance", residual)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    requirement: "finite and positive",
                    value,
                });
            }
        }
        if residual < oracle {
            return Err(Error::InvalidParameter {
                name: "residual tolerance",
                requirement: "at least the oracle tolerance",
                value: residual,
            });
        }
        Ok(Self { oracle, residual })
    }

    pub fn oracle(&self) -> f64 {
        self.oracle
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { oracle: 1e-10, residual: 1e-8 }
    }
}

/// A real function on the plane, plus optional mixed-partial data.
///
/// `eval` is expected to be finite on the rectangle under study;
/// consumers turn NaN or infinity into [`Error::NonFiniteValue`].
/// `mixed` is d²f/dxdy where available, and `sup_mixed` a known bound
/// for |d²f/dxdy| over the region of interest.
pub trait Function2D: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    fn mixed(&self, _x: f64, _y: f64) -> Option<f64> {
        None
    }

    fn sup_mixed(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> Function2D for F {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

/// Pairs a closure with its mixed partial, and optionally a sup bound.
pub struct WithMixed<F, G> {
    f: F,
    fxy: G,
    sup: Option<f64>,
}

impl<F, G> WithMixed<F, G>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(f: F, fxy: G) -> Self {
        Self { f, fxy, sup: None }
    }

    pub fn with_sup(mut self, sup: f64) -> Self {
        self.sup = Some(sup);
        self
    }
}

impl<F, G> Function2D for WithMixed<F, G>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> f64 + Sync,
{
    fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    fn mixed(&self, x: f64, y: f64) -> Option<f64> {
        Some((self.fxy)(x, y))
    }

    fn sup_mixed(&self) -> Option<f64> {
        self.sup
    }
}
