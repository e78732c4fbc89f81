//! Second-order dual numbers carrying a value, both first partials,
//! and the mixed partial d²/dxdy. Pure second derivatives are not
//! tracked; they never enter the mixed chain rule.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxy: f64,
}

impl HyperDual {
    pub fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0, dxy: 0.0 }
    }

    /// Seed for the x variable at the point x0.
    pub fn variable_x(x0: f64) -> Self {
        Self { v: x0, dx: 1.0, dy: 0.0, dxy: 0.0 }
    }

    /// Seed for the y variable at the point y0.
    pub fn variable_y(y0: f64) -> Self {
        Self { v: y0, dx: 0.0, dy: 1.0, dxy: 0.0 }
    }

    /// Lifts a smooth univariate map through `self`, given its value
    /// and first two derivatives at `self.v`:
    ///
    /// d²/dxdy g(u) = g'(u) u_xy + g''(u) u_x u_y
    pub fn compose(self, g: f64, dg: f64, d2g: f64) -> Self {
        Self {
            v: g,
            dx: dg * self.dx,
            dy: dg * self.dy,
            dxy: dg * self.dxy + d2g * self.dx * self.dy,
        }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxy: self.dxy + o.dxy,
        }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxy: self.dxy - o.dxy,
        }
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
        }
    }
}

impl Div for HyperDual {
    type Output = Self;
    // Division is multiplication by the reciprocal so the quotient rule
    // lives in one place.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, dx: -self.dx, dy: -self.dy, dxy: -self.dxy }
    }
}
