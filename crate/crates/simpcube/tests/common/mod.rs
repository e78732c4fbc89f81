//! Shared fixtures: the smooth corpus with analytic mixed partials and
//! sups, random bicubics, and seeded rectangle generators.
//!
//! Each test target compiles its own copy, so not every item is used
//! everywhere.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::RngExt;

use simpcube::Rectangle;

pub struct CorpusItem {
    pub expr: &'static str,
    pub f: fn(f64, f64) -> f64,
    pub fxy: fn(f64, f64) -> f64,
    /// Home domain on which the item is well behaved and its sup
    /// formula below is valid.
    pub rect: Rectangle,
    /// Analytic sup of |f_xy| over a sub-rectangle of the home domain.
    pub sup_mixed_on: fn(&Rectangle) -> f64,
}

/// Largest |cos| over [lo, hi].
pub fn max_abs_cos(lo: f64, hi: f64) -> f64 {
    // |cos| attains 1 at multiples of pi.
    if (lo / std::f64::consts::PI).ceil() <= (hi / std::f64::consts::PI).floor() {
        1.0
    } else {
        lo.cos().abs().max(hi.cos().abs())
    }
}

pub fn corpus() -> Vec<CorpusItem> {
    let pi = std::f64::consts::PI;
    vec![
        CorpusItem {
            expr: "exp(x+y)",
            f: |x, y| (x + y).exp(),
            fxy: |x, y| (x + y).exp(),
            rect: Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap(),
            sup_mixed_on: |r| (r.b() + r.d()).exp(),
        },
        CorpusItem {
            expr: "sin(x)*sin(y)",
            f: |x, y| x.sin() * y.sin(),
            fxy: |x, y| x.cos() * y.cos(),
            rect: Rectangle::new(0.0, pi, 0.0, pi).unwrap(),
            sup_mixed_on: |r| max_abs_cos(r.a(), r.b()) * max_abs_cos(r.c(), r.d()),
        },
        CorpusItem {
            expr: "x^3*y^3",
            f: |x, y| x.powi(3) * y.powi(3),
            fxy: |x, y| 9.0 * x * x * y * y,
            rect: Rectangle::new(0.0, 1.5, 0.25, 1.25).unwrap(),
            sup_mixed_on: |r| 9.0 * r.b() * r.b() * r.d() * r.d(),
        },
        CorpusItem {
            expr: "x^2*y^2+x+y",
            f: |x, y| x * x * y * y + x + y,
            fxy: |x, y| 4.0 * x * y,
            rect: Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap(),
            sup_mixed_on: |r| 4.0 * r.b() * r.d(),
        },
        CorpusItem {
            expr: "exp(2*x-y)",
            f: |x, y| (2.0 * x - y).exp(),
            fxy: |x, y| -2.0 * (2.0 * x - y).exp(),
            rect: Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap(),
            sup_mixed_on: |r| 2.0 * (2.0 * r.b() - r.c()).exp(),
        },
    ]
}

/// Random sub-rectangle of `outer` with both sides at least
/// `min_frac` of the outer side.
pub fn sub_rectangle(rng: &mut StdRng, outer: &Rectangle, min_frac: f64) -> Rectangle {
    let w = outer.width();
    let h = outer.height();
    let wide = rng.random_range(min_frac * w..=w);
    let tall = rng.random_range(min_frac * h..=h);
    let a = outer.a() + rng.random_range(0.0..=(w - wide));
    let c = outer.c() + rng.random_range(0.0..=(h - tall));
    Rectangle::new(a, a + wide, c, c + tall).unwrap()
}

/// Polynomial of degree at most three in each variable.
#[derive(Debug, Clone)]
pub struct PolyXY {
    pub coeffs: [[f64; 4]; 4],
}

impl PolyXY {
    pub fn random(rng: &mut StdRng) -> Self {
        let mut coeffs = [[0.0; 4]; 4];
        for row in &mut coeffs {
            for c in row {
                *c = rng.random_range(-2.0..=2.0);
            }
        }
        Self { coeffs }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coeffs.iter().rev() {
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }
}
