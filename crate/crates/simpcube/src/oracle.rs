//! Reference quadrature: adaptive bisection over 15-point
//! Gauss-Legendre panels, plus a central finite difference for mixed
//! partials.
//!
//! A panel is accepted when splitting it once moves the result by less
//! than the panel's share of the tolerance; the accumulated
//! discrepancies of accepted panels are reported in [`QuadResult::err`],
//! so on success `err` never exceeds the requested tolerance (up to a
//! machine-noise floor for panels that already sit at roundoff).

use std::cell::{Cell, RefCell};
use std::sync::OnceLock;

use serde::Serialize;

use crate::domain::{Function2D, Rectangle};
use crate::error::{Error, Result};

/// Outcome of a quadrature call: the value, an accumulated error bound,
/// and the number of integrand evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub evals: u64,
}

/// Recursion cap for the adaptive bisection.
pub const MAX_DEPTH: u32 = 50;

const GAUSS_ORDER: usize = 15;

// Panels whose split discrepancy is below this multiple of their own
// magnitude are treated as converged to machine precision.
const NOISE_FLOOR: f64 = 32.0 * f64::EPSILON;

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on P₁₅. Exact for polynomials of
/// degree 29.
fn gauss_rule() -> &'static [(f64, f64); GAUSS_ORDER] {
    static RULE: OnceLock<[(f64, f64); GAUSS_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut rule = [(0.0, 0.0); GAUSS_ORDER];
        let n = GAUSS_ORDER;
        for (k, slot) in rule.iter_mut().enumerate() {
            let mut x =
                (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..64 {
                let (p, dp) = legendre(n, x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// Value and derivative of the Legendre polynomial Pₙ at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

struct Adaptive<'a, G> {
    g: &'a G,
    value: f64,
    err: f64,
    evals: u64,
}

impl<G: Fn(f64) -> f64> Adaptive<'_, G> {
    fn panel(&mut self, a: f64, b: f64) -> Result<f64> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for &(x, w) in gauss_rule() {
            let node = c + h * x;
            let v = (self.g)(node);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x: node, value: v });
            }
            acc += w * v;
        }
        self.evals += GAUSS_ORDER as u64;
        Ok(h * acc)
    }

    fn refine(&mut self, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<()> {
        let m = 0.5 * (a + b);
        let left = self.panel(a, m)?;
        let right = self.panel(m, b)?;
        let disc = ((left + right) - whole).abs();
        if disc <= tol || disc <= NOISE_FLOOR * (left.abs() + right.abs()) {
            self.value += left + right;
            self.err += disc;
            return Ok(());
        }
        if depth >= MAX_DEPTH {
            return Err(Error::QuadratureDepthExceeded { a, b, max_depth: MAX_DEPTH });
        }
        self.refine(a, m, left, 0.5 * tol, depth + 1)?;
        self.refine(m, b, right, 0.5 * tol, depth + 1)
    }
}

/// Integrates `g` over [a, b] to the absolute tolerance `tol`.
pub fn integrate_1d<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter {
            name: "interval",
            requirement: "finite with a < b",
            value: b - a,
        });
    }
    check_tol(tol)?;
    let mut state = Adaptive { g: &g, value: 0.0, err: 0.0, evals: 0 };
    let whole = state.panel(a, b)?;
    state.refine(a, b, whole, tol, 0)?;
    Ok(QuadResult { value: state.value, err: state.err, evals: state.evals })
}

/// Integrates `g` over `rect` to the absolute tolerance `tol` by
/// nesting [`integrate_1d`]: the inner (y) integrals get a tolerance
/// share of `tol / (2 width)`, the outer sweep gets `tol / 2`, so the
/// reported `err` stays within `tol`. `evals` counts calls to `g`.
pub fn integrate_2d<G: Fn(f64, f64) -> f64>(
    g: G,
    rect: &Rectangle,
    tol: f64,
) -> Result<QuadResult> {
    check_tol(tol)?;
    let inner_tol = tol / (2.0 * rect.width());
    let inner_err = Cell::new(0.0f64);
    let inner_evals = Cell::new(0u64);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let outer = integrate_1d(
        |x| match integrate_1d(|y| g(x, y), rect.c(), rect.d(), inner_tol) {
            Ok(r) => {
                inner_err.set(inner_err.get().max(r.err));
                inner_evals.set(inner_evals.get() + r.evals);
                r.value
            }
            Err(e) => {
                let mut slot = failure.borrow_mut();
                if slot.is_none() {
                    *slot = Some(match e {
                        Error::NonFiniteSample { x: y, value } => {
                            Error::NonFiniteValue { x, y, value }
                        }
                        other => other,
                    });
                }
                f64::NAN
            }
        },
        rect.a(),
        rect.b(),
        0.5 * tol,
    );

    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadResult {
        value: outer.value,
        err: outer.err + rect.width() * inner_err.get(),
        evals: inner_evals.get(),
    })
}

/// Central finite difference for d²f/dxdy with step `h` on each axis.
/// Second-order accurate; `h` around 1e-4 balances truncation against
/// cancellation for well-scaled functions.
pub fn mixed_partial_fd<F: Function2D + ?Sized>(f: &F, x: f64, y: f64, h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            requirement: "finite and positive",
            value: h,
        });
    }
    let sample = |sx: f64, sy: f64| -> Result<f64> {
        let v = f.eval(sx, sy);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { x: sx, y: sy, value: v });
        }
        Ok(v)
    };
    let pp = sample(x + h, y + h)?;
    let pm = sample(x + h, y - h)?;
    let mp = sample(x - h, y + h)?;
    let mm = sample(x - h, y - h)?;
    Ok(((pp - pm) - (mp - mm)) / (4.0 * h * h))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            requirement: "finite and positive",
            value: tol,
        });
    }
    Ok(())
}
