//! The nine-point Simpson cubature Q, its cross-average companion A,
//! the defect D = Q - A + I, and the kernel-form remainder that
//! reproduces D.
//!
//! Every functional here is normalized by the rectangle area: for
//! f = 1 they return Q = 1, A = 2, I = 1. The defect of a constant is
//! therefore 0, and more generally the defect vanishes whenever f is a
//! polynomial of degree at most three in each variable separately.

use serde::Serialize;

use crate::domain::{Function2D, Rectangle, Tolerances};
use crate::error::{Error, Result};
use crate::oracle::{integrate_1d, integrate_2d, QuadResult};

/// The tensor Simpson nodes {a, (a+b)/2, b} x {c, (c+d)/2, d} with
/// weights k/36, k in {1, 4, 16}: corners 1/36, edge midpoints 1/9,
/// center 4/9.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    points: [(f64, f64); 9],
    numerators: [u32; 9],
}

impl NodeSet {
    pub fn new(rect: &Rectangle) -> Self {
        let xs = [rect.a(), rect.mid_x(), rect.b()];
        let ys = [rect.c(), rect.mid_y(), rect.d()];
        let w = [1u32, 4, 1];
        let mut points = [(0.0, 0.0); 9];
        let mut numerators = [0u32; 9];
        for i in 0..3 {
            for j in 0..3 {
                points[3 * i + j] = (xs[i], ys[j]);
                numerators[3 * i + j] = w[i] * w[j];
            }
        }
        Self { points, numerators }
    }

    pub fn points(&self) -> &[(f64, f64); 9] {
        &self.points
    }

    /// Weights as reals; the integer numerators sum to 36 exactly.
    pub fn weights(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (o, &n) in out.iter_mut().zip(&self.numerators) {
            *o = n as f64 / 36.0;
        }
        out
    }

    /// Applies the rule: sum of w_i f(p_i), accumulated over the
    /// integer numerators and divided by 36 once at the end.
    pub fn apply<F: Function2D + ?Sized>(&self, f: &F) -> Result<f64> {
        let mut acc = 0.0;
        for (&(x, y), &n) in self.points.iter().zip(&self.numerators) {
            let v = f.eval(x, y);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { x, y, value: v });
            }
            acc += n as f64 * v;
        }
        Ok(acc / 36.0)
    }
}

/// The Simpson cubature of `f` over `rect` (mean-normalized). Exactly
/// nine evaluations.
pub fn q_functional<F: Function2D + ?Sized>(f: &F, rect: &Rectangle) -> Result<f64> {
    NodeSet::new(rect).apply(f)
}

/// The cross term: the x-mean of the Simpson rule in y plus the y-mean
/// of the Simpson rule in x,
///
/// ```text
/// A = 1/(6(b-a)) ∫ [f(x,c) + 4 f(x,m_y) + f(x,d)] dx
///   + 1/(6(d-c)) ∫ [f(a,y) + 4 f(m_x,y) + f(b,y)] dy
/// ```
///
/// `evals` counts evaluations of `f` (three per quadrature node).
pub fn a_functional<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<QuadResult> {
    let (my, mx) = (rect.mid_y(), rect.mid_x());
    let (w, h) = (rect.width(), rect.height());
    let fx = |x: f64| f.eval(x, rect.c()) + 4.0 * f.eval(x, my) + f.eval(x, rect.d());
    let fy = |y: f64| f.eval(rect.a(), y) + 4.0 * f.eval(mx, y) + f.eval(rect.b(), y);
    // Each integral contributes err/(6 len); budget half the oracle
    // tolerance to each.
    let ix = integrate_1d(fx, rect.a(), rect.b(), 3.0 * w * tol.oracle())?;
    let iy = integrate_1d(fy, rect.c(), rect.d(), 3.0 * h * tol.oracle())?;
    Ok(QuadResult {
        value: ix.value / (6.0 * w) + iy.value / (6.0 * h),
        err: ix.err / (6.0 * w) + iy.err / (6.0 * h),
        evals: 3 * (ix.evals + iy.evals),
    })
}

/// The mean integral of `f` over `rect`, to `tol.oracle()` absolute.
pub fn i_functional<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<QuadResult> {
    let area = rect.area();
    let r = integrate_2d(|x, y| f.eval(x, y), rect, tol.oracle() * area)?;
    Ok(QuadResult { value: r.value / area, err: r.err / area, evals: r.evals })
}

/// Report from [`defect`] and [`verify_lemma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectReport {
    pub q: f64,
    pub a: f64,
    pub i: f64,
    /// D = Q - A + I.
    pub defect: f64,
    /// Kernel-form right-hand side, when computed.
    pub remainder: Option<f64>,
    /// |defect - remainder|, when the remainder was computed.
    pub residual: Option<f64>,
    /// Identity verdict: residual within `tolerances.residual` plus the
    /// propagated oracle error.
    pub passed: Option<bool>,
    pub oracle_error: f64,
    pub evals: u64,
}

/// Computes Q, A, I and the defect D = Q - A + I.
pub fn defect<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<DefectReport> {
    let q = q_functional(f, rect)?;
    let a = a_functional(f, rect, tol)?;
    let i = i_functional(f, rect, tol)?;
    Ok(DefectReport {
        q,
        a: a.value,
        i: i.value,
        defect: q - a.value + i.value,
        remainder: None,
        residual: None,
        passed: None,
        oracle_error: a.err + i.err,
        evals: 9 + a.evals + i.evals,
    })
}

/// The kernel form of the defect,
///
/// ```text
/// (b-a)(d-c) ∫₀¹∫₀¹ kernel(t) kernel(s) f_xy(x(t), y(s)) dt ds
/// ```
///
/// with x(t) = t a + (1-t) b and y(s) = s c + (1-s) d. The unit square
/// is integrated as four smooth panels split at t = s = 1/2, with the
/// kernel branch fixed per panel, so the jump never crosses a
/// quadrature panel.
pub fn remainder_rhs<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<QuadResult> {
    let probe = f
        .mixed(rect.mid_x(), rect.mid_y())
        .ok_or(Error::MissingMixedPartial)?;
    if !probe.is_finite() {
        return Err(Error::NonFiniteValue {
            x: rect.mid_x(),
            y: rect.mid_y(),
            value: probe,
        });
    }

    let area = rect.area();
    // Branch offsets: kernel(t) = t - 1/6 left of the jump, t - 5/6
    // right of it.
    let branches = [(0.0, 0.5, 1.0 / 6.0), (0.5, 1.0, 5.0 / 6.0)];
    let panel_tol = tol.oracle() / (4.0 * area);

    let mut total = QuadResult { value: 0.0, err: 0.0, evals: 0 };
    for &(t0, t1, ct) in &branches {
        for &(s0, s1, cs) in &branches {
            let panel = Rectangle::new(t0, t1, s0, s1).expect("unit sub-panel");
            let r = integrate_2d(
                |t, s| {
                    let x = t * rect.a() + (1.0 - t) * rect.b();
                    let y = s * rect.c() + (1.0 - s) * rect.d();
                    let fxy = f.mixed(x, y).unwrap_or(f64::NAN);
                    (t - ct) * (s - cs) * fxy
                },
                &panel,
                panel_tol,
            );
            let r = match r {
                Ok(r) => r,
                // Map unit-square coordinates back to the rectangle.
                Err(Error::NonFiniteValue { x: t, y: s, value }) => {
                    return Err(Error::NonFiniteValue {
                        x: rect.map_t_to_x(t.clamp(0.0, 1.0))?,
                        y: rect.map_s_to_y(s.clamp(0.0, 1.0))?,
                        value,
                    });
                }
                Err(e) => return Err(e),
            };
            total.value += r.value;
            total.err += r.err;
            total.evals += r.evals;
        }
    }
    Ok(QuadResult {
        value: area * total.value,
        err: area * total.err,
        evals: total.evals,
    })
}

/// Computes the defect and the kernel-form remainder and checks that
/// they agree: residual at most `tol.residual()` plus the propagated
/// oracle error.
pub fn verify_lemma<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<DefectReport> {
    let mut report = defect(f, rect, tol)?;
    let rhs = remainder_rhs(f, rect, tol)?;
    let residual = (report.defect - rhs.value).abs();
    report.remainder = Some(rhs.value);
    report.residual = Some(residual);
    report.oracle_error += rhs.err;
    report.evals += rhs.evals;
    report.passed = Some(residual <= tol.residual() + report.oracle_error);
    Ok(report)
}

/// One-dimensional Simpson value [g(a) + 4 g(m) + g(b)] / 6 (mean
/// convention).
pub fn simpson1d<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter {
            name: "interval",
            requirement: "finite with a < b",
            value: b - a,
        });
    }
    let mut acc = 0.0;
    for (x, w) in [(a, 1.0), (0.5 * (a + b), 4.0), (b, 1.0)] {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { x, value: v });
        }
        acc += w * v;
    }
    Ok(acc / 6.0)
}
