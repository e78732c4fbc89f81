//! Expression evaluation, generic over the scalar carrier so one walk
//! serves both plain values and hyperdual numbers.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::domain::{Function2D, Rectangle};
use crate::error::{Error, Result as CrateResult};
use crate::expr::hyperdual::HyperDual;
use crate::expr::{parse, Ast, AstKind, BinOp, DomainErrorKind, ExprError, Func, Span};

/// Non-fatal observations made during evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalWarnings {
    /// `abs` was evaluated exactly at its kink; the derivative there is
    /// reported as 0.
    pub abs_kink: bool,
}

trait Scalar: Copy {
    fn from_const(v: f64) -> Self;
    fn var_x(x0: f64) -> Self;
    fn var_y(y0: f64) -> Self;
    fn value(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    /// Composes a univariate map with value `g` and derivatives `dg`,
    /// `d2g` at `self.value()`.
    fn lift(self, g: f64, dg: f64, d2g: f64) -> Self;
}

impl Scalar for f64 {
    fn from_const(v: f64) -> Self {
        v
    }
    fn var_x(x0: f64) -> Self {
        x0
    }
    fn var_y(y0: f64) -> Self {
        y0
    }
    fn value(self) -> f64 {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn lift(self, g: f64, _dg: f64, _d2g: f64) -> Self {
        g
    }
}

impl Scalar for HyperDual {
    fn from_const(v: f64) -> Self {
        HyperDual::constant(v)
    }
    fn var_x(x0: f64) -> Self {
        HyperDual::variable_x(x0)
    }
    fn var_y(y0: f64) -> Self {
        HyperDual::variable_y(y0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn lift(self, g: f64, dg: f64, d2g: f64) -> Self {
        self.compose(g, dg, d2g)
    }
}

fn has_variables(ast: &Ast) -> bool {
    match &ast.kind {
        AstKind::X | AstKind::Y => true,
        AstKind::Number(_) | AstKind::Pi | AstKind::E => false,
        AstKind::Neg(inner) | AstKind::Call(_, inner) => has_variables(inner),
        AstKind::Binary(_, l, r) => has_variables(l) || has_variables(r),
    }
}

fn mentions(ast: &Ast, axis: Axis) -> bool {
    match &ast.kind {
        AstKind::X => axis == Axis::X,
        AstKind::Y => axis == Axis::Y,
        AstKind::Number(_) | AstKind::Pi | AstKind::E => false,
        AstKind::Neg(inner) | AstKind::Call(_, inner) => mentions(inner, axis),
        AstKind::Binary(_, l, r) => mentions(l, axis) || mentions(r, axis),
    }
}

fn powi<S: Scalar>(base: S, n: i64, span: Span) -> Result<S, ExprError> {
    if n == 0 {
        return Ok(S::from_const(1.0));
    }
    if n < 0 && base.value() == 0.0 {
        return Err(ExprError::Domain { span, kind: DomainErrorKind::PowZeroNegative });
    }
    let mut e = n.unsigned_abs();
    let mut acc = S::from_const(1.0);
    let mut p = base;
    loop {
        if e & 1 == 1 {
            acc = acc.mul(p);
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        p = p.mul(p);
    }
    Ok(if n < 0 { S::from_const(1.0).div(acc) } else { acc })
}

// Exponents within this distance of an integer take the repeated-
// multiplication path, which is defined for any base.
const INT_EXP_TOL: f64 = 1e-9;

fn eval_scalar<S: Scalar>(
    ast: &Ast,
    x: f64,
    y: f64,
    warn: &mut EvalWarnings,
) -> Result<S, ExprError> {
    match &ast.kind {
        AstKind::Number(v) => Ok(S::from_const(*v)),
        AstKind::X => Ok(S::var_x(x)),
        AstKind::Y => Ok(S::var_y(y)),
        AstKind::Pi => Ok(S::from_const(std::f64::consts::PI)),
        AstKind::E => Ok(S::from_const(std::f64::consts::E)),
        AstKind::Neg(inner) => Ok(eval_scalar::<S>(inner, x, y, warn)?.neg()),
        AstKind::Binary(op, l, r) => {
            let lhs = eval_scalar::<S>(l, x, y, warn)?;
            match op {
                BinOp::Add => Ok(lhs.add(eval_scalar::<S>(r, x, y, warn)?)),
                BinOp::Sub => Ok(lhs.sub(eval_scalar::<S>(r, x, y, warn)?)),
                BinOp::Mul => Ok(lhs.mul(eval_scalar::<S>(r, x, y, warn)?)),
                BinOp::Div => {
                    let rhs = eval_scalar::<S>(r, x, y, warn)?;
                    if rhs.value() == 0.0 {
                        return Err(ExprError::Domain {
                            span: r.span,
                            kind: DomainErrorKind::DivisionByZero,
                        });
                    }
                    Ok(lhs.div(rhs))
                }
                BinOp::Pow => {
                    if !has_variables(r) {
                        let e: f64 = eval_scalar::<f64>(r, x, y, warn)?;
                        let rounded = e.round();
                        if (e - rounded).abs() <= INT_EXP_TOL && rounded.abs() <= i32::MAX as f64 {
                            return powi(lhs, rounded as i64, ast.span);
                        }
                        let v = lhs.value();
                        if v <= 0.0 {
                            return Err(ExprError::Domain {
                                span: ast.span,
                                kind: DomainErrorKind::PowNonPositiveBase,
                            });
                        }
                        return Ok(lhs.lift(
                            v.powf(e),
                            e * v.powf(e - 1.0),
                            e * (e - 1.0) * v.powf(e - 2.0),
                        ));
                    }
                    // Variable exponent: u^w = exp(w ln u), u > 0.
                    let rhs = eval_scalar::<S>(r, x, y, warn)?;
                    let v = lhs.value();
                    if v <= 0.0 {
                        return Err(ExprError::Domain {
                            span: ast.span,
                            kind: DomainErrorKind::PowNonPositiveBase,
                        });
                    }
                    let ln_base = lhs.lift(v.ln(), 1.0 / v, -1.0 / (v * v));
                    let prod = rhs.mul(ln_base);
                    let pv = prod.value().exp();
                    Ok(prod.lift(pv, pv, pv))
                }
            }
        }
        AstKind::Call(func, arg) => {
            let u = eval_scalar::<S>(arg, x, y, warn)?;
            let v = u.value();
            match func {
                Func::Sin => Ok(u.lift(v.sin(), v.cos(), -v.sin())),
                Func::Cos => Ok(u.lift(v.cos(), -v.sin(), -v.cos())),
                Func::Exp => {
                    let e = v.exp();
                    Ok(u.lift(e, e, e))
                }
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(ExprError::Domain {
                            span: arg.span,
                            kind: DomainErrorKind::LogNonPositive,
                        });
                    }
                    Ok(u.lift(v.ln(), 1.0 / v, -1.0 / (v * v)))
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(ExprError::Domain {
                            span: arg.span,
                            kind: DomainErrorKind::SqrtNegative,
                        });
                    }
                    let r = v.sqrt();
                    Ok(u.lift(r, 0.5 / r, -0.25 / (r * r * r)))
                }
                Func::Abs => {
                    if v == 0.0 {
                        warn.abs_kink = true;
                    }
                    let sign = if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    Ok(u.lift(v.abs(), sign, 0.0))
                }
            }
        }
    }
}

/// Evaluates `ast` at `(x, y)`, recording non-fatal observations in
/// `warnings`.
pub fn eval_with_warnings(
    ast: &Ast,
    x: f64,
    y: f64,
    warnings: &mut EvalWarnings,
) -> Result<f64, ExprError> {
    eval_scalar::<f64>(ast, x, y, warnings)
}

/// Evaluates `ast` at `(x, y)`.
pub fn eval(ast: &Ast, x: f64, y: f64) -> Result<f64, ExprError> {
    let mut w = EvalWarnings::default();
    eval_scalar::<f64>(ast, x, y, &mut w)
}

/// Evaluates `ast` with hyperdual seeds, yielding the value, both first
/// partials, and the mixed partial in one pass.
pub fn eval_hyperdual_with_warnings(
    ast: &Ast,
    x: f64,
    y: f64,
    warnings: &mut EvalWarnings,
) -> Result<HyperDual, ExprError> {
    eval_scalar::<HyperDual>(ast, x, y, warnings)
}

/// Warning-discarding companion of [`eval_hyperdual_with_warnings`].
pub fn eval_hyperdual(ast: &Ast, x: f64, y: f64) -> Result<HyperDual, ExprError> {
    let mut w = EvalWarnings::default();
    eval_scalar::<HyperDual>(ast, x, y, &mut w)
}

/// An expression compiled to the [`Function2D`] interface.
///
/// Evaluation failures surface as NaN so that the quadrature layer can
/// report the offending point; the first structured error is retained
/// and available from [`last_error`](Self::last_error). abs-at-kink
/// events are sticky and readable via [`saw_abs_kink`](Self::saw_abs_kink).
pub struct ExprFn {
    ast: Ast,
    text: String,
    abs_kink: AtomicBool,
    last_error: Mutex<Option<ExprError>>,
}

impl ExprFn {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        let ast = parse(text)?;
        Ok(Self {
            ast,
            text: text.to_string(),
            abs_kink: AtomicBool::new(false),
            last_error: Mutex::new(None),
        })
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.text
    }

    pub fn saw_abs_kink(&self) -> bool {
        self.abs_kink.load(Ordering::Relaxed)
    }

    /// First evaluation error observed through the `Function2D` paths,
    /// if any.
    pub fn last_error(&self) -> Option<ExprError> {
        self.last_error.lock().unwrap().clone()
    }

    /// Whether the expression mentions the given variable at all.
    pub fn uses(&self, axis: Axis) -> bool {
        mentions(&self.ast, axis)
    }

    fn note<T>(&self, r: Result<T, ExprError>, warn: EvalWarnings) -> Option<T> {
        if warn.abs_kink {
            self.abs_kink.store(true, Ordering::Relaxed);
        }
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let mut slot = self.last_error.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(e);
                }
                None
            }
        }
    }
}

impl Function2D for ExprFn {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let mut warn = EvalWarnings::default();
        let r = eval_scalar::<f64>(&self.ast, x, y, &mut warn);
        self.note(r, warn).unwrap_or(f64::NAN)
    }

    fn mixed(&self, x: f64, y: f64) -> Option<f64> {
        let mut warn = EvalWarnings::default();
        let r = eval_scalar::<HyperDual>(&self.ast, x, y, &mut warn);
        Some(self.note(r, warn).map_or(f64::NAN, |h| h.dxy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// First failed midpoint-convexity check, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityViolation {
    pub axis: Axis,
    /// The frozen coordinate of the line on which the test failed.
    pub fixed: f64,
    pub endpoints: (f64, f64),
    pub midpoint_value: f64,
    pub average_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub checks: u64,
    pub violation: Option<ConvexityViolation>,
}

impl ConvexityReport {
    /// True when no midpoint test failed; evidence, not proof, of
    /// coordinate-wise convexity.
    pub fn consistent(&self) -> bool {
        self.violation.is_none()
    }
}

/// Samples midpoint convexity of the expression along axis-parallel
/// lines of `rect`: `samples` lattice points per axis (endpoints
/// included), every pair tested against its midpoint. Stops at the
/// first violation.
pub fn convexity_probe(
    ast: &Ast,
    rect: &Rectangle,
    samples: usize,
) -> CrateResult<ConvexityReport> {
    if samples < 3 {
        return Err(Error::InvalidParameter {
            name: "samples",
            requirement: "at least 3",
            value: samples as f64,
        });
    }
    let lattice = |lo: f64, hi: f64| -> Vec<f64> {
        let last = samples - 1;
        (0..=last)
            .map(|i| {
                if i == last {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / last as f64
                }
            })
            .collect()
    };
    let xs = lattice(rect.a(), rect.b());
    let ys = lattice(rect.c(), rect.d());
    let mut checks = 0u64;
    let mut warn = EvalWarnings::default();

    let mut test_line =
        |axis: Axis, fixed: f64, line: &[f64]| -> CrateResult<Option<ConvexityViolation>> {
            let value = |u: f64, warn: &mut EvalWarnings| -> CrateResult<f64> {
                let (px, py) = match axis {
                    Axis::X => (u, fixed),
                    Axis::Y => (fixed, u),
                };
                let v = eval_with_warnings(ast, px, py, warn)?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { x: px, y: py, value: v });
                }
                Ok(v)
            };
            for i in 0..line.len() {
                for k in (i + 1)..line.len() {
                    let (u, w) = (line[i], line[k]);
                    let fu = value(u, &mut warn)?;
                    let fw = value(w, &mut warn)?;
                    let fm = value(0.5 * (u + w), &mut warn)?;
                    let avg = 0.5 * (fu + fw);
                    let slack = 1e-12 * (1.0 + fm.abs() + avg.abs());
                    checks += 1;
                    if fm > avg + slack {
                        return Ok(Some(ConvexityViolation {
                            axis,
                            fixed,
                            endpoints: (u, w),
                            midpoint_value: fm,
                            average_value: avg,
                        }));
                    }
                }
            }
            Ok(None)
        };

    for &yv in &ys {
        if let Some(v) = test_line(Axis::X, yv, &xs)? {
            return Ok(ConvexityReport { samples, checks, violation: Some(v) });
        }
    }
    for &xv in &xs {
        if let Some(v) = test_line(Axis::Y, xv, &ys)? {
            return Ok(ConvexityReport { samples, checks, violation: Some(v) });
        }
    }
    Ok(ConvexityReport { samples, checks, violation: None })
}
