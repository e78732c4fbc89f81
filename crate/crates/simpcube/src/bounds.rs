//! A-priori bounds on the Simpson defect, and the
//! midpoint/mean/corner-average chain satisfied by co-ordinated convex
//! functions.

use serde::Serialize;

use crate::composite::empirical_sup_mixed;
use crate::cubature::{defect, simpson1d};
use crate::domain::{Function2D, Rectangle, Tolerances};
use crate::error::{Error, Result};
use crate::oracle::{integrate_1d, integrate_2d};

/// Which bound family a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem3,
    Theorem4,
    Simpson1d,
}

/// Where a sup-norm figure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupSource {
    /// Supplied by the caller (assumed rigorous).
    User,
    /// Sampled on a lattice; a diagnostic, not a proof.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub bound: f64,
    /// |defect| (or |S - mean integral| in one dimension).
    pub observed: f64,
    /// observed <= bound plus the propagated oracle error.
    pub satisfied: bool,
    /// bound - observed.
    pub slack: f64,
    pub sup_source: Option<SupSource>,
    pub oracle_error: f64,
    pub evals: u64,
}

/// Corner-value bound on the defect:
///
/// ```text
/// |D| <= 25 (b-a)(d-c) / 5184 * sum of the four corner magnitudes
/// ```
///
/// where `corners` holds |f_xy| at (a,c), (a,d), (b,c), (b,d). Valid
/// when |f_xy| is convex in each variable separately.
pub fn theorem3_bound(corners: [f64; 4], rect: &Rectangle) -> Result<f64> {
    for &c in &corners {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "corner magnitude",
                requirement: "finite and nonnegative",
                value: c,
            });
        }
    }
    let sum: f64 = corners.iter().sum();
    Ok(25.0 * rect.width() * rect.height() / 5184.0 * sum)
}

/// Sup-norm bound on the defect:
///
/// ```text
/// |D| <= 25 (b-a)(d-c) / 1296 * sup |f_xy|
/// ```
pub fn theorem4_bound(sup_mixed: f64, rect: &Rectangle) -> Result<f64> {
    if !(sup_mixed.is_finite() && sup_mixed >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sup_mixed",
            requirement: "finite and nonnegative",
            value: sup_mixed,
        });
    }
    Ok(25.0 * rect.width() * rect.height() / 1296.0 * sup_mixed)
}

/// One-dimensional Simpson bound (mean convention):
///
/// ```text
/// |S(g) - mean of g| <= m4 (b-a)^4 / 2880
/// ```
///
/// with m4 a bound on |g''''|.
pub fn simpson1d_bound(m4: f64, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter {
            name: "interval",
            requirement: "finite with a < b",
            value: b - a,
        });
    }
    if !(m4.is_finite() && m4 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "m4",
            requirement: "finite and nonnegative",
            value: m4,
        });
    }
    Ok(m4 * (b - a).powi(4) / 2880.0)
}

/// |f_xy| at the four corners, in the order `Rectangle::corners` uses.
pub(crate) fn corner_mixed_magnitudes<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, (x, y)) in rect.corners().into_iter().enumerate() {
        let d = f.mixed(x, y).ok_or(Error::MissingMixedPartial)?;
        if !d.is_finite() {
            return Err(Error::NonFiniteValue { x, y, value: d });
        }
        out[k] = d.abs();
    }
    Ok(out)
}

/// Which of the two defect bounds `check_theorem` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremMode {
    Theorem3,
    Theorem4,
}

/// Computes the defect and one of the a-priori bounds for it.
///
/// Theorem 3 takes |f_xy| at the four corners from `f.mixed`. Theorem 4
/// uses `f.sup_mixed()` when present (reported as a user sup),
/// otherwise falls back to lattice sampling of `f.mixed` (reported as
/// empirical).
pub fn check_theorem<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
    mode: TheoremMode,
) -> Result<BoundReport> {
    let d = defect(f, rect, tol)?;
    let (kind, bound, sup_source, extra_evals) = match mode {
        TheoremMode::Theorem3 => {
            let corners = corner_mixed_magnitudes(f, rect)?;
            (BoundKind::Theorem3, theorem3_bound(corners, rect)?, None, 4)
        }
        TheoremMode::Theorem4 => match f.sup_mixed() {
            Some(sup) => (
                BoundKind::Theorem4,
                theorem4_bound(sup, rect)?,
                Some(SupSource::User),
                0,
            ),
            None => {
                let (sup, evals) = empirical_sup_mixed(f, rect)?;
                (
                    BoundKind::Theorem4,
                    theorem4_bound(sup, rect)?,
                    Some(SupSource::Empirical),
                    evals,
                )
            }
        },
    };
    let observed = d.defect.abs();
    Ok(BoundReport {
        kind,
        bound,
        observed,
        satisfied: observed <= bound + d.oracle_error,
        slack: bound - observed,
        sup_source,
        oracle_error: d.oracle_error,
        evals: d.evals + extra_evals,
    })
}

/// `check_theorem`'s one-dimensional sibling: Simpson versus the mean
/// integral of `g` on [a, b], bounded via `m4`.
pub fn check_simpson1d<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    m4: f64,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let bound = simpson1d_bound(m4, a, b)?;
    let s = simpson1d(&g, a, b)?;
    let integral = integrate_1d(&g, a, b, tol.oracle() * (b - a))?;
    let mean = integral.value / (b - a);
    let err = integral.err / (b - a);
    let observed = (s - mean).abs();
    Ok(BoundReport {
        kind: BoundKind::Simpson1d,
        bound,
        observed,
        satisfied: observed <= bound + err,
        slack: bound - observed,
        sup_source: Some(SupSource::User),
        oracle_error: err,
        evals: 3 + integral.evals,
    })
}

/// The three rungs of the co-ordinated convexity chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HadamardReport {
    pub midpoint: f64,
    pub mean: f64,
    pub corner_average: f64,
    /// midpoint <= mean, up to oracle error and a machine-precision pad.
    pub lower_holds: bool,
    /// mean <= corner average, same slack.
    pub upper_holds: bool,
    pub oracle_error: f64,
    pub evals: u64,
}

/// Checks f(center) <= mean of f <= average of the corner values, the
/// chain satisfied by co-ordinated convex functions.
pub fn hadamard_check<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: &Tolerances,
) -> Result<HadamardReport> {
    let sample = |x: f64, y: f64| -> Result<f64> {
        let v = f.eval(x, y);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { x, y, value: v });
        }
        Ok(v)
    };
    let midpoint = sample(rect.mid_x(), rect.mid_y())?;
    let mut corner_sum = 0.0;
    for (x, y) in rect.corners() {
        corner_sum += sample(x, y)?;
    }
    let corner_average = corner_sum / 4.0;

    let area = rect.area();
    let integral = integrate_2d(|x, y| f.eval(x, y), rect, tol.oracle() * area)?;
    let mean = integral.value / area;
    let err = integral.err / area;

    let pad = 1e-12 * (1.0 + midpoint.abs() + mean.abs() + corner_average.abs());
    Ok(HadamardReport {
        midpoint,
        mean,
        corner_average,
        lower_holds: midpoint <= mean + err + pad,
        upper_holds: mean <= corner_average + err + pad,
        oracle_error: err,
        evals: 5 + integral.evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::WithMixed;

    const E: f64 = std::f64::consts::E;

    fn unit() -> Rectangle {
        Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn closed_form_constants() {
        assert_eq!(theorem4_bound(1.0, &unit()).unwrap(), 25.0 / 1296.0);
        assert_eq!(simpson1d_bound(1.0, 0.0, 1.0).unwrap(), 1.0 / 2880.0);
        let t3 = theorem3_bound([1.0; 4], &unit()).unwrap();
        assert!((t3 - 100.0 / 5184.0).abs() < 1e-15);
        assert_eq!(theorem3_bound([0.0; 4], &unit()).unwrap(), 0.0);
    }

    #[test]
    fn bound_inputs_are_validated() {
        assert!(theorem3_bound([1.0, -1.0, 0.0, 0.0], &unit()).is_err());
        assert!(theorem3_bound([f64::NAN, 0.0, 0.0, 0.0], &unit()).is_err());
        assert!(theorem4_bound(-1.0, &unit()).is_err());
        assert!(theorem4_bound(f64::INFINITY, &unit()).is_err());
        assert!(simpson1d_bound(1.0, 1.0, 0.0).is_err());
        assert!(simpson1d_bound(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn scaling_in_the_rectangle() {
        // Doubling both sides scales theorem 4 by 4.
        let big = Rectangle::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let b1 = theorem4_bound(1.0, &unit()).unwrap();
        let b2 = theorem4_bound(1.0, &big).unwrap();
        assert!((b2 - 4.0 * b1).abs() < 1e-15);
    }

    #[test]
    fn theorem4_holds_for_exp() {
        let tol = Tolerances::default();
        let f = WithMixed::new(
            |x: f64, y: f64| (x + y).exp(),
            |x: f64, y: f64| (x + y).exp(),
        )
        .with_sup(E * E);
        let rep = check_theorem(&f, &unit(), &tol, TheoremMode::Theorem4).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.sup_source, Some(SupSource::User));
        assert!((rep.bound - 25.0 * E * E / 1296.0).abs() < 1e-15);
        assert!((rep.bound - 0.142536).abs() < 1e-6);
        assert!(rep.slack > 0.0);
    }

    #[test]
    fn theorem4_falls_back_to_sampling() {
        let tol = Tolerances::default();
        let f = WithMixed::new(
            |x: f64, y: f64| (x + y).exp(),
            |x: f64, y: f64| (x + y).exp(),
        );
        let rep = check_theorem(&f, &unit(), &tol, TheoremMode::Theorem4).unwrap();
        assert_eq!(rep.sup_source, Some(SupSource::Empirical));
        // The lattice includes the corner (1,1), so the sampled sup is
        // exactly e².
        assert!((rep.bound - 25.0 * E * E / 1296.0).abs() < 1e-15);
        assert!(rep.satisfied);
    }

    #[test]
    fn theorem3_holds_for_exp() {
        let tol = Tolerances::default();
        let f = WithMixed::new(
            |x: f64, y: f64| (x + y).exp(),
            |x: f64, y: f64| (x + y).exp(),
        );
        let rep = check_theorem(&f, &unit(), &tol, TheoremMode::Theorem3).unwrap();
        assert!(rep.satisfied);
        // Corner sum (1+e)²; compare against the closed form.
        let expect = 25.0 / 5184.0 * (1.0 + E) * (1.0 + E);
        assert!((rep.bound - expect).abs() < 1e-12);
        assert_eq!(rep.sup_source, None);
    }

    #[test]
    fn theorem3_needs_mixed_data() {
        let tol = Tolerances::default();
        let f = |x: f64, y: f64| x * y;
        assert!(matches!(
            check_theorem(&f, &unit(), &tol, TheoremMode::Theorem3),
            Err(Error::MissingMixedPartial)
        ));
    }

    #[test]
    fn simpson1d_bound_holds_for_exp() {
        let tol = Tolerances::default();
        let rep = check_simpson1d(|x: f64| x.exp(), 0.0, 1.0, E, &tol).unwrap();
        assert!(rep.satisfied);
        assert!((rep.bound - E / 2880.0).abs() < 1e-15);
        let gap = (1.0 + 4.0 * E.sqrt() + E) / 6.0 - (E - 1.0);
        assert!((rep.observed - gap).abs() < 1e-10);
    }

    #[test]
    fn hadamard_chain_examples() {
        let tol = Tolerances::default();
        // x² + y²: midpoint 1/2, mean 2/3, corner average 1.
        let rep = hadamard_check(&|x: f64, y: f64| x * x + y * y, &unit(), &tol).unwrap();
        assert!((rep.midpoint - 0.5).abs() < 1e-15);
        assert!((rep.mean - 2.0 / 3.0).abs() < 1e-10);
        assert!((rep.corner_average - 1.0).abs() < 1e-15);
        assert!(rep.lower_holds && rep.upper_holds);

        // Bilinear: all three coincide.
        let rep = hadamard_check(&|x: f64, y: f64| x * y, &unit(), &tol).unwrap();
        assert!((rep.midpoint - rep.mean).abs() < 1e-10);
        assert!((rep.mean - rep.corner_average).abs() < 1e-10);
        assert!(rep.lower_holds && rep.upper_holds);

        // A concave function breaks the chain.
        let rep = hadamard_check(
            &|x: f64, y: f64| -(x * x) - y * y,
            &unit(),
            &tol,
        )
        .unwrap();
        assert!(!rep.lower_holds || !rep.upper_holds);
    }
}
