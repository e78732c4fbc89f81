//! The one-dimensional Simpson kernel and its exact integral constants.
//!
//! The kernel is piecewise linear on [0, 1]:
//!
//! ```text
//! kernel(t) = t - 1/6   for t in [0, 1/2]
//! kernel(t) = t - 5/6   for t in (1/2, 1]
//! ```
//!
//! It has mean zero, annihilates t and t² as well, and changes sign at
//! 1/6, 1/2, and 5/6. Apart from the jump at 1/2 it is antisymmetric:
//! kernel(1 - t) = -kernel(t).

use crate::error::{Error, Result};

/// Kernel value at `t` in [0, 1]. The branch point 1/2 belongs to the
/// left branch, so `kernel(0.5) = 1/3`.
pub fn kernel(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange { name: "t", value: t, lo: 0.0, hi: 1.0 });
    }
    Ok(if t <= 0.5 { t - 1.0 / 6.0 } else { t - 5.0 / 6.0 })
}

/// ∫₀¹ |kernel(t)| dt = 5/36.
pub fn kernel_l1() -> f64 {
    5.0 / 36.0
}

/// ∫₀¹ ∫₀¹ |kernel(t) kernel(s)| dt ds = 25/1296, the square of
/// [`kernel_l1`].
pub fn kernel_double_l1() -> f64 {
    25.0 / 1296.0
}

/// ∫₀¹ |kernel(t)| t dt = 5/72. By antisymmetry the weight (1 - t)
/// integrates to the same value.
pub fn kernel_weighted_moment() -> f64 {
    5.0 / 72.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::integrate_1d;

    #[test]
    fn branch_values() {
        assert_eq!(kernel(0.0).unwrap(), -1.0 / 6.0);
        assert_eq!(kernel(1.0 / 6.0).unwrap(), 0.0);
        assert_eq!(kernel(0.5).unwrap(), 0.5 - 1.0 / 6.0);
        assert!((kernel(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(kernel(5.0 / 6.0).unwrap(), 0.0);
        assert_eq!(kernel(1.0).unwrap(), 1.0 - 5.0 / 6.0);
        assert!((kernel(1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(kernel(-0.01).is_err());
        assert!(kernel(1.01).is_err());
        assert!(kernel(f64::NAN).is_err());
    }

    #[test]
    fn sign_pattern() {
        for (t, negative) in [
            (0.05, true),
            (0.3, false),
            (0.5, false),
            (0.6, true),
            (0.9, false),
        ] {
            let v = kernel(t).unwrap();
            assert_eq!(v < 0.0, negative, "kernel({t}) = {v}");
        }
    }

    #[test]
    fn antisymmetric_away_from_the_jump() {
        for i in 1..50 {
            let t = i as f64 / 100.0; // stays below the branch point
            let lhs = kernel(1.0 - t).unwrap();
            let rhs = -kernel(t).unwrap();
            assert!((lhs - rhs).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn mean_and_moments_vanish() {
        // The kernel annihilates 1, t and t²; the cubic moment is 1/480.
        for (k, expect) in [(0, 0.0), (1, 0.0), (2, 0.0), (3, 1.0 / 480.0)] {
            let r = integrate_1d(
                |t| kernel(t).unwrap() * t.powi(k),
                0.0,
                1.0,
                1e-13,
            )
            .unwrap();
            assert!(
                (r.value - expect).abs() <= 1e-12,
                "moment {k}: {} vs {expect}",
                r.value
            );
        }
    }

    #[test]
    fn l1_constants_match_quadrature() {
        let l1 = integrate_1d(|t| kernel(t).unwrap().abs(), 0.0, 1.0, 1e-12).unwrap();
        assert!((l1.value - kernel_l1()).abs() <= 1e-10);

        let weighted = integrate_1d(|t| kernel(t).unwrap().abs() * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((weighted.value - kernel_weighted_moment()).abs() <= 1e-10);

        let mirrored =
            integrate_1d(|t| kernel(t).unwrap().abs() * (1.0 - t), 0.0, 1.0, 1e-12).unwrap();
        assert!((mirrored.value - kernel_weighted_moment()).abs() <= 1e-10);
    }

    #[test]
    fn double_l1_is_the_square() {
        assert!((kernel_l1() * kernel_l1() - kernel_double_l1()).abs() < 1e-15);
        assert_eq!(kernel_double_l1(), 25.0 / 1296.0);
        assert_eq!(kernel_weighted_moment(), 5.0 / 72.0);
    }
}
