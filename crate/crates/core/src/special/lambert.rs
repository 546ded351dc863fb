use std::f64::consts::E;

use crate::error::{Error, Result};

/// `-1/e`, the branch point of `W₀`.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const MAX_HALLEY_STEPS: usize = 32;

/// Principal branch `W₀(x)` of the Lambert function, the solution `w ≥ -1`
/// of `w·eʷ = x`.
///
/// Halley iteration seeded by the branch-point series for `x` near `-1/e`,
/// `ln(1 + x)` on the middle range and the two-term logarithmic asymptote
/// for large `x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(Error::Domain(format!(
            "lambert_w0 requires x >= -1/e, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let offset = x - BRANCH_POINT;
    if offset == 0.0 {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x, offset);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - 0.5 * (w + 2.0) * f / wp1;
        let step = f / denom;
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64, offset: f64) -> f64 {
    if x < -0.25 {
        // series in p = sqrt(2(e·x + 1)) around the branch point
        let p = (2.0 * E * offset).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// `W₀(eᵃ)` without forming `eᵃ`.
///
/// For `a > 1` this solves `w + ln w = a` by Newton's method started at
/// `a − ln a`, which lies left of the root so the iterates increase
/// monotonically. Smaller `a` go through [`lambert_w0`] directly.
pub fn lambert_w0_of_exp(a: f64) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    if a <= 1.0 {
        // e^a <= e, no overflow; e^a > 0 > -1/e so the call cannot fail
        return lambert_w0(a.exp()).unwrap_or(0.0);
    }
    if a == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut w = a - a.ln();
    for _ in 0..MAX_HALLEY_STEPS {
        let g = w + w.ln() - a;
        let step = g * w / (w + 1.0);
        let next = w - step;
        let done = (next - w).abs() <= 2.0 * f64::EPSILON * next;
        w = next;
        if done {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    // Newton iteration on w·e^w − 1, independent of the Halley path above.
    fn omega_constant() -> f64 {
        let mut w = 0.5_f64;
        for _ in 0..60 {
            w -= (w * w.exp() - 1.0) / ((w + 1.0) * w.exp());
        }
        w
    }

    #[test]
    fn trivial_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w0(BRANCH_POINT).unwrap(), -1.0);
    }

    #[test]
    fn omega_constant_matches_newton_oracle() {
        let oracle = omega_constant();
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-15);
        let w = lambert_w0(1.0).unwrap();
        assert!((w - oracle).abs() < 1e-15);
        assert!((w * w.exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(matches!(lambert_w0(-0.4), Err(Error::Domain(_))));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn near_branch_point_stays_above_minus_one() {
        for k in 1..=15 {
            let x = BRANCH_POINT + 10f64.powi(-k);
            let w = lambert_w0(x).unwrap();
            assert!(w >= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-15, "x = {x}");
        }
    }

    #[test]
    fn of_exp_small_arguments() {
        assert!((lambert_w0_of_exp(1.0) - 1.0).abs() < 1e-15);
        assert!((lambert_w0_of_exp(0.0) - omega_constant()).abs() < 1e-15);
        let w = lambert_w0_of_exp(-40.0);
        assert!((w - (-40f64).exp()).abs() < 1e-30);
    }

    #[test]
    fn of_exp_overflow_safe() {
        let w = lambert_w0_of_exp(700.0);
        assert!((w + w.ln() - 700.0).abs() < 1e-10);
        assert!((w - 693.46).abs() < 0.01);
        let w = lambert_w0_of_exp(1e6);
        assert!((w + w.ln() - 1e6).abs() < 1e-9);
    }

    #[test]
    fn of_exp_agrees_with_direct_path() {
        let mut a = 1.0_f64;
        while a <= 30.0 {
            let direct = lambert_w0(a.exp()).unwrap();
            let logspace = lambert_w0_of_exp(a);
            assert!((direct - logspace).abs() <= 4e-15 * direct, "a = {a}");
            a += 0.37;
        }
    }
}
