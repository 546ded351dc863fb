use super::quadrature::integrate_adaptive;
use super::{Interval, Tolerance};
use crate::error::{Error, Result};

/// Cut-off of the shifted integration variable; `e^{-45} < 3e-20`.
const TAIL_CUTOFF: f64 = 45.0;

/// Exponential integral `E₁(x) = ∫ₓ^∞ t⁻¹e⁻ᵗ dt` for `x > 0`.
///
/// Evaluated as `e⁻ˣ ∫₀^S e⁻ˢ/(x + s) ds` plus the bound `e⁻ˢ/(x + S)` of
/// the dropped tail. The shifted integrand is `O(1/x)` so the relative
/// accuracy holds even where `E₁(x)` underflows towards zero.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("E1 requires finite x > 0, got {x}")));
    }
    let tol = Tolerance::tight();
    let body = integrate_adaptive(
        |s| (-s).exp() / (x + s),
        Interval::new(0.0, TAIL_CUTOFF)?,
        tol,
    )?;
    let tail = (-TAIL_CUTOFF).exp() / (x + TAIL_CUTOFF);
    Ok((-x).exp() * (body + tail))
}

/// Far-field profile `Φ(ω) = ∫_ω^∞ t⁻¹ e^{-μt/2} dt = E₁(μω/2)`.
pub fn phi(omega: f64, mu: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("phi requires omega > 0, got {omega}")));
    }
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("phi requires mu > 0, got {mu}")));
    }
    exp_integral_e1(0.5 * mu * omega)
}

/// `dΦ/dω = -ω⁻¹ e^{-μω/2}`, the derivative of the integral definition.
pub fn phi_derivative(omega: f64, mu: f64) -> Result<f64> {
    if !(omega > 0.0 && mu > 0.0) {
        return Err(Error::Domain(format!(
            "phi_derivative requires omega > 0 and mu > 0, got ({omega}, {mu})"
        )));
    }
    Ok(-(-0.5 * mu * omega).exp() / omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Plain truncated quadrature of the defining integral, cut where the
    // integrand falls below 1e-18 of its value at x.
    fn e1_oracle(x: f64) -> f64 {
        let mut cut = x + 1.0;
        while (x - cut).exp() * x / cut > 1e-18 {
            cut += 1.0;
        }
        // scaled by e^x so the absolute tolerance floor does not bite
        let scaled = integrate_adaptive(
            |t| (x - t).exp() / t,
            Interval::new(x, cut).unwrap(),
            Tolerance::tight(),
        )
        .unwrap();
        (-x).exp() * scaled
    }

    #[test]
    fn e1_at_one() {
        let oracle = e1_oracle(1.0);
        assert!((oracle - 0.219_383_934_395_520_26).abs() < 1e-15);
        let v = phi(4.0, 0.5).unwrap();
        assert!((v - 0.219_383_934_395_520_26).abs() < 1e-15);
    }

    #[test]
    fn matches_oracle_across_scales() {
        for &x in &[1e-6, 1e-3, 0.05, 0.2, 0.7, 2.0, 5.0, 12.0, 30.0] {
            let o = e1_oracle(x);
            let v = exp_integral_e1(x).unwrap();
            assert!(((v - o) / o).abs() < 1e-12, "x = {x}: {v} vs {o}");
        }
    }

    #[test]
    fn deep_tail() {
        let v = phi(100.0, 1.0).unwrap();
        assert!(v < 1e-23 && v > 0.0);
        // E1(x) ~ e^-x / x (1 - 1/x + 2/x^2 - 6/x^3)
        let x = 50.0_f64;
        let asym = (-x).exp() / x * (1.0 - 1.0 / x + 2.0 / (x * x) - 6.0 / x.powi(3) + 24.0 / x.powi(4));
        assert!(((v - asym) / asym).abs() < 1e-6);
    }

    #[test]
    fn derivative_by_central_differences() {
        let (w0, mu) = (2.5, 0.8);
        let exact = phi_derivative(w0, mu).unwrap();
        let mut prev_err = f64::INFINITY;
        for k in 1..=4 {
            let h = 0.1 / 2f64.powi(k);
            let fd = (phi(w0 + h, mu).unwrap() - phi(w0 - h, mu).unwrap()) / (2.0 * h);
            let err = (fd - exact).abs();
            assert!(err < prev_err / 3.0, "h = {h}");
            prev_err = err;
        }
        assert!(exact < 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(phi(0.0, 1.0).is_err());
        assert!(phi(1.0, 0.0).is_err());
        assert!(phi(-1.0, 1.0).is_err());
        assert!(exp_integral_e1(f64::NAN).is_err());
    }

    #[test]
    fn strictly_decreasing() {
        let mut prev = phi(0.01, 0.3).unwrap();
        for k in 1..200 {
            let cur = phi(0.01 + 0.5 * k as f64, 0.3).unwrap();
            assert!(cur < prev);
            prev = cur;
        }
    }
}
