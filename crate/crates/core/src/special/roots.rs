use super::{Interval, Tolerance};
use crate::error::{Error, Result};

/// Brent's bracketed root finder (inverse quadratic interpolation, secant
/// and bisection).
///
/// Requires `f(lo)·f(hi) ≤ 0`. Stops when `|f| ≤ abs_tol` or the bracket has
/// shrunk to `abs_tol` plus a few ulps of the iterate.
pub fn find_root_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: Interval,
    tol: Tolerance,
) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain("root finder: function is NaN at bracket".into()));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            flo: fa,
            fhi: fb,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.abs_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol.abs_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Domain(format!("root finder: function is NaN at {b}")));
        }
    }
    Err(Error::NotConverged {
        what: "bracketed root finder",
        iterations: tol.max_iter,
        residual: fb.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear() {
        let r = find_root_1d(|x| x - 2.0, Interval::new(0.0, 5.0).unwrap(), Tolerance::default())
            .unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn omega_constant() {
        let r = find_root_1d(
            |x| x * x.exp() - 1.0,
            Interval::new(0.0, 1.0).unwrap(),
            Tolerance::default(),
        )
        .unwrap();
        assert!((r - 0.567_143_290_4).abs() < 1e-10);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let r = find_root_1d(|x| x * x, Interval::new(-1.0, 1.0).unwrap(), Tolerance::default());
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn independent_of_bracket_refinement() {
        let f = |x: f64| x.cos() - x;
        let tol = Tolerance::default();
        let wide = find_root_1d(f, Interval::new(-2.0, 3.0).unwrap(), tol).unwrap();
        let narrow = find_root_1d(f, Interval::new(0.7, 0.8).unwrap(), tol).unwrap();
        assert!((wide - narrow).abs() <= tol.abs_tol);
    }
}
