use super::Tolerance;
use crate::error::{Error, Result};

const MAX_HALVINGS: usize = 40;

fn norm_inf(v: (f64, f64)) -> f64 {
    v.0.abs().max(v.1.abs())
}

/// Damped Newton iteration for a map `ℝ² → ℝ²`.
///
/// The Jacobian is formed by central differences (falling back to one-sided
/// differences where the map refuses a perturbed point). A step is halved
/// until it lowers `‖F‖∞`; trial points where `f` returns an error count as
/// increases. Converged when `‖F‖∞ ≤ abs_tol`.
pub fn solve_2d_newton<F>(mut f: F, guess: (f64, f64), tol: Tolerance) -> Result<(f64, f64)>
where
    F: FnMut((f64, f64)) -> Result<(f64, f64)>,
{
    let mut x = guess;
    let mut fx = f(x)?;
    let mut norm = norm_inf(fx);
    for _ in 0..tol.max_iter {
        if norm <= tol.abs_tol {
            return Ok(x);
        }
        let jac = jacobian(&mut f, x, fx)?;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = (jac[0][0].abs() + jac[0][1].abs()) * (jac[1][0].abs() + jac[1][1].abs());
        if !det.is_finite() || det.abs() <= 1e-14 * scale || scale == 0.0 {
            return Err(Error::SingularJacobian(det));
        }
        let dx0 = -(jac[1][1] * fx.0 - jac[0][1] * fx.1) / det;
        let dx1 = -(-jac[1][0] * fx.0 + jac[0][0] * fx.1) / det;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = (x.0 + lambda * dx0, x.1 + lambda * dx1);
            if let Ok(ft) = f(trial) {
                let n = norm_inf(ft);
                if n < norm {
                    accepted = Some((trial, ft, n));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ft, n)) => {
                x = trial;
                fx = ft;
                norm = n;
            }
            None => break,
        }
    }
    if norm <= tol.abs_tol {
        return Ok(x);
    }
    Err(Error::NotConverged {
        what: "damped 2-D Newton",
        iterations: tol.max_iter,
        residual: norm,
    })
}

fn jacobian<F>(f: &mut F, x: (f64, f64), fx: (f64, f64)) -> Result<[[f64; 2]; 2]>
where
    F: FnMut((f64, f64)) -> Result<(f64, f64)>,
{
    let step = |v: f64| f64::EPSILON.cbrt() * v.abs().max(1e-3);
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let h = if k == 0 { step(x.0) } else { step(x.1) };
        let shifted = |d: f64| if k == 0 { (x.0 + d, x.1) } else { (x.0, x.1 + d) };
        let plus = f(shifted(h));
        let minus = f(shifted(-h));
        let col = match (plus, minus) {
            (Ok(p), Ok(m)) => ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h)),
            (Ok(p), Err(_)) => ((p.0 - fx.0) / h, (p.1 - fx.1) / h),
            (Err(_), Ok(m)) => ((fx.0 - m.0) / h, (fx.1 - m.1) / h),
            (Err(e), Err(_)) => return Err(e),
        };
        jac[0][k] = col.0;
        jac[1][k] = col.1;
    }
    Ok(jac)
}
