//! Numeric kernel shared by the solvers: the principal Lambert W branch,
//! the exponential-integral profile `Φ`, adaptive Gauss–Kronrod quadrature,
//! a bracketed scalar root finder and a damped two-dimensional Newton
//! solver with a finite-difference Jacobian.
//!
//! Every function here is pure; none of them keeps state between calls.

mod lambert;
mod newton;
mod phi;
mod quadrature;
mod roots;
mod scan;

pub use lambert::{lambert_w0, lambert_w0_of_exp, BRANCH_POINT};
pub use newton::solve_2d_newton;
pub use phi::{exp_integral_e1, phi, phi_derivative};
pub use quadrature::integrate_adaptive;
pub(crate) use quadrature::integrate_signed;
pub use roots::find_root_1d;
pub use scan::{log_grid, sign_change_cells, SignChangeCell};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with finite end points and `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interval end points must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "interval requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Stopping rule shared by the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

/// Smallest absolute tolerance accepted by [`Tolerance::new`].
pub const MIN_ABS_TOL: f64 = 1e-15;

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= MIN_ABS_TOL && abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be >= {MIN_ABS_TOL:e}, got {abs_tol:e}"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {rel_tol:e}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// Tolerance used for quadratures that feed finite-difference stencils.
    pub const fn tight() -> Self {
        Self {
            abs_tol: MIN_ABS_TOL,
            rel_tol: 1e-13,
            max_iter: 2000,
        }
    }

    /// Threshold `max(abs_tol, rel_tol·|scale|)`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 100,
        }
    }
}
