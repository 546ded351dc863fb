//! Lifting of reduced solutions to full `(t, x₁, x₂, x₃)` fields and their
//! verification against the original three-phase problem.
//!
//! The temperature depends on space-time only through
//! `ω = z + √(z² + r²)` with `z = x₃ − μt` and `r = √(x₁² + x₂²)`. The two
//! free surfaces are the paraboloids `S_k = r²/ω_k² + 2z/ω_k − 1 = 0`, and
//! `S_k` has the sign of `ω − ω_k`, so `n_k = ∇S_k/|∇S_k|` points from the
//! gas into the liquid on `S₁` and from the liquid into the solid on `S₂`.

mod field;
mod residuals;
mod sampling;

pub use field::{evaluate, Evaluation, FieldEvaluator, ProfileInterpolant, StefanField};
pub use residuals::{
    far_field_check, far_field_deviation, hemisphere, pde_residual, pde_sweep, stefan_residuals, verify_field, FarFieldReport, PdeSweep,
    StefanReport, SurfaceResidual, VerificationReport, VerifyOptions,
};
pub use sampling::{interior_samples, surface_samples, VerificationSamples};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point4 {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Point4 {
    pub const fn new(t: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { t, x1, x2, x3 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x1, self.x2, self.x3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `self + h·dir` in `(t, x₁, x₂, x₃)` order.
    pub fn shifted(self, dir: [f64; 4], h: f64) -> Self {
        let a = self.to_array();
        Self::from_array([a[0] + h * dir[0], a[1] + h * dir[1], a[2] + h * dir[2], a[3] + h * dir[3]])
    }

    /// Moves along a spatial direction at fixed time.
    pub fn along(self, n: [f64; 3], s: f64) -> Self {
        self.shifted([0.0, n[0], n[1], n[2]], s)
    }

    /// True in the half-space `x₃ > 0` occupied by the metal.
    pub fn in_half_space(&self) -> bool {
        self.x3 > 0.0
    }
}

/// `ω = z + √(z² + r²)`, using `r²/(√(z² + r²) − z)` for `z < 0`.
pub fn omega_of_point(p: &Point4, mu: f64) -> f64 {
    let z = p.x3 - mu * p.t;
    let r2 = p.x1 * p.x1 + p.x2 * p.x2;
    let rho = z.hypot(r2.sqrt());
    if z >= 0.0 {
        z + rho
    } else if r2 == 0.0 {
        0.0
    } else {
        r2 / (rho - z)
    }
}

/// Phase of the three-phase domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Gas,
    Liquid,
    Solid,
}

/// The two moving boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `S₁`, between gas and liquid.
    Evaporation,
    /// `S₂`, between liquid and solid.
    Melting,
}

/// Paraboloid of revolution `S_k = r²/ω_k² + 2(x₃ − μt)/ω_k − 1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeSurface {
    pub boundary: Boundary,
    pub omega_k: f64,
    pub mu: f64,
}

/// Largest `|S_k|` accepted as "on the surface".
pub const ON_SURFACE_TOL: f64 = 1e-10;

impl FreeSurface {
    pub fn new(boundary: Boundary, omega_k: f64, mu: f64) -> Result<Self> {
        if !(omega_k > 0.0 && omega_k.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "surface needs omega_k > 0 and finite mu, got ({omega_k}, {mu})"
            )));
        }
        Ok(Self { boundary, omega_k, mu })
    }

    pub fn level(&self, p: &Point4) -> f64 {
        let w = self.omega_k;
        let r2 = p.x1 * p.x1 + p.x2 * p.x2;
        r2 / (w * w) + 2.0 * (p.x3 - self.mu * p.t) / w - 1.0
    }

    /// `(∂S/∂t, ∂S/∂x₁, ∂S/∂x₂, ∂S/∂x₃)`.
    pub fn level_gradient(&self, p: &Point4) -> [f64; 4] {
        let w = self.omega_k;
        [-2.0 * self.mu / w, 2.0 * p.x1 / (w * w), 2.0 * p.x2 / (w * w), 2.0 / w]
    }

    /// Point of the surface at time `t`, radius `r` and azimuth `theta`.
    pub fn surface_point_at(&self, t: f64, r: f64, theta: f64) -> Point4 {
        let w = self.omega_k;
        let x3 = self.mu * t + 0.5 * w * (1.0 - (r / w) * (r / w));
        Point4::new(t, r * theta.cos(), r * theta.sin(), x3)
    }

    /// Point of the surface at time `t` and radius `r` on the `x₁` axis.
    pub fn surface_point(&self, t: f64, r: f64) -> Point4 {
        self.surface_point_at(t, r, 0.0)
    }

    /// Unit normal `∇S/|∇S|` and normal speed `V·n = −S_t/|∇S|` at a
    /// surface point.
    pub fn normal_and_velocity(&self, p: &Point4) -> Result<([f64; 3], f64)> {
        let s = self.level(p);
        if s.abs() > ON_SURFACE_TOL {
            return Err(Error::OffSurface(s));
        }
        Ok(normal_from_gradient(self.level_gradient(p)))
    }
}

pub(crate) fn normal_from_gradient(g: [f64; 4]) -> ([f64; 3], f64) {
    let norm = (g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt();
    ([g[1] / norm, g[2] / norm, g[3] / norm], -g[0] / norm)
}
