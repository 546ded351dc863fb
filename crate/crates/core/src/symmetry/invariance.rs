use serde::Serialize;

use super::field::{apply_matrix, flow, flow_matrix, AffineVectorField};
use crate::error::Result;
use crate::problem::StefanProblem;
use crate::reconstruction::{verify_field, Boundary, Point4, StefanField, VerificationReport, VerificationSamples, VerifyOptions};

/// Allowed growth of each residual under a symmetry.
pub const INVARIANCE_FACTOR: f64 = 2.0;

/// Absolute slack added to the comparison so that residuals at roundoff
/// level can be compared.
pub const INVARIANCE_FLOOR: f64 = 1e-13;

/// The image of a field under `exp(εX)`: every quantity at `p` is the
/// original one at `exp(−εX)p`.
pub struct FlowedField<'a, F: StefanField + ?Sized> {
    inner: &'a F,
    back: [[f64; 5]; 5],
}

impl<'a, F: StefanField + ?Sized> FlowedField<'a, F> {
    pub fn new(inner: &'a F, x: &AffineVectorField, epsilon: f64) -> Self {
        Self {
            inner,
            back: flow_matrix(x, -epsilon),
        }
    }

    fn pull(&self, p: &Point4) -> Point4 {
        apply_matrix(&self.back, p)
    }
}

impl<F: StefanField + ?Sized> StefanField for FlowedField<'_, F> {
    fn level(&self, boundary: Boundary, p: &Point4) -> f64 {
        self.inner.level(boundary, &self.pull(p))
    }

    fn level_gradient(&self, boundary: Boundary, p: &Point4) -> [f64; 4] {
        let g = self.inner.level_gradient(boundary, &self.pull(p));
        let mut out = [0.0; 4];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|i| g[i] * self.back[i][j]).sum();
        }
        out
    }

    fn liquid(&self, p: &Point4) -> Result<f64> {
        self.inner.liquid(&self.pull(p))
    }

    fn solid(&self, p: &Point4) -> Result<f64> {
        self.inner.solid(&self.pull(p))
    }
}

/// Largest residuals of one verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSummary {
    /// Finest-step PDE residual over both phases.
    pub pde: f64,
    /// Smaller of the two observed PDE orders.
    pub pde_order: f64,
    /// Finest-step flux-balance residual over both surfaces.
    pub flux: f64,
    pub dirichlet: f64,
}

impl ResidualSummary {
    pub fn of(report: &VerificationReport) -> Self {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        Self {
            pde: last(&report.pde_liquid.max_residual).max(last(&report.pde_solid.max_residual)),
            pde_order: report.pde_liquid.final_order().min(report.pde_solid.final_order()),
            flux: report.max_flux_residual(),
            dirichlet: report.finest_stefan().max_dirichlet,
        }
    }

    /// True when no residual grew beyond [`INVARIANCE_FACTOR`] times `base`.
    pub fn within(&self, base: &Self) -> bool {
        let ok = |a: f64, b: f64| a <= INVARIANCE_FACTOR * b + INVARIANCE_FLOOR;
        ok(self.pde, base.pde) && ok(self.flux, base.flux) && ok(self.dirichlet, base.dirichlet)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub epsilon: f64,
    pub generator: AffineVectorField,
    pub before: ResidualSummary,
    pub after: ResidualSummary,
    pub invariant: bool,
}

/// Verifies `field`, maps it and the sample set by `exp(εX)`, verifies the
/// image against the same problem and compares the residuals.
pub fn verify_invariance<F: StefanField + ?Sized>(
    x: &AffineVectorField,
    epsilon: f64,
    field: &F,
    problem: &StefanProblem,
    samples: &VerificationSamples,
    options: &VerifyOptions,
) -> Result<InvarianceReport> {
    let before = ResidualSummary::of(&verify_field(field, problem, samples, options)?);
    let flowed = FlowedField::new(field, x, epsilon);
    let moved = samples.map(|p| flow(x, epsilon, p));
    let after = ResidualSummary::of(&verify_field(&flowed, problem, &moved, options)?);
    Ok(InvarianceReport {
        epsilon,
        generator: *x,
        before,
        after,
        invariant: after.within(&before),
    })
}
