use rayon::prelude::*;
use serde::Serialize;

use super::{normal_from_gradient, Boundary, FieldEvaluator, Phase, Point4, StefanField, VerificationSamples};
use super::{omega_of_point, ON_SURFACE_TOL};
use crate::error::{Error, Result};
use crate::problem::StefanProblem;
use crate::reduced::Diffusivity;

const AXES: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

fn branch<F: StefanField + ?Sized>(field: &F, phase: Phase, p: &Point4) -> Result<f64> {
    match phase {
        Phase::Liquid => field.liquid(p),
        Phase::Solid => field.solid(p),
        Phase::Gas => Err(Error::Stencil("the gas phase carries no temperature".into())),
    }
}

/// `|u_t − ∇·(d(u)∇u)|` at `p` with second-order central differences of
/// step `h` in all four coordinates, using `∇·(d∇u) = dΔu + d'|∇u|²`.
pub fn pde_residual<F: StefanField + ?Sized>(field: &F, p: &Point4, d: &Diffusivity, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("stencil step must be positive, got {h}")));
    }
    let phase = field.phase(p);
    for axis in AXES {
        for s in [-3.0, 3.0] {
            if field.phase(&p.shifted(axis, s * h)) != phase {
                return Err(Error::Stencil(format!("stencil of step {h} at {p:?} crosses a phase boundary")));
            }
        }
    }
    let u0 = branch(field, phase, p)?;
    let mut first = [0.0; 4];
    let mut second = [0.0; 4];
    for (j, axis) in AXES.iter().enumerate() {
        let up = branch(field, phase, &p.shifted(*axis, h))?;
        let um = branch(field, phase, &p.shifted(*axis, -h))?;
        first[j] = (up - um) / (2.0 * h);
        second[j] = (up - 2.0 * u0 + um) / (h * h);
    }
    let (dv, ddv) = d.eval_with_derivative(u0)?;
    let laplacian = second[1] + second[2] + second[3];
    let grad2 = first[1] * first[1] + first[2] * first[2] + first[3] * first[3];
    Ok((first[0] - dv * laplacian - ddv * grad2).abs())
}

/// Max PDE residual over a point set at successively halved steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeSweep {
    pub steps: Vec<f64>,
    pub max_residual: Vec<f64>,
    /// `log₂` of successive ratios of `max_residual`.
    pub observed_order: Vec<f64>,
}

impl PdeSweep {
    /// Order observed between the two finest steps.
    pub fn final_order(&self) -> f64 {
        self.observed_order.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn pde_sweep<F: StefanField + ?Sized>(
    field: &F,
    points: &[Point4],
    d: &Diffusivity,
    h0: f64,
    levels: usize,
) -> Result<PdeSweep> {
    let steps: Vec<f64> = (0..levels.max(2)).map(|k| h0 / f64::powi(2.0, k as i32)).collect();
    let mut max_residual = Vec::with_capacity(steps.len());
    for &h in &steps {
        let res: Result<Vec<f64>> = points.par_iter().map(|p| pde_residual(field, p, d, h)).collect();
        max_residual.push(res?.into_iter().fold(0.0, f64::max));
    }
    let observed_order = max_residual.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(PdeSweep {
        steps,
        max_residual,
        observed_order,
    })
}

/// Residuals of the energy balance and the Dirichlet conditions at one
/// surface point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceResidual {
    pub point: Point4,
    pub boundary: Boundary,
    pub flux_balance: f64,
    pub dirichlet: f64,
}

// Slope of `f` at `s = 0` from one-sided second-order differences at `h`
// and `h/2`, Richardson-combined.
fn ray_slope<G: Fn(f64) -> Result<f64>>(g: G, f0: f64, h: f64) -> Result<f64> {
    let slope = |h: f64| -> Result<f64> { Ok((-3.0 * f0 + 4.0 * g(h)? - g(2.0 * h)?) / (2.0 * h)) };
    let (coarse, fine) = (slope(h)?, slope(0.5 * h)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

fn surface_residual<F: StefanField + ?Sized>(
    field: &F,
    problem: &StefanProblem,
    boundary: Boundary,
    p: &Point4,
    h: f64,
) -> Result<SurfaceResidual> {
    let level = field.level(boundary, p);
    if level.abs() > ON_SURFACE_TOL {
        return Err(Error::OffSurface(level));
    }
    let iface = problem.interface()?;
    let params = &problem.params;
    let (n, vn) = normal_from_gradient(field.level_gradient(boundary, p));
    let on_ray = |phase: Phase, sign: f64| {
        move |s: f64| -> Result<f64> {
            let q = p.along(n, sign * s);
            if field.phase(&q) != phase {
                return Err(Error::Stencil(format!("normal ray at {p:?} leaves the {phase:?} phase")));
            }
            branch(field, phase, &q)
        }
    };
    let (flux_balance, dirichlet) = match boundary {
        Boundary::Evaporation => {
            let u0 = field.liquid(p)?;
            let du_dn = ray_slope(on_ray(Phase::Liquid, 1.0), u0, h)?;
            let q = problem.flux.value(p.t)?;
            let r = iface.d1_v * du_dn - (params.h_v * vn - q * n[2]);
            (r.abs(), (u0 - params.u_v).abs())
        }
        Boundary::Melting => {
            let u0 = field.liquid(p)?;
            let v0 = field.solid(p)?;
            let du_dn = -ray_slope(on_ray(Phase::Liquid, -1.0), u0, h)?;
            let dv_dn = ray_slope(on_ray(Phase::Solid, 1.0), v0, h)?;
            let r = problem.balance.solid_sign() * iface.d2_m * dv_dn - (iface.d1_m * du_dn + params.h_m * vn);
            (r.abs(), (u0 - params.u_m).abs().max((v0 - params.v_m).abs()))
        }
    };
    Ok(SurfaceResidual {
        point: *p,
        boundary,
        flux_balance,
        dirichlet,
    })
}

/// Surface residuals at one normal step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StefanReport {
    pub step: f64,
    pub points: Vec<SurfaceResidual>,
    pub max_evaporation: f64,
    pub max_melting: f64,
    pub max_dirichlet: f64,
}

/// Energy-balance and Dirichlet residuals on both surfaces, with normal
/// derivatives from one-sided differences along `n = ∇S/|∇S|`.
///
/// On `S₁`: `d₁ᵥ ∂u/∂n = H_v V·n − Q(t) n₃`. On `S₂` with the default
/// orientation: `−d₂ₘ ∂v/∂n = d₁ₘ ∂u/∂n + H_m V·n`.
pub fn stefan_residuals<F: StefanField + ?Sized>(
    field: &F,
    problem: &StefanProblem,
    evaporation: &[Point4],
    melting: &[Point4],
    h: f64,
) -> Result<StefanReport> {
    let tagged: Vec<(Boundary, &Point4)> = evaporation
        .iter()
        .map(|p| (Boundary::Evaporation, p))
        .chain(melting.iter().map(|p| (Boundary::Melting, p)))
        .collect();
    let points: Result<Vec<SurfaceResidual>> = tagged
        .par_iter()
        .map(|(b, p)| surface_residual(field, problem, *b, p, h))
        .collect();
    let points = points?;
    let max_of = |b: Boundary| {
        points
            .iter()
            .filter(|r| r.boundary == b)
            .map(|r| r.flux_balance)
            .fold(0.0, f64::max)
    };
    Ok(StefanReport {
        step: h,
        max_evaporation: max_of(Boundary::Evaporation),
        max_melting: max_of(Boundary::Melting),
        max_dirichlet: points.iter().map(|r| r.dirichlet).fold(0.0, f64::max),
        points,
    })
}

/// Far-field deviation on a hemisphere ahead of the moving vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarFieldReport {
    pub radius: f64,
    pub max_deviation: f64,
    /// `max_deviation / |v_m − v_∞|`.
    pub relative: f64,
    pub min_omega: f64,
    pub points: usize,
}

/// `max |v − v_∞|` over `n` points of the hemisphere `z ≥ 0` of the given
/// radius centred at `(0, 0, μt)`, where `ω ≥ radius`.
///
/// Behind the vertex the level `ω` tends to zero on every sphere, so only
/// the forward hemisphere probes the condition at infinity.
pub fn far_field_check(field: &FieldEvaluator, radius: f64, t: f64, n: usize) -> Result<FarFieldReport> {
    if !(radius > field.omega2()) {
        return Err(Error::InvalidParameter(format!(
            "far-field radius {radius} must exceed omega2 = {}",
            field.omega2()
        )));
    }
    let vertex = Point4::new(t, 0.0, 0.0, field.mu() * t);
    let points = hemisphere(vertex, radius, n);
    let max_dev = far_field_deviation(field, &points, field.params().v_inf)?;
    let min_omega = points
        .iter()
        .map(|p| omega_of_point(p, field.mu()))
        .fold(f64::INFINITY, f64::min);
    Ok(FarFieldReport {
        radius,
        max_deviation: max_dev,
        relative: max_dev / (field.params().v_m - field.params().v_inf).abs(),
        min_omega,
        points: points.len(),
    })
}

/// `n` points of the upper hemisphere (`x₃ ≥` vertex) of a sphere around
/// `vertex`, from the pole to the equator on a golden-angle spiral.
pub fn hemisphere(vertex: Point4, radius: f64, n: usize) -> Vec<Point4> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let n = n.max(1);
    (0..n)
        .map(|i| {
            let cos_polar = if n == 1 { 1.0 } else { 1.0 - (i as f64) / ((n - 1) as f64) };
            let sin_polar = (1.0 - cos_polar * cos_polar).max(0.0).sqrt();
            let az = golden * i as f64;
            Point4::new(
                vertex.t,
                vertex.x1 + radius * sin_polar * az.cos(),
                vertex.x2 + radius * sin_polar * az.sin(),
                vertex.x3 + radius * cos_polar,
            )
        })
        .collect()
}

/// `max |v − v_∞|` over `points`, all of which must lie in the solid.
pub fn far_field_deviation<F: StefanField + ?Sized>(field: &F, points: &[Point4], v_inf: f64) -> Result<f64> {
    let mut max_dev = 0.0_f64;
    for p in points {
        if field.phase(p) != Phase::Solid {
            return Err(Error::Domain(format!("far-field point {p:?} is not in the solid")));
        }
        max_dev = max_dev.max((field.solid(p)? - v_inf).abs());
    }
    Ok(max_dev)
}

/// Step sizes of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub pde_step: f64,
    pub pde_levels: usize,
    pub surface_step: f64,
}

impl VerifyOptions {
    /// Steps scaled to the first similarity level.
    pub fn for_scale(omega1: f64) -> Self {
        Self {
            pde_step: 0.05 * omega1,
            pde_levels: 3,
            surface_step: 1e-3 * omega1,
        }
    }
}

/// Aggregated residuals of the original problem on a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pde_liquid: PdeSweep,
    pub pde_solid: PdeSweep,
    /// Surface residuals at `surface_step` and half of it.
    pub stefan: Vec<StefanReport>,
    /// Sample points outside the half-space `x₃ > 0`; reported, not enforced.
    pub outside_half_space: usize,
}

impl VerificationReport {
    pub fn finest_stefan(&self) -> &StefanReport {
        self.stefan.last().expect("at least one surface level")
    }

    /// Largest flux-balance residual at the finest surface step.
    pub fn max_flux_residual(&self) -> f64 {
        let s = self.finest_stefan();
        s.max_evaporation.max(s.max_melting)
    }
}

/// PDE sweeps in both phases plus surface residuals at two steps.
pub fn verify_field<F: StefanField + ?Sized>(
    field: &F,
    problem: &StefanProblem,
    samples: &VerificationSamples,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let pde_liquid = pde_sweep(field, &samples.liquid, &problem.d1, options.pde_step, options.pde_levels)?;
    let pde_solid = pde_sweep(field, &samples.solid, &problem.d2, options.pde_step, options.pde_levels)?;
    let stefan = [options.surface_step, 0.5 * options.surface_step]
        .iter()
        .map(|&h| stefan_residuals(field, problem, &samples.evaporation, &samples.melting, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        pde_liquid,
        pde_solid,
        stefan,
        outside_half_space: samples.all().filter(|p| !p.in_half_space()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{solve_parameters, SimilaritySolution};
    use crate::params::PhysicalParameters;

    fn solution() -> SimilaritySolution {
        solve_parameters(&PhysicalParameters::reference(), (4.0, 0.1)).unwrap()
    }

    struct ConstantField(FieldEvaluator);

    impl StefanField for ConstantField {
        fn level(&self, b: Boundary, p: &Point4) -> f64 {
            self.0.level(b, p)
        }
        fn level_gradient(&self, b: Boundary, p: &Point4) -> [f64; 4] {
            self.0.level_gradient(b, p)
        }
        fn liquid(&self, _: &Point4) -> Result<f64> {
            Ok(1.7)
        }
        fn solid(&self, _: &Point4) -> Result<f64> {
            Ok(0.4)
        }
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let f = ConstantField(FieldEvaluator::exact(solution()));
        let p = Point4::new(1.0, 0.3, 0.2, 0.1 + 1.2);
        assert_eq!(pde_residual(&f, &p, &Diffusivity::inverse(), 0.01).unwrap(), 0.0);
    }

    #[test]
    fn stencil_across_boundary_is_rejected() {
        let f = FieldEvaluator::exact(solution());
        let p = f.surface(Boundary::Melting).surface_point(1.0, 0.0);
        let r = pde_residual(&f, &p, &Diffusivity::inverse(), 0.01);
        assert!(matches!(r, Err(Error::Stencil(_))));
    }

    #[test]
    fn exact_surfaces_balance() {
        let sol = solution();
        let problem = crate::problem::StefanProblem::exact_class(*sol.params());
        let f = FieldEvaluator::exact(sol);
        let s1 = [f.surface(Boundary::Evaporation).surface_point_at(1.5, 0.4, 1.0)];
        let s2 = [f.surface(Boundary::Melting).surface_point_at(1.5, 2.0, 4.0)];
        let rep = stefan_residuals(&f, &problem, &s1, &s2, 1e-3).unwrap();
        assert!(rep.max_evaporation < 1e-7, "{rep:?}");
        assert!(rep.max_melting < 1e-7, "{rep:?}");
        assert!(rep.max_dirichlet < 1e-8, "{rep:?}");
    }

    #[test]
    fn far_field_decreases_with_radius() {
        let f = FieldEvaluator::exact(solution());
        let a = far_field_check(&f, 2.0 * f.omega2(), 1.0, 50).unwrap();
        let b = far_field_check(&f, 4.0 * f.omega2(), 1.0, 50).unwrap();
        assert!(b.max_deviation < a.max_deviation);
        assert!((a.min_omega - 2.0 * f.omega2()).abs() < 1e-12);
        assert!(far_field_check(&f, 0.5 * f.omega2(), 1.0, 10).is_err());
    }
}
