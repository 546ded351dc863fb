//! Shooting solver for the reduced free-boundary problem with arbitrary
//! diffusivities.
//!
//! Both phases are integrated in flux form with `p = ω d(s) s'`, so that
//! `s' = p/(ω d(s))` and `p' = −(μω/2) s'`. The liquid phase starts at
//! `ω = R` from the evaporation balance and runs to the trial front `ω₂`;
//! the solid phase starts there from the melting balance and runs to a
//! finite far-field level. The two end-point mismatches are driven to zero
//! by damped Newton in `(ω₂, μ)`.

mod diffusivity;
mod dopri;

pub use diffusivity::{Diffusivity, Table};
pub use dopri::{integrate, Node, StepControl};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ScanGrid, SimilaritySolution};
use crate::params::{InterfaceDiffusivities, MeltingBalance, PhysicalParameters};
use crate::special::{log_grid, sign_change_cells, solve_2d_newton, SignChangeCell, Tolerance};

/// `(du, dp)` of the liquid ODE in flux form.
pub fn liquid_rhs(omega: f64, state: (f64, f64), mu: f64, d1: &Diffusivity) -> Result<(f64, f64)> {
    flux_rhs(omega, state, mu, d1)
}

/// `(dv, dp)` of the solid ODE in flux form.
pub fn solid_rhs(omega: f64, state: (f64, f64), mu: f64, d2: &Diffusivity) -> Result<(f64, f64)> {
    flux_rhs(omega, state, mu, d2)
}

fn flux_rhs(omega: f64, (s, p): (f64, f64), mu: f64, d: &Diffusivity) -> Result<(f64, f64)> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("reduced ODE needs omega > 0, got {omega}")));
    }
    let ds = p / (omega * d.eval(s)?);
    Ok((ds, -0.5 * mu * omega * ds))
}

/// Interface diffusivities: the override in `p`, else `d₁(u_v)`, `d₁(u_m)`,
/// `d₂(v_m)`.
pub fn resolve_interface(
    p: &PhysicalParameters,
    d1: &Diffusivity,
    d2: &Diffusivity,
) -> Result<InterfaceDiffusivities> {
    match p.interface {
        Some(i) => Ok(i),
        None => Ok(InterfaceDiffusivities {
            d1_v: d1.eval(p.u_v)?,
            d1_m: d1.eval(p.u_m)?,
            d2_m: d2.eval(p.v_m)?,
        }),
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    pub control: StepControl,
    /// Newton stops once both mismatches are below `abs_tol`.
    pub newton: Tolerance,
    /// Far-field level; `None` means `max(50/μ, 100 ω₂)` at each trial.
    pub omega_max: Option<f64>,
    pub balance: MeltingBalance,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            newton: Tolerance {
                abs_tol: 1e-9,
                rel_tol: 1e-12,
                max_iter: 60,
            },
            omega_max: None,
            balance: MeltingBalance::default(),
        }
    }
}

/// Default far-field truncation level.
pub fn default_omega_max(omega2: f64, mu: f64) -> f64 {
    (50.0 / mu).max(100.0 * omega2)
}

/// Profile sample `(ω, s, ds/dω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub omega: f64,
    pub value: f64,
    pub slope: f64,
}

/// Converged reduced solution on the integrator's own grid.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedProfiles {
    pub params: PhysicalParameters,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    pub liquid: Vec<ProfilePoint>,
    pub solid: Vec<ProfilePoint>,
    pub omega2: f64,
    pub mu: f64,
    pub omega_max: f64,
    pub mismatch: (f64, f64),
    /// Estimate of `|v(ω_max) − v(∞)|` from the local exponential tail.
    pub tail_bound: f64,
}

struct Shot {
    liquid: Vec<ProfilePoint>,
    solid: Vec<ProfilePoint>,
    omega_max: f64,
    mismatch: (f64, f64),
    tail_bound: f64,
}

fn to_points(nodes: Vec<Node<2>>) -> Vec<ProfilePoint> {
    nodes
        .into_iter()
        .map(|n| ProfilePoint {
            omega: n.t,
            value: n.y[0],
            slope: n.dy[0],
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn shoot_full(
    p: &PhysicalParameters,
    d1: &Diffusivity,
    d2: &Diffusivity,
    omega2: f64,
    mu: f64,
    omega_max: f64,
    options: &BvpOptions,
) -> Result<Shot> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("front speed mu must be positive, got {mu}")));
    }
    if !(omega2 > p.r && omega2.is_finite()) {
        return Err(Error::Domain(format!("need omega2 > R = {}, got {omega2}", p.r)));
    }
    if !(omega_max > omega2) {
        return Err(Error::Domain(format!("omega_max = {omega_max} must exceed omega2 = {omega2}")));
    }
    let iface = resolve_interface(p, d1, d2)?;

    let du_entry = (mu * p.h_v - p.q) / (2.0 * iface.d1_v);
    let flux_entry = p.r * d1.eval(p.u_v)? * du_entry;
    let liquid = integrate(
        |w, y: &[f64; 2]| {
            let (a, b) = flux_rhs(w, (y[0], y[1]), mu, d1)?;
            Ok([a, b])
        },
        p.r,
        [p.u_v, flux_entry],
        omega2,
        options.control,
    )?;
    let front = liquid.last().expect("integrator returns end points");
    let du_front = front.dy[0];

    let dv_front = options
        .balance
        .solid_slope(iface.d1_m, du_front, iface.d2_m, mu, p.h_m);
    let flux_front = omega2 * d2.eval(p.v_m)? * dv_front;
    let solid = integrate(
        |w, y: &[f64; 2]| {
            let (a, b) = flux_rhs(w, (y[0], y[1]), mu, d2)?;
            Ok([a, b])
        },
        omega2,
        [p.v_m, flux_front],
        omega_max,
        options.control,
    )?;
    let far = solid.last().expect("integrator returns end points");
    let tail_bound = far.dy[0].abs() * 2.0 * d2.eval(far.y[0])? / mu;

    Ok(Shot {
        mismatch: (front.y[0] - p.u_m, far.y[0] - p.v_inf),
        liquid: to_points(liquid),
        solid: to_points(solid),
        omega_max,
        tail_bound,
    })
}

/// End-point mismatches `(u(ω₂) − u_m, v(ω_max) − v_∞)` of one shot.
pub fn shoot(
    p: &PhysicalParameters,
    d1: &Diffusivity,
    d2: &Diffusivity,
    omega2: f64,
    mu: f64,
    omega_max: f64,
) -> Result<(f64, f64)> {
    Ok(shoot_full(p, d1, d2, omega2, mu, omega_max, &BvpOptions::default())?.mismatch)
}

fn validate_inputs(p: &PhysicalParameters, d1: &Diffusivity, d2: &Diffusivity) -> Result<()> {
    p.validate()?;
    d1.validate()?;
    d2.validate()
}

/// Solve for `(ω₂, μ)` from `guess` by damped Newton on the shooting map.
pub fn solve_reduced_bvp(
    p: &PhysicalParameters,
    d1: &Diffusivity,
    d2: &Diffusivity,
    guess: (f64, f64),
    options: &BvpOptions,
) -> Result<ReducedProfiles> {
    validate_inputs(p, d1, d2)?;
    if !(guess.0 > p.r && guess.1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "guess (omega2 = {}, mu = {}) is outside the validity domain",
            guess.0, guess.1
        )));
    }
    let omega_max = |w2: f64, mu: f64| options.omega_max.unwrap_or_else(|| default_omega_max(w2, mu));
    let root = solve_2d_newton(
        |(w2, mu)| Ok(shoot_full(p, d1, d2, w2, mu, omega_max(w2, mu), options)?.mismatch),
        guess,
        options.newton,
    )?;
    if !(root.0 > p.r) {
        return Err(Error::InvalidRegime(format!(
            "converged front omega2 = {} is not beyond R = {}",
            root.0, p.r
        )));
    }
    let shot = shoot_full(p, d1, d2, root.0, root.1, omega_max(root.0, root.1), options)?;
    Ok(ReducedProfiles {
        params: *p,
        d1: d1.clone(),
        d2: d2.clone(),
        liquid: shot.liquid,
        solid: shot.solid,
        omega2: root.0,
        mu: root.1,
        omega_max: shot.omega_max,
        mismatch: shot.mismatch,
        tail_bound: shot.tail_bound,
    })
}

/// Cells of a log grid in `(ω₂, μ)` where both shooting mismatches change
/// sign. Points where the shot fails are skipped.
pub fn scan_mismatch(
    p: &PhysicalParameters,
    d1: &Diffusivity,
    d2: &Diffusivity,
    grid: &ScanGrid,
) -> Result<Vec<SignChangeCell>> {
    validate_inputs(p, d1, d2)?;
    let omegas = log_grid(p.r * 1.001, p.r * grid.omega2_ratio_max, grid.n_omega2);
    let mus = log_grid(grid.mu_min, grid.mu_max, grid.n_mu);
    Ok(sign_change_cells(
        |w, m| shoot(p, d1, d2, w, m, default_omega_max(w, m)),
        &omegas,
        &mus,
    ))
}

/// Max-norm differences between numerical and exact profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDifference {
    pub liquid: f64,
    pub solid: f64,
}

impl ProfileDifference {
    pub fn max(&self) -> f64 {
        self.liquid.max(self.solid)
    }
}

/// Compare a reduced solution of the exact class against the exact
/// evaluators at every stored node.
pub fn compare_with_exact(profiles: &ReducedProfiles, sol: &SimilaritySolution) -> Result<ProfileDifference> {
    if profiles.params != *sol.params() {
        return Err(Error::InvalidParameter(
            "profiles and exact solution have different physical parameters".into(),
        ));
    }
    let exact_class = |s: f64| -> Result<bool> {
        let a = profiles.d1.eval(s)?;
        let b = profiles.d2.eval(s)?;
        Ok((a * s - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12)
    };
    let p = &profiles.params;
    for s in [p.u_v, p.u_m, 0.5 * (p.u_v + p.u_m)] {
        if !exact_class(s).unwrap_or(false) {
            return Err(Error::InvalidParameter(
                "compare_with_exact needs d1(u) = 1/u and d2(v) = 1".into(),
            ));
        }
    }
    let mut diff = ProfileDifference {
        liquid: 0.0,
        solid: 0.0,
    };
    for pt in &profiles.liquid {
        diff.liquid = diff.liquid.max((pt.value - sol.u_of_omega(pt.omega)?).abs());
    }
    for pt in &profiles.solid {
        diff.solid = diff.solid.max((pt.value - sol.v_of_omega(pt.omega)?).abs());
    }
    Ok(diff)
}
