//! Exact implicit similarity solution for `d₁(u) = 1/u`, `d₂(v) = 1`.
//!
//! In the similarity variable `ω` the liquid log-slope `g = ω u'/u` obeys
//! `ln g + g = 𝒜(ωu)` with `𝒜` affine in `ν = ωu`, so `g = W₀(e^𝒜)` and
//! `dν/(ν(1 + g)) = dω/ω`. The liquid profile is therefore defined by
//!
//! ```text
//! ∫_{R u_v}^{ω u} dν / (ν (1 + W₀(e^{𝒜(ν)}))) = ln(ω / R)
//! ```
//!
//! and the solid profile by `v = v_∞ + (v_m − v_∞) Φ(ω)/Φ(ω₂)`. The front
//! level `ω₂` and the front speed `μ` solve a pair of transcendental
//! equations: the liquid profile reaches `u_m` at `ω₂`, and the melting
//! balance holds there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{InterfaceDiffusivities, MeltingBalance, PhysicalParameters};
use crate::special::{
    find_root_1d, integrate_signed, lambert_w0_of_exp, log_grid, phi, phi_derivative,
    sign_change_cells, solve_2d_newton, Interval, SignChangeCell, Tolerance,
};

/// Interface diffusivities of the exact class, either the explicit override
/// or `(1/u_v, 1/u_m, 1)`.
pub fn interface_diffusivities(p: &PhysicalParameters) -> InterfaceDiffusivities {
    p.interface.unwrap_or(InterfaceDiffusivities {
        d1_v: 1.0 / p.u_v,
        d1_m: 1.0 / p.u_m,
        d2_m: 1.0,
    })
}

fn validate_exact(p: &PhysicalParameters) -> Result<()> {
    p.validate()?;
    if !(p.u_v > 0.0 && p.u_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "d1(u) = 1/u needs positive liquid temperatures, got u_v = {}, u_m = {}",
            p.u_v, p.u_m
        )));
    }
    Ok(())
}

/// Log-slope `g(R) = R u'(R)/u_v` imposed by the evaporation balance,
/// `(μH_v − q)R/(2 d₁ᵥ u_v)`; equals `(μH_v − q)R/2` for the tied
/// interface diffusivity `d₁ᵥ = 1/u_v`.
pub fn entry_log_slope(mu: f64, p: &PhysicalParameters) -> Result<f64> {
    let iface = interface_diffusivities(p);
    let x = (mu * p.h_v - p.q) * p.r / (2.0 * iface.d1_v * p.u_v);
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "(mu*H_v - q)*R/2 must be positive, got {x} at mu = {mu}"
        )));
    }
    Ok(x)
}

/// `𝒜(ν) = −(μ/2)ν + ln x + x + (μ/2)R u_v` with `x` from [`entry_log_slope`].
pub fn script_a(nu: f64, mu: f64, p: &PhysicalParameters) -> Result<f64> {
    Ok(Liquid::new(mu, p)?.script_a(nu))
}

/// `𝒜` at `ν = ω₂u_m` written as `(μ/2)(R u_v − ω₂ u_m) + ln x + x`.
pub fn script_a_at_front(omega2: f64, mu: f64, p: &PhysicalParameters) -> Result<f64> {
    let x = entry_log_slope(mu, p)?;
    Ok(0.5 * mu * (p.r * p.u_v - omega2 * p.u_m) + x.ln() + x)
}

/// Integrand `1/(ν (1 + W₀(e^{𝒜(ν)})))`, using `e^{𝒜 − W(e^𝒜)} = W(e^𝒜)`.
pub fn integrand(nu: f64, mu: f64, p: &PhysicalParameters) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("integrand requires nu > 0, got {nu}")));
    }
    Ok(Liquid::new(mu, p)?.integrand(nu))
}

/// Precomputed liquid-phase constants at a fixed `μ`.
#[derive(Debug, Clone, Copy)]
struct Liquid {
    half_mu: f64,
    offset: f64,
    nu_v: f64,
}

impl Liquid {
    fn new(mu: f64, p: &PhysicalParameters) -> Result<Self> {
        let x = entry_log_slope(mu, p)?;
        Ok(Self {
            half_mu: 0.5 * mu,
            offset: x.ln() + x + 0.5 * mu * p.r * p.u_v,
            nu_v: p.r * p.u_v,
        })
    }

    fn script_a(&self, nu: f64) -> f64 {
        self.offset - self.half_mu * nu
    }

    fn log_slope(&self, nu: f64) -> f64 {
        lambert_w0_of_exp(self.script_a(nu))
    }

    fn integrand(&self, nu: f64) -> f64 {
        1.0 / (nu * (1.0 + self.log_slope(nu)))
    }

    /// `∫_{R u_v}^{ν}` of the integrand.
    fn integral_to(&self, nu: f64) -> Result<f64> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("liquid integral needs nu > 0, got {nu}")));
        }
        integrate_signed(|s| self.integrand(s), self.nu_v, nu, Tolerance::tight())
    }
}

/// Residuals `(F₁, F₂)` of the transcendental system at `(ω₂, μ)` with the
/// default melting-balance orientation.
///
/// `F₁ = ∫_{Ru_v}^{ω₂u_m} … dν − ln(ω₂/R)` and
/// `F₂ = 2(v_m − v_∞)e^{−μω₂/2}/Φ(ω₂) − 2W(e^{𝒜(ω₂u_m)}) − μω₂H_m`
/// (tied interface diffusivities).
pub fn transcendental_residuals(
    omega2: f64,
    mu: f64,
    p: &PhysicalParameters,
) -> Result<(f64, f64)> {
    transcendental_residuals_with(omega2, mu, p, MeltingBalance::default())
}

/// [`transcendental_residuals`] with an explicit melting-balance orientation.
/// `F₂` is `ω₂` times the reduced melting-balance residual.
pub fn transcendental_residuals_with(
    omega2: f64,
    mu: f64,
    p: &PhysicalParameters,
    balance: MeltingBalance,
) -> Result<(f64, f64)> {
    if !(omega2 > 0.0) {
        return Err(Error::Domain(format!("omega2 must be positive, got {omega2}")));
    }
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let liquid = Liquid::new(mu, p)?;
    let f1 = liquid.integral_to(omega2 * p.u_m)? - (omega2 / p.r).ln();

    let iface = interface_diffusivities(p);
    let g2 = liquid.log_slope(omega2 * p.u_m);
    let du = p.u_m * g2 / omega2;
    let amplitude = (p.v_m - p.v_inf) / phi(omega2, mu)?;
    let dv = amplitude * phi_derivative(omega2, mu)?;
    let f2 = omega2 * balance.residual(iface.d1_m, du, iface.d2_m, dv, mu, p.h_m);
    Ok((f1, f2))
}

/// The solved exact similarity solution. Immutable once built.
#[derive(Debug, Clone, Serialize)]
pub struct SimilaritySolution {
    params: PhysicalParameters,
    omega1: f64,
    omega2: f64,
    mu: f64,
    phi_omega2: f64,
    balance: MeltingBalance,
}

impl SimilaritySolution {
    /// Assemble a solution from given `(ω₂, μ)` without checking the
    /// transcendental residuals (see [`SimilaritySolution::residuals`]).
    pub fn new(params: PhysicalParameters, omega2: f64, mu: f64) -> Result<Self> {
        Self::with_balance(params, omega2, mu, MeltingBalance::default())
    }

    pub fn with_balance(
        params: PhysicalParameters,
        omega2: f64,
        mu: f64,
        balance: MeltingBalance,
    ) -> Result<Self> {
        validate_exact(&params)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidRegime(format!("front speed mu must be positive, got {mu}")));
        }
        if !(omega2 > params.r && omega2.is_finite()) {
            return Err(Error::InvalidRegime(format!(
                "need omega2 > omega1 = R = {}, got omega2 = {omega2}",
                params.r
            )));
        }
        entry_log_slope(mu, &params).map_err(|e| Error::InvalidRegime(e.to_string()))?;
        Ok(Self {
            params,
            omega1: params.r,
            omega2,
            mu,
            phi_omega2: phi(omega2, mu)?,
            balance,
        })
    }

    pub fn params(&self) -> &PhysicalParameters {
        &self.params
    }
    pub fn omega1(&self) -> f64 {
        self.omega1
    }
    pub fn omega2(&self) -> f64 {
        self.omega2
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn phi_omega2(&self) -> f64 {
        self.phi_omega2
    }
    pub fn balance(&self) -> MeltingBalance {
        self.balance
    }
    pub fn interface(&self) -> InterfaceDiffusivities {
        interface_diffusivities(&self.params)
    }

    pub fn residuals(&self) -> Result<(f64, f64)> {
        transcendental_residuals_with(self.omega2, self.mu, &self.params, self.balance)
    }

    fn liquid(&self) -> Liquid {
        Liquid::new(self.mu, &self.params).expect("validated at construction")
    }

    /// Liquid temperature at similarity level `omega`, the unique root of
    /// the implicit relation (its left side is strictly increasing in `u`).
    ///
    /// Defined on `[R, ω₂]`; slightly outside that range the same relation
    /// continues the profile, which one-sided stencils rely on.
    pub fn u_of_omega(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("u_of_omega needs omega > 0, got {omega}")));
        }
        let p = &self.params;
        if omega == self.omega1 {
            return Ok(p.u_v);
        }
        let liquid = self.liquid();
        let target = (omega / p.r).ln();
        let g = |u: f64| match liquid.integral_to(omega * u) {
            Ok(v) => v - target,
            Err(_) => f64::NAN,
        };
        let tol = Tolerance::new(1e-15, 1e-15, 200)?;
        let mut lo = p.u_v.min(p.u_m) * (1.0 - 1e-3);
        let mut hi = p.u_v.max(p.u_m) * (1.0 + 1e-3);
        for _ in 0..8 {
            match find_root_1d(g, Interval::new(lo, hi)?, tol) {
                Err(Error::NoSignChange { flo, .. }) => {
                    if flo > 0.0 {
                        lo *= 0.5;
                    } else {
                        hi *= 2.0;
                    }
                }
                other => return other,
            }
        }
        Err(Error::NoSignChange {
            lo,
            hi,
            flo: g(lo),
            fhi: g(hi),
        })
    }

    /// `du/dω = u W(e^{𝒜(ωu)})/ω` at a known liquid temperature.
    pub fn u_slope(&self, omega: f64, u: f64) -> f64 {
        u * self.liquid().log_slope(omega * u) / omega
    }

    /// Solid temperature `v_∞ + (v_m − v_∞) Φ(ω)/Φ(ω₂)`.
    pub fn v_of_omega(&self, omega: f64) -> Result<f64> {
        let p = &self.params;
        let ratio = phi(omega, self.mu)? / self.phi_omega2;
        Ok(p.v_inf + (p.v_m - p.v_inf) * ratio)
    }

    /// Closed-form `dv/dω = (v_m − v_∞) Φ'(ω)/Φ(ω₂)`.
    pub fn v_slope(&self, omega: f64) -> Result<f64> {
        let p = &self.params;
        Ok((p.v_m - p.v_inf) * phi_derivative(omega, self.mu)? / self.phi_omega2)
    }

    /// Closed-form `d²v/dω²`.
    pub fn v_curvature(&self, omega: f64) -> Result<f64> {
        let slope = self.v_slope(omega)?;
        Ok(-slope * (1.0 / omega + 0.5 * self.mu))
    }

    /// Default far-field truncation `max(50/μ, 100 ω₂)`.
    pub fn far_field_omega(&self) -> f64 {
        (50.0 / self.mu).max(100.0 * self.omega2)
    }
}

/// Damped Newton solve of the transcendental system from `guess = (ω₂, μ)`.
pub fn solve_parameters(p: &PhysicalParameters, guess: (f64, f64)) -> Result<SimilaritySolution> {
    solve_parameters_with(p, guess, MeltingBalance::default(), Tolerance::default())
}

pub fn solve_parameters_with(
    p: &PhysicalParameters,
    guess: (f64, f64),
    balance: MeltingBalance,
    tol: Tolerance,
) -> Result<SimilaritySolution> {
    validate_exact(p)?;
    let (omega2, mu) = guess;
    if !(omega2 > p.r && mu > 0.0) || entry_log_slope(mu, p).is_err() {
        return Err(Error::InvalidParameter(format!(
            "guess (omega2 = {omega2}, mu = {mu}) is outside the validity domain"
        )));
    }
    let root = solve_2d_newton(
        |(w, m)| transcendental_residuals_with(w, m, p, balance),
        guess,
        tol,
    )?;
    SimilaritySolution::with_balance(*p, root.0, root.1, balance)
}

/// Grid for the brute-force sign scan of `(F₁, F₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    /// Upper end of the `ω₂/R` range; the lower end is just above one.
    pub omega2_ratio_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub n_omega2: usize,
    pub n_mu: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            omega2_ratio_max: 100.0,
            mu_min: 1e-3,
            mu_max: 10.0,
            n_omega2: 48,
            n_mu: 48,
        }
    }
}

/// Cells of a log grid over `ω₂ ∈ (R, ratio·R]`, `μ ∈ [μ_min, μ_max]` where
/// both residuals change sign.
pub fn scan_residuals(p: &PhysicalParameters, grid: &ScanGrid) -> Result<Vec<SignChangeCell>> {
    validate_exact(p)?;
    let omegas = log_grid(p.r * 1.001, p.r * grid.omega2_ratio_max, grid.n_omega2);
    let mus = log_grid(grid.mu_min, grid.mu_max, grid.n_mu);
    Ok(sign_change_cells(
        |w, m| transcendental_residuals(w, m, p),
        &omegas,
        &mus,
    ))
}

/// Outcome of a scan-seeded solve: the first valid root plus every distinct
/// root reached from the other candidate cells.
#[derive(Debug, Clone)]
pub struct ScannedSolve {
    pub solution: SimilaritySolution,
    pub candidates: Vec<SignChangeCell>,
    pub roots: Vec<(f64, f64)>,
}

/// Sign scan followed by damped Newton from each candidate cell.
pub fn solve_from_scan(p: &PhysicalParameters, grid: &ScanGrid) -> Result<ScannedSolve> {
    let candidates = scan_residuals(p, grid)?;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut first: Option<SimilaritySolution> = None;
    let mut last_err = None;
    for cell in &candidates {
        match solve_parameters(p, cell.log_center()) {
            Ok(sol) => {
                let r = (sol.omega2(), sol.mu());
                let seen = roots.iter().any(|q| {
                    ((q.0 - r.0) / r.0).abs() < 1e-6 && ((q.1 - r.1) / r.1).abs() < 1e-6
                });
                if !seen {
                    roots.push(r);
                }
                first.get_or_insert(sol);
            }
            Err(e) => last_err = Some(e),
        }
    }
    match first {
        Some(solution) => Ok(ScannedSolve {
            solution,
            candidates,
            roots,
        }),
        None => Err(last_err.unwrap_or(Error::NotConverged {
            what: "sign scan (no candidate cell)",
            iterations: grid.n_omega2 * grid.n_mu,
            residual: f64::NAN,
        })),
    }
}

/// Finite-difference check of the reduced ODEs and interface conditions on
/// an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidualReport {
    /// Richardson-extrapolated max residual of the liquid ODE on
    /// `[R + δ, ω₂ − δ]`.
    pub liquid: f64,
    /// Max plain central-difference liquid residual at `h`, `h/2`, `h/4`.
    pub liquid_raw: [f64; 3],
    /// Observed order from the last two raw maxima.
    pub liquid_order: f64,
    /// Richardson-extrapolated max residual of the solid ODE on `[ω₂, 50/μ]`.
    pub solid: f64,
    /// `|2 d₁ᵥ u'(R) − (μH_v − q)|` with a one-sided difference.
    pub entry_balance: f64,
    /// Melting-balance residual at `ω₂` with one-sided differences.
    pub melting_balance: f64,
}

impl OdeResidualReport {
    pub fn max(&self) -> f64 {
        self.liquid
            .max(self.solid)
            .max(self.entry_balance)
            .max(self.melting_balance)
    }
}

fn central_derivatives<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, h: f64) -> Result<(f64, f64, f64)> {
    let (fm, f0, fp) = (f(x - h)?, f(x)?, f(x + h)?);
    Ok((f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
}

// Second-order one-sided slope; `h < 0` differences backwards.
fn one_sided_slope<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, f0: f64, h: f64) -> Result<f64> {
    let slope = |h: f64| -> Result<f64> {
        Ok((-3.0 * f0 + 4.0 * f(x + h)? - f(x + 2.0 * h)?) / (2.0 * h))
    };
    let (coarse, fine) = (slope(h)?, slope(0.5 * h)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Residuals of the liquid ODE `(ω u'/u)' + (μω/2) u' = 0`, the solid ODE
/// `(ω v')' + (μω/2) v' = 0` and both interface balances, all by finite
/// differences of the implicit/closed-form profiles on `n_points` nodes.
pub fn verify_ode_residual(sol: &SimilaritySolution, n_points: usize) -> Result<OdeResidualReport> {
    let n = n_points.max(2);
    let p = sol.params();
    let mu = sol.mu();
    let (w1, w2) = (sol.omega1(), sol.omega2());
    let u = |w: f64| sol.u_of_omega(w);
    let v = |w: f64| sol.v_of_omega(w);

    let liquid_at = |w: f64, h: f64| -> Result<f64> {
        let (u0, du, d2u) = central_derivatives(&u, w, h)?;
        Ok(du / u0 + w * d2u / u0 - w * du * du / (u0 * u0) + 0.5 * mu * w * du)
    };
    let h = 0.01 * (w2 - w1);
    let delta = 2.0 * h;
    let mut liquid = 0.0_f64;
    let mut raw = [0.0_f64; 3];
    for k in 0..n {
        let w = w1 + delta + (w2 - w1 - 2.0 * delta) * k as f64 / (n - 1) as f64;
        let r = [liquid_at(w, h)?, liquid_at(w, 0.5 * h)?, liquid_at(w, 0.25 * h)?];
        for (m, ri) in raw.iter_mut().zip(r) {
            *m = m.max(ri.abs());
        }
        liquid = liquid.max(((4.0 * r[2] - r[1]) / 3.0).abs());
    }
    let liquid_order = (raw[1] / raw[2]).log2();

    let solid_at = |w: f64, h: f64| -> Result<f64> {
        let (_, dv, d2v) = central_derivatives(&v, w, h)?;
        Ok(dv + w * d2v + 0.5 * mu * w * dv)
    };
    let w_far = 50.0 / mu;
    let mut solid = 0.0_f64;
    if w_far > w2 {
        for k in 0..n {
            let w = w2 + (w_far - w2) * k as f64 / (n - 1) as f64;
            let h = 0.02 * w.min(2.0 / mu);
            let coarse = solid_at(w, h)?;
            let fine = solid_at(w, 0.5 * h)?;
            solid = solid.max(((4.0 * fine - coarse) / 3.0).abs());
        }
    }

    let iface = sol.interface();
    let hb = 5e-4 * (w2 - w1);
    let du_entry = one_sided_slope(&u, w1, p.u_v, hb)?;
    let entry_balance = (2.0 * iface.d1_v * du_entry - (mu * p.h_v - p.q)).abs();

    let du_front = one_sided_slope(&u, w2, u(w2)?, -hb)?;
    let dv_front = one_sided_slope(&v, w2, v(w2)?, hb)?;
    let melting_balance = sol
        .balance()
        .residual(iface.d1_m, du_front, iface.d2_m, dv_front, mu, p.h_m)
        .abs();

    Ok(OdeResidualReport {
        liquid,
        liquid_raw: raw,
        liquid_order,
        solid,
        entry_balance,
        melting_balance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::lambert_w0;

    fn reference() -> PhysicalParameters {
        PhysicalParameters::reference()
    }

    #[test]
    fn script_a_at_entry_gives_lambert_identity() {
        let p = reference();
        for &mu in &[0.05, 0.1, 1.0, 3.0] {
            let x = (mu * p.h_v - p.q) * p.r / 2.0;
            let a = script_a(p.r * p.u_v, mu, &p).unwrap();
            assert!((a - (x.ln() + x)).abs() < 1e-15);
            assert!((lambert_w0_of_exp(a) - x).abs() < 1e-14 * x.max(1.0));
        }
    }

    #[test]
    fn script_a_is_affine() {
        let p = reference();
        let mu = 0.37;
        let (a1, a2) = (script_a(1.3, mu, &p).unwrap(), script_a(5.9, mu, &p).unwrap());
        assert!((a1 - a2 + 0.5 * mu * (1.3 - 5.9)).abs() < 1e-14);
    }

    #[test]
    fn two_forms_of_script_a_agree() {
        let p = reference();
        for &(w2, mu) in &[(3.9, 0.1), (1.5, 2.0), (20.0, 0.01)] {
            let general = script_a(w2 * p.u_m, mu, &p).unwrap();
            let explicit = script_a_at_front(w2, mu, &p).unwrap();
            assert!((general - explicit).abs() < 1e-14);
        }
    }

    #[test]
    fn integrand_identity_and_entry_value() {
        let p = reference();
        let mu = 0.4;
        for &nu in &[0.5, 1.0, 2.0, 10.0, 200.0] {
            let a = script_a(nu, mu, &p).unwrap();
            let w = lambert_w0_of_exp(a);
            let paper_form = (a - w).exp();
            assert!((paper_form - w).abs() <= 1e-12 * w);
            let f = integrand(nu, mu, &p).unwrap();
            assert!(f > 0.0);
            assert!((f - 1.0 / (nu * (1.0 + paper_form))).abs() < 1e-14 * f);
        }
        let x = (mu * p.h_v - p.q) * p.r / 2.0;
        let at_entry = integrand(p.r * p.u_v, mu, &p).unwrap();
        assert!((at_entry - 1.0 / (p.r * p.u_v * (1.0 + x))).abs() < 1e-15);
    }

    #[test]
    fn invalid_log_argument() {
        let mut p = reference();
        p.q = 2.0;
        assert!(matches!(script_a(1.0, 1.0, &p), Err(Error::Domain(_))));
        assert!(integrand(-1.0, 0.1, &reference()).is_err());
    }

    #[test]
    fn empty_integral_at_entry() {
        let p = reference();
        let liquid = Liquid::new(0.3, &p).unwrap();
        assert_eq!(liquid.integral_to(p.r * p.u_v).unwrap(), 0.0);
    }

    #[test]
    fn paper_and_phase_outward_forms_coincide() {
        // with tied interface diffusivities the default F2 is the printed one
        let p = reference();
        for &(w2, mu) in &[(3.0, 0.2), (4.5, 0.05)] {
            let (_, f2) = transcendental_residuals(w2, mu, &p).unwrap();
            let a2 = script_a_at_front(w2, mu, &p).unwrap();
            let w = lambert_w0(a2.exp()).unwrap();
            let e1 = phi(w2, mu).unwrap();
            let printed = 2.0 * (p.v_m - p.v_inf) / e1 * (-0.5 * mu * w2).exp()
                - 2.0 * (a2 - w).exp()
                - mu * w2 * p.h_m;
            assert!((f2 - printed).abs() < 1e-12, "{f2} vs {printed}");
        }
    }

    #[test]
    fn common_normal_has_no_root_for_reference() {
        // every term of the literal balance has the same sign here
        let p = reference();
        for &w2 in &[1.5, 3.0, 10.0] {
            for &mu in &[0.01, 0.1, 1.0] {
                let (_, f2) =
                    transcendental_residuals_with(w2, mu, &p, MeltingBalance::CommonNormal).unwrap();
                assert!(f2 < 0.0);
            }
        }
    }

    fn solved() -> SimilaritySolution {
        solve_parameters(&reference(), (4.0, 0.1)).unwrap()
    }

    #[test]
    fn reference_solve() {
        let sol = solved();
        let (f1, f2) = sol.residuals().unwrap();
        assert!(f1.abs() <= 1e-10 && f2.abs() <= 1e-10);
        assert!(sol.omega2() > sol.omega1());
    }

    #[test]
    fn reference_root_matches_high_precision_oracle() {
        // 30-digit quadrature + Lambert W + E1 evaluation of (F1, F2), solved by secant
        let sol = solved();
        assert!((sol.omega2() / 3.888_810_371_378_046_3 - 1.0).abs() < 1e-8);
        assert!((sol.mu() / 0.103_253_062_891_212_4 - 1.0).abs() < 1e-8);
        let u = sol.u_of_omega(2.5).unwrap();
        assert!((u - 1.625_420_539_324_039_7).abs() < 1e-8);
    }

    #[test]
    fn solve_from_root_is_unchanged() {
        let sol = solved();
        let again = solve_parameters(&reference(), (sol.omega2(), sol.mu())).unwrap();
        assert_eq!(again.omega2(), sol.omega2());
        assert_eq!(again.mu(), sol.mu());
    }

    #[test]
    fn guess_outside_domain_is_rejected() {
        assert!(matches!(
            solve_parameters(&reference(), (0.5, 0.1)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(solve_parameters(&reference(), (4.0, -0.1)).is_err());
    }

    #[test]
    fn profile_end_points() {
        let sol = solved();
        let p = reference();
        assert_eq!(sol.u_of_omega(p.r).unwrap(), p.u_v);
        assert!((sol.u_of_omega(sol.omega2()).unwrap() - p.u_m).abs() < 1e-8);
        assert!((sol.v_of_omega(sol.omega2()).unwrap() - p.v_m).abs() < 1e-15);
        let far = 100.0 / sol.mu();
        assert!((sol.v_of_omega(far).unwrap() - p.v_inf).abs() < (p.v_m - p.v_inf).abs() * 1e-20);
    }

    #[test]
    fn liquid_profile_is_monotone() {
        let sol = solved();
        let mut prev = sol.params().u_v;
        for k in 1..=40 {
            let w = sol.omega1() + (sol.omega2() - sol.omega1()) * k as f64 / 40.0;
            let u = sol.u_of_omega(w).unwrap();
            assert!(u > prev);
            prev = u;
        }
        let mid = sol.u_of_omega(0.5 * (sol.omega1() + sol.omega2())).unwrap();
        assert!(mid > 1.0 && mid < 2.0);
    }

    #[test]
    fn solid_profile_at_twice_front() {
        let sol = solved();
        let p = reference();
        let w2 = sol.omega2();
        let mu = sol.mu();
        let expected = p.v_inf
            + (p.v_m - p.v_inf) * crate::special::exp_integral_e1(mu * w2).unwrap()
                / crate::special::exp_integral_e1(0.5 * mu * w2).unwrap();
        assert!((sol.v_of_omega(2.0 * w2).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn ode_residuals_are_small() {
        let report = verify_ode_residual(&solved(), 21).unwrap();
        assert!(report.solid <= 1e-8, "{report:?}");
        assert!(report.liquid <= 1e-6, "{report:?}");
        assert!(report.entry_balance <= 1e-8, "{report:?}");
        assert!(report.melting_balance <= 1e-8, "{report:?}");
        assert!((report.liquid_order - 2.0).abs() < 0.2, "{report:?}");
    }

    #[test]
    fn scan_brackets_reference_root() {
        let p = reference();
        let scanned = solve_from_scan(&p, &ScanGrid::default()).unwrap();
        assert!(!scanned.candidates.is_empty());
        let sol = &scanned.solution;
        assert!(scanned.candidates.iter().any(|c| {
            c.x.0 <= sol.omega2() && sol.omega2() <= c.x.1 && c.y.0 <= sol.mu() && sol.mu() <= c.y.1
        }));
    }
}
