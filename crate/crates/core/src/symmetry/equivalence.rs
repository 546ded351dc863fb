use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{InterfaceDiffusivities, PhysicalParameters};
use crate::problem::{FluxLaw, StefanProblem};
use crate::reconstruction::Point4;

/// Parameters of an equivalence transformation of the problem class:
///
/// ```text
/// t̃ = αt + γ₀
/// (x̃₁, x̃₂) = β R(β₁)(x₁, x₂) + (γ₁, γ₂),  R(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]
/// x̃₃ = βx₃ + γ₃
/// ũ = δ₁u + γ₄,  ṽ = δ₂v + γ₅
/// ```
///
/// with `αβδ₁δ₂ ≠ 0`. The bulk diffusivities scale by `β²/α`, the interface
/// diffusivities by `β²/δ₁` (liquid) and `β²/δ₂` (solid), the latent heats
/// by `α` and the flux by `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceParams {
    pub alpha: f64,
    pub beta: f64,
    /// Rotation angle in the `(x₁, x₂)` plane.
    pub beta1: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self::identity()
    }
}

fn rotate(theta: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
}

impl EquivalenceParams {
    pub const fn identity() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            beta1: 0.0,
            gamma0: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
            gamma5: 0.0,
            delta1: 1.0,
            delta2: 1.0,
        }
    }

    /// Pure scaling `t̃ = αt`, `x̃ = βx`.
    pub fn scaling(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            ..Self::identity()
        }
    }

    fn values(&self) -> [f64; 11] {
        [
            self.alpha, self.beta, self.beta1, self.gamma0, self.gamma1, self.gamma2, self.gamma3, self.gamma4,
            self.gamma5, self.delta1, self.delta2,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("equivalence parameters must be finite".into()));
        }
        if self.alpha * self.beta * self.delta1 * self.delta2 == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "equivalence transform needs alpha*beta*delta1*delta2 != 0, got ({}, {}, {}, {})",
                self.alpha, self.beta, self.delta1, self.delta2
            )));
        }
        Ok(())
    }

    pub fn apply_point(&self, p: &Point4) -> Point4 {
        let [x1, x2] = rotate(self.beta1, [p.x1, p.x2]);
        Point4::new(
            self.alpha * p.t + self.gamma0,
            self.beta * x1 + self.gamma1,
            self.beta * x2 + self.gamma2,
            self.beta * p.x3 + self.gamma3,
        )
    }

    pub fn apply_liquid(&self, u: f64) -> f64 {
        self.delta1 * u + self.gamma4
    }

    pub fn apply_solid(&self, v: f64) -> f64 {
        self.delta2 * v + self.gamma5
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Self {
        let g = rotate(self.beta1, [first.gamma1, first.gamma2]);
        Self {
            alpha: self.alpha * first.alpha,
            beta: self.beta * first.beta,
            beta1: self.beta1 + first.beta1,
            gamma0: self.alpha * first.gamma0 + self.gamma0,
            gamma1: self.beta * g[0] + self.gamma1,
            gamma2: self.beta * g[1] + self.gamma2,
            gamma3: self.beta * first.gamma3 + self.gamma3,
            gamma4: self.delta1 * first.gamma4 + self.gamma4,
            gamma5: self.delta2 * first.gamma5 + self.gamma5,
            delta1: self.delta1 * first.delta1,
            delta2: self.delta2 * first.delta2,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.validate()?;
        let g = rotate(-self.beta1, [self.gamma1, self.gamma2]);
        Ok(Self {
            alpha: 1.0 / self.alpha,
            beta: 1.0 / self.beta,
            beta1: -self.beta1,
            gamma0: -self.gamma0 / self.alpha,
            gamma1: -g[0] / self.beta,
            gamma2: -g[1] / self.beta,
            gamma3: -self.gamma3 / self.beta,
            gamma4: -self.gamma4 / self.delta1,
            gamma5: -self.gamma5 / self.delta2,
            delta1: 1.0 / self.delta1,
            delta2: 1.0 / self.delta2,
        })
    }

    /// Constants of the transformed problem for a flux amplitude factor
    /// `flux_factor` and the current interface diffusivities.
    fn map_params(
        &self,
        p: &PhysicalParameters,
        iface: InterfaceDiffusivities,
        keep_tied: bool,
        q: f64,
    ) -> PhysicalParameters {
        let b2 = self.beta * self.beta;
        PhysicalParameters {
            u_v: self.apply_liquid(p.u_v),
            u_m: self.apply_liquid(p.u_m),
            v_m: self.apply_solid(p.v_m),
            v_inf: self.apply_solid(p.v_inf),
            h_v: self.alpha * p.h_v,
            h_m: self.alpha * p.h_m,
            q,
            r: self.beta * p.r,
            interface: (!keep_tied).then_some(InterfaceDiffusivities {
                d1_v: b2 / self.delta1 * iface.d1_v,
                d1_m: b2 / self.delta1 * iface.d1_m,
                d2_m: b2 / self.delta2 * iface.d2_m,
            }),
        }
    }

    /// The transformed problem.
    ///
    /// Requires `α > 0` (diffusion forward in time) and `β > 0` (the spot
    /// radius and the half-space orientation are preserved); reflections are
    /// available through [`EquivalenceParams::apply_point`] only. The flux
    /// law `q/√(t − t₀)` maps to `β√α·q/√(t̃ − αt₀ − γ₀)`.
    pub fn apply_to_problem(&self, problem: &StefanProblem) -> Result<StefanProblem> {
        self.validate()?;
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "problem transform needs alpha > 0 and beta > 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        let iface = problem.interface()?;
        let flux = match problem.flux {
            FluxLaw::Constant { q } => FluxLaw::Constant { q: self.beta * q },
            FluxLaw::InverseSqrt { q, t0 } => FluxLaw::InverseSqrt {
                q: self.beta * self.alpha.sqrt() * q,
                t0: self.alpha * t0 + self.gamma0,
            },
        };
        // Tied interface coefficients stay tied only when β²/δ = β²/α.
        let keep_tied = problem.params.interface.is_none() && self.delta1 == self.alpha && self.delta2 == self.alpha;
        let factor = self.beta * self.beta / self.alpha;
        let out = StefanProblem {
            params: self.map_params(&problem.params, iface, keep_tied, flux.q()),
            d1: problem.d1.transformed(factor, self.delta1, self.gamma4)?,
            d2: problem.d2.transformed(factor, self.delta2, self.gamma5)?,
            flux,
            balance: problem.balance,
        };
        out.validate()?;
        Ok(out)
    }

    /// Similarity parameters `(ω₂, μ)` of the transformed problem:
    /// `(βω₂, (β/α)μ)`.
    pub fn map_similarity(&self, omega2: f64, mu: f64) -> (f64, f64) {
        (self.beta * omega2, self.beta / self.alpha * mu)
    }

    /// Scaling that brings the flux amplitude to `|q̃| = 1` with unchanged
    /// diffusivities (`β²/α = 1`).
    pub fn flux_normalization(flux: &FluxLaw) -> Result<Self> {
        let q = flux.q().abs();
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("flux amplitude must be finite and nonzero, got {q}")));
        }
        // Constant: |βq| = 1. Inverse square root: |β√α q| = β²|q| = 1.
        let beta = match flux {
            FluxLaw::Constant { .. } => 1.0 / q,
            FluxLaw::InverseSqrt { .. } => 1.0 / q.sqrt(),
        };
        Ok(Self::scaling(beta * beta, beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::Diffusivity;
    use proptest::prelude::*;

    fn arb_params() -> impl Strategy<Value = EquivalenceParams> {
        (
            (0.2f64..3.0, 0.2f64..3.0, -3.0f64..3.0),
            prop::array::uniform6(-2.0f64..2.0),
            (prop::bool::ANY, 0.3f64..3.0, prop::bool::ANY, 0.3f64..3.0),
        )
            .prop_map(|((alpha, beta, beta1), g, (s1, d1, s2, d2))| EquivalenceParams {
                alpha,
                beta,
                beta1,
                gamma0: g[0],
                gamma1: g[1],
                gamma2: g[2],
                gamma3: g[3],
                gamma4: g[4],
                gamma5: g[5],
                delta1: if s1 { d1 } else { -d1 },
                delta2: if s2 { d2 } else { -d2 },
            })
    }

    fn close(a: &Point4, b: &Point4, tol: f64) -> bool {
        a.to_array().iter().zip(b.to_array()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn identity_leaves_problem_unchanged() {
        let p = StefanProblem::exact_class(PhysicalParameters::reference());
        assert_eq!(EquivalenceParams::identity().apply_to_problem(&p).unwrap(), p);
    }

    #[test]
    fn temperature_shift_example() {
        let p = StefanProblem::exact_class(PhysicalParameters::reference());
        let e = EquivalenceParams {
            delta1: 2.0,
            gamma4: 3.0,
            ..EquivalenceParams::identity()
        };
        let t = e.apply_to_problem(&p).unwrap();
        assert_eq!((t.params.u_v, t.params.u_m), (5.0, 7.0));
        let i = t.params.interface.unwrap();
        let i0 = p.interface().unwrap();
        assert_eq!((i.d1_v, i.d1_m, i.d2_m), (i0.d1_v / 2.0, i0.d1_m / 2.0, i0.d2_m));
    }

    #[test]
    fn diffusivity_neutral_scaling_example() {
        let mut p = StefanProblem::exact_class(PhysicalParameters::reference());
        p.d1 = Diffusivity::power_law(1.0, -1.0);
        let t = EquivalenceParams::scaling(4.0, 2.0).apply_to_problem(&p).unwrap();
        assert_eq!(t.d1, p.d1);
        assert_eq!(t.d2, p.d2);
        assert_eq!(t.flux, FluxLaw::Constant { q: 2.0 * p.params.q });
        assert_eq!((t.params.h_v, t.params.h_m), (4.0 * p.params.h_v, 4.0 * p.params.h_m));
    }

    #[test]
    fn zero_scaling_is_rejected() {
        let e = EquivalenceParams {
            delta2: 0.0,
            ..EquivalenceParams::identity()
        };
        assert!(e.validate().is_err());
        assert!(e.inverse().is_err());
        let p = StefanProblem::exact_class(PhysicalParameters::reference());
        assert!(EquivalenceParams::scaling(-1.0, 1.0).apply_to_problem(&p).is_err());
    }

    #[test]
    fn flux_normalization_gives_unit_flux() {
        let mut p = StefanProblem::exact_class(PhysicalParameters::reference());
        p.params.q = -3.0;
        p.flux = FluxLaw::Constant { q: -3.0 };
        let t = EquivalenceParams::flux_normalization(&p.flux).unwrap().apply_to_problem(&p).unwrap();
        assert!((t.params.q + 1.0).abs() < 1e-15);
        assert_eq!(t.d1, p.d1);

        p.flux = FluxLaw::InverseSqrt { q: -3.0, t0: 0.5 };
        let e = EquivalenceParams::flux_normalization(&p.flux).unwrap();
        let t = e.apply_to_problem(&p).unwrap();
        assert!((t.flux.q() + 1.0).abs() < 1e-15);
        // Q̃(t̃) = βQ(t)
        let tt = 2.0;
        let lhs = t.flux.value(e.alpha * tt).unwrap();
        assert!((lhs - e.beta * p.flux.value(tt).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn round_trip_restores_problem() {
        let mut p = StefanProblem::exact_class(PhysicalParameters::reference());
        p.d1 = Diffusivity::power_law(0.7, -0.5);
        let e = EquivalenceParams {
            alpha: 2.5,
            beta: 0.4,
            beta1: 1.0,
            gamma0: 0.3,
            gamma4: -1.0,
            gamma5: 0.6,
            delta1: -1.7,
            delta2: 3.0,
            ..EquivalenceParams::identity()
        };
        let back = e.inverse().unwrap().apply_to_problem(&e.apply_to_problem(&p).unwrap()).unwrap();
        let (a, b) = (back.params, p.params);
        for (x, y) in [(a.u_v, b.u_v), (a.u_m, b.u_m), (a.v_m, b.v_m), (a.v_inf, b.v_inf), (a.h_v, b.h_v), (a.q, b.q), (a.r, b.r)] {
            assert!((x - y).abs() <= 1e-14 * y.abs().max(1.0));
        }
        let i = a.interface.unwrap();
        let i0 = p.interface().unwrap();
        assert!((i.d1_m - i0.d1_m).abs() < 1e-14 && (i.d2_m - i0.d2_m).abs() < 1e-14);
        for s in [0.8, 1.3, 2.0] {
            assert!((back.d1.eval(s).unwrap() - p.d1.eval(s).unwrap()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn composition_matches_sequential_application(
            e1 in arb_params(), e2 in arb_params(), p in prop::array::uniform4(-3.0f64..3.0), u in -2.0f64..2.0,
        ) {
            let p = Point4::from_array(p);
            let c = e2.compose(&e1);
            prop_assert!(close(&c.apply_point(&p), &e2.apply_point(&e1.apply_point(&p)), 1e-13));
            prop_assert!((c.apply_liquid(u) - e2.apply_liquid(e1.apply_liquid(u))).abs() < 1e-12);
            prop_assert!((c.apply_solid(u) - e2.apply_solid(e1.apply_solid(u))).abs() < 1e-12);
        }

        #[test]
        fn inverse_undoes(e in arb_params(), p in prop::array::uniform4(-3.0f64..3.0)) {
            let p = Point4::from_array(p);
            let inv = e.inverse().unwrap();
            prop_assert!(close(&inv.apply_point(&e.apply_point(&p)), &p, 1e-13));
            let id = inv.compose(&e);
            prop_assert!(close(&id.apply_point(&p), &p, 1e-13));
        }

        #[test]
        fn problem_transform_composes(e1 in arb_params(), e2 in arb_params()) {
            let p = StefanProblem::exact_class(PhysicalParameters::reference());
            let (e1, e2) = (EquivalenceParams { alpha: e1.alpha.abs(), ..e1 }, EquivalenceParams { alpha: e2.alpha.abs(), ..e2 });
            let seq = e2.apply_to_problem(&e1.apply_to_problem(&p).unwrap()).unwrap();
            let direct = e2.compose(&e1).apply_to_problem(&p).unwrap();
            let (a, b) = (seq.params, direct.params);
            for (x, y) in [(a.u_v, b.u_v), (a.u_m, b.u_m), (a.v_m, b.v_m), (a.v_inf, b.v_inf), (a.h_v, b.h_v), (a.h_m, b.h_m), (a.q, b.q), (a.r, b.r)] {
                prop_assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0));
            }
            let (ia, ib) = (seq.interface().unwrap(), direct.interface().unwrap());
            prop_assert!((ia.d1_v - ib.d1_v).abs() <= 1e-13 * ib.d1_v.abs());
            prop_assert!((ia.d2_m - ib.d2_m).abs() <= 1e-13 * ib.d2_m.abs());
            for x in [b.u_v, b.u_m, 0.5 * (b.u_v + b.u_m)] {
                let (da, db) = (seq.d1.eval(x).unwrap(), direct.d1.eval(x).unwrap());
                prop_assert!((da - db).abs() <= 1e-12 * db.abs());
            }
        }
    }
}
