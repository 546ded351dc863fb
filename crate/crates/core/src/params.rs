//! Material and boundary constants of the two-interface melting/evaporation
//! problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diffusivities that appear in the interface balances, `d₁(u_v)`, `d₁(u_m)`
/// and `d₂(v_m)`.
///
/// They are carried separately from the bulk diffusivity functions because
/// the equivalence group rescales them independently of `d₁`, `d₂`. A
/// temperature reflection flips their sign, so only nonzero values are
/// required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceDiffusivities {
    pub d1_v: f64,
    pub d1_m: f64,
    pub d2_m: f64,
}

impl InterfaceDiffusivities {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d1_v", self.d1_v), ("d1_m", self.d1_m), ("d2_m", self.d2_m)] {
            if !(v != 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "interface diffusivity {name} must be finite and nonzero, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Constants of the boundary-value problem.
///
/// `h_v` and `h_m` multiply the normal interface velocity in the
/// evaporation and melting balances, `q` is the signed heat flux along
/// `x₃` and `r` is the radius of the irradiated spot (the first similarity
/// level `ω₁ = R`). `interface` overrides the interface diffusivities; when
/// absent they are the bulk diffusivities evaluated at the interface
/// temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParameters {
    pub u_v: f64,
    pub u_m: f64,
    pub v_m: f64,
    pub v_inf: f64,
    pub h_v: f64,
    pub h_m: f64,
    pub q: f64,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<InterfaceDiffusivities>,
}

impl PhysicalParameters {
    /// Reference set used throughout the tests and the default CLI config.
    pub const fn reference() -> Self {
        Self {
            u_v: 1.0,
            u_m: 2.0,
            v_m: 1.0,
            v_inf: 0.2,
            h_v: 1.0,
            h_m: 0.5,
            q: -1.0,
            r: 1.0,
            interface: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("u_v", self.u_v),
            ("u_m", self.u_m),
            ("v_m", self.v_m),
            ("v_inf", self.v_inf),
            ("h_v", self.h_v),
            ("h_m", self.h_m),
            ("q", self.q),
            ("r", self.r),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.u_v == self.u_m {
            return Err(Error::InvalidParameter(
                "u_v and u_m must differ".into(),
            ));
        }
        if self.v_m == self.v_inf {
            return Err(Error::InvalidParameter(
                "v_m and v_inf must differ".into(),
            ));
        }
        if self.q == 0.0 {
            return Err(Error::InvalidParameter("heat flux q must be nonzero".into()));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spot radius r must be positive, got {}",
                self.r
            )));
        }
        if let Some(iface) = &self.interface {
            iface.validate()?;
        }
        Ok(())
    }
}

/// Orientation convention for the melting-interface energy balance.
///
/// With `PhaseOutward` each temperature gradient is taken along the outward
/// normal of its own phase (solid: towards decreasing `ω`, liquid and front
/// velocity: towards increasing `ω`), which reduces to
/// `-2 d₂ₘ v' = 2 d₁ₘ u' + μ H_m`. `CommonNormal` uses one normal for every
/// term, `2 d₂ₘ v' = 2 d₁ₘ u' + μ H_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeltingBalance {
    #[default]
    PhaseOutward,
    CommonNormal,
}

impl MeltingBalance {
    /// Sign applied to the solid-side gradient term.
    pub fn solid_sign(self) -> f64 {
        match self {
            MeltingBalance::PhaseOutward => -1.0,
            MeltingBalance::CommonNormal => 1.0,
        }
    }

    /// Residual of the reduced balance at `ω₂` given both one-sided slopes.
    pub fn residual(self, d1_m: f64, du: f64, d2_m: f64, dv: f64, mu: f64, h_m: f64) -> f64 {
        self.solid_sign() * 2.0 * d2_m * dv - (2.0 * d1_m * du + mu * h_m)
    }

    /// Solid-side slope `dv/dω` at `ω₂` that satisfies the balance.
    pub fn solid_slope(self, d1_m: f64, du: f64, d2_m: f64, mu: f64, h_m: f64) -> f64 {
        self.solid_sign() * (2.0 * d1_m * du + mu * h_m) / (2.0 * d2_m)
    }
}
