//! A complete boundary-value problem: constants, bulk diffusivities and the
//! irradiating flux law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{InterfaceDiffusivities, MeltingBalance, PhysicalParameters};
use crate::reduced::{resolve_interface, Diffusivity};

/// Time dependence of the heat flux `Q(t)` along `x₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxLaw {
    /// `Q = q`.
    Constant { q: f64 },
    /// `Q = q/√(t − t0)`, defined for `t > t0`.
    InverseSqrt {
        q: f64,
        #[serde(default)]
        t0: f64,
    },
}

impl FluxLaw {
    pub fn q(&self) -> f64 {
        match *self {
            FluxLaw::Constant { q } | FluxLaw::InverseSqrt { q, .. } => q,
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match *self {
            FluxLaw::Constant { q } => Ok(q),
            FluxLaw::InverseSqrt { q, t0 } => {
                if !(t > t0) {
                    return Err(Error::Domain(format!("Q = q/sqrt(t - t0) needs t > t0 = {t0}, got {t}")));
                }
                Ok(q / (t - t0).sqrt())
            }
        }
    }
}

/// Constants, bulk diffusivities and flux law of one problem of the class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StefanProblem {
    pub params: PhysicalParameters,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    pub flux: FluxLaw,
    #[serde(default)]
    pub balance: MeltingBalance,
}

impl StefanProblem {
    /// The exactly solvable class `d₁ = 1/u`, `d₂ = 1`, `Q = q`.
    pub fn exact_class(params: PhysicalParameters) -> Self {
        Self {
            params,
            d1: Diffusivity::inverse(),
            d2: Diffusivity::constant(1.0),
            flux: FluxLaw::Constant { q: params.q },
            balance: MeltingBalance::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.d1.validate()?;
        self.d2.validate()?;
        if self.flux.q() != self.params.q {
            return Err(Error::InvalidParameter(format!(
                "flux law q = {} disagrees with params.q = {}",
                self.flux.q(),
                self.params.q
            )));
        }
        Ok(())
    }

    pub fn interface(&self) -> Result<InterfaceDiffusivities> {
        resolve_interface(&self.params, &self.d1, &self.d2)
    }
}
