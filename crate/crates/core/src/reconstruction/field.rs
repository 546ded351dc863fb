use serde::Serialize;

use super::{omega_of_point, Boundary, FreeSurface, Phase, Point4};
use crate::error::{Error, Result};
use crate::exact::SimilaritySolution;
use crate::params::PhysicalParameters;
use crate::reduced::{ProfilePoint, ReducedProfiles};

/// A candidate solution of the three-phase problem: two level functions and
/// the temperature branches of the condensed phases.
///
/// `liquid` and `solid` may be evaluated slightly outside their own phase
/// (one-sided stencils never do, but callers may), so phase membership is
/// decided by the level functions alone.
pub trait StefanField: Sync {
    fn level(&self, boundary: Boundary, p: &Point4) -> f64;

    /// `(∂S/∂t, ∂S/∂x₁, ∂S/∂x₂, ∂S/∂x₃)`.
    fn level_gradient(&self, boundary: Boundary, p: &Point4) -> [f64; 4];

    fn liquid(&self, p: &Point4) -> Result<f64>;

    fn solid(&self, p: &Point4) -> Result<f64>;

    fn phase(&self, p: &Point4) -> Phase {
        if self.level(Boundary::Evaporation, p) < 0.0 {
            Phase::Gas
        } else if self.level(Boundary::Melting, p) <= 0.0 {
            Phase::Liquid
        } else {
            Phase::Solid
        }
    }

    /// Temperature of the phase containing `p`; `None` in the gas.
    fn temperature(&self, p: &Point4) -> Result<Option<f64>> {
        match self.phase(p) {
            Phase::Gas => Ok(None),
            Phase::Liquid => self.liquid(p).map(Some),
            Phase::Solid => self.solid(p).map(Some),
        }
    }
}

/// Phase and temperature at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub phase: Phase,
    pub temperature: Option<f64>,
}

/// Phase classification and temperature of `field` at `p`; requires `t > 0`.
pub fn evaluate<F: StefanField + ?Sized>(field: &F, p: &Point4) -> Result<Evaluation> {
    if !(p.t > 0.0) {
        return Err(Error::Domain(format!("evaluation needs t > 0, got {}", p.t)));
    }
    Ok(Evaluation {
        phase: field.phase(p),
        temperature: field.temperature(p)?,
    })
}

/// Piecewise cubic Hermite interpolation of stored profile nodes.
#[derive(Debug, Clone)]
pub struct ProfileInterpolant {
    liquid: Vec<ProfilePoint>,
    solid: Vec<ProfilePoint>,
}

impl ProfileInterpolant {
    pub fn new(profiles: &ReducedProfiles) -> Self {
        Self {
            liquid: profiles.liquid.clone(),
            solid: profiles.solid.clone(),
        }
    }

    pub fn liquid(&self, omega: f64) -> Result<f64> {
        hermite(&self.liquid, omega)
    }

    pub fn solid(&self, omega: f64) -> Result<f64> {
        hermite(&self.solid, omega)
    }
}

fn hermite(nodes: &[ProfilePoint], x: f64) -> Result<f64> {
    let (first, last) = (nodes[0].omega, nodes[nodes.len() - 1].omega);
    if !(x >= first && x <= last) {
        return Err(Error::Domain(format!("omega = {x} is outside the stored profile [{first}, {last}]")));
    }
    let k = nodes.partition_point(|n| n.omega <= x).clamp(1, nodes.len() - 1) - 1;
    let (a, b) = (nodes[k], nodes[k + 1]);
    let h = b.omega - a.omega;
    let t = (x - a.omega) / h;
    let (t2, t3) = (t * t, t * t * t);
    Ok((2.0 * t3 - 3.0 * t2 + 1.0) * a.value
        + (t3 - 2.0 * t2 + t) * h * a.slope
        + (-2.0 * t3 + 3.0 * t2) * b.value
        + (t3 - t2) * h * b.slope)
}

#[derive(Debug, Clone)]
enum Source {
    Exact(SimilaritySolution),
    Profiles(ProfileInterpolant),
}

/// Traveling-wave field built from a reduced solution.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    source: Source,
    params: PhysicalParameters,
    s1: FreeSurface,
    s2: FreeSurface,
}

impl FieldEvaluator {
    pub fn exact(sol: SimilaritySolution) -> Self {
        let (w1, w2, mu) = (sol.omega1(), sol.omega2(), sol.mu());
        Self {
            params: *sol.params(),
            source: Source::Exact(sol),
            s1: FreeSurface {
                boundary: Boundary::Evaporation,
                omega_k: w1,
                mu,
            },
            s2: FreeSurface {
                boundary: Boundary::Melting,
                omega_k: w2,
                mu,
            },
        }
    }

    pub fn from_profiles(profiles: &ReducedProfiles) -> Result<Self> {
        let mu = profiles.mu;
        Ok(Self {
            params: profiles.params,
            source: Source::Profiles(ProfileInterpolant::new(profiles)),
            s1: FreeSurface::new(Boundary::Evaporation, profiles.params.r, mu)?,
            s2: FreeSurface::new(Boundary::Melting, profiles.omega2, mu)?,
        })
    }

    /// The same profiles carried at another front speed; its residuals
    /// measure sensitivity to `μ`.
    pub fn with_front_speed(&self, mu: f64) -> Result<Self> {
        let mut f = self.clone();
        f.s1 = FreeSurface::new(Boundary::Evaporation, self.omega1(), mu)?;
        f.s2 = FreeSurface::new(Boundary::Melting, self.omega2(), mu)?;
        Ok(f)
    }

    pub fn params(&self) -> &PhysicalParameters {
        &self.params
    }

    pub fn mu(&self) -> f64 {
        self.s1.mu
    }

    pub fn omega1(&self) -> f64 {
        self.s1.omega_k
    }

    pub fn omega2(&self) -> f64 {
        self.s2.omega_k
    }

    pub fn surface(&self, boundary: Boundary) -> &FreeSurface {
        match boundary {
            Boundary::Evaporation => &self.s1,
            Boundary::Melting => &self.s2,
        }
    }

    pub fn omega(&self, p: &Point4) -> f64 {
        omega_of_point(p, self.mu())
    }

    pub fn u_at_omega(&self, omega: f64) -> Result<f64> {
        match &self.source {
            Source::Exact(sol) => sol.u_of_omega(omega),
            Source::Profiles(prof) => prof.liquid(omega),
        }
    }

    pub fn v_at_omega(&self, omega: f64) -> Result<f64> {
        match &self.source {
            Source::Exact(sol) => sol.v_of_omega(omega),
            Source::Profiles(prof) => prof.solid(omega),
        }
    }

    fn check_time(p: &Point4) -> Result<()> {
        if p.t > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("the process stage needs t > 0, got {}", p.t)))
        }
    }
}

impl StefanField for FieldEvaluator {
    fn level(&self, boundary: Boundary, p: &Point4) -> f64 {
        self.surface(boundary).level(p)
    }

    fn level_gradient(&self, boundary: Boundary, p: &Point4) -> [f64; 4] {
        self.surface(boundary).level_gradient(p)
    }

    fn liquid(&self, p: &Point4) -> Result<f64> {
        Self::check_time(p)?;
        self.u_at_omega(self.omega(p))
    }

    fn solid(&self, p: &Point4) -> Result<f64> {
        Self::check_time(p)?;
        self.v_at_omega(self.omega(p))
    }
}
