use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Boundary, FieldEvaluator, FreeSurface, Phase, Point4};
use crate::error::{Error, Result};

/// Deterministic sample points for a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSamples {
    pub liquid: Vec<Point4>,
    pub solid: Vec<Point4>,
    pub evaporation: Vec<Point4>,
    pub melting: Vec<Point4>,
}

impl VerificationSamples {
    /// `n_interior` points per phase at least `margin` (in `ω`) from both
    /// surfaces and `n_surface` points per surface, all with `t ∈ [1, 2]`.
    pub fn generate(
        field: &FieldEvaluator,
        n_interior: usize,
        n_surface: usize,
        margin: f64,
        seed: u64,
    ) -> Result<Self> {
        Ok(Self {
            liquid: interior_samples(field, Phase::Liquid, n_interior, margin, seed)?,
            solid: interior_samples(field, Phase::Solid, n_interior, margin, seed.wrapping_add(1))?,
            evaporation: surface_samples(field.surface(Boundary::Evaporation), n_surface, seed.wrapping_add(2)),
            melting: surface_samples(field.surface(Boundary::Melting), n_surface, seed.wrapping_add(3)),
        })
    }

    /// Applies a point map to every sample.
    pub fn map<M: Fn(&Point4) -> Point4>(&self, m: M) -> Self {
        let f = |v: &[Point4]| v.iter().map(&m).collect();
        Self {
            liquid: f(&self.liquid),
            solid: f(&self.solid),
            evaporation: f(&self.evaporation),
            melting: f(&self.melting),
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Point4> {
        self.liquid
            .iter()
            .chain(&self.solid)
            .chain(&self.evaporation)
            .chain(&self.melting)
    }
}

fn point_at(mu: f64, t: f64, omega: f64, r: f64, theta: f64) -> Point4 {
    let z = 0.5 * omega - r * r / (2.0 * omega);
    Point4::new(t, r * theta.cos(), r * theta.sin(), mu * t + z)
}

/// Random points inside a condensed phase. Liquid levels are drawn from
/// `[ω₁ + margin, ω₂ − margin]`, solid levels from `[ω₂ + margin, 3ω₂]`;
/// radii from `[0, ω₂]`.
pub fn interior_samples(
    field: &FieldEvaluator,
    phase: Phase,
    n: usize,
    margin: f64,
    seed: u64,
) -> Result<Vec<Point4>> {
    let (w1, w2) = (field.omega1(), field.omega2());
    let (lo, hi) = match phase {
        Phase::Liquid => (w1 + margin, w2 - margin),
        Phase::Solid => (w2 + margin, 3.0 * w2),
        Phase::Gas => {
            return Err(Error::InvalidParameter("the gas phase carries no temperature".into()));
        }
    };
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "margin {margin} leaves no room inside the {phase:?} phase"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let omega = rng.gen_range(lo..hi);
            let r = rng.gen_range(0.0..w2);
            let theta = rng.gen_range(0.0..TAU);
            let t = rng.gen_range(1.0..2.0);
            point_at(field.mu(), t, omega, r, theta)
        })
        .collect())
}

/// Random points of a surface with `t ∈ [1, 2]` and `r ∈ [0, 1.5 ω_k]`.
pub fn surface_samples(surface: &FreeSurface, n: usize, seed: u64) -> Vec<Point4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(0.0..1.5 * surface.omega_k);
            let theta = rng.gen_range(0.0..TAU);
            let t = rng.gen_range(1.0..2.0);
            surface.surface_point_at(t, r, theta)
        })
        .collect()
}
