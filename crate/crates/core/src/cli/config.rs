use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exact::ScanGrid;
use crate::params::{MeltingBalance, PhysicalParameters};
use crate::problem::{FluxLaw, StefanProblem};
use crate::reduced::Diffusivity;

use super::CliError;

/// Time dependence of the flux; the amplitude is `params.q`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxConfig {
    #[default]
    Constant,
    InverseSqrt {
        #[serde(default)]
        t0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Starting point `[ω₂, μ]`; without one the solvers scan `scan` first.
    pub guess: Option<[f64; 2]>,
    pub scan: ScanGrid,
    /// Newton tolerance on the exact transcendental system.
    pub exact_tol: f64,
    /// Newton tolerance on the shooting mismatches.
    pub bvp_tol: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            guess: Some([4.0, 0.1]),
            scan: ScanGrid::default(),
            exact_tol: 1e-12,
            bvp_tol: 1e-9,
            ode_rtol: 1e-10,
            ode_atol: 1e-10,
        }
    }
}

/// Thresholds each check is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub transcendental: f64,
    pub ode_solid: f64,
    pub ode_liquid: f64,
    pub ode_interface: f64,
    pub min_order: f64,
    pub cross_check_params: f64,
    pub cross_check_profiles: f64,
    pub flux_balance: f64,
    pub dirichlet: f64,
    pub far_field: f64,
    pub surface_level: f64,
    pub group_law: f64,
    pub round_trip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            transcendental: 1e-10,
            ode_solid: 1e-8,
            ode_liquid: 1e-6,
            ode_interface: 1e-8,
            min_order: 1.9,
            cross_check_params: 1e-6,
            cross_check_profiles: 1e-4,
            flux_balance: 1e-5,
            dirichlet: 1e-8,
            far_field: 1e-12,
            surface_level: 1e-12,
            group_law: 1e-13,
            round_trip: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub n_liquid: usize,
    pub n_solid: usize,
    /// The solid table spans `[ω₂, solid_extent/μ]`.
    pub solid_extent: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            n_liquid: 101,
            n_solid: 101,
            solid_extent: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_interior: usize,
    pub n_surface: usize,
    pub seed: u64,
    /// Far-field sphere radius in units of `2/μ`, i.e. the value of `μω/2`.
    pub far_field_level: f64,
    pub far_field_points: usize,
    pub far_field_time: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_interior: 50,
            n_surface: 20,
            seed: 11,
            far_field_level: 40.0,
            far_field_points: 200,
            far_field_time: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub times: Vec<f64>,
    /// Largest radius; defaults to `2ω₂`.
    pub r_max: Option<f64>,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            times: vec![1.0, 2.0],
            r_max: None,
            n_r: 41,
            n_theta: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetryConfig {
    /// Random parameter draws per catalog dimension and per property check.
    pub draws: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub n_interior: usize,
    pub n_surface: usize,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self {
            draws: 20,
            seed: 7,
            epsilon: 0.7,
            n_interior: 10,
            n_surface: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Everything a run needs. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParameters,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    pub flux: FluxConfig,
    pub balance: MeltingBalance,
    pub solver: SolverConfig,
    pub tolerances: Tolerances,
    pub profile: ProfileConfig,
    pub verify: VerifyConfig,
    pub surfaces: SurfaceConfig,
    pub symmetry: SymmetryConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParameters::reference(),
            d1: Diffusivity::inverse(),
            d2: Diffusivity::constant(1.0),
            flux: FluxConfig::default(),
            balance: MeltingBalance::default(),
            solver: SolverConfig::default(),
            tolerances: Tolerances::default(),
            profile: ProfileConfig::default(),
            verify: VerifyConfig::default(),
            surfaces: SurfaceConfig::default(),
            symmetry: SymmetryConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be at least {min}, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.problem().validate()?;
        let s = &self.solver;
        if let Some([w, m]) = s.guess {
            if !(w > self.params.r && m > 0.0) {
                return Err(CliError::Config(format!("guess [{w}, {m}] needs omega2 > R and mu > 0")));
            }
        }
        for (name, v) in [
            ("solver.exact_tol", s.exact_tol),
            ("solver.bvp_tol", s.bvp_tol),
            ("solver.ode_rtol", s.ode_rtol),
            ("solver.ode_atol", s.ode_atol),
            ("solver.scan.mu_min", s.scan.mu_min),
            ("solver.scan.mu_max", s.scan.mu_max),
            ("profile.solid_extent", self.profile.solid_extent),
            ("verify.far_field_level", self.verify.far_field_level),
            ("verify.far_field_time", self.verify.far_field_time),
            ("symmetry.epsilon", self.symmetry.epsilon.abs()),
        ] {
            positive(name, v)?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.transcendental", t.transcendental),
            ("tolerances.ode_solid", t.ode_solid),
            ("tolerances.ode_liquid", t.ode_liquid),
            ("tolerances.ode_interface", t.ode_interface),
            ("tolerances.min_order", t.min_order),
            ("tolerances.cross_check_params", t.cross_check_params),
            ("tolerances.cross_check_profiles", t.cross_check_profiles),
            ("tolerances.flux_balance", t.flux_balance),
            ("tolerances.dirichlet", t.dirichlet),
            ("tolerances.far_field", t.far_field),
            ("tolerances.surface_level", t.surface_level),
            ("tolerances.group_law", t.group_law),
            ("tolerances.round_trip", t.round_trip),
        ] {
            positive(name, v)?;
        }
        at_least("profile.n_liquid", self.profile.n_liquid, 2)?;
        at_least("profile.n_solid", self.profile.n_solid, 2)?;
        at_least("verify.n_interior", self.verify.n_interior, 1)?;
        at_least("verify.n_surface", self.verify.n_surface, 1)?;
        at_least("verify.far_field_points", self.verify.far_field_points, 1)?;
        at_least("surfaces.n_r", self.surfaces.n_r, 2)?;
        at_least("surfaces.n_theta", self.surfaces.n_theta, 1)?;
        at_least("symmetry.draws", self.symmetry.draws, 1)?;
        at_least("symmetry.n_interior", self.symmetry.n_interior, 1)?;
        at_least("symmetry.n_surface", self.symmetry.n_surface, 1)?;
        if self.surfaces.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(CliError::Config("surfaces.times must be positive".into()));
        }
        if let Some(r) = self.surfaces.r_max {
            positive("surfaces.r_max", r)?;
        }
        Ok(())
    }

    pub fn flux_law(&self) -> FluxLaw {
        match self.flux {
            FluxConfig::Constant => FluxLaw::Constant { q: self.params.q },
            FluxConfig::InverseSqrt { t0 } => FluxLaw::InverseSqrt { q: self.params.q, t0 },
        }
    }

    pub fn problem(&self) -> StefanProblem {
        StefanProblem {
            params: self.params,
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            flux: self.flux_law(),
            balance: self.balance,
        }
    }

    /// True for `d₁ = 1/u`, `d₂ = 1`.
    pub fn is_exact_class(&self) -> bool {
        self.d1 == Diffusivity::inverse() && self.d2 == Diffusivity::constant(1.0)
    }

    /// SHA-256 of the canonical JSON form, ignoring the output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        sha256_json(&c)
    }

    /// SHA-256 of the parts that determine the solution: constants,
    /// diffusivities, flux, balance convention and solver settings.
    pub fn problem_hash(&self) -> String {
        sha256_json(&(&self.params, &self.d1, &self.d2, &self.flux, &self.balance, &self.solver))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_reference_config() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        assert!(c.is_exact_class());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"solver": {"gues": [4, 0.1]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"paramz": {}}"#).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.verify.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.problem_hash(), b.problem_hash());
        b.params.h_m *= 2.0;
        assert_ne!(a.problem_hash(), b.problem_hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = RunConfig::default();
        c.params.q = 0.0;
        assert!(matches!(c.validate(), Err(CliError::Model(_))));
        let mut c = RunConfig::default();
        c.tolerances.flux_balance = -1.0;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = RunConfig::default();
        c.solver.guess = Some([0.5, 0.1]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
