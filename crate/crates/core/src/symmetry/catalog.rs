use std::f64::consts::PI;

use serde::Serialize;

use super::field::{commutator, decompose, rank, AffineVectorField, Generator};
use crate::error::{Error, Result};

/// Relative tolerance of the rank and span tests.
pub const SPAN_TOL: f64 = 1e-12;

/// Coefficient slot of a catalog term, with `K = P₃cosφ + P_t sinφ` and
/// `L = P₃sinφ − P_t cosφ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    One,
    AlphaCos,
    AlphaSin,
    BetaCos,
    BetaSin,
    Sin,
    NegCos,
    Cos,
}

impl Slot {
    fn value(self, p: &SubalgebraParams) -> f64 {
        let (s, c) = p.phi.sin_cos();
        match self {
            Slot::One => 1.0,
            Slot::AlphaCos => p.alpha * c,
            Slot::AlphaSin => p.alpha * s,
            Slot::BetaCos => p.beta * c,
            Slot::BetaSin => p.beta * s,
            Slot::Sin => s,
            Slot::NegCos => -c,
            Slot::Cos => c,
        }
    }
}

type Term = (Generator, Slot);

use Generator::{Pt, J12, P1, P2, P3};

const K: [Term; 2] = [(P3, Slot::Cos), (Pt, Slot::Sin)];
const L: [Term; 2] = [(P3, Slot::Sin), (Pt, Slot::NegCos)];
const P1_ALPHA_K: [Term; 3] = [(P1, Slot::One), (P3, Slot::AlphaCos), (Pt, Slot::AlphaSin)];
const J12_BETA_K: [Term; 3] = [(J12, Slot::One), (P3, Slot::BetaCos), (Pt, Slot::BetaSin)];

struct Family {
    label: &'static str,
    basis: &'static [&'static [Term]],
}

const DIM1: &[Family] = &[
    Family {
        label: "<P3 cos phi + P_t sin phi>",
        basis: &[&K],
    },
    Family {
        label: "<P1 + alpha (P3 cos phi + P_t sin phi)>",
        basis: &[&P1_ALPHA_K],
    },
    Family {
        label: "<J12 + beta (P3 cos phi + P_t sin phi)>",
        basis: &[&J12_BETA_K],
    },
];

const DIM2: &[Family] = &[
    Family {
        label: "<P3, P_t>",
        basis: &[&[(P3, Slot::One)], &[(Pt, Slot::One)]],
    },
    Family {
        label: "<P1 + alpha (P3 cos phi + P_t sin phi), P2>",
        basis: &[&P1_ALPHA_K, &[(P2, Slot::One)]],
    },
    Family {
        label: "<P1 + alpha (P3 cos phi + P_t sin phi), P3 sin phi - P_t cos phi>",
        basis: &[&P1_ALPHA_K, &L],
    },
    Family {
        label: "<J12 + beta (P3 cos phi + P_t sin phi), P3 sin phi - P_t cos phi>",
        basis: &[&J12_BETA_K, &L],
    },
];

const DIM3: &[Family] = &[
    Family {
        label: "<P1, P3, P_t>",
        basis: &[&[(P1, Slot::One)], &[(P3, Slot::One)], &[(Pt, Slot::One)]],
    },
    Family {
        label: "<J12, P3, P_t>",
        basis: &[&[(J12, Slot::One)], &[(P3, Slot::One)], &[(Pt, Slot::One)]],
    },
    Family {
        label: "<P1 + alpha (P3 cos phi + P_t sin phi), P2, P3 sin phi - P_t cos phi>",
        basis: &[&P1_ALPHA_K, &[(P2, Slot::One)], &L],
    },
    Family {
        label: "<J12 + beta (P3 cos phi + P_t sin phi), P1, P2>",
        basis: &[&J12_BETA_K, &[(P1, Slot::One)], &[(P2, Slot::One)]],
    },
];

const DIM4: &[Family] = &[
    Family {
        label: "<P1, P2, P3, P_t>",
        basis: &[&[(P1, Slot::One)], &[(P2, Slot::One)], &[(P3, Slot::One)], &[(Pt, Slot::One)]],
    },
    Family {
        label: "<J12 + beta (P3 cos phi + P_t sin phi), P1, P2, P3 sin phi - P_t cos phi>",
        basis: &[&J12_BETA_K, &[(P1, Slot::One)], &[(P2, Slot::One)], &L],
    },
];

const DIM5: &[Family] = &[Family {
    label: "<J12, P1, P2, P3, P_t>",
    basis: &[&[(J12, Slot::One)], &[(P1, Slot::One)], &[(P2, Slot::One)], &[(P3, Slot::One)], &[(Pt, Slot::One)]],
}];

const EXAMPLE: Family = Family {
    label: "<J12, P3 sin phi - P_t cos phi>",
    basis: &[&[(J12, Slot::One)], &L],
};

/// Values of the family parameters; `alpha ≥ 0`, `0 ≤ phi < π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubalgebraParams {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
}

impl SubalgebraParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {}", self.beta)));
        }
        if !(self.phi >= 0.0 && self.phi < PI) {
            return Err(Error::InvalidParameter(format!("phi must lie in [0, pi), got {}", self.phi)));
        }
        Ok(())
    }
}

/// One instantiated subalgebra of the optimal system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubalgebraSpec {
    pub dimension: usize,
    pub label: String,
    pub basis: Vec<AffineVectorField>,
    pub parameters: SubalgebraParams,
}

impl SubalgebraSpec {
    fn instantiate(family: &Family, params: SubalgebraParams) -> Self {
        let basis = family
            .basis
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .fold(AffineVectorField::ZERO, |acc, (g, slot)| acc.add_scaled(slot.value(&params), &g.field()))
            })
            .collect::<Vec<_>>();
        Self {
            dimension: basis.len(),
            label: family.label.to_string(),
            basis,
            parameters: params,
        }
    }

    pub fn is_independent(&self) -> bool {
        rank(&self.basis, SPAN_TOL) == self.basis.len()
    }

    /// Brackets `[eᵢ, eⱼ]` (`i < j`) that leave the span of the basis.
    pub fn closure_failures(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.basis.len() {
            for j in i + 1..self.basis.len() {
                let c = commutator(&self.basis[i], &self.basis[j]);
                if !c.is_zero() && decompose(&c, &self.basis, SPAN_TOL).is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Independence and closure under the bracket.
    pub fn verify(&self) -> Result<()> {
        if !self.is_independent() {
            return Err(Error::InvalidParameter(format!("basis of {} is linearly dependent", self.label)));
        }
        if let Some((i, j)) = self.closure_failures().first() {
            return Err(Error::InvalidParameter(format!(
                "{} is not closed: [e{i}, e{j}] leaves the span",
                self.label
            )));
        }
        Ok(())
    }
}

/// Every optimal-system subalgebra of dimension `s` at the given family
/// parameters, each verified independent and closed.
pub fn optimal_subalgebras(s: usize, alpha: f64, beta: f64, phi: f64) -> Result<Vec<SubalgebraSpec>> {
    let params = SubalgebraParams { alpha, beta, phi };
    params.validate()?;
    let families = match s {
        1 => DIM1,
        2 => DIM2,
        3 => DIM3,
        4 => DIM4,
        5 => DIM5,
        _ => return Err(Error::InvalidParameter(format!("subalgebra dimension must be 1..=5, got {s}"))),
    };
    families
        .iter()
        .map(|f| {
            let spec = SubalgebraSpec::instantiate(f, params);
            spec.verify()?;
            Ok(spec)
        })
        .collect()
}

/// The two-dimensional algebra `⟨J₁₂, P₃sinφ − P_t cosφ⟩` behind the
/// axisymmetric traveling-frame ansatz; kept apart from the catalog.
pub fn reduction_algebra(phi: f64) -> Result<SubalgebraSpec> {
    let params = SubalgebraParams { alpha: 0.0, beta: 0.0, phi };
    params.validate()?;
    let spec = SubalgebraSpec::instantiate(&EXAMPLE, params);
    spec.verify()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_sizes() {
        let sizes: Vec<usize> = (1..=5).map(|s| optimal_subalgebras(s, 0.5, -1.0, 0.3).unwrap().len()).collect();
        assert_eq!(sizes, vec![3, 4, 4, 2, 1]);
        for s in 1..=5 {
            assert!(optimal_subalgebras(s, 0.5, -1.0, 0.3).unwrap().iter().all(|a| a.dimension == s));
        }
    }

    #[test]
    fn top_algebra() {
        let a = optimal_subalgebras(5, 0.0, 0.0, 0.0).unwrap();
        let expected: Vec<_> = [J12, P1, P2, P3, Pt].iter().map(|g| g.field()).collect();
        assert_eq!(a[0].basis, expected);
    }

    #[test]
    fn phi_zero_gives_p3() {
        let a = optimal_subalgebras(1, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(a[0].basis, vec![P3.field()]);
    }

    #[test]
    fn invalid_arguments() {
        assert!(optimal_subalgebras(0, 0.0, 0.0, 0.0).is_err());
        assert!(optimal_subalgebras(6, 0.0, 0.0, 0.0).is_err());
        assert!(optimal_subalgebras(1, -0.1, 0.0, 0.0).is_err());
        assert!(optimal_subalgebras(1, 0.0, 0.0, PI).is_err());
        assert!(optimal_subalgebras(1, 0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn reduction_algebra_is_abelian() {
        let a = reduction_algebra(1.0).unwrap();
        assert!(commutator(&a.basis[0], &a.basis[1]).is_zero());
    }

    #[test]
    fn non_closed_set_is_detected() {
        let spec = SubalgebraSpec {
            dimension: 2,
            label: "<J12, P1>".into(),
            basis: vec![J12.field(), P1.field()],
            parameters: SubalgebraParams { alpha: 0.0, beta: 0.0, phi: 0.0 },
        };
        assert_eq!(spec.closure_failures(), vec![(0, 1)]);
        assert!(spec.verify().is_err());
    }

    proptest! {
        #[test]
        fn every_family_is_closed(s in 1usize..=5, alpha in 0.0f64..10.0, beta in -10.0f64..10.0, phi in 0.0f64..3.14159) {
            for spec in optimal_subalgebras(s, alpha, beta, phi).unwrap() {
                prop_assert!(spec.closure_failures().is_empty());
                prop_assert!(spec.is_independent());
            }
        }
    }
}
