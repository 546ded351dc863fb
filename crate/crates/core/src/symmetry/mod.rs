//! Point symmetries and equivalence transformations of the problem class.
//!
//! Generators are affine vector fields on `(t, x₁, x₂, x₃)`, so brackets are
//! computed exactly and flows are exponentials of a 5×5 matrix. For a
//! constant flux the algebra is `⟨P_t, P₁, P₂, P₃, J₁₂⟩`; for `Q = q/√t` the
//! dilation `D` replaces `P_t`; otherwise only `P₁, P₂, P₃, J₁₂` remain.

mod catalog;
mod equivalence;
mod field;
mod invariance;

pub use catalog::{optimal_subalgebras, reduction_algebra, SubalgebraParams, SubalgebraSpec, SPAN_TOL};
pub use equivalence::EquivalenceParams;
pub use field::{
    commutator, decompose, flow, flow_matrix, generators, generators_for, rank, structure_constants, AffineVectorField,
    FluxKind, Generator,
};
pub use invariance::{
    verify_invariance, FlowedField, InvarianceReport, ResidualSummary, INVARIANCE_FACTOR, INVARIANCE_FLOOR,
};
