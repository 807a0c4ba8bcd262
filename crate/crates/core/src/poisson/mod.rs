//! Poisson vectors: the matrix correspondence, pointwise identities, and the
//! construction of two compatible structures along a streamline.

mod construct;
mod matrix;
mod residuals;
mod track;

pub use construct::{construct_bihamiltonian, BiHamiltonianResult, CaseTag, ConstructOptions};
pub use matrix::{poisson_matrix_roundtrip, PoissonMatrix};
pub use residuals::{
    compatibility_residual, frame_expansion_residual, frame_poisson_vector, hamilton_residual,
    invariance_ratio, jacobi_residual, jacobi_residual_with, nambu_residual, HamiltonResidual,
    JacobiMode, NambuResidual, GRADIENT_FLOOR,
};
pub use track::{
    integrate_alpha, pair_compatibility_residual, pair_compatibility_residual_general,
    CompatibilityForm, CompatibilitySample, PoissonTrack, StructureKind,
};
