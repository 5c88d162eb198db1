//! Finite element discretization of the limit problem.
//!
//! Find `v ∈ H¹(ω♯)`, quasiperiodic with `v(1/2, y₂) = e^{iη} v(−1/2, y₂)`,
//! constant (`v_θ`) on `∂θ^ε`, such that
//! `(H∇v, ∇ψ) = μ [(v, ψ) + v_θ ψ̄_θ mes₂(θ^ε)]` for all such `ψ`.
//! The Neumann condition on `y₂ = ±ℓ` and the zero total flux through
//! `∂θ^ε` are natural in this form.

pub mod assemble;
pub mod eigen;
pub mod mesh;

use thiserror::Error;

use crate::domain::DomainError;

pub use assemble::{assemble, assemble_with, HoleCondition, OperatorPair};
pub use eigen::{eigen_residual, solve_lowest, BlochSample, EigenMethod, SolverOptions};
pub use mesh::{build_mesh, MeshedProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitFemError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("limit_fem: mesh failure: {0}")]
    MeshFailure(String),
    #[error("limit_fem: segment holes are analytic-only and cannot be meshed")]
    SegmentNotMeshable,
    #[error("limit_fem: matrix not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("limit_fem: requested {requested} modes from a problem of dimension {dim}")]
    BadModeCount { requested: usize, dim: usize },
    #[error("limit_fem: solver diverged at eta = {eta}: mode {mode} residual {residual:.3e} after {iterations} iterations")]
    SolverDivergence { eta: f64, mode: usize, residual: f64, iterations: usize },
}

/// Mesh, assemble and solve at one Floquet parameter.
pub fn solve_at(
    mesh: &MeshedProblem,
    eta: f64,
    m: usize,
    opts: &SolverOptions,
) -> Result<BlochSample, LimitFemError> {
    solve_lowest(&assemble(mesh, eta), m, opts)
}
