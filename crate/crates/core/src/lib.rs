//! Floquet band structure of the shallow-canal limit problem.
//!
//! The limit problem lives on the periodicity cell `ω = (-1/2, 1/2) × (-ℓ, ℓ)`
//! with a small hole `θ^ε = ε θ¹`. Eigenfunctions are quasiperiodic in `y₁`,
//! satisfy a Neumann condition on the long sides and take a single unknown
//! constant value on the hole boundary, which carries a lumped mass
//! `mes₂(θ^ε)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: validated geometry of the cell and the hole.
//! * [`dispersion`]: closed-form dispersion curves of the unperturbed cell and
//!   their crossing points (knots).
//! * [`polarization`]: polarization matrix of the hole, analytic values and an
//!   exterior-Laplace finite element solver.
//! * [`perturbation`]: the 2×2 correction system at the `(0, 4π²)` knot, the
//!   asymptotic gap law and the lift to physical spectral parameters.
//! * [`limit_fem`]: meshing, quasiperiodic assembly with the constant-trace hole
//!   condition and Hermitian generalized eigensolvers.
//! * [`band_scan`]: sweeps over the Floquet parameter, band hulls, gaps and
//!   comparison against the asymptotic prediction.
//! * [`boundary_layer`]: the junction problem on the L-shaped domain and its
//!   constant `c_Ξ`.
//! * [`io`]: run configuration and deterministic CSV emission.

pub mod band_scan;
pub mod boundary_layer;
pub mod dispersion;
pub mod domain;
pub mod io;
pub mod limit_fem;
mod p1;
pub mod perturbation;
pub mod polarization;
pub mod sparse;

pub use band_scan::{BandInterval, BandStructure, EtaGridSpec, GapMeasurement};
pub use dispersion::{Knot, KnotKind, ModeIndex};
pub use domain::{DepthProfile, DomainSpec, HoleShape, HoleSpec};
pub use limit_fem::{BlochSample, EigenMethod, MeshedProblem, OperatorPair, SolverOptions};
pub use perturbation::{GapPrediction, ScriptP};
pub use polarization::{PolarizationMatrix, Provenance};

/// `4π²`, the doubly degenerate eigenvalue at `η = 0` where the branches
/// `(±1, 0)` cross.
pub const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
