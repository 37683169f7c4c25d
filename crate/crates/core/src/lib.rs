//! Interior penalty discontinuous Galerkin discretization of 2D
//! H(curl)-elliptic hemivariational inequalities
//!
//! ```text
//! eps E + curl(mu^-1 curl E) + J = f,   J in d psi(E),   n x E = 0 on the boundary,
//! ```
//!
//! on structured triangulations of the unit square, with an Uzawa iteration for
//! the discrete inequality, a backward Euler driver for the time-dependent
//! problem and the norms needed for convergence studies.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod linalg;
pub mod maxwell;
pub mod mesh;
pub mod nonsmooth;
pub mod problem;
pub mod quadrature;
pub mod space;
pub mod sparse;
pub mod uzawa;

pub use analysis::{
    energy_error, eoc, l2_error, run_study, solve_level, ConvergenceReport, Mode, Reference,
    ReferenceSpec, ReportRow, StudyConfig,
};
pub use assembly::{
    assemble_bilinear, assemble_load, assemble_penalty, assemble_subgradient_load, LoadFunctional,
    ProblemCoefficients,
};
pub use error::{Error, Result};
pub use linalg::{cg_solve, CholeskyFactor, SolveStats};
pub use maxwell::{build_step_rhs, update_b, MaxwellState, MaxwellStepper};
pub use mesh::{build_structured, element_diameter, enumerate_faces, Face, FaceKind, Mesh2D};
pub use nonsmooth::ExponentialDecayPotential;
pub use space::{
    average, tangential_jump, DgSpace, DofVector, QuadratureField, ScalarDgField, Vec2,
};
pub use sparse::CsrMatrix;
pub use uzawa::{
    energy_functional, uzawa_solve, HviSolver, InitialGuess, UzawaConfig, UzawaResult,
};
