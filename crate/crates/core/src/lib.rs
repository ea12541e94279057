//! Kirchhoff plate bending with unilateral (Signorini) boundary contact.
//!
//! The deflection is discretized with C1 Bogner-Fox-Schmit rectangles on a
//! structured mesh. Contact is imposed weakly through a Nitsche /
//! augmented-Lagrangian boundary term and the resulting piecewise linear
//! system is solved by semismooth Newton. A Q1 Poisson solver with the same
//! contact machinery serves as a reference problem.

pub mod assembly;
pub mod bfs;
pub mod contact;
pub mod error;
pub mod mesh;
pub mod plate;
pub mod poisson;
pub mod quadrature;
pub mod sparse;

pub use assembly::{ActiveRule, ContactTerms, DofMap, Loads, PenaltyRule, PointLoad};
pub use bfs::{BfsElementBasis, Jet, NodalDof};
pub use contact::{
    solve_plate_signorini, ContactPointState, ContactState, InitialGuess, NewtonOptions, PlateProblem,
    PlateSolution, SolveReport, Termination,
};
pub use error::{Error, Result};
pub use mesh::{BoundaryCondition, BoundarySpec, Corner, Side, StructuredMesh};
pub use plate::{MaterialParams, MomentTensor};
pub mod postprocess;
pub mod scenario;

pub use postprocess::{ConvergenceTable, ShearProfile};
pub use scenario::{ProblemKind, Scenario, Solution};
