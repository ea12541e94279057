//! Shared fixtures for the benchmarks: the reference plate and its
//! centre-load contact problem on an `n × n` mesh.

use kplate_core::mesh::{BoundaryCondition, BoundarySpec, StructuredMesh};
use kplate_core::{Loads, MaterialParams, PenaltyRule, PlateProblem};

/// `E = 100`, `ν = 0.5`, `t = 0.1`.
pub fn material() -> MaterialParams {
    MaterialParams::new(100.0, 0.5, 0.1).expect("valid material")
}

pub fn signorini() -> BoundarySpec {
    BoundarySpec::uniform(BoundaryCondition::Signorini, 0.0).expect("valid spec")
}

/// All sides Signorini, unit point load pressing at `(x, y)`.
pub fn point_load_problem(n: usize, x: f64, y: f64) -> PlateProblem {
    let p = material();
    let mesh = StructuredMesh::unit_square(n).expect("valid mesh");
    let penalty = PenaltyRule::plate(&p, 1e4).expect("valid penalty");
    PlateProblem::new(&mesh, &p, &signorini(), &penalty, &Loads::point(x, y, -1.0)).expect("problem assembles")
}
