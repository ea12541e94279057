//! Kirchhoff shear sampled at boundary-edge midpoints.

use serde::{Deserialize, Serialize};

use crate::assembly::PenaltyRule;
use crate::bfs;
use crate::mesh::{BoundaryCondition, BoundarySpec, Side, StructuredMesh};
use crate::plate::{self, MaterialParams};

/// One midpoint sample of the boundary shear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearSample {
    /// Counter-clockwise arc length from the domain origin.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub side: Side,
    /// Kirchhoff shear `T(u_h)`.
    pub shear: f64,
    /// `λ_h = −γ[g − u_h − γ⁻¹T(u_h)]₊` on contact sides, zero elsewhere.
    pub lambda: f64,
    pub active: bool,
}

/// Shear samples ordered by arc length, one per boundary edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    pub samples: Vec<ShearSample>,
}

impl ShearProfile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample with the largest `|T|` (first one on ties).
    pub fn argmax_abs_shear(&self) -> Option<&ShearSample> {
        self.samples
            .iter()
            .fold(None, |best: Option<&ShearSample>, s| match best {
                Some(b) if b.shear.abs() >= s.shear.abs() => Some(b),
                _ => Some(s),
            })
    }

    pub fn max_abs_shear(&self) -> f64 {
        self.samples.iter().map(|s| s.shear.abs()).fold(0.0, f64::max)
    }
}

/// Evaluate `T(u_h)` at every boundary-edge midpoint from the adjacent element.
pub fn extract_shear_profile(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    spec: &BoundarySpec,
    penalty: &PenaltyRule,
    dofs: &[f64],
) -> ShearProfile {
    let samples = mesh
        .boundary_edges()
        .iter()
        .map(|edge| {
            let [x, y] = edge.midpoint();
            let origin = mesh.element_origin(edge.element);
            let local = [(x - origin[0]) / mesh.hx, (y - origin[1]) / mesh.hy];
            let jet = bfs::eval_in_element(mesh, dofs, edge.element, local);
            let normal = edge.side.normal();
            let shear = plate::kirchhoff_shear(&jet, normal, params);
            let lambda = if spec.get(edge.side) == BoundaryCondition::Signorini {
                let gamma = penalty.gamma(edge.length);
                let s = spec.gap - jet.v - shear / gamma;
                -gamma * s.max(0.0)
            } else {
                0.0
            };
            ShearSample {
                s: mesh.arc_length(edge.side, [x, y]),
                x,
                y,
                side: edge.side,
                shear,
                lambda,
                active: lambda < 0.0,
            }
        })
        .collect();
    ShearProfile { samples }
}
