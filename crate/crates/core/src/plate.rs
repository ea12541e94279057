//! Kirchhoff plate constitutive law and boundary operators.
//!
//! All quantities use the plate modulus `D = E t³ / (12 (1 + ν))` with the
//! moment tensor `M = D (κ + ν/(1-ν) Δu I)`, `κ = ∇∇u`. Boundary tangents are
//! `t = (n₂, -n₁)`.

use serde::{Deserialize, Serialize};

use crate::bfs::{self, Jet};
use crate::error::{Error, Result};
use crate::mesh::{Corner, StructuredMesh};

/// Elastic and geometric plate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Young's modulus `E`.
    pub young: f64,
    /// Poisson ratio `ν`.
    pub poisson: f64,
    /// Thickness `t`.
    pub thickness: f64,
}

impl MaterialParams {
    pub fn new(young: f64, poisson: f64, thickness: f64) -> Result<Self> {
        plate_modulus(young, poisson, thickness)?;
        Ok(MaterialParams {
            young,
            poisson,
            thickness,
        })
    }

    /// Plate modulus `D = E t³ / (12 (1 + ν))`.
    pub fn modulus(&self) -> f64 {
        self.young * self.thickness.powi(3) / (12.0 * (1.0 + self.poisson))
    }

    /// Classical flexural rigidity `E t³ / (12 (1 - ν²)) = D / (1 - ν)`.
    pub fn flexural_rigidity(&self) -> f64 {
        self.young * self.thickness.powi(3) / (12.0 * (1.0 - self.poisson * self.poisson))
    }

    /// `ν / (1 - ν)`, the weight of the trace term in the moment tensor.
    fn trace_weight(&self) -> f64 {
        self.poisson / (1.0 - self.poisson)
    }
}

/// `D = E t³ / (12 (1 + ν))`, rejecting non-physical parameters.
pub fn plate_modulus(young: f64, poisson: f64, thickness: f64) -> Result<f64> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::invalid(format!("Young's modulus must be positive, got {young}")));
    }
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(Error::invalid(format!("thickness must be positive, got {thickness}")));
    }
    if !(0.0..1.0).contains(&poisson) {
        return Err(Error::invalid(format!(
            "Poisson ratio must lie in [0, 1), got {poisson}"
        )));
    }
    Ok(young * thickness.powi(3) / (12.0 * (1.0 + poisson)))
}

/// Symmetric 2×2 tensor stored as `(xx, xy, yy)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// The plate moment tensor.
pub type MomentTensor = SymTensor2;

impl SymTensor2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymTensor2 { xx, xy, yy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// `a · T · b`.
    pub fn contract(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * (self.xx * b[0] + self.xy * b[1]) + a[1] * (self.xy * b[0] + self.yy * b[1])
    }

    /// Full contraction `T : S`.
    pub fn double_dot(&self, other: &SymTensor2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }
}

/// Curvature tensor `κ = ∇∇v` from the second derivatives of `v`.
pub fn curvature(v: &Jet) -> SymTensor2 {
    SymTensor2::new(v.dxx, v.dxy, v.dyy)
}

/// Moment tensor `M = D (κ + ν/(1-ν) tr(κ) I)`.
pub fn moment(kappa: &SymTensor2, params: &MaterialParams) -> MomentTensor {
    let d = params.modulus();
    let lap = params.trace_weight() * kappa.trace();
    SymTensor2::new(d * (kappa.xx + lap), d * kappa.xy, d * (kappa.yy + lap))
}

/// Moment tensor of a field given by its jet.
pub fn moment_of(v: &Jet, params: &MaterialParams) -> MomentTensor {
    moment(&curvature(v), params)
}

/// Tangent `t = (n₂, -n₁)`.
pub fn tangent_of(normal: [f64; 2]) -> [f64; 2] {
    [normal[1], -normal[0]]
}

/// Kirchhoff shear force `T = n · Div M + ∂_t (n · M · t)` for a constant
/// unit normal `n`, computed from the third derivatives of `v`.
pub fn kirchhoff_shear(v: &Jet, normal: [f64; 2], params: &MaterialParams) -> f64 {
    let t = tangent_of(normal);
    // M is linear in v, so ∂_x M(v) = M(∂_x v)
    let mx = moment_of(&v.x_derivative(), params);
    let my = moment_of(&v.y_derivative(), params);
    let div = [mx.xx + my.xy, mx.xy + my.yy];
    let normal_div = normal[0] * div[0] + normal[1] * div[1];
    let tangential = t[0] * mx.contract(normal, t) + t[1] * my.contract(normal, t);
    normal_div + tangential
}

/// Corner moment jump `M_nt⁻ − M_nt⁺` evaluated from a jet at the corner.
///
/// `−` is the side reaching the corner and `+` the side leaving it when the
/// boundary is traversed along `t = (n₂, -n₁)`. With this orientation
/// `⟨M_nt, ∂_t v⟩_Γ = −⟨∂_t M_nt, v⟩_Γ + Σ_corners (M_nt⁻ − M_nt⁺) v(x_c)`.
pub fn corner_jump(v: &Jet, corner: Corner, params: &MaterialParams) -> f64 {
    let m = moment_of(v, params);
    let (arriving, departing) = corner.sides();
    let mnt = |side: crate::mesh::Side| m.contract(side.normal(), side.tangent());
    mnt(arriving) - mnt(departing)
}

/// Corner moment jump of a global BFS field, using the element touching the corner.
pub fn corner_moment_jump(
    mesh: &StructuredMesh,
    dofs: &[f64],
    corner: Corner,
    params: &MaterialParams,
) -> f64 {
    let jet = bfs::eval_in_element(mesh, dofs, mesh.corner_element(corner), corner.local());
    corner_jump(&jet, corner, params)
}
