//! Global assembly of the plate system.
//!
//! Everything is assembled directly in the reduced numbering of the free
//! DOFs: strongly constrained DOFs are homogeneous and simply skipped.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bfs::{self, BfsElementBasis, NodalDof, ELEMENT_DOFS};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundaryPoint, BoundarySpec, Corner, Side, StructuredMesh};
use crate::plate::{self, MaterialParams};
use crate::quadrature::GaussRule;
use crate::sparse::{CscMatrix, TripletList};

/// Interior Gauss points per direction; exact for all bicubic integrands.
pub const INTERIOR_GAUSS: usize = 4;
/// Composite boundary rule for contact terms: subintervals per edge.
pub const CONTACT_SUBINTERVALS: usize = 4;
/// Composite boundary rule for contact terms: Gauss points per subinterval.
pub const CONTACT_POINTS: usize = 4;

/// Map from global BFS DOFs to the free (unconstrained) numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    n_total: usize,
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
}

impl DofMap {
    /// DOF map with the given constrained set.
    pub fn with_constraints(n_total: usize, constrained: &BTreeSet<usize>) -> Self {
        let mut free_index = vec![None; n_total];
        let mut free = Vec::with_capacity(n_total - constrained.len());
        for (g, slot) in free_index.iter_mut().enumerate() {
            if !constrained.contains(&g) {
                *slot = Some(free.len());
                free.push(g);
            }
        }
        DofMap {
            n_total,
            free_index,
            free,
        }
    }

    /// DOF map with strong conditions taken from the boundary conditions.
    pub fn new(mesh: &StructuredMesh, spec: &BoundarySpec) -> Self {
        let n_total = bfs::DOFS_PER_NODE * mesh.node_count();
        Self::with_constraints(n_total, &apply_strong_bcs(mesh, spec))
    }

    pub fn unconstrained(mesh: &StructuredMesh) -> Self {
        Self::with_constraints(bfs::DOFS_PER_NODE * mesh.node_count(), &BTreeSet::new())
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn reduced(&self, global: usize) -> Option<usize> {
        self.free_index[global]
    }

    pub fn is_constrained(&self, global: usize) -> bool {
        self.free_index[global].is_none()
    }

    pub fn constrained(&self) -> BTreeSet<usize> {
        (0..self.n_total).filter(|&g| self.is_constrained(g)).collect()
    }

    /// Reduced indices of an element's 16 DOFs (`None` when constrained).
    pub fn element_map(&self, mesh: &StructuredMesh, element: usize) -> [Option<usize>; ELEMENT_DOFS] {
        bfs::element_dofs(mesh, element).map(|g| self.free_index[g])
    }

    /// Restrict a full DOF vector to the free DOFs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| full[g]).collect()
    }

    /// Expand a reduced vector to full length, constrained entries zero.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_total];
        for (k, &g) in self.free.iter().enumerate() {
            full[g] = reduced[k];
        }
        full
    }
}

/// Global DOFs fixed to zero by strongly imposed conditions.
///
/// Simply supported sides fix the value and the tangential derivative at
/// each node of the side (`M_nn = 0` stays natural); clamped sides fix all
/// four nodal DOFs.
pub fn apply_strong_bcs(mesh: &StructuredMesh, spec: &BoundarySpec) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    for side in Side::ALL {
        let kinds: &[NodalDof] = match spec.get(side) {
            BoundaryCondition::SimplySupported => match side {
                Side::Bottom | Side::Top => &[NodalDof::Value, NodalDof::Dx],
                Side::Left | Side::Right => &[NodalDof::Value, NodalDof::Dy],
            },
            BoundaryCondition::Clamped => &NodalDof::ALL,
            BoundaryCondition::Signorini | BoundaryCondition::Free => &[],
        };
        for node in mesh.side_nodes(side) {
            for &k in kinds {
                set.insert(bfs::global_dof(node, k));
            }
        }
    }
    set
}

/// 16×16 bending stiffness `∫ M(N_b) : κ(N_a)` of one element.
pub fn element_bending_matrix(
    basis: &BfsElementBasis,
    params: &MaterialParams,
    gauss_points: usize,
) -> [[f64; ELEMENT_DOFS]; ELEMENT_DOFS] {
    let rule = GaussRule::new(gauss_points);
    let area = basis.hx * basis.hy;
    let mut k = [[0.0; ELEMENT_DOFS]; ELEMENT_DOFS];
    for (xi, wx) in rule.iter() {
        for (eta, wy) in rule.iter() {
            let w = wx * wy * area;
            let shapes = basis.eval(xi, eta);
            let kappa = shapes.map(|s| plate::curvature(&s));
            let moments = kappa.map(|c| plate::moment(&c, params));
            for a in 0..ELEMENT_DOFS {
                for b in 0..ELEMENT_DOFS {
                    k[a][b] += w * moments[b].double_dot(&kappa[a]);
                }
            }
        }
    }
    k
}

/// Interior bending stiffness on the free DOFs.
pub fn assemble_bending(mesh: &StructuredMesh, params: &MaterialParams, dofmap: &DofMap) -> CscMatrix {
    assemble_bending_with(mesh, params, dofmap, INTERIOR_GAUSS)
}

/// Bending stiffness with an explicit number of Gauss points per direction.
pub fn assemble_bending_with(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    dofmap: &DofMap,
    gauss_points: usize,
) -> CscMatrix {
    // all elements of a structured mesh share one element matrix
    let ke = element_bending_matrix(&BfsElementBasis::for_mesh(mesh), params, gauss_points);
    let n = dofmap.n_free();
    let mut t = TripletList::with_capacity(n, n, mesh.element_count() * ELEMENT_DOFS * ELEMENT_DOFS);
    for e in 0..mesh.element_count() {
        let map = dofmap.element_map(mesh, e);
        for (a, ra) in map.iter().enumerate() {
            let Some(ra) = *ra else { continue };
            for (b, rb) in map.iter().enumerate() {
                if let Some(rb) = *rb {
                    t.push(ra, rb, ke[a][b]);
                }
            }
        }
    }
    t.to_csc()
}

/// Whether the corner-force term is assembled at a corner: the corner value
/// must be free (no simply supported or clamped side) and at least one of
/// the two sides must be a contact side.
pub fn corner_force_applies(spec: &BoundarySpec, corner: Corner) -> bool {
    let (a, b) = corner.sides();
    let strong = |s: Side| {
        matches!(
            spec.get(s),
            BoundaryCondition::SimplySupported | BoundaryCondition::Clamped
        )
    };
    !strong(a)
        && !strong(b)
        && (spec.get(a) == BoundaryCondition::Signorini || spec.get(b) == BoundaryCondition::Signorini)
}

/// Corner-force matrix `C_ab = −Σ_c J_c(N_b) N_a(x_c)`, where `J_c` is the
/// corner moment jump. Not symmetric.
pub fn assemble_corner_forces(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    dofmap: &DofMap,
    spec: &BoundarySpec,
) -> CscMatrix {
    let n = dofmap.n_free();
    let mut t = TripletList::new(n, n);
    let basis = BfsElementBasis::for_mesh(mesh);
    for corner in Corner::ALL {
        if !corner_force_applies(spec, corner) {
            continue;
        }
        let e = mesh.corner_element(corner);
        let [xi, eta] = corner.local();
        let shapes = basis.eval(xi, eta);
        let map = dofmap.element_map(mesh, e);
        for a in 0..ELEMENT_DOFS {
            let Some(ra) = map[a] else { continue };
            if shapes[a].v == 0.0 {
                continue;
            }
            for b in 0..ELEMENT_DOFS {
                let Some(rb) = map[b] else { continue };
                let jump = plate::corner_jump(&shapes[b], corner, params);
                if jump != 0.0 {
                    t.push(ra, rb, -jump * shapes[a].v);
                }
            }
        }
    }
    t.to_csc()
}

/// A concentrated transverse force `p` at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLoad {
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

/// Point loads plus an optional uniform pressure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Loads {
    pub points: Vec<PointLoad>,
    pub uniform: f64,
}

impl Loads {
    pub fn point(x: f64, y: f64, p: f64) -> Self {
        Loads {
            points: vec![PointLoad { x, y, p }],
            uniform: 0.0,
        }
    }

    pub fn uniform(q: f64) -> Self {
        Loads {
            points: Vec::new(),
            uniform: q,
        }
    }
}

/// Load vector `(f, N_a)` on the free DOFs. A point load on an element
/// boundary is evaluated in the lowest-index element containing it.
pub fn assemble_load(mesh: &StructuredMesh, dofmap: &DofMap, loads: &Loads) -> Result<Vec<f64>> {
    let mut f = if loads.uniform != 0.0 {
        let q = loads.uniform;
        assemble_distributed_load(mesh, dofmap, &|_, _| q)
    } else {
        vec![0.0; dofmap.n_free()]
    };
    let basis = BfsElementBasis::for_mesh(mesh);
    for load in &loads.points {
        if !load.p.is_finite() {
            return Err(Error::invalid(format!("point load magnitude must be finite, got {}", load.p)));
        }
        let (e, [xi, eta]) = mesh.locate(load.x, load.y)?;
        let shapes = basis.eval(xi, eta);
        for (a, r) in dofmap.element_map(mesh, e).iter().enumerate() {
            if let Some(r) = *r {
                f[r] += load.p * shapes[a].v;
            }
        }
    }
    Ok(f)
}

/// Load vector of a distributed load density, by 4×4 Gauss per element.
pub fn assemble_distributed_load(
    mesh: &StructuredMesh,
    dofmap: &DofMap,
    density: &dyn Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let rule = GaussRule::new(INTERIOR_GAUSS);
    let basis = BfsElementBasis::for_mesh(mesh);
    let tables: Vec<_> = rule
        .iter()
        .flat_map(|(xi, wx)| rule.iter().map(move |(eta, wy)| (xi, eta, wx * wy)))
        .map(|(xi, eta, w)| (xi, eta, w, basis.eval(xi, eta)))
        .collect();
    let mut f = vec![0.0; dofmap.n_free()];
    for e in 0..mesh.element_count() {
        let map = dofmap.element_map(mesh, e);
        let area = mesh.element_area(e);
        for (xi, eta, w, shapes) in &tables {
            let [x, y] = mesh.local_to_global(e, [*xi, *eta]);
            let q = density(x, y) * w * area;
            for (a, r) in map.iter().enumerate() {
                if let Some(r) = *r {
                    f[r] += q * shapes[a].v;
                }
            }
        }
    }
    f
}

/// Penalty parameter `γ = γ₀ / h^p` per boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRule {
    pub gamma0: f64,
    pub exponent: i32,
}

impl PenaltyRule {
    pub fn new(gamma0: f64, exponent: i32) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::invalid(format!("gamma0 must be positive, got {gamma0}")));
        }
        Ok(PenaltyRule { gamma0, exponent })
    }

    /// Plate scaling `γ = γ₀ / h³` with `γ₀ = factor · D`.
    pub fn plate(params: &MaterialParams, factor: f64) -> Result<Self> {
        Self::new(factor * params.modulus(), 3)
    }

    pub fn gamma(&self, h: f64) -> f64 {
        self.gamma0 / h.powi(self.exponent)
    }
}

/// How the `[·]₊` branch is chosen at each contact point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveRule {
    /// Active where `s > 0`; points with `s == 0` exactly are inactive
    /// unless `kink_active` is set.
    Semismooth { kink_active: bool },
    /// Every point active: Nitsche imposition of `u = g`.
    AllActive,
    /// Every point inactive.
    AllInactive,
}

impl ActiveRule {
    pub const SEMISMOOTH: ActiveRule = ActiveRule::Semismooth { kink_active: false };

    pub fn is_active(self, s: f64) -> bool {
        match self {
            ActiveRule::Semismooth { kink_active } => s > 0.0 || (kink_active && s == 0.0),
            ActiveRule::AllActive => true,
            ActiveRule::AllInactive => false,
        }
    }
}

/// Precomputed data of one contact quadrature point.
#[derive(Debug, Clone)]
pub struct ContactPoint {
    pub at: BoundaryPoint,
    pub gamma: f64,
    pub gap: f64,
    /// Reduced indices of the 16 element DOFs.
    pub dofs: [Option<usize>; ELEMENT_DOFS],
    /// Shape function values `N_a`.
    pub shape: [f64; ELEMENT_DOFS],
    /// Kirchhoff shear of each shape function, `T(N_a)`.
    pub shear: [f64; ELEMENT_DOFS],
}

impl ContactPoint {
    fn dot(&self, coeffs: &[f64; ELEMENT_DOFS], u: &[f64]) -> f64 {
        self.dofs
            .iter()
            .zip(coeffs)
            .filter_map(|(d, c)| d.map(|r| c * u[r]))
            .sum()
    }

    /// `u_h` at the point.
    pub fn value(&self, u: &[f64]) -> f64 {
        self.dot(&self.shape, u)
    }

    /// `T(u_h)` at the point.
    pub fn shear_of(&self, u: &[f64]) -> f64 {
        self.dot(&self.shear, u)
    }

    /// Composite trace `ψ(w) = w + γ⁻¹ T(w)` of each shape function.
    pub fn psi(&self) -> [f64; ELEMENT_DOFS] {
        std::array::from_fn(|a| self.shape[a] + self.shear[a] / self.gamma)
    }

    /// Contact indicator `s = g − ψ(u_h)`; the point is in contact when `s > 0`.
    pub fn indicator(&self, u: &[f64]) -> f64 {
        self.gap - self.value(u) - self.shear_of(u) / self.gamma
    }

    /// Multiplier `λ_h = −γ [s]₊`.
    pub fn multiplier(&self, u: &[f64]) -> f64 {
        -self.gamma * self.indicator(u).max(0.0)
    }
}

/// Contact residual, generalized Jacobian and active flags.
#[derive(Debug, Clone)]
pub struct ContactEval {
    pub residual: Vec<f64>,
    pub jacobian: TripletList,
    pub active: Vec<bool>,
    /// Points sitting exactly on the kink `s = 0`.
    pub kinks: usize,
}

/// Boundary contact terms on all Signorini sides.
///
/// With `ψ(w) = w + γ⁻¹T(w)` and `s = g − ψ(u)`, the residual contribution
/// tested with `v` is `−γ[s]₊ ψ(v) − γ⁻¹ T(u) T(v)` integrated over the
/// contact boundary.
#[derive(Debug, Clone)]
pub struct ContactTerms {
    n_free: usize,
    points: Vec<ContactPoint>,
}

impl ContactTerms {
    pub fn new(
        mesh: &StructuredMesh,
        params: &MaterialParams,
        dofmap: &DofMap,
        spec: &BoundarySpec,
        penalty: &PenaltyRule,
    ) -> Result<Self> {
        Self::with_rule(mesh, params, dofmap, spec, penalty, CONTACT_SUBINTERVALS, CONTACT_POINTS)
    }

    pub fn with_rule(
        mesh: &StructuredMesh,
        params: &MaterialParams,
        dofmap: &DofMap,
        spec: &BoundarySpec,
        penalty: &PenaltyRule,
        subintervals: usize,
        points_per_interval: usize,
    ) -> Result<Self> {
        let basis = BfsElementBasis::for_mesh(mesh);
        let edges = mesh.boundary_edges();
        let points = mesh
            .boundary_quadrature(subintervals, points_per_interval)?
            .into_iter()
            .filter(|p| spec.get(p.side) == BoundaryCondition::Signorini)
            .map(|at| {
                let shapes = basis.eval(at.local[0], at.local[1]);
                ContactPoint {
                    gamma: penalty.gamma(edges[at.edge].length),
                    gap: spec.gap,
                    dofs: dofmap.element_map(mesh, at.element),
                    shape: shapes.map(|s| s.v),
                    shear: shapes.map(|s| plate::kirchhoff_shear(&s, at.normal, params)),
                    at,
                }
            })
            .collect();
        Ok(ContactTerms {
            n_free: dofmap.n_free(),
            points,
        })
    }

    pub fn points(&self) -> &[ContactPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Residual and generalized Jacobian at the reduced DOF vector `u`.
    pub fn evaluate(&self, u: &[f64], rule: ActiveRule) -> ContactEval {
        let n = self.n_free;
        let mut residual = vec![0.0; n];
        let mut jacobian =
            TripletList::with_capacity(n, n, self.points.len() * ELEMENT_DOFS * ELEMENT_DOFS);
        let mut active = Vec::with_capacity(self.points.len());
        let mut kinks = 0;
        for p in &self.points {
            let s = p.indicator(u);
            let shear_u = p.shear_of(u);
            let is_active = rule.is_active(s);
            if s == 0.0 {
                kinks += 1;
            }
            active.push(is_active);
            let psi = p.psi();
            let w = p.at.weight;
            // with the fixed branch the contact force is γ·s (active) or 0
            let force = if is_active { p.gamma * s } else { 0.0 };
            for a in 0..ELEMENT_DOFS {
                let Some(ra) = p.dofs[a] else { continue };
                residual[ra] += w * (-force * psi[a] - shear_u * p.shear[a] / p.gamma);
                for b in 0..ELEMENT_DOFS {
                    let Some(rb) = p.dofs[b] else { continue };
                    let mut v = -p.shear[a] * p.shear[b] / p.gamma;
                    if is_active {
                        v += p.gamma * psi[a] * psi[b];
                    }
                    jacobian.push(ra, rb, w * v);
                }
            }
        }
        ContactEval {
            residual,
            jacobian,
            active,
            kinks,
        }
    }
}

/// Contact residual `r_c` and semismooth Jacobian `J_c` at the reduced DOF vector `u`.
pub fn contact_residual_jacobian(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    dofmap: &DofMap,
    penalty: &PenaltyRule,
    u: &[f64],
    spec: &BoundarySpec,
) -> Result<(Vec<f64>, CscMatrix)> {
    let terms = ContactTerms::new(mesh, params, dofmap, spec, penalty)?;
    let eval = terms.evaluate(u, ActiveRule::SEMISMOOTH);
    Ok((eval.residual, eval.jacobian.to_csc()))
}
