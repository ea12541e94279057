//! Q1 Poisson reference solver with Nitsche Dirichlet and Nitsche Signorini
//! boundaries, sharing the Newton loop with the plate solver.
//!
//! The obstacle orientation here is `u ≤ g`. With `s = u − g − γ⁻¹∂_n u`
//! and `φ(v) = v − γ⁻¹∂_n v`, a Signorini side contributes
//! `γ[s]₊ φ(v) − γ⁻¹ ∂_n u ∂_n v`. A Dirichlet side uses the same expression
//! with the branch always active, which is exactly symmetric Nitsche.

use serde::{Deserialize, Serialize};

use crate::assembly::ActiveRule;
use crate::contact::{
    newton_solve, ContactPointState, ContactState, Linearization, NewtonOptions, NonlinearProblem,
    SolveReport,
};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryPoint, Side, StructuredMesh};
use crate::quadrature::GaussRule;
use crate::sparse::{is_positive_definite, solve_linear, CscMatrix, TripletList};

/// Default Nitsche parameter `γ₀` in `γ = γ₀ / h`.
pub const DEFAULT_GAMMA0: f64 = 10.0;

/// `[x]₊ = max(x, 0)`.
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Bilinear shape functions on a rectangle, lexicographic node order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Basis {
    pub hx: f64,
    pub hy: f64,
}

impl Q1Basis {
    pub fn for_mesh(mesh: &StructuredMesh) -> Self {
        Q1Basis {
            hx: mesh.hx,
            hy: mesh.hy,
        }
    }

    /// Values and physical gradients at local coordinates `(ξ, η) ∈ [0,1]²`.
    pub fn eval(&self, xi: f64, eta: f64) -> [(f64, [f64; 2]); 4] {
        let fx = [(1.0 - xi, -1.0 / self.hx), (xi, 1.0 / self.hx)];
        let fy = [(1.0 - eta, -1.0 / self.hy), (eta, 1.0 / self.hy)];
        std::array::from_fn(|a| {
            let (x, dx) = fx[a % 2];
            let (y, dy) = fy[a / 2];
            (x * y, [dx * y, x * dy])
        })
    }
}

/// Boundary condition of one side for the Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonBc {
    /// `u = g`, imposed by Nitsche's method.
    Dirichlet,
    /// `u ≤ g` with complementarity.
    Signorini,
    /// Homogeneous flux.
    Neumann,
}

/// Side conditions, the obstacle `g` of the Signorini sides and the value
/// imposed on the Dirichlet sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    pub sides: [PoissonBc; 4],
    pub g: f64,
    pub dirichlet: f64,
}

impl PoissonSpec {
    /// Obstacle `g`; Dirichlet sides take the same value.
    pub fn new(sides: [PoissonBc; 4], g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::invalid(format!("boundary value must be finite, got {g}")));
        }
        Ok(PoissonSpec {
            sides,
            g,
            dirichlet: g,
        })
    }

    pub fn with_dirichlet(mut self, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("Dirichlet value must be finite, got {value}")));
        }
        self.dirichlet = value;
        Ok(self)
    }

    pub fn uniform(bc: PoissonBc, g: f64) -> Result<Self> {
        Self::new([bc; 4], g)
    }

    pub fn get(&self, side: Side) -> PoissonBc {
        self.sides[side.index()]
    }
}

#[derive(Debug, Clone)]
struct NitschePoint {
    at: BoundaryPoint,
    always_active: bool,
    gamma: f64,
    g: f64,
    nodes: [usize; 4],
    shape: [f64; 4],
    dn: [f64; 4],
}

impl NitschePoint {
    fn value(&self, u: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.shape).map(|(&n, s)| s * u[n]).sum()
    }

    fn flux(&self, u: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.dn).map(|(&n, s)| s * u[n]).sum()
    }

    fn indicator(&self, u: &[f64]) -> f64 {
        self.value(u) - self.g - self.flux(u) / self.gamma
    }
}

/// Assembled Poisson problem `−Δu = f` with Nitsche boundary terms.
#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub mesh: StructuredMesh,
    pub spec: PoissonSpec,
    pub gamma0: f64,
    stiffness: CscMatrix,
    load: Vec<f64>,
    load_norm: f64,
    points: Vec<NitschePoint>,
    signorini_points: usize,
}

impl PoissonProblem {
    pub fn new(mesh: &StructuredMesh, f: &dyn Fn(f64, f64) -> f64, spec: &PoissonSpec, gamma0: f64) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::invalid(format!("gamma0 must be positive, got {gamma0}")));
        }
        let n = mesh.node_count();
        let basis = Q1Basis::for_mesh(mesh);
        let rule = GaussRule::new(2);
        let area = mesh.hx * mesh.hy;
        let mut ke = [[0.0; 4]; 4];
        let mut table = Vec::new();
        for (xi, wx) in rule.iter() {
            for (eta, wy) in rule.iter() {
                let shapes = basis.eval(xi, eta);
                for a in 0..4 {
                    for b in 0..4 {
                        let (ga, gb) = (shapes[a].1, shapes[b].1);
                        ke[a][b] += wx * wy * area * (ga[0] * gb[0] + ga[1] * gb[1]);
                    }
                }
            }
        }
        let load_rule = GaussRule::new(4);
        for (xi, wx) in load_rule.iter() {
            for (eta, wy) in load_rule.iter() {
                table.push((xi, eta, wx * wy * area, basis.eval(xi, eta)));
            }
        }
        let mut t = TripletList::with_capacity(n, n, 16 * mesh.element_count());
        let mut load = vec![0.0; n];
        for e in 0..mesh.element_count() {
            let nodes = mesh.element_nodes(e);
            for a in 0..4 {
                for b in 0..4 {
                    t.push(nodes[a], nodes[b], ke[a][b]);
                }
            }
            for (xi, eta, w, shapes) in &table {
                let [x, y] = mesh.local_to_global(e, [*xi, *eta]);
                let fv = f(x, y) * w;
                for a in 0..4 {
                    load[nodes[a]] += fv * shapes[a].0;
                }
            }
        }

        let edges = mesh.boundary_edges();
        let points: Vec<NitschePoint> = mesh
            .boundary_quadrature(4, 4)?
            .into_iter()
            .filter(|p| spec.get(p.side) != PoissonBc::Neumann)
            .map(|at| {
                let shapes = basis.eval(at.local[0], at.local[1]);
                let dirichlet = spec.get(at.side) == PoissonBc::Dirichlet;
                NitschePoint {
                    always_active: dirichlet,
                    gamma: gamma0 / edges[at.edge].length,
                    g: if dirichlet { spec.dirichlet } else { spec.g },
                    nodes: mesh.element_nodes(at.element),
                    shape: shapes.map(|s| s.0),
                    dn: shapes.map(|s| s.1[0] * at.normal[0] + s.1[1] * at.normal[1]),
                    at,
                }
            })
            .collect();
        let signorini_points = points.iter().filter(|p| !p.always_active).count();
        let load_norm = load.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut problem = PoissonProblem {
            mesh: mesh.clone(),
            spec: *spec,
            gamma0,
            stiffness: t.to_csc(),
            load,
            load_norm,
            points,
            signorini_points,
        };
        // boundary data enters the residual scale as well as f
        let r0 = problem.linearize(&vec![0.0; n], ActiveRule::SEMISMOOTH).residual;
        problem.load_norm = load_norm.max(r0.iter().map(|v| v * v).sum::<f64>().sqrt());
        Ok(problem)
    }

    pub fn stiffness(&self) -> &CscMatrix {
        &self.stiffness
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// One linear solve with a fixed branch on the Signorini points.
    pub fn solve_with_rule(&self, rule: ActiveRule) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.dim()];
        let lin = self.linearize(&zero, rule);
        let rhs: Vec<f64> = lin.residual.iter().map(|r| -r).collect();
        Ok(solve_linear(&lin.jacobian, &rhs)?.0)
    }

    /// Whether the Nitsche matrix with every boundary point active is
    /// positive definite. A too small `γ₀` breaks coercivity and is flagged here.
    pub fn is_coercive(&self) -> bool {
        let lin = self.linearize(&vec![0.0; self.dim()], ActiveRule::AllActive);
        is_positive_definite(&lin.jacobian)
    }

    /// Semismooth Newton solve from `u = 0`.
    pub fn solve(&self, opts: &NewtonOptions) -> Result<(Vec<f64>, ContactState, SolveReport)> {
        opts.validate()?;
        let (u, report) = newton_solve(self, vec![0.0; self.dim()], opts);
        if !report.converged() {
            return Err(Error::Solve(Box::new(report)));
        }
        let state = self.recover_multiplier(&u);
        Ok((u, state, report))
    }

    /// `λ_h = −γ[u_h − g − γ⁻¹∂_n u_h]₊` at the Signorini quadrature points.
    pub fn recover_multiplier(&self, u: &[f64]) -> ContactState {
        let points = self
            .points
            .iter()
            .filter(|p| !p.always_active)
            .map(|p| {
                let lambda = -p.gamma * positive_part(p.indicator(u));
                let separation = p.g - p.value(u);
                ContactPointState {
                    side: p.at.side,
                    x: p.at.point[0],
                    y: p.at.point[1],
                    arc: self.mesh.arc_length(p.at.side, p.at.point),
                    weight: p.at.weight,
                    active: lambda < 0.0,
                    lambda,
                    traction: p.flux(u),
                    separation,
                    complementarity: lambda * separation,
                }
            })
            .collect();
        let gaps: Vec<f64> = self.points.iter().filter(|p| !p.always_active).map(|p| p.g).collect();
        ContactState::new(points, u.iter().copied(), &gaps)
    }

    /// `‖u_h − u‖_{L²}` and `|u_h − u|_{H¹}` by 4×4 Gauss per element.
    pub fn errors(&self, u: &[f64], exact: &dyn Fn(f64, f64) -> (f64, [f64; 2])) -> (f64, f64) {
        q1_errors(&self.mesh, u, exact)
    }
}

impl NonlinearProblem for PoissonProblem {
    fn dim(&self) -> usize {
        self.mesh.node_count()
    }

    fn load_norm(&self) -> f64 {
        self.load_norm
    }

    fn contact_points(&self) -> usize {
        self.signorini_points
    }

    fn linearize(&self, u: &[f64], rule: ActiveRule) -> Linearization {
        let n = self.dim();
        let mut residual = self.stiffness.mul_vec(u);
        for (r, f) in residual.iter_mut().zip(&self.load) {
            *r -= f;
        }
        let mut jac = self.stiffness.to_triplets();
        let mut active = Vec::with_capacity(self.signorini_points);
        let mut kinks = 0;
        for p in &self.points {
            let s = p.indicator(u);
            let on = if p.always_active {
                true
            } else {
                let on = rule.is_active(s);
                active.push(on);
                if s == 0.0 {
                    kinks += 1;
                }
                on
            };
            let w = p.at.weight;
            let flux = p.flux(u);
            let phi: [f64; 4] = std::array::from_fn(|a| p.shape[a] - p.dn[a] / p.gamma);
            for a in 0..4 {
                let mut r = -flux * p.dn[a] / p.gamma;
                if on {
                    r += p.gamma * s * phi[a];
                }
                residual[p.nodes[a]] += w * r;
                for b in 0..4 {
                    let mut v = -p.dn[a] * p.dn[b] / p.gamma;
                    if on {
                        v += p.gamma * phi[a] * phi[b];
                    }
                    jac.push(p.nodes[a], p.nodes[b], w * v);
                }
            }
        }
        debug_assert_eq!(residual.len(), n);
        Linearization {
            residual,
            jacobian: jac.to_csc(),
            active,
            kinks,
        }
    }
}

/// Nitsche Dirichlet solve with `u = g` on every side.
pub fn solve_poisson_dirichlet_nitsche(
    mesh: &StructuredMesh,
    f: &dyn Fn(f64, f64) -> f64,
    g: f64,
    gamma0: f64,
) -> Result<Vec<f64>> {
    let spec = PoissonSpec::uniform(PoissonBc::Dirichlet, g)?;
    PoissonProblem::new(mesh, f, &spec, gamma0)?.solve_with_rule(ActiveRule::AllActive)
}

/// Nitsche Signorini solve by semismooth Newton.
pub fn solve_poisson_signorini_nitsche(
    mesh: &StructuredMesh,
    f: &dyn Fn(f64, f64) -> f64,
    spec: &PoissonSpec,
    gamma0: f64,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, ContactState, SolveReport)> {
    PoissonProblem::new(mesh, f, spec, gamma0)?.solve(opts)
}

/// L² and H¹-seminorm errors of a Q1 nodal vector.
pub fn q1_errors(mesh: &StructuredMesh, u: &[f64], exact: &dyn Fn(f64, f64) -> (f64, [f64; 2])) -> (f64, f64) {
    let basis = Q1Basis::for_mesh(mesh);
    let rule = GaussRule::new(4);
    let area = mesh.hx * mesh.hy;
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..mesh.element_count() {
        let nodes = mesh.element_nodes(e);
        for (xi, wx) in rule.iter() {
            for (eta, wy) in rule.iter() {
                let shapes = basis.eval(xi, eta);
                let mut v = 0.0;
                let mut g = [0.0; 2];
                for a in 0..4 {
                    v += u[nodes[a]] * shapes[a].0;
                    g[0] += u[nodes[a]] * shapes[a].1[0];
                    g[1] += u[nodes[a]] * shapes[a].1[1];
                }
                let [x, y] = mesh.local_to_global(e, [xi, eta]);
                let (ev, eg) = exact(x, y);
                let w = wx * wy * area;
                l2 += w * (v - ev).powi(2);
                h1 += w * ((g[0] - eg[0]).powi(2) + (g[1] - eg[1]).powi(2));
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}
