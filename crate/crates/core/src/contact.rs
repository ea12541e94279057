//! Semismooth Newton solution of the plate contact problem.
//!
//! The discrete residual is piecewise linear in the DOFs, so Newton with the
//! generalized derivative of `[·]₊` is a primal-dual active-set iteration:
//! once two consecutive iterates share an active set the linearization is
//! exact and the residual drops to round-off.

use serde::{Deserialize, Serialize};

use crate::assembly::{
    self, ActiveRule, ContactTerms, DofMap, Loads, PenaltyRule,
};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Side, StructuredMesh};
use crate::plate::MaterialParams;
use crate::sparse::{solve_linear, CscMatrix, LinearSolveStats, TripletList};

/// Why the Newton loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Residual below tolerance for a problem without an active set.
    ResidualTol,
    /// Residual below tolerance and active set unchanged over the last step.
    ActiveSetFixedAndResidualTol,
    MaxIters,
    SingularSystem,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::ResidualTol | Termination::ActiveSetFixedAndResidualTol)
    }
}

/// Starting point of the Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Linear solve with every contact point active (Nitsche imposition of `u = g`).
    #[default]
    Bilateral,
    /// `u = 0`.
    Zero,
    /// Solution with every Signorini side replaced by a simple support.
    SimplySupported,
}

/// Newton loop controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Relative residual tolerance; the absolute tolerance is `tol_r` times the data norm.
    pub tol_r: f64,
    pub max_iters: usize,
    /// Halve the step while the residual grows.
    pub damping: bool,
    pub max_halvings: usize,
    pub initial_guess: InitialGuess,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol_r: 1e-10,
            max_iters: 50,
            damping: false,
            max_halvings: 5,
            initial_guess: InitialGuess::Bilateral,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_r > 0.0 && self.tol_r.is_finite()) {
            return Err(Error::invalid(format!("tol_r must be positive, got {}", self.tol_r)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Iteration history of a nonlinear solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Number of Newton steps (linear solves that produced an update).
    pub iterations: usize,
    /// `‖R(u_k)‖₂` for every iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    /// Number of active contact points at every iterate.
    pub active_history: Vec<usize>,
    /// Whether the active set matched the previous iterate, per step.
    pub active_set_fixed: Vec<bool>,
    pub terminated_by: Termination,
    /// Absolute residual tolerance requested, `tol_r · load_norm`.
    pub tolerance: f64,
    /// Rounding floor of the residual at the last iterate,
    /// `ROUNDOFF_FACTOR · ε · (‖ |J| |u| ‖₂ + load_norm)`. The stopping test
    /// uses the larger of this and `tolerance`.
    #[serde(default)]
    pub roundoff_floor: f64,
    /// Data norm `max(‖f‖₂, ‖R(0)‖₂)`.
    pub load_norm: f64,
    pub contact_points: usize,
    /// Total step halvings performed by damping.
    pub halvings: usize,
    /// Linearizations repeated with kink points taken as active.
    pub kink_relinearizations: usize,
    pub linear_solves: Vec<LinearSolveStats>,
}

impl SolveReport {
    fn new(tolerance: f64, load_norm: f64, contact_points: usize) -> Self {
        SolveReport {
            iterations: 0,
            residual_history: Vec::new(),
            active_history: Vec::new(),
            active_set_fixed: Vec::new(),
            terminated_by: Termination::MaxIters,
            tolerance,
            roundoff_floor: 0.0,
            load_norm,
            contact_points,
            halvings: 0,
            kink_relinearizations: 0,
            linear_solves: Vec::new(),
        }
    }

    pub fn converged(&self) -> bool {
        self.terminated_by.converged()
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    pub fn final_active(&self) -> usize {
        *self.active_history.last().unwrap_or(&0)
    }
}

/// Residual, generalized Jacobian and active flags at one iterate.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub residual: Vec<f64>,
    pub jacobian: CscMatrix,
    pub active: Vec<bool>,
    pub kinks: usize,
}

/// A square, piecewise smooth system `R(u) = 0` with an active set.
pub trait NonlinearProblem {
    fn dim(&self) -> usize;
    /// Size of the data, `max(‖f‖₂, ‖R(0)‖₂)`, scaling the residual tolerance.
    fn load_norm(&self) -> f64;
    /// Number of points carrying an active/inactive flag.
    fn contact_points(&self) -> usize;
    fn linearize(&self, u: &[f64], rule: ActiveRule) -> Linearization;
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Multiple of machine epsilon in the rounding floor of the residual.
pub const ROUNDOFF_FACTOR: f64 = 16.0;

/// Residual level below which evaluation error dominates: the rounding
/// error of `J u − f` is bounded by `ε (|J| |u| + |f|)` componentwise.
fn roundoff_floor(lin: &Linearization, u: &[f64], load_norm: f64) -> f64 {
    let abs_u: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    ROUNDOFF_FACTOR * f64::EPSILON * (norm2(&lin.jacobian.abs_mul_vec(&abs_u)) + load_norm)
}

/// Semismooth Newton iteration from `u0`.
///
/// Returns the last iterate and the report; the caller inspects
/// `report.terminated_by`. A singular Jacobian at an iterate with points
/// exactly on the kink `s = 0` is retried with those points active, and the
/// rule stays in force for the rest of the solve.
pub fn newton_solve<P: NonlinearProblem>(
    problem: &P,
    u0: Vec<f64>,
    opts: &NewtonOptions,
) -> (Vec<f64>, SolveReport) {
    let load_norm = problem.load_norm();
    let tol = opts.tol_r * load_norm;
    let mut report = SolveReport::new(tol, load_norm, problem.contact_points());
    let mut rule = ActiveRule::SEMISMOOTH;
    let mut u = u0;
    let mut lin = problem.linearize(&u, rule);
    report.residual_history.push(norm2(&lin.residual));
    report.active_history.push(lin.active.iter().filter(|a| **a).count());

    for _ in 0..opts.max_iters {
        let rhs: Vec<f64> = lin.residual.iter().map(|r| -r).collect();
        let (step, stats) = match solve_linear(&lin.jacobian, &rhs) {
            Ok(ok) => ok,
            Err(err) => {
                if lin.kinks > 0 && rule == ActiveRule::SEMISMOOTH {
                    log::debug!("singular Jacobian with {} kink points, taking them active", lin.kinks);
                    rule = ActiveRule::Semismooth { kink_active: true };
                    report.kink_relinearizations += 1;
                    lin = problem.linearize(&u, rule);
                    *report.active_history.last_mut().unwrap() =
                        lin.active.iter().filter(|a| **a).count();
                    match solve_linear(&lin.jacobian, &rhs) {
                        Ok(ok) => ok,
                        Err(err) => {
                            log::warn!("Newton stopped: {err}");
                            report.terminated_by = Termination::SingularSystem;
                            return (u, report);
                        }
                    }
                } else {
                    log::warn!("Newton stopped: {err}");
                    report.terminated_by = Termination::SingularSystem;
                    return (u, report);
                }
            }
        };
        report.linear_solves.push(stats);

        let old_res = *report.residual_history.last().unwrap();
        let mut scale = 1.0;
        let mut trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + b).collect();
        let mut next = problem.linearize(&trial, rule);
        let mut res = norm2(&next.residual);
        if opts.damping {
            let mut halvings = 0;
            while res > old_res && halvings < opts.max_halvings {
                halvings += 1;
                scale *= 0.5;
                trial = u.iter().zip(&step).map(|(a, b)| a + scale * b).collect();
                next = problem.linearize(&trial, rule);
                res = norm2(&next.residual);
            }
            report.halvings += halvings;
        }

        report.iterations += 1;
        let fixed = next.active == lin.active;
        report.residual_history.push(res);
        report.active_history.push(next.active.iter().filter(|a| **a).count());
        report.active_set_fixed.push(fixed);
        log::debug!(
            "newton {}: residual {:.3e}, active {}, fixed {}",
            report.iterations,
            res,
            report.active_history.last().unwrap(),
            fixed
        );
        u = trial;
        lin = next;
        report.roundoff_floor = roundoff_floor(&lin, &u, load_norm);
        if res <= tol.max(report.roundoff_floor) {
            if problem.contact_points() == 0 {
                report.terminated_by = Termination::ResidualTol;
                return (u, report);
            }
            if fixed {
                report.terminated_by = Termination::ActiveSetFixedAndResidualTol;
                return (u, report);
            }
        }
    }
    report.terminated_by = Termination::MaxIters;
    (u, report)
}

/// State of the contact boundary at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPointState {
    pub side: Side,
    pub x: f64,
    pub y: f64,
    /// Counter-clockwise arc length from the domain origin.
    pub arc: f64,
    pub weight: f64,
    pub active: bool,
    /// `λ_h = −γ [g − ψ(u_h)]₊`.
    pub lambda: f64,
    /// Boundary force conjugate to the deflection: Kirchhoff shear `T(u_h)`
    /// for the plate, normal derivative `∂_n u_h` for the Poisson problem.
    pub traction: f64,
    /// Signed distance from the obstacle, non-negative when feasible:
    /// `u_h − g` for the plate (`u ≥ g`), `g − u_h` for Poisson (`u ≤ g`).
    pub separation: f64,
    /// `λ_h · separation`.
    pub complementarity: f64,
}

/// Active flags and recovered multiplier along the contact boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub points: Vec<ContactPointState>,
    /// `max |u_h − g|` over the mesh nodes (and contact points), the
    /// displacement scale used to normalise the complementarity residual.
    #[serde(default)]
    pub field_scale: f64,
}

impl ContactState {
    /// Build the state, measuring `u_h − g` over the nodal values for the
    /// displacement scale. With several gaps the largest distance is taken.
    pub fn new(points: Vec<ContactPointState>, nodal_values: impl IntoIterator<Item = f64>, gaps: &[f64]) -> Self {
        let (lo, hi) = gaps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        let boundary = points.iter().map(|p| p.separation.abs()).fold(0.0, f64::max);
        let field_scale = if gaps.is_empty() {
            boundary
        } else {
            nodal_values
                .into_iter()
                .map(|u| (u - lo).abs().max((u - hi).abs()))
                .fold(boundary, f64::max)
        };
        ContactState { points, field_scale }
    }

    pub fn active_count(&self) -> usize {
        self.points.iter().filter(|p| p.active).count()
    }

    pub fn max_lambda(&self) -> f64 {
        self.points.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |λ_h| [separation]₊` over the contact points.
    pub fn complementarity_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.lambda.abs() * p.separation.max(0.0))
            .fold(0.0, f64::max)
    }

    /// Complementarity residual over `max |λ_h| · max |u_h − g|`, with the
    /// displacement measured over the whole field. Zero without contact.
    pub fn relative_complementarity(&self) -> f64 {
        self.normalised(self.field_scale)
    }

    /// As [`Self::relative_complementarity`] but normalised by the largest
    /// separation on the contact boundary alone. Under full contact every
    /// separation is the O(1/γ) Nitsche defect, so this ratio stays O(1)
    /// however well the system is solved; it is reported for diagnosis.
    pub fn boundary_relative_complementarity(&self) -> f64 {
        self.normalised(self.points.iter().map(|p| p.separation.abs()).fold(0.0, f64::max))
    }

    fn normalised(&self, scale: f64) -> f64 {
        let num = self.complementarity_residual();
        if num == 0.0 {
            return 0.0;
        }
        let lmax = self.points.iter().map(|p| p.lambda.abs()).fold(0.0, f64::max);
        num / (lmax * scale)
    }
}

/// Evaluate `λ_h` and the Kuhn–Tucker quantities at every contact point;
/// `u` is the reduced vector and `u_full` its expansion.
pub fn recover_multiplier(mesh: &StructuredMesh, terms: &ContactTerms, u: &[f64], u_full: &[f64]) -> ContactState {
    let points = terms
        .points()
        .iter()
        .map(|q| {
            let lambda = q.multiplier(u);
            let separation = q.value(u) - q.gap;
            ContactPointState {
                side: q.at.side,
                x: q.at.point[0],
                y: q.at.point[1],
                arc: mesh.arc_length(q.at.side, q.at.point),
                weight: q.at.weight,
                active: lambda < 0.0,
                lambda,
                traction: q.shear_of(u),
                separation,
                complementarity: lambda * separation,
            }
        })
        .collect();
    let gaps: Vec<f64> = terms.points().iter().map(|q| q.gap).collect();
    let values = (0..mesh.node_count()).map(|n| u_full[crate::bfs::global_dof(n, crate::bfs::NodalDof::Value)]);
    ContactState::new(points, values, &gaps)
}

/// The assembled plate problem with Nitsche contact on the Signorini sides.
#[derive(Debug, Clone)]
pub struct PlateProblem {
    pub mesh: StructuredMesh,
    pub params: MaterialParams,
    pub spec: BoundarySpec,
    pub penalty: PenaltyRule,
    dofmap: DofMap,
    /// Bending plus corner-force matrix.
    stiffness: CscMatrix,
    load: Vec<f64>,
    load_norm: f64,
    contact: ContactTerms,
}

impl PlateProblem {
    pub fn new(
        mesh: &StructuredMesh,
        params: &MaterialParams,
        spec: &BoundarySpec,
        penalty: &PenaltyRule,
        loads: &Loads,
    ) -> Result<Self> {
        let dofmap = DofMap::new(mesh, spec);
        let load = assembly::assemble_load(mesh, &dofmap, loads)?;
        Self::with_load_vector(mesh, params, spec, penalty, load)
    }

    /// Problem with a precomputed load vector on the free DOFs.
    pub fn with_load_vector(
        mesh: &StructuredMesh,
        params: &MaterialParams,
        spec: &BoundarySpec,
        penalty: &PenaltyRule,
        load: Vec<f64>,
    ) -> Result<Self> {
        let constrained = Side::ALL.iter().any(|&s| spec.get(s) != BoundaryCondition::Free);
        if !constrained {
            return Err(Error::invalid(
                "at least one side must be signorini, simply_supported or clamped",
            ));
        }
        let dofmap = DofMap::new(mesh, spec);
        if load.len() != dofmap.n_free() {
            return Err(Error::invalid(format!(
                "load vector has length {}, expected {}",
                load.len(),
                dofmap.n_free()
            )));
        }
        let bending = assembly::assemble_bending(mesh, params, &dofmap);
        let corners = assembly::assemble_corner_forces(mesh, params, &dofmap, spec);
        let contact = ContactTerms::new(mesh, params, &dofmap, spec, penalty)?;
        let load_norm = norm2(&load);
        let mut problem = PlateProblem {
            mesh: mesh.clone(),
            params: *params,
            spec: *spec,
            penalty: *penalty,
            dofmap,
            stiffness: bending.add(&corners),
            load,
            load_norm,
            contact,
        };
        // a nonzero gap loads the system through the contact term
        let r0 = problem.residual(&vec![0.0; problem.dim()]);
        problem.load_norm = load_norm.max(norm2(&r0));
        Ok(problem)
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn contact(&self) -> &ContactTerms {
        &self.contact
    }

    pub fn stiffness(&self) -> &CscMatrix {
        &self.stiffness
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// Full residual `R(u)` on the free DOFs.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        self.linearize(u, ActiveRule::SEMISMOOTH).residual
    }

    /// Linear solve with every contact point active.
    pub fn bilateral_solution(&self) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.dim()];
        let lin = self.linearize(&zero, ActiveRule::AllActive);
        let rhs: Vec<f64> = lin.residual.iter().map(|r| -r).collect();
        Ok(solve_linear(&lin.jacobian, &rhs)?.0)
    }

    /// Linear solve with the Signorini sides replaced by simple supports,
    /// expressed on this problem's free DOFs.
    pub fn simply_supported_solution(&self) -> Result<Vec<f64>> {
        let mut sides = [BoundaryCondition::Free; 4];
        for s in Side::ALL {
            sides[s.index()] = match self.spec.get(s) {
                BoundaryCondition::Signorini => BoundaryCondition::SimplySupported,
                other => other,
            };
        }
        let spec = BoundarySpec::new(sides, 0.0)?;
        let dm = DofMap::new(&self.mesh, &spec);
        let full_load = self.dofmap.expand(&self.load);
        let load = dm.restrict(&full_load);
        let k = assembly::assemble_bending(&self.mesh, &self.params, &dm);
        let u = solve_linear(&k, &load)?.0;
        Ok(self.dofmap.restrict(&dm.expand(&u)))
    }

    pub fn initial_guess(&self, guess: InitialGuess) -> Result<Vec<f64>> {
        match guess {
            InitialGuess::Zero => Ok(vec![0.0; self.dim()]),
            InitialGuess::Bilateral => self.bilateral_solution(),
            InitialGuess::SimplySupported => self.simply_supported_solution(),
        }
    }

    /// Solve from the configured initial guess.
    pub fn solve(&self, opts: &NewtonOptions) -> Result<PlateSolution> {
        opts.validate()?;
        let u0 = match self.initial_guess(opts.initial_guess) {
            Ok(u0) => u0,
            Err(Error::SingularSystem(msg)) => {
                log::warn!("initial guess failed ({msg}), starting from zero");
                vec![0.0; self.dim()]
            }
            Err(e) => return Err(e),
        };
        self.solve_from(u0, opts)
    }

    /// Solve from an explicit reduced initial vector.
    pub fn solve_from(&self, u0: Vec<f64>, opts: &NewtonOptions) -> Result<PlateSolution> {
        opts.validate()?;
        if u0.len() != self.dim() {
            return Err(Error::invalid("initial guess has the wrong length"));
        }
        let (u, report) = newton_solve(self, u0, opts);
        if !report.converged() {
            return Err(Error::Solve(Box::new(report)));
        }
        let dofs = self.dofmap.expand(&u);
        let state = recover_multiplier(&self.mesh, &self.contact, &u, &dofs);
        Ok(PlateSolution {
            dofs,
            reduced: u,
            state,
            report,
        })
    }
}

impl PlateProblem {
    /// Solve with every Signorini point held active, i.e. Nitsche imposition
    /// of the bilateral condition `u = g`. This is a linear problem.
    pub fn solve_bilateral(&self, opts: &NewtonOptions) -> Result<PlateSolution> {
        opts.validate()?;
        let fixed = FixedBranch {
            inner: self,
            rule: ActiveRule::AllActive,
        };
        let (u, report) = newton_solve(&fixed, vec![0.0; self.dim()], opts);
        if !report.converged() {
            return Err(Error::Solve(Box::new(report)));
        }
        let dofs = self.dofmap.expand(&u);
        let state = recover_multiplier(&self.mesh, &self.contact, &u, &dofs);
        Ok(PlateSolution {
            dofs,
            reduced: u,
            state,
            report,
        })
    }
}

/// A problem whose contact branch is frozen, making it linear.
pub struct FixedBranch<'a, P> {
    pub inner: &'a P,
    pub rule: ActiveRule,
}

impl<P: NonlinearProblem> NonlinearProblem for FixedBranch<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn load_norm(&self) -> f64 {
        self.inner.load_norm()
    }

    fn contact_points(&self) -> usize {
        0
    }

    fn linearize(&self, u: &[f64], _rule: ActiveRule) -> Linearization {
        let mut lin = self.inner.linearize(u, self.rule);
        lin.active.clear();
        lin.kinks = 0;
        lin
    }
}

impl NonlinearProblem for PlateProblem {
    fn dim(&self) -> usize {
        self.dofmap.n_free()
    }

    fn load_norm(&self) -> f64 {
        self.load_norm
    }

    fn contact_points(&self) -> usize {
        self.contact.points().len()
    }

    fn linearize(&self, u: &[f64], rule: ActiveRule) -> Linearization {
        let eval = self.contact.evaluate(u, rule);
        let mut residual = self.stiffness.mul_vec(u);
        for ((r, c), f) in residual.iter_mut().zip(&eval.residual).zip(&self.load) {
            *r += c - f;
        }
        let mut jac: TripletList = self.stiffness.to_triplets();
        jac.extend(&eval.jacobian);
        Linearization {
            residual,
            jacobian: jac.to_csc(),
            active: eval.active,
            kinks: eval.kinks,
        }
    }
}

/// A converged plate solve.
#[derive(Debug, Clone)]
pub struct PlateSolution {
    /// Full BFS DOF vector (constrained entries zero).
    pub dofs: Vec<f64>,
    /// Free DOFs only.
    pub reduced: Vec<f64>,
    pub state: ContactState,
    pub report: SolveReport,
}

/// Assemble and solve the plate contact problem.
pub fn solve_plate_signorini(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    spec: &BoundarySpec,
    penalty: &PenaltyRule,
    loads: &Loads,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, ContactState, SolveReport)> {
    let problem = PlateProblem::new(mesh, params, spec, penalty, loads)?;
    let sol = problem.solve(opts)?;
    Ok((sol.dofs, sol.state, sol.report))
}
