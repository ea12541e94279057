//! Scenario configuration: parsing, validation and dispatch to the solvers.
//!
//! Scenarios are TOML documents. Every key has a default, so an empty file
//! describes a 32×32 unit-square plate with all sides in unilateral contact.
//! `key=value` overrides address nested keys with dots, e.g.
//! `domain.nx=64` or `loads.point.0.p=-2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{self, DofMap, Loads, PenaltyRule, PointLoad};
use crate::bfs::Jet;
use crate::contact::{ContactState, NewtonOptions, PlateProblem, SolveReport};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Side, StructuredMesh};
use crate::plate::MaterialParams;
use crate::poisson::{PoissonBc, PoissonProblem, PoissonSpec, DEFAULT_GAMMA0};
use crate::postprocess::export;
use crate::postprocess::navier::sine_sine_jet;
use crate::postprocess::profile::{extract_shear_profile, ShearProfile};

/// Default plate penalty factor: `γ₀ = factor · D`.
pub const DEFAULT_GAMMA0_FACTOR: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    #[default]
    PlateSignorini,
    /// Signorini sides held in contact (`u = g` imposed by Nitsche).
    PlateBilateral,
    PoissonDirichlet,
    PoissonSignorini,
}

impl ProblemKind {
    pub fn is_plate(self) -> bool {
        matches!(self, ProblemKind::PlateSignorini | ProblemKind::PlateBilateral)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::PlateSignorini => "plate_signorini",
            ProblemKind::PlateBilateral => "plate_bilateral",
            ProblemKind::PoissonDirichlet => "poisson_dirichlet",
            ProblemKind::PoissonSignorini => "poisson_signorini",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub origin: [f64; 2],
    pub extents: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            origin: [0.0, 0.0],
            extents: [1.0, 1.0],
            nx: 32,
            ny: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub young: f64,
    pub poisson: f64,
    pub thickness: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            young: 100.0,
            poisson: 0.5,
            thickness: 0.1,
        }
    }
}

/// Side condition names accepted in the `[boundary]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideKind {
    Signorini,
    SimplySupported,
    Clamped,
    Free,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub bottom: Option<SideKind>,
    pub right: Option<SideKind>,
    pub top: Option<SideKind>,
    pub left: Option<SideKind>,
    /// Obstacle `g` of the Signorini sides.
    pub gap: f64,
    /// Value imposed on Poisson Dirichlet sides.
    pub dirichlet_value: f64,
}

impl BoundaryConfig {
    fn side(&self, side: Side) -> Option<SideKind> {
        match side {
            Side::Bottom => self.bottom,
            Side::Right => self.right,
            Side::Top => self.top,
            Side::Left => self.left,
        }
    }
}

/// Manufactured loads with a known exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manufactured {
    /// `u = sin(πx) sin(πy)` on the unit square.
    Sine,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadConfig {
    pub point: Vec<PointLoad>,
    /// Uniform pressure (plate) or source term (Poisson).
    pub uniform: f64,
    pub manufactured: Option<Manufactured>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    /// Absolute `γ₀`.
    pub gamma0: Option<f64>,
    /// Plate only: `γ₀ = gamma0_factor · D`.
    pub gamma0_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File name prefix for every artifact.
    pub prefix: String,
    /// Lattice size of the structured-grid export.
    pub samples: usize,
    /// Number of refinement levels for a convergence sweep (0 = no sweep).
    pub sweep: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            prefix: String::new(),
            samples: 65,
            sweep: 0,
        }
    }
}

/// A complete, validated problem description.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub problem: ProblemKind,
    pub domain: DomainConfig,
    pub material: MaterialConfig,
    pub boundary: BoundaryConfig,
    pub loads: LoadConfig,
    pub penalty: PenaltyConfig,
    pub solver: NewtonOptions,
    pub output: OutputConfig,
}

/// Exact solution belonging to a manufactured load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    PlateSine,
    PoissonSine,
}

impl ExactSolution {
    pub fn plate_jet(&self, x: f64, y: f64) -> Jet {
        sine_sine_jet(x, y)
    }

    pub fn poisson(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let j = sine_sine_jet(x, y);
        (j.v, [j.dx, j.dy])
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Set `dotted.key` in a TOML table, creating intermediate tables.
fn apply_override(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty path segment"));
    }
    let mut cur: &mut toml::Value = &mut *root.entry(parts[0]).or_insert_with(|| {
        if parts.len() > 1 {
            toml::Value::Table(toml::Table::new())
        } else {
            toml::Value::Boolean(false)
        }
    });
    for (k, part) in parts.iter().enumerate().skip(1) {
        let last = k + 1 == parts.len();
        let fresh = || if last { toml::Value::Boolean(false) } else { toml::Value::Table(toml::Table::new()) };
        cur = match cur {
            toml::Value::Table(t) => t.entry(*part).or_insert_with(fresh),
            toml::Value::Array(a) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{part}` is not an array index")))?;
                let len = a.len();
                if idx > len {
                    return Err(Error::config(key, format!("index {idx} out of range (length {len})")));
                }
                if idx == len {
                    a.push(if last { toml::Value::Boolean(false) } else { toml::Value::Table(toml::Table::new()) });
                }
                &mut a[idx]
            }
            _ => return Err(Error::config(key, format!("`{}` is not a table", parts[..k].join(".")))),
        };
    }
    *cur = value;
    Ok(())
}

impl Scenario {
    /// Parse TOML text, apply `key=value` overrides and validate.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| {
            let key = e.span().map_or("<document>".to_string(), |s| {
                let line = text[..s.start.min(text.len())].lines().count().max(1);
                format!("<line {line}>")
            });
            Error::config(key, e.message().to_string())
        })?;
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::config(ov.as_str(), "override must have the form key=value"))?;
            apply_override(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.message().to_string();
            let key = match message.strip_prefix("unknown field `").and_then(|m| m.split('`').next()) {
                Some(field) if path == "." => field.to_string(),
                _ => path,
            };
            Error::config(key, message)
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Read and parse a scenario file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Side condition after applying the per-problem default.
    pub fn side_kind(&self, side: Side) -> SideKind {
        self.boundary.side(side).unwrap_or(match self.problem {
            ProblemKind::PlateSignorini | ProblemKind::PoissonSignorini => SideKind::Signorini,
            ProblemKind::PlateBilateral => SideKind::SimplySupported,
            ProblemKind::PoissonDirichlet => SideKind::Dirichlet,
        })
    }

    /// Check every parameter against the solver preconditions.
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if d.nx == 0 {
            return Err(Error::config("domain.nx", "must be at least 1"));
        }
        if d.ny == 0 {
            return Err(Error::config("domain.ny", "must be at least 1"));
        }
        if !(d.extents.iter().all(|e| *e > 0.0 && e.is_finite())) {
            return Err(Error::config("domain.extents", "must be positive and finite"));
        }
        if !d.origin.iter().all(|o| o.is_finite()) {
            return Err(Error::config("domain.origin", "must be finite"));
        }
        let m = &self.material;
        for (key, v, ok) in [
            ("material.young", m.young, m.young > 0.0),
            ("material.thickness", m.thickness, m.thickness > 0.0),
            ("material.poisson", m.poisson, (0.0..1.0).contains(&m.poisson)),
        ] {
            if !(ok && v.is_finite()) {
                return Err(Error::config(key, format!("value {v} out of range")));
            }
        }
        if !self.boundary.gap.is_finite() {
            return Err(Error::config("boundary.gap", "must be finite"));
        }
        if !self.boundary.dirichlet_value.is_finite() {
            return Err(Error::config("boundary.dirichlet_value", "must be finite"));
        }
        for side in Side::ALL {
            let kind = self.side_kind(side);
            let allowed = match self.problem {
                ProblemKind::PlateSignorini | ProblemKind::PlateBilateral => matches!(
                    kind,
                    SideKind::Signorini | SideKind::SimplySupported | SideKind::Clamped | SideKind::Free
                ),
                ProblemKind::PoissonDirichlet => matches!(kind, SideKind::Dirichlet | SideKind::Neumann),
                ProblemKind::PoissonSignorini => {
                    matches!(kind, SideKind::Signorini | SideKind::Dirichlet | SideKind::Neumann)
                }
            };
            if !allowed {
                return Err(Error::config(
                    format!("boundary.{}", side.name()),
                    format!("`{kind:?}` is not valid for problem {}", self.problem.name()),
                ));
            }
        }
        if Side::ALL
            .iter()
            .all(|&s| matches!(self.side_kind(s), SideKind::Free | SideKind::Neumann))
        {
            return Err(Error::config("boundary", "at least one side must carry a constraint"));
        }
        if !self.loads.uniform.is_finite() {
            return Err(Error::config("loads.uniform", "must be finite"));
        }
        let mesh = self.mesh_unchecked()?;
        for (k, p) in self.loads.point.iter().enumerate() {
            if !self.problem.is_plate() {
                return Err(Error::config(format!("loads.point.{k}"), "point loads are only supported for plates"));
            }
            if !p.p.is_finite() {
                return Err(Error::config(format!("loads.point.{k}.p"), "must be finite"));
            }
            if !mesh.contains(p.x, p.y) {
                return Err(Error::config(
                    format!("loads.point.{k}"),
                    format!("({}, {}) lies outside the domain", p.x, p.y),
                ));
            }
        }
        if self.loads.manufactured.is_some() {
            let ok_sides = match self.problem {
                ProblemKind::PlateBilateral => {
                    Side::ALL.iter().all(|&s| self.side_kind(s) == SideKind::SimplySupported)
                }
                ProblemKind::PoissonDirichlet => {
                    Side::ALL.iter().all(|&s| self.side_kind(s) == SideKind::Dirichlet)
                        && self.boundary.dirichlet_value == 0.0
                }
                _ => false,
            };
            let unit = self.domain.origin == [0.0, 0.0] && self.domain.extents == [1.0, 1.0];
            if !(ok_sides && unit) {
                return Err(Error::config(
                    "loads.manufactured",
                    "needs the unit square with all sides simply supported (plate_bilateral) \
                     or homogeneous Dirichlet (poisson_dirichlet)",
                ));
            }
        }
        match (self.penalty.gamma0, self.penalty.gamma0_factor) {
            (Some(_), Some(_)) => {
                return Err(Error::config("penalty", "set either gamma0 or gamma0_factor, not both"));
            }
            (Some(g), None) if !(g > 0.0 && g.is_finite()) => {
                return Err(Error::config("penalty.gamma0", "must be positive"));
            }
            (None, Some(f)) if !(f > 0.0 && f.is_finite()) => {
                return Err(Error::config("penalty.gamma0_factor", "must be positive"));
            }
            (None, Some(_)) if !self.problem.is_plate() => {
                return Err(Error::config("penalty.gamma0_factor", "only meaningful for plate problems"));
            }
            _ => {}
        }
        let s = &self.solver;
        if !(s.tol_r > 0.0 && s.tol_r.is_finite()) {
            return Err(Error::config("solver.tol_r", "must be positive"));
        }
        if s.max_iters == 0 {
            return Err(Error::config("solver.max_iters", "must be at least 1"));
        }
        if self.output.samples < 2 {
            return Err(Error::config("output.samples", "must be at least 2"));
        }
        if self.output.sweep == 1 || self.output.sweep == 2 {
            return Err(Error::config("output.sweep", "a sweep needs at least 3 levels"));
        }
        Ok(())
    }

    fn mesh_unchecked(&self) -> Result<StructuredMesh> {
        StructuredMesh::new(self.domain.origin, self.domain.extents, self.domain.nx, self.domain.ny)
            .map_err(|e| Error::config("domain", e.to_string()))
    }

    pub fn mesh(&self) -> Result<StructuredMesh> {
        self.mesh_unchecked()
    }

    pub fn material_params(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.material.young, self.material.poisson, self.material.thickness)
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec> {
        let mut sides = [BoundaryCondition::Free; 4];
        for s in Side::ALL {
            sides[s.index()] = match self.side_kind(s) {
                SideKind::Signorini => BoundaryCondition::Signorini,
                SideKind::SimplySupported => BoundaryCondition::SimplySupported,
                SideKind::Clamped => BoundaryCondition::Clamped,
                SideKind::Free => BoundaryCondition::Free,
                other => return Err(Error::config(format!("boundary.{}", s.name()), format!("`{other:?}` is not a plate condition"))),
            };
        }
        BoundarySpec::new(sides, self.boundary.gap)
    }

    pub fn poisson_spec(&self) -> Result<PoissonSpec> {
        let mut sides = [PoissonBc::Neumann; 4];
        for s in Side::ALL {
            sides[s.index()] = match self.side_kind(s) {
                SideKind::Signorini => PoissonBc::Signorini,
                SideKind::Dirichlet => PoissonBc::Dirichlet,
                SideKind::Neumann => PoissonBc::Neumann,
                other => return Err(Error::config(format!("boundary.{}", s.name()), format!("`{other:?}` is not a Poisson condition"))),
            };
        }
        PoissonSpec::new(sides, self.boundary.gap)?.with_dirichlet(self.boundary.dirichlet_value)
    }

    pub fn penalty_rule(&self) -> Result<PenaltyRule> {
        if self.problem.is_plate() {
            let d = self.material_params()?.modulus();
            let gamma0 = match (self.penalty.gamma0, self.penalty.gamma0_factor) {
                (Some(g), _) => g,
                (None, f) => f.unwrap_or(DEFAULT_GAMMA0_FACTOR) * d,
            };
            PenaltyRule::new(gamma0, 3)
        } else {
            PenaltyRule::new(self.penalty.gamma0.unwrap_or(DEFAULT_GAMMA0), 1)
        }
    }

    pub fn loads(&self) -> Loads {
        Loads {
            points: self.loads.point.clone(),
            uniform: self.loads.uniform,
        }
    }

    pub fn exact_solution(&self) -> Option<ExactSolution> {
        self.loads.manufactured.map(|_| {
            if self.problem.is_plate() {
                ExactSolution::PlateSine
            } else {
                ExactSolution::PoissonSine
            }
        })
    }

    /// The same scenario with both mesh counts multiplied by `2^level`.
    pub fn refined(&self, level: usize) -> Result<Scenario> {
        let mut sc = self.clone();
        let factor = 1usize
            .checked_shl(level as u32)
            .ok_or_else(|| Error::invalid("refinement level too large"))?;
        sc.domain.nx *= factor;
        sc.domain.ny *= factor;
        Ok(sc)
    }

    /// Assemble and solve.
    pub fn solve(&self) -> Result<Solution> {
        self.validate()?;
        let mesh = self.mesh()?;
        if self.problem.is_plate() {
            let params = self.material_params()?;
            let spec = self.boundary_spec()?;
            let penalty = self.penalty_rule()?;
            let problem = match self.loads.manufactured {
                Some(Manufactured::Sine) => {
                    let q = 4.0 * PI.powi(4) * params.flexural_rigidity();
                    let dofmap = DofMap::new(&mesh, &spec);
                    let mut f = assembly::assemble_distributed_load(&mesh, &dofmap, &|x, y| {
                        q * (PI * x).sin() * (PI * y).sin()
                    });
                    let extra = assembly::assemble_load(&mesh, &dofmap, &self.loads())?;
                    for (a, b) in f.iter_mut().zip(extra) {
                        *a += b;
                    }
                    PlateProblem::with_load_vector(&mesh, &params, &spec, &penalty, f)?
                }
                None => PlateProblem::new(&mesh, &params, &spec, &penalty, &self.loads())?,
            };
            let sol = match self.problem {
                ProblemKind::PlateBilateral => problem.solve_bilateral(&self.solver)?,
                _ => problem.solve(&self.solver)?,
            };
            let profile = extract_shear_profile(&mesh, &params, &spec, &penalty, &sol.dofs);
            Ok(Solution::Plate(PlateOutcome {
                mesh,
                params,
                dofs: sol.dofs,
                state: sol.state,
                report: sol.report,
                profile,
            }))
        } else {
            let spec = self.poisson_spec()?;
            let uniform = self.loads.uniform;
            let f: Box<dyn Fn(f64, f64) -> f64> = match self.loads.manufactured {
                Some(Manufactured::Sine) => {
                    Box::new(move |x, y| uniform + 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin())
                }
                None => Box::new(move |_, _| uniform),
            };
            let gamma0 = self.penalty_rule()?.gamma0;
            let problem = PoissonProblem::new(&mesh, &*f, &spec, gamma0)?;
            let (u, state, report) = problem.solve(&self.solver)?;
            Ok(Solution::Poisson(PoissonOutcome {
                mesh,
                u,
                state,
                report,
            }))
        }
    }
}

/// A solved plate scenario.
#[derive(Debug, Clone)]
pub struct PlateOutcome {
    pub mesh: StructuredMesh,
    pub params: MaterialParams,
    /// Full BFS DOF vector.
    pub dofs: Vec<f64>,
    pub state: ContactState,
    pub report: SolveReport,
    pub profile: ShearProfile,
}

/// A solved Poisson scenario.
#[derive(Debug, Clone)]
pub struct PoissonOutcome {
    pub mesh: StructuredMesh,
    /// Nodal values.
    pub u: Vec<f64>,
    pub state: ContactState,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub enum Solution {
    Plate(PlateOutcome),
    Poisson(PoissonOutcome),
}

/// Machine-readable run summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<'a> {
    pub problem: &'static str,
    pub nx: usize,
    pub ny: usize,
    pub dofs: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub contact_points: usize,
    pub active_points: usize,
    pub max_lambda: f64,
    pub min_lambda: f64,
    pub relative_complementarity: f64,
    /// Normalised by boundary values of `|u − g|` only; degenerate under full contact.
    pub boundary_relative_complementarity: f64,
    pub max_abs_shear: Option<f64>,
    pub solver: &'a SolveReport,
}

impl Solution {
    pub fn mesh(&self) -> &StructuredMesh {
        match self {
            Solution::Plate(p) => &p.mesh,
            Solution::Poisson(p) => &p.mesh,
        }
    }

    pub fn report(&self) -> &SolveReport {
        match self {
            Solution::Plate(p) => &p.report,
            Solution::Poisson(p) => &p.report,
        }
    }

    pub fn state(&self) -> &ContactState {
        match self {
            Solution::Plate(p) => &p.state,
            Solution::Poisson(p) => &p.state,
        }
    }

    /// Nodal deflection values.
    pub fn nodal_values(&self) -> Vec<f64> {
        match self {
            Solution::Plate(p) => p.dofs.iter().step_by(4).copied().collect(),
            Solution::Poisson(p) => p.u.clone(),
        }
    }

    pub fn summary(&self, problem: ProblemKind) -> RunSummary<'_> {
        let values = self.nodal_values();
        let state = self.state();
        let lambdas = state.points.iter().map(|p| p.lambda);
        RunSummary {
            problem: problem.name(),
            nx: self.mesh().nx,
            ny: self.mesh().ny,
            dofs: match self {
                Solution::Plate(p) => p.dofs.len(),
                Solution::Poisson(p) => p.u.len(),
            },
            min_u: values.iter().copied().fold(f64::INFINITY, f64::min),
            max_u: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            contact_points: state.points.len(),
            active_points: state.active_count(),
            max_lambda: lambdas.clone().fold(0.0, f64::max),
            min_lambda: lambdas.fold(0.0, f64::min),
            relative_complementarity: state.relative_complementarity(),
            boundary_relative_complementarity: state.boundary_relative_complementarity(),
            max_abs_shear: match self {
                Solution::Plate(p) => Some(p.profile.max_abs_shear()),
                Solution::Poisson(_) => None,
            },
            solver: self.report(),
        }
    }

    /// Write field exports plus `report.json` and `report.txt`.
    pub fn write_outputs(&self, problem: ProblemKind, dir: &Path, prefix: &str, samples: usize) -> Result<Vec<PathBuf>> {
        let paths = match self {
            Solution::Plate(p) => export::export_fields(dir, prefix, &p.mesh, &p.dofs, Some(&p.profile), samples)?,
            Solution::Poisson(p) => export::export_scalar_fields(dir, prefix, &p.mesh, &p.u, samples)?,
        };
        let summary = self.summary(problem);
        let json = dir.join(format!("{prefix}report.json"));
        let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
        body.push('\n');
        export::write_text(&json, &body)?;
        let txt = dir.join(format!("{prefix}report.txt"));
        export::write_text(&txt, &report_text(&summary))?;
        let mut out = vec![paths.nodal];
        out.extend(paths.shear);
        out.push(paths.grid);
        out.push(json);
        out.push(txt);
        Ok(out)
    }
}

/// Human-readable report.
pub fn report_text(s: &RunSummary<'_>) -> String {
    let r = s.solver;
    let mut out = String::new();
    writeln!(out, "problem            {}", s.problem).unwrap();
    writeln!(out, "mesh               {} x {} ({} dofs)", s.nx, s.ny, s.dofs).unwrap();
    writeln!(out, "terminated by      {:?}", r.terminated_by).unwrap();
    writeln!(out, "iterations         {}", r.iterations).unwrap();
    writeln!(
        out,
        "final residual     {:.6e} (tolerance {:.6e}, rounding floor {:.6e})",
        r.final_residual(),
        r.tolerance,
        r.roundoff_floor
    )
    .unwrap();
    writeln!(out, "deflection range   [{:.6e}, {:.6e}]", s.min_u, s.max_u).unwrap();
    writeln!(out, "contact points     {} ({} active)", s.contact_points, s.active_points).unwrap();
    writeln!(out, "multiplier range   [{:.6e}, {:.6e}]", s.min_lambda, s.max_lambda).unwrap();
    writeln!(
        out,
        "complementarity    {:.6e} (relative), {:.6e} (boundary-normalised)",
        s.relative_complementarity, s.boundary_relative_complementarity
    )
    .unwrap();
    if let Some(t) = s.max_abs_shear {
        writeln!(out, "max |T| (midpoint) {t:.6e}").unwrap();
    }
    writeln!(out, "iteration  residual        active  fixed").unwrap();
    for (k, res) in r.residual_history.iter().enumerate() {
        let fixed = if k == 0 { "-".to_string() } else { r.active_set_fixed[k - 1].to_string() };
        writeln!(out, "{k:>9}  {res:.6e}  {:>6}  {fixed}", r.active_history[k]).unwrap();
    }
    out
}
