//! Error norms, observed rates and refinement sweeps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bfs::{self, BfsElementBasis, Jet};
use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;
use crate::plate::{self, MaterialParams};
use crate::poisson::{q1_errors, Q1Basis};
use crate::quadrature::GaussRule;
use crate::scenario::{Scenario, Solution};

/// Gauss points per direction for error integrals.
const ERROR_GAUSS: usize = 6;

/// `‖u_h − u‖_{L²}` and energy norm `a(u_h − u, u_h − u)^{1/2}` of a BFS field.
pub fn plate_errors(
    mesh: &StructuredMesh,
    params: &MaterialParams,
    dofs: &[f64],
    exact: &dyn Fn(f64, f64) -> Jet,
) -> (f64, f64) {
    let rule = GaussRule::new(ERROR_GAUSS);
    let basis = BfsElementBasis::for_mesh(mesh);
    let table: Vec<_> = rule
        .iter()
        .flat_map(|(xi, wx)| rule.iter().map(move |(eta, wy)| (xi, eta, wx * wy)))
        .map(|(xi, eta, w)| (xi, eta, w, basis.eval(xi, eta)))
        .collect();
    let (mut l2, mut energy) = (0.0, 0.0);
    for e in 0..mesh.element_count() {
        let coeffs = bfs::gather(mesh, dofs, e);
        let area = mesh.element_area(e);
        for (xi, eta, w, shapes) in &table {
            let uh = bfs::combine(shapes, &coeffs);
            let [x, y] = mesh.local_to_global(e, [*xi, *eta]);
            let err = uh + (-1.0) * exact(x, y);
            let kappa = plate::curvature(&err);
            l2 += w * area * err.v * err.v;
            energy += w * area * plate::moment(&kappa, params).double_dot(&kappa);
        }
    }
    (l2.sqrt(), energy.max(0.0).sqrt())
}

/// Error norms of a coarse BFS field against a finer one, integrated on the
/// fine mesh.
pub fn plate_difference(
    coarse: &StructuredMesh,
    coarse_dofs: &[f64],
    fine: &StructuredMesh,
    fine_dofs: &[f64],
    params: &MaterialParams,
) -> (f64, f64) {
    plate_errors(fine, params, fine_dofs, &|x, y| {
        bfs::interpolate(coarse, coarse_dofs, x, y).unwrap_or_default()
    })
}

/// L² and H¹-seminorm of a coarse Q1 field against a finer one.
pub fn q1_difference(
    coarse: &StructuredMesh,
    coarse_u: &[f64],
    fine: &StructuredMesh,
    fine_u: &[f64],
) -> (f64, f64) {
    let basis = Q1Basis::for_mesh(coarse);
    q1_errors(fine, fine_u, &|x, y| match coarse.locate(x, y) {
        Ok((e, [xi, eta])) => {
            let n = coarse.element_nodes(e);
            let s = basis.eval(xi, eta);
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for a in 0..4 {
                v += coarse_u[n[a]] * s[a].0;
                g[0] += coarse_u[n[a]] * s[a].1[0];
                g[1] += coarse_u[n[a]] * s[a].1[1];
            }
            (v, g)
        }
        Err(_) => (0.0, [0.0; 2]),
    })
}

/// One refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error_l2: f64,
    /// Energy norm for the plate, H¹ seminorm for Poisson.
    pub error_energy: f64,
    /// `log2(e_{k−1} / e_k)`, absent on the first row.
    pub rate_l2: Option<f64>,
    pub rate_energy: Option<f64>,
}

/// Errors and observed rates over uniformly refined meshes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Whether errors are measured against an exact solution or against
    /// the finest level.
    pub reference: String,
}

impl ConvergenceTable {
    /// Build a table from `(h, error_l2, error_energy)` triples; `h` must halve.
    pub fn from_errors(levels: &[(f64, f64, f64)], reference: &str) -> Result<Self> {
        for w in levels.windows(2) {
            let ratio = w[0].0 / w[1].0;
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("mesh sizes must halve, got ratio {ratio}")));
            }
        }
        let rate = |a: f64, b: f64| (a / b).log2();
        let rows = levels
            .iter()
            .enumerate()
            .map(|(k, &(h, l2, en))| ConvergenceRow {
                h,
                error_l2: l2,
                error_energy: en,
                rate_l2: (k > 0).then(|| rate(levels[k - 1].1, l2)),
                rate_energy: (k > 0).then(|| rate(levels[k - 1].2, en)),
            })
            .collect();
        Ok(ConvergenceTable {
            rows,
            reference: reference.to_string(),
        })
    }

    pub fn rates_l2(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate_l2).collect()
    }

    pub fn rates_energy(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate_energy).collect()
    }

    /// Both error columns strictly decreasing.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].error_l2 < w[0].error_l2 && w[1].error_energy < w[0].error_energy)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "reference: {}", self.reference).unwrap();
        writeln!(out, "{:>12} {:>14} {:>8} {:>14} {:>8}", "h", "error_l2", "rate", "error_energy", "rate").unwrap();
        for r in &self.rows {
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
            writeln!(
                out,
                "{:>12.6e} {:>14.6e} {:>8} {:>14.6e} {:>8}",
                r.h,
                r.error_l2,
                fmt(r.rate_l2),
                r.error_energy,
                fmt(r.rate_energy)
            )
            .unwrap();
        }
        out
    }
}

/// Solve a scenario on `levels` uniformly refined meshes, starting from the
/// scenario's own mesh, and tabulate errors. With a manufactured load the
/// errors are exact; otherwise each level is compared with the finest one,
/// which then has no row of its own (one extra solve is made).
pub fn convergence_sweep(scenario: &Scenario, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::invalid(format!("a sweep needs at least 3 levels, got {levels}")));
    }
    let exact = scenario.exact_solution();
    let solves = if exact.is_some() { levels } else { levels + 1 };
    // levels are independent solves; run them side by side
    let scenarios = (0..solves).map(|level| scenario.refined(level)).collect::<Result<Vec<_>>>()?;
    let solutions = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .enumerate()
            .map(|(level, sc)| {
                scope.spawn(move || {
                    log::info!("sweep level {level}: {}x{}", sc.domain.nx, sc.domain.ny);
                    sc.solve()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep level panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let params = scenario.material_params()?;
    let mut rows = Vec::with_capacity(levels);
    for sol in solutions.iter().take(levels) {
        let (l2, en) = match (&exact, sol) {
            (Some(ex), Solution::Plate(p)) => plate_errors(&p.mesh, &params, &p.dofs, &|x, y| ex.plate_jet(x, y)),
            (Some(ex), Solution::Poisson(p)) => q1_errors(&p.mesh, &p.u, &|x, y| ex.poisson(x, y)),
            (None, Solution::Plate(p)) => {
                let Solution::Plate(fine) = solutions.last().unwrap() else { unreachable!() };
                plate_difference(&p.mesh, &p.dofs, &fine.mesh, &fine.dofs, &params)
            }
            (None, Solution::Poisson(p)) => {
                let Solution::Poisson(fine) = solutions.last().unwrap() else { unreachable!() };
                q1_difference(&p.mesh, &p.u, &fine.mesh, &fine.u)
            }
        };
        rows.push((sol.mesh().h(), l2, en));
    }
    let reference = match exact {
        Some(_) => "manufactured exact solution".to_string(),
        None => {
            let finest = solutions.last().unwrap().mesh();
            format!("finest level {}x{}", finest.nx, finest.ny)
        }
    };
    ConvergenceTable::from_errors(&rows, &reference)
}
