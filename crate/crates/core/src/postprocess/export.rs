//! CSV and legacy VTK export of solution fields.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly. Row order follows mesh ordering, so
//! repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bfs::{self, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;
use crate::postprocess::profile::ShearProfile;

pub const NODAL_HEADER: &str = "x,y,u,u_x,u_y,u_xy";
pub const SCALAR_NODAL_HEADER: &str = "x,y,u";
pub const SHEAR_HEADER: &str = "s,x,y,T,lambda,active";

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").unwrap();
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn row(out: &mut String, values: &[f64]) {
    for (k, &v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        num(out, v);
    }
    out.push('\n');
}

/// Nodal CSV of a BFS field: one row per node in mesh order.
pub fn nodal_csv(mesh: &StructuredMesh, dofs: &[f64]) -> String {
    let mut out = String::with_capacity(128 * mesh.node_count());
    out.push_str(NODAL_HEADER);
    out.push('\n');
    for node in 0..mesh.node_count() {
        let [x, y] = mesh.node_coords(node);
        let d = &dofs[DOFS_PER_NODE * node..DOFS_PER_NODE * (node + 1)];
        row(&mut out, &[x, y, d[0], d[1], d[2], d[3]]);
    }
    out
}

/// Nodal CSV of a scalar nodal field (one value per node).
pub fn scalar_nodal_csv(mesh: &StructuredMesh, values: &[f64]) -> String {
    let mut out = String::with_capacity(64 * mesh.node_count());
    out.push_str(SCALAR_NODAL_HEADER);
    out.push('\n');
    for (node, &u) in values.iter().enumerate().take(mesh.node_count()) {
        let [x, y] = mesh.node_coords(node);
        row(&mut out, &[x, y, u]);
    }
    out
}

/// Shear-profile CSV; `active` is written as `1` or `0`.
pub fn shear_csv(profile: &ShearProfile) -> String {
    let mut out = String::with_capacity(128 * profile.len());
    out.push_str(SHEAR_HEADER);
    out.push('\n');
    for s in &profile.samples {
        for v in [s.s, s.x, s.y, s.shear, s.lambda] {
            num(&mut out, v);
            out.push(',');
        }
        out.push_str(if s.active { "1\n" } else { "0\n" });
    }
    out
}

/// Legacy ASCII VTK `STRUCTURED_POINTS` file with the scalar `u` sampled on
/// an `n × n` lattice spanning the domain (x fastest).
pub fn vtk_grid(mesh: &StructuredMesh, n: usize, sample: &dyn Fn(f64, f64) -> f64) -> Result<String> {
    if n < 2 {
        return Err(Error::invalid(format!("sampling lattice needs n >= 2, got {n}")));
    }
    let [ox, oy] = mesh.origin;
    let [lx, ly] = mesh.extents;
    let (dx, dy) = (lx / (n - 1) as f64, ly / (n - 1) as f64);
    let mut out = String::with_capacity(32 * n * n + 256);
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("kplate deflection u\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET STRUCTURED_POINTS\n");
    writeln!(out, "DIMENSIONS {n} {n} 1").unwrap();
    out.push_str("ORIGIN ");
    num(&mut out, ox);
    out.push(' ');
    num(&mut out, oy);
    out.push_str(" 0\nSPACING ");
    num(&mut out, dx);
    out.push(' ');
    num(&mut out, dy);
    out.push_str(" 1\n");
    writeln!(out, "POINT_DATA {}", n * n).unwrap();
    out.push_str("SCALARS u double 1\n");
    out.push_str("LOOKUP_TABLE default\n");
    for j in 0..n {
        // the last lattice line sits exactly on the far boundary
        let y = if j + 1 == n { oy + ly } else { oy + j as f64 * dy };
        for i in 0..n {
            let x = if i + 1 == n { ox + lx } else { ox + i as f64 * dx };
            num(&mut out, sample(x, y));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Sample a BFS field on the lattice used by [`vtk_grid`].
pub fn bfs_sampler<'a>(mesh: &'a StructuredMesh, dofs: &'a [f64]) -> impl Fn(f64, f64) -> f64 + 'a {
    move |x, y| bfs::interpolate(mesh, dofs, x, y).map(|j| j.v).unwrap_or(f64::NAN)
}

/// Sample a bilinear nodal field.
pub fn q1_sampler<'a>(mesh: &'a StructuredMesh, values: &'a [f64]) -> impl Fn(f64, f64) -> f64 + 'a {
    move |x, y| match mesh.locate(x, y) {
        Ok((e, [xi, eta])) => {
            let n = mesh.element_nodes(e);
            let w = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta];
            (0..4).map(|a| w[a] * values[n[a]]).sum()
        }
        Err(_) => f64::NAN,
    }
}

/// Paths of the files written by [`export_fields`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub nodal: PathBuf,
    pub shear: Option<PathBuf>,
    pub grid: PathBuf,
}

/// Write `<prefix>nodal.csv`, `<prefix>shear.csv` and `<prefix>grid.vtk` into `dir`.
pub fn export_fields(
    dir: &Path,
    prefix: &str,
    mesh: &StructuredMesh,
    dofs: &[f64],
    profile: Option<&ShearProfile>,
    samples: usize,
) -> Result<ExportPaths> {
    let nodal = dir.join(format!("{prefix}nodal.csv"));
    write_file(&nodal, &nodal_csv(mesh, dofs))?;
    let shear = match profile {
        Some(p) => {
            let path = dir.join(format!("{prefix}shear.csv"));
            write_file(&path, &shear_csv(p))?;
            Some(path)
        }
        None => None,
    };
    let grid = dir.join(format!("{prefix}grid.vtk"));
    write_file(&grid, &vtk_grid(mesh, samples, &bfs_sampler(mesh, dofs))?)?;
    Ok(ExportPaths { nodal, shear, grid })
}

/// Write a scalar Q1 field: `<prefix>nodal.csv` and `<prefix>grid.vtk`.
pub fn export_scalar_fields(
    dir: &Path,
    prefix: &str,
    mesh: &StructuredMesh,
    values: &[f64],
    samples: usize,
) -> Result<ExportPaths> {
    let nodal = dir.join(format!("{prefix}nodal.csv"));
    write_file(&nodal, &scalar_nodal_csv(mesh, values))?;
    let grid = dir.join(format!("{prefix}grid.vtk"));
    write_file(&grid, &vtk_grid(mesh, samples, &q1_sampler(mesh, values))?)?;
    Ok(ExportPaths {
        nodal,
        shear: None,
        grid,
    })
}

/// Write any text artifact, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write_file(path, contents)
}

/// Parse a nodal CSV back into a full BFS DOF vector.
pub fn read_nodal_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_nodal_csv(&text)
}

pub fn parse_nodal_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some(NODAL_HEADER) {
        return Err(Error::invalid("nodal CSV header mismatch"));
    }
    let mut dofs = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::invalid(format!("nodal CSV row {} has {} fields", k + 1, fields.len())));
        }
        for f in &fields[2..] {
            let v = f
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("nodal CSV row {}: {e}", k + 1)))?;
            dofs.push(v);
        }
    }
    Ok(dofs)
}
