//! Shear profiles, analytic oracles, convergence tables and file export.

pub mod convergence;
pub mod export;
pub mod navier;
pub mod profile;

pub use convergence::{convergence_sweep, ConvergenceRow, ConvergenceTable};
pub use export::{export_fields, ExportPaths};
pub use navier::{navier_deflection, NavierLoad};
pub use profile::{extract_shear_profile, ShearProfile, ShearSample};
