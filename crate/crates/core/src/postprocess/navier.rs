//! Navier double sine series for the simply supported square plate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bfs::Jet;
use crate::error::{Error, Result};

/// Minimum number of odd terms per direction.
pub const MIN_TERMS: usize = 50;

/// Load cases with a closed-form series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavierLoad {
    /// Uniform pressure `q`.
    Uniform { q: f64 },
    /// Concentrated force `p` at the plate centre.
    CenterPoint { p: f64 },
}

/// Centre deflection of a simply supported `a × a` plate with flexural
/// rigidity `d_std = E t³ / (12 (1 − ν²))`, summed over the first `terms`
/// odd indices in each direction. Poisson's ratio enters only through `d_std`.
pub fn navier_deflection(load: NavierLoad, a: f64, d_std: f64, terms: usize) -> Result<f64> {
    if terms < MIN_TERMS {
        return Err(Error::invalid(format!("need at least {MIN_TERMS} series terms, got {terms}")));
    }
    if !(a > 0.0 && d_std > 0.0) {
        return Err(Error::invalid("side length and rigidity must be positive"));
    }
    let odd = |k: usize| (2 * k + 1) as f64;
    let mut sum = 0.0;
    // accumulate from the smallest terms for accuracy
    for i in (0..terms).rev() {
        for j in (0..terms).rev() {
            let (m, n) = (odd(i), odd(j));
            let r = m * m + n * n;
            sum += match load {
                NavierLoad::Uniform { .. } => {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign / (m * n * r * r)
                }
                NavierLoad::CenterPoint { .. } => 1.0 / (r * r),
            };
        }
    }
    Ok(match load {
        NavierLoad::Uniform { q } => 16.0 * q * a.powi(4) / (PI.powi(6) * d_std) * sum,
        NavierLoad::CenterPoint { p } => 4.0 * p * a * a / (PI.powi(4) * d_std) * sum,
    })
}

/// `u = sin(πx) sin(πy)` with all derivatives up to third order.
pub fn sine_sine_jet(x: f64, y: f64) -> Jet {
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    let p = PI;
    Jet {
        v: sx * sy,
        dx: p * cx * sy,
        dy: p * sx * cy,
        dxx: -p * p * sx * sy,
        dxy: p * p * cx * cy,
        dyy: -p * p * sx * sy,
        dxxx: -p.powi(3) * cx * sy,
        dxxy: -p.powi(3) * sx * cy,
        dxyy: -p.powi(3) * cx * sy,
        dyyy: -p.powi(3) * sx * cy,
    }
}
