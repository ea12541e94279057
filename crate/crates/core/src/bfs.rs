//! Bogner-Fox-Schmit bicubic Hermite element.
//!
//! Every node carries four degrees of freedom `(u, u_x, u_y, u_xy)`. The
//! sixteen shape functions of a rectangle are tensor products of cubic
//! Hermite polynomials; derivative-type functions are scaled by the element
//! sizes so nodal values carry physical derivative units. The resulting
//! space is the `C¹` piecewise-`Q3` space on the mesh.

use std::ops::{Add, AddAssign, Mul};

use crate::error::Result;
use crate::mesh::StructuredMesh;

pub const DOFS_PER_NODE: usize = 4;
pub const ELEMENT_DOFS: usize = 16;

/// Nodal degree of freedom kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodalDof {
    Value = 0,
    Dx = 1,
    Dy = 2,
    Dxy = 3,
}

impl NodalDof {
    pub const ALL: [NodalDof; 4] = [NodalDof::Value, NodalDof::Dx, NodalDof::Dy, NodalDof::Dxy];
}

/// Global DOF index of `(node, kind)`.
pub fn global_dof(node: usize, kind: NodalDof) -> usize {
    DOFS_PER_NODE * node + kind as usize
}

/// Global DOF indices of an element in local order (`4 * local_node + kind`).
pub fn element_dofs(mesh: &StructuredMesh, element: usize) -> [usize; ELEMENT_DOFS] {
    let nodes = mesh.element_nodes(element);
    std::array::from_fn(|a| DOFS_PER_NODE * nodes[a / DOFS_PER_NODE] + a % DOFS_PER_NODE)
}

/// Value and all partial derivatives through third order at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
    pub dxxx: f64,
    pub dxxy: f64,
    pub dxyy: f64,
    pub dyyy: f64,
}

impl Jet {
    /// Tensor product of two 1D derivative stacks `[f, f', f'', f''']`.
    pub fn product(fx: [f64; 4], gy: [f64; 4]) -> Jet {
        Jet {
            v: fx[0] * gy[0],
            dx: fx[1] * gy[0],
            dy: fx[0] * gy[1],
            dxx: fx[2] * gy[0],
            dxy: fx[1] * gy[1],
            dyy: fx[0] * gy[2],
            dxxx: fx[3] * gy[0],
            dxxy: fx[2] * gy[1],
            dxyy: fx[1] * gy[2],
            dyyy: fx[0] * gy[3],
        }
    }

    /// The jet of `∂u/∂x` (third-order entries are unknown and set to zero).
    pub fn x_derivative(&self) -> Jet {
        Jet {
            v: self.dx,
            dx: self.dxx,
            dy: self.dxy,
            dxx: self.dxxx,
            dxy: self.dxxy,
            dyy: self.dxyy,
            ..Jet::default()
        }
    }

    /// The jet of `∂u/∂y` (third-order entries are unknown and set to zero).
    pub fn y_derivative(&self) -> Jet {
        Jet {
            v: self.dy,
            dx: self.dxy,
            dy: self.dyy,
            dxx: self.dxxy,
            dxy: self.dxyy,
            dyy: self.dyyy,
            ..Jet::default()
        }
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.dx, self.dy]
    }

    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }

    fn as_array(&self) -> [f64; 10] {
        [
            self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy, self.dxxx, self.dxxy,
            self.dxyy, self.dyyy,
        ]
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
            dxxx: self.dxxx + o.dxxx,
            dxxy: self.dxxy + o.dxxy,
            dxyy: self.dxyy + o.dxyy,
            dyyy: self.dyyy + o.dyyy,
        }
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        Jet {
            v: self * j.v,
            dx: self * j.dx,
            dy: self * j.dy,
            dxx: self * j.dxx,
            dxy: self * j.dxy,
            dyy: self * j.dyy,
            dxxx: self * j.dxxx,
            dxxy: self * j.dxxy,
            dxyy: self * j.dxyy,
            dyyy: self * j.dyyy,
        }
    }
}

/// Cubic Hermite basis on `[0, 1]`.
///
/// `H00` interpolates the value at 0, `H01` the slope at 0, `H10` the value
/// at 1 and `H11` the slope at 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct HermiteBasis1D;

impl HermiteBasis1D {
    /// `[H00, H01, H10, H11]`, each as `[f, f', f'', f''']` at `s`.
    pub fn eval(s: f64) -> [[f64; 4]; 4] {
        let s2 = s * s;
        let s3 = s2 * s;
        [
            [1.0 - 3.0 * s2 + 2.0 * s3, -6.0 * s + 6.0 * s2, -6.0 + 12.0 * s, 12.0],
            [s - 2.0 * s2 + s3, 1.0 - 4.0 * s + 3.0 * s2, -4.0 + 6.0 * s, 6.0],
            [3.0 * s2 - 2.0 * s3, 6.0 * s - 6.0 * s2, 6.0 - 12.0 * s, -12.0],
            [-s2 + s3, -2.0 * s + 3.0 * s2, -2.0 + 6.0 * s, 6.0],
        ]
    }

    /// Physical derivative stack of the function attached to `end ∈ {0, 1}`,
    /// value-type or slope-type, on an interval of length `h`.
    pub fn physical(s: f64, h: f64, end: usize, slope: bool) -> [f64; 4] {
        let table = Self::eval(s);
        let f = table[2 * end + slope as usize];
        let scale = if slope { h } else { 1.0 };
        let inv = 1.0 / h;
        [
            scale * f[0],
            scale * f[1] * inv,
            scale * f[2] * inv * inv,
            scale * f[3] * inv * inv * inv,
        ]
    }
}

/// Shape functions of one BFS rectangle of size `hx × hy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfsElementBasis {
    pub hx: f64,
    pub hy: f64,
}

impl BfsElementBasis {
    pub fn new(hx: f64, hy: f64) -> Self {
        BfsElementBasis { hx, hy }
    }

    pub fn for_mesh(mesh: &StructuredMesh) -> Self {
        Self::new(mesh.hx, mesh.hy)
    }

    /// All 16 shape functions with physical derivatives through third order
    /// at the local point `(ξ, η) ∈ [0,1]²`. Index `a = 4 * local_node + kind`
    /// with local nodes (0,0), (1,0), (0,1), (1,1).
    pub fn eval(&self, xi: f64, eta: f64) -> [Jet; ELEMENT_DOFS] {
        let mut out = [Jet::default(); ELEMENT_DOFS];
        for (node, slot) in out.chunks_exact_mut(DOFS_PER_NODE).enumerate() {
            let (ex, ey) = (node % 2, node / 2);
            for kind in NodalDof::ALL {
                let slope_x = matches!(kind, NodalDof::Dx | NodalDof::Dxy);
                let slope_y = matches!(kind, NodalDof::Dy | NodalDof::Dxy);
                let fx = HermiteBasis1D::physical(xi, self.hx, ex, slope_x);
                let gy = HermiteBasis1D::physical(eta, self.hy, ey, slope_y);
                slot[kind as usize] = Jet::product(fx, gy);
            }
        }
        out
    }
}

/// Combine element shape jets with coefficients.
pub fn combine(shapes: &[Jet; ELEMENT_DOFS], coeffs: &[f64; ELEMENT_DOFS]) -> Jet {
    shapes
        .iter()
        .zip(coeffs)
        .fold(Jet::default(), |acc, (s, &c)| acc + c * *s)
}

/// Local coefficients of an element gathered from a global DOF vector.
pub fn gather(mesh: &StructuredMesh, dofs: &[f64], element: usize) -> [f64; ELEMENT_DOFS] {
    element_dofs(mesh, element).map(|g| dofs[g])
}

/// Evaluate a global BFS field at a local point of a given element.
pub fn eval_in_element(mesh: &StructuredMesh, dofs: &[f64], element: usize, local: [f64; 2]) -> Jet {
    let shapes = BfsElementBasis::for_mesh(mesh).eval(local[0], local[1]);
    combine(&shapes, &gather(mesh, dofs, element))
}

/// Evaluate a global BFS field at a physical point. Value and gradient are
/// continuous; higher derivatives come from the lowest-index element
/// containing the point.
pub fn interpolate(mesh: &StructuredMesh, dofs: &[f64], x: f64, y: f64) -> Result<Jet> {
    let (e, local) = mesh.locate(x, y)?;
    Ok(eval_in_element(mesh, dofs, e, local))
}

/// Global DOF vector of the nodal interpolant of a field given by
/// `f(x, y) = [u, u_x, u_y, u_xy]`.
pub fn interpolant<F>(mesh: &StructuredMesh, f: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> [f64; 4],
{
    let mut dofs = vec![0.0; DOFS_PER_NODE * mesh.node_count()];
    for n in 0..mesh.node_count() {
        let [x, y] = mesh.node_coords(n);
        dofs[DOFS_PER_NODE * n..DOFS_PER_NODE * (n + 1)].copy_from_slice(&f(x, y));
    }
    dofs
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Evaluate the 16 DOF functionals of a jet-valued function at the corners.
    fn dof_functionals(basis: &BfsElementBasis, a: usize) -> [f64; 16] {
        let mut out = [0.0; 16];
        for node in 0..4 {
            let (ex, ey) = (node % 2, node / 2);
            let j = basis.eval(ex as f64, ey as f64)[a];
            out[4 * node] = j.v;
            out[4 * node + 1] = j.dx;
            out[4 * node + 2] = j.dy;
            out[4 * node + 3] = j.dxy;
        }
        out
    }

    #[test]
    fn hermite_end_conditions() {
        let at0 = HermiteBasis1D::eval(0.0);
        let at1 = HermiteBasis1D::eval(1.0);
        let expect0 = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]];
        let expect1 = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for k in 0..4 {
            assert_eq!([at0[k][0], at0[k][1]], expect0[k]);
            assert_eq!([at1[k][0], at1[k][1]], expect1[k]);
        }
    }

    #[test]
    fn kronecker_property() {
        let basis = BfsElementBasis::new(0.3, 0.7);
        for a in 0..16 {
            let f = dof_functionals(&basis, a);
            for (b, &val) in f.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((val - expect).abs() < 1e-14, "a={a} b={b} val={val}");
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let basis = BfsElementBasis::new(0.25, 0.5);
        for &(xi, eta) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.33), (0.0, 1.0)] {
            let s = basis.eval(xi, eta);
            let values: f64 = (0..4).map(|n| s[4 * n].v).sum();
            assert!((values - 1.0).abs() < 1e-14);
            // u = x: nodal values x_n, u_x = 1, others zero
            let xs = [0.0, 0.25, 0.0, 0.25];
            let x: f64 = (0..4).map(|n| xs[n] * s[4 * n].v + s[4 * n + 1].v).sum();
            assert!((x - 0.25 * xi).abs() < 1e-14);
        }
    }

    #[test]
    fn corner_values() {
        let basis = BfsElementBasis::new(1.0, 1.0);
        let s = basis.eval(1.0, 0.0);
        for a in 0..16 {
            let expect = if a == 4 { 1.0 } else { 0.0 };
            assert!((s[a].v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (hx, hy) = (0.2, 0.35);
        let basis = BfsElementBasis::new(hx, hy);
        let step = 1e-5;
        let (xi, eta) = (0.37, 0.61);
        let c = basis.eval(xi, eta);
        let dxp = basis.eval(xi + step / hx, eta);
        let dxm = basis.eval(xi - step / hx, eta);
        let dyp = basis.eval(xi, eta + step / hy);
        let dym = basis.eval(xi, eta - step / hy);
        let fd = |p: f64, m: f64| (p - m) / (2.0 * step);
        let check = |exact: f64, approx: f64, scale: f64| {
            let err = (exact - approx).abs() / scale.max(1e-300);
            assert!(err <= 1e-6, "exact={exact} fd={approx}");
        };
        for a in 0..16 {
            let scale = [c[a].dx, c[a].dy, c[a].dxx, c[a].dxy, c[a].dyy, c[a].dxxx, c[a].dyyy]
                .iter()
                .fold(1e-3_f64, |m, v| m.max(v.abs()));
            check(c[a].dx, fd(dxp[a].v, dxm[a].v), scale);
            check(c[a].dy, fd(dyp[a].v, dym[a].v), scale);
            check(c[a].dxx, fd(dxp[a].dx, dxm[a].dx), scale);
            check(c[a].dxy, fd(dyp[a].dx, dym[a].dx), scale);
            check(c[a].dyy, fd(dyp[a].dy, dym[a].dy), scale);
            check(c[a].dxxx, fd(dxp[a].dxx, dxm[a].dxx), scale);
            check(c[a].dxxy, fd(dyp[a].dxx, dym[a].dxx), scale);
            check(c[a].dxyy, fd(dxp[a].dyy, dxm[a].dyy), scale);
            check(c[a].dyyy, fd(dyp[a].dyy, dym[a].dyy), scale);
        }
    }

    #[test]
    fn reproduces_x3y3_on_one_element() {
        let mesh = StructuredMesh::unit_square(1).unwrap();
        let dofs = interpolant(&mesh, |x, y| {
            [x.powi(3) * y.powi(3), 3.0 * x * x * y.powi(3), 3.0 * x.powi(3) * y * y, 9.0 * x * x * y * y]
        });
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = (i as f64 / 4.0, j as f64 / 4.0);
                let u = interpolate(&mesh, &dofs, x, y).unwrap();
                assert!((u.v - x.powi(3) * y.powi(3)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_and_linear_fields() {
        let mesh = StructuredMesh::new([0.0, 0.0], [1.0, 2.0], 3, 4).unwrap();
        let one = interpolant(&mesh, |_, _| [1.0, 0.0, 0.0, 0.0]);
        let lin = interpolant(&mesh, |x, _| [x, 1.0, 0.0, 0.0]);
        for &(x, y) in &[(0.1, 0.2), (0.77, 1.3), (0.5, 1.99)] {
            let u = interpolate(&mesh, &one, x, y).unwrap();
            assert!((u.v - 1.0).abs() < 1e-14 && u.dx.abs() < 1e-13 && u.dy.abs() < 1e-13);
            let u = interpolate(&mesh, &lin, x, y).unwrap();
            assert!((u.v - x).abs() < 1e-14);
            assert!((u.dx - 1.0).abs() < 1e-13 && u.dy.abs() < 1e-13);
        }
    }

    #[test]
    fn c1_across_interfaces() {
        let mesh = StructuredMesh::unit_square(3).unwrap();
        let dofs: Vec<f64> = (0..4 * mesh.node_count())
            .map(|k| ((k * 7919) % 101) as f64 / 50.0 - 1.0)
            .collect();
        // vertical interface x = 1/3 between elements 0 and 1
        for &eta in &[0.1, 0.45, 0.8] {
            let left = eval_in_element(&mesh, &dofs, 0, [1.0, eta]);
            let right = eval_in_element(&mesh, &dofs, 1, [0.0, eta]);
            assert!((left.v - right.v).abs() < 1e-13);
            assert!((left.dx - right.dx).abs() < 1e-12);
            assert!((left.dy - right.dy).abs() < 1e-12);
        }
        // horizontal interface y = 1/3 between elements 0 and 3
        for &xi in &[0.2, 0.6] {
            let below = eval_in_element(&mesh, &dofs, 0, [xi, 1.0]);
            let above = eval_in_element(&mesh, &dofs, 3, [xi, 0.0]);
            assert!((below.v - above.v).abs() < 1e-13);
            assert!((below.dx - above.dx).abs() < 1e-12);
            assert!((below.dy - above.dy).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_domain() {
        let mesh = StructuredMesh::unit_square(2).unwrap();
        let dofs = vec![0.0; 36];
        assert!(interpolate(&mesh, &dofs, -0.5, 0.5).is_err());
    }
}
