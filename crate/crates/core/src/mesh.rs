//! Structured meshes of axis-aligned rectangles.
//!
//! Nodes and elements are numbered lexicographically with `x` running
//! fastest. Boundary edges are enumerated counterclockwise starting at the
//! origin corner: bottom (left to right), right (bottom to top), top (right
//! to left), left (top to bottom).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// One of the four sides of the rectangular domain, in counterclockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }

    /// Boundary tangent `t = (n2, -n1)`. Note this runs clockwise around the domain.
    pub fn tangent(self) -> [f64; 2] {
        let n = self.normal();
        [n[1], -n[0]]
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }
}

/// Corners of the domain, counterclockwise from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    SouthWest,
    SouthEast,
    NorthEast,
    NorthWest,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::SouthWest,
        Corner::SouthEast,
        Corner::NorthEast,
        Corner::NorthWest,
    ];

    /// The two sides meeting at the corner as `(arriving, departing)` when the
    /// boundary is traversed along the tangent `t = (n2, -n1)`.
    pub fn sides(self) -> (Side, Side) {
        match self {
            Corner::SouthWest => (Side::Bottom, Side::Left),
            Corner::SouthEast => (Side::Right, Side::Bottom),
            Corner::NorthEast => (Side::Top, Side::Right),
            Corner::NorthWest => (Side::Left, Side::Top),
        }
    }

    /// Local element coordinates `(ξ, η)` of the corner inside the single
    /// element touching it.
    pub fn local(self) -> [f64; 2] {
        match self {
            Corner::SouthWest => [0.0, 0.0],
            Corner::SouthEast => [1.0, 0.0],
            Corner::NorthEast => [1.0, 1.0],
            Corner::NorthWest => [0.0, 1.0],
        }
    }

    pub fn touches(self, side: Side) -> bool {
        let (a, b) = self.sides();
        a == side || b == side
    }
}

/// Boundary condition tag carried by each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Unilateral contact `u >= g` against a rigid support.
    Signorini,
    SimplySupported,
    Clamped,
    Free,
}

/// Per-side boundary conditions plus the constant gap `g` used on Signorini sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub sides: [BoundaryCondition; 4],
    pub gap: f64,
}

impl BoundarySpec {
    pub fn new(sides: [BoundaryCondition; 4], gap: f64) -> Result<Self> {
        if !gap.is_finite() {
            return Err(Error::invalid(format!("gap must be finite, got {gap}")));
        }
        Ok(BoundarySpec { sides, gap })
    }

    pub fn uniform(bc: BoundaryCondition, gap: f64) -> Result<Self> {
        Self::new([bc; 4], gap)
    }

    pub fn get(&self, side: Side) -> BoundaryCondition {
        self.sides[side.index()]
    }

    pub fn has_signorini(&self) -> bool {
        self.sides.contains(&BoundaryCondition::Signorini)
    }
}

/// A boundary edge of the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub side: Side,
    /// Element owning the edge.
    pub element: usize,
    /// End nodes in counterclockwise order.
    pub nodes: [usize; 2],
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub length: f64,
}

impl BoundaryEdge {
    pub fn midpoint(&self) -> [f64; 2] {
        [
            0.5 * (self.start[0] + self.end[0]),
            0.5 * (self.start[1] + self.end[1]),
        ]
    }
}

/// A quadrature point on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    /// Index into [`StructuredMesh::boundary_edges`].
    pub edge: usize,
    pub side: Side,
    pub element: usize,
    pub point: [f64; 2],
    /// Local coordinates of `point` in `element`.
    pub local: [f64; 2],
    pub weight: f64,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
}

/// Axis-aligned structured rectangular mesh of a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    pub origin: [f64; 2],
    pub extents: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl StructuredMesh {
    pub fn new(origin: [f64; 2], extents: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid(format!(
                "element counts must be positive, got nx={nx}, ny={ny}"
            )));
        }
        if !(extents[0] > 0.0 && extents[1] > 0.0) || !extents.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid(format!(
                "extents must be positive and finite, got {extents:?}"
            )));
        }
        if !origin.iter().all(|o| o.is_finite()) {
            return Err(Error::invalid(format!("origin must be finite, got {origin:?}")));
        }
        Ok(StructuredMesh {
            origin,
            extents,
            nx,
            ny,
            hx: extents[0] / nx as f64,
            hy: extents[1] / ny as f64,
        })
    }

    /// The unit square `(0,1)²` with `n × n` elements.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new([0.0, 0.0], [1.0, 1.0], n, n)
    }

    /// Mesh size used for penalty scaling: `max(hx, hy)`.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        [self.x_at(i), self.y_at(j)]
    }

    fn x_at(&self, i: usize) -> f64 {
        if i == self.nx {
            self.origin[0] + self.extents[0]
        } else {
            self.origin[0] + i as f64 * self.hx
        }
    }

    fn y_at(&self, j: usize) -> f64 {
        if j == self.ny {
            self.origin[1] + self.extents[1]
        } else {
            self.origin[1] + j as f64 * self.hy
        }
    }

    pub fn element_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// `(i, j)` grid position of an element.
    pub fn element_ij(&self, element: usize) -> (usize, usize) {
        (element % self.nx, element / self.nx)
    }

    /// Lower-left corner of an element.
    pub fn element_origin(&self, element: usize) -> [f64; 2] {
        let (i, j) = self.element_ij(element);
        [self.x_at(i), self.y_at(j)]
    }

    /// Element nodes in local lexicographic order: (0,0), (1,0), (0,1), (1,1).
    pub fn element_nodes(&self, element: usize) -> [usize; 4] {
        let (i, j) = self.element_ij(element);
        [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i, j + 1),
            self.node_index(i + 1, j + 1),
        ]
    }

    pub fn element_area(&self, _element: usize) -> f64 {
        self.hx * self.hy
    }

    /// Physical coordinates of the local point `(ξ, η)` in an element.
    pub fn local_to_global(&self, element: usize, local: [f64; 2]) -> [f64; 2] {
        let o = self.element_origin(element);
        [o[0] + local[0] * self.hx, o[1] + local[1] * self.hy]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let tol_x = 1e-12 * self.extents[0];
        let tol_y = 1e-12 * self.extents[1];
        x >= self.origin[0] - tol_x
            && x <= self.origin[0] + self.extents[0] + tol_x
            && y >= self.origin[1] - tol_y
            && y <= self.origin[1] + self.extents[1] + tol_y
    }

    /// Containing element and local coordinates of a point. A point on an
    /// inter-element line goes to the lowest-index element containing it.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, [f64; 2])> {
        if !x.is_finite() || !y.is_finite() || !self.contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let i = cell_index((x - self.origin[0]) / self.hx, self.nx);
        let j = cell_index((y - self.origin[1]) / self.hy, self.ny);
        let e = self.element_index(i, j);
        let o = self.element_origin(e);
        let xi = ((x - o[0]) / self.hx).clamp(0.0, 1.0);
        let eta = ((y - o[1]) / self.hy).clamp(0.0, 1.0);
        Ok((e, [xi, eta]))
    }

    /// Uniform refinement: both element counts doubled.
    pub fn refine_uniform(&self) -> StructuredMesh {
        StructuredMesh::new(self.origin, self.extents, 2 * self.nx, 2 * self.ny)
            .expect("refining a valid mesh gives a valid mesh")
    }

    /// Boundary edges, counterclockwise starting at the origin corner.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let (nx, ny) = (self.nx, self.ny);
        let mut edges = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            let nodes = [self.node_index(i, 0), self.node_index(i + 1, 0)];
            edges.push(self.edge(Side::Bottom, self.element_index(i, 0), nodes, self.hx));
        }
        for j in 0..ny {
            let nodes = [self.node_index(nx, j), self.node_index(nx, j + 1)];
            edges.push(self.edge(Side::Right, self.element_index(nx - 1, j), nodes, self.hy));
        }
        for i in (0..nx).rev() {
            let nodes = [self.node_index(i + 1, ny), self.node_index(i, ny)];
            edges.push(self.edge(Side::Top, self.element_index(i, ny - 1), nodes, self.hx));
        }
        for j in (0..ny).rev() {
            let nodes = [self.node_index(0, j + 1), self.node_index(0, j)];
            edges.push(self.edge(Side::Left, self.element_index(0, j), nodes, self.hy));
        }
        edges
    }

    fn edge(&self, side: Side, element: usize, nodes: [usize; 2], length: f64) -> BoundaryEdge {
        BoundaryEdge {
            side,
            element,
            nodes,
            start: self.node_coords(nodes[0]),
            end: self.node_coords(nodes[1]),
            length,
        }
    }

    /// Corner nodes in counterclockwise order starting at the origin.
    pub fn corner_node(&self, corner: Corner) -> usize {
        match corner {
            Corner::SouthWest => self.node_index(0, 0),
            Corner::SouthEast => self.node_index(self.nx, 0),
            Corner::NorthEast => self.node_index(self.nx, self.ny),
            Corner::NorthWest => self.node_index(0, self.ny),
        }
    }

    /// The single element touching a corner.
    pub fn corner_element(&self, corner: Corner) -> usize {
        match corner {
            Corner::SouthWest => self.element_index(0, 0),
            Corner::SouthEast => self.element_index(self.nx - 1, 0),
            Corner::NorthEast => self.element_index(self.nx - 1, self.ny - 1),
            Corner::NorthWest => self.element_index(0, self.ny - 1),
        }
    }

    pub fn corners(&self) -> [usize; 4] {
        Corner::ALL.map(|c| self.corner_node(c))
    }

    /// Nodes lying on a side, in increasing index order.
    pub fn side_nodes(&self, side: Side) -> Vec<usize> {
        let (nx, ny) = (self.nx, self.ny);
        match side {
            Side::Bottom => (0..=nx).map(|i| self.node_index(i, 0)).collect(),
            Side::Top => (0..=nx).map(|i| self.node_index(i, ny)).collect(),
            Side::Left => (0..=ny).map(|j| self.node_index(0, j)).collect(),
            Side::Right => (0..=ny).map(|j| self.node_index(nx, j)).collect(),
        }
    }

    /// Composite Gauss quadrature on every boundary edge: `m` subintervals with
    /// `q` points each, listed edge by edge in boundary order.
    pub fn boundary_quadrature(&self, m: usize, q: usize) -> Result<Vec<BoundaryPoint>> {
        if m == 0 || !(1..=8).contains(&q) {
            return Err(Error::invalid(format!(
                "boundary quadrature needs m >= 1 and 1 <= q <= 8, got m={m}, q={q}"
            )));
        }
        let rule = GaussRule::new(q).composite(m);
        let edges = self.boundary_edges();
        let mut out = Vec::with_capacity(edges.len() * rule.len());
        for (k, edge) in edges.iter().enumerate() {
            let o = self.element_origin(edge.element);
            for (s, w) in rule.iter() {
                let point = [
                    edge.start[0] + s * (edge.end[0] - edge.start[0]),
                    edge.start[1] + s * (edge.end[1] - edge.start[1]),
                ];
                let local = match edge.side {
                    Side::Bottom => [(point[0] - o[0]) / self.hx, 0.0],
                    Side::Top => [(point[0] - o[0]) / self.hx, 1.0],
                    Side::Left => [0.0, (point[1] - o[1]) / self.hy],
                    Side::Right => [1.0, (point[1] - o[1]) / self.hy],
                };
                out.push(BoundaryPoint {
                    edge: k,
                    side: edge.side,
                    element: edge.element,
                    point,
                    local,
                    weight: w * edge.length,
                    normal: edge.side.normal(),
                    tangent: edge.side.tangent(),
                });
            }
        }
        Ok(out)
    }

    /// Counterclockwise arc length from the origin corner to a boundary point.
    pub fn arc_length(&self, side: Side, p: [f64; 2]) -> f64 {
        let [lx, ly] = self.extents;
        let x = p[0] - self.origin[0];
        let y = p[1] - self.origin[1];
        match side {
            Side::Bottom => x,
            Side::Right => lx + y,
            Side::Top => lx + ly + (lx - x),
            Side::Left => 2.0 * lx + ly + (ly - y),
        }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.extents[0] + self.extents[1])
    }
}

/// Cell index for a scaled coordinate `t ∈ [0, n]`, lowest index on ties.
fn cell_index(t: f64, n: usize) -> usize {
    let c = t.ceil();
    if c <= 1.0 {
        0
    } else {
        ((c as usize) - 1).min(n - 1)
    }
}
