//! Uniform spacetime meshes, discrete fields, triangle stencils and
//! boundary bookkeeping for rectangular regions.
//!
//! Nodes are `(n, i)` pairs: `n` indexes time, `i` indexes space. The node
//! `(n, i)` sits at `(n·dt, i·dx)`. A triangle at `(n, i)` is the ordered
//! triple `((n,i), (n,i+1), (n+1,i))`.
//!
//! Boundary traversal is counterclockwise in the spacetime diagram drawn with
//! `x` horizontal and `t` vertical. Every signed boundary sum in the crate
//! uses this orientation.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{MslabError, Result};

/// Uniform quadrangular mesh on `[0, nt·dt] × [0, nx·dx]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadMesh {
    pub dt: f64,
    pub dx: f64,
    pub nt: usize,
    pub nx: usize,
}

impl QuadMesh {
    pub fn new(dt: f64, dx: f64, nt: usize, nx: usize) -> Result<Self> {
        let mesh = Self { dt, dx, nt, nx };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) || !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(MslabError::InvalidMesh(format!(
                "step sizes must be positive and finite (dt={}, dx={})",
                self.dt, self.dx
            )));
        }
        if self.nt == 0 || self.nx == 0 {
            return Err(MslabError::InvalidMesh("nt and nx must be at least 1".into()));
        }
        Ok(())
    }

    /// Aspect ratio `c = dt/dx`.
    pub fn aspect_ratio(&self) -> f64 {
        self.dt / self.dx
    }

    pub fn node_count(&self) -> (usize, usize) {
        (self.nt + 1, self.nx + 1)
    }

    pub fn contains(&self, node: Node) -> bool {
        node.n <= self.nt && node.i <= self.nx
    }

    pub fn coords(&self, node: Node) -> (f64, f64) {
        (node.n as f64 * self.dt, node.i as f64 * self.dx)
    }
}

/// Builds a mesh, rejecting non-positive steps and empty extents.
pub fn build_mesh(dt: f64, dx: f64, nt: usize, nx: usize) -> Result<QuadMesh> {
    QuadMesh::new(dt, dx, nt, nx)
}

/// A mesh node. Ordering is row-major: time first, then space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub n: usize,
    pub i: usize,
}

impl Node {
    pub const fn new(n: usize, i: usize) -> Self {
        Self { n, i }
    }
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.i)
    }
}

/// The triangle `((n,i), (n,i+1), (n+1,i))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriangleIndex {
    pub n: usize,
    pub i: usize,
}

impl TriangleIndex {
    pub const fn new(n: usize, i: usize) -> Self {
        Self { n, i }
    }

    /// Vertices in slot order 1, 2, 3.
    pub fn vertices(&self) -> [Node; 3] {
        [Node::new(self.n, self.i), Node::new(self.n, self.i + 1), Node::new(self.n + 1, self.i)]
    }

    pub fn check(&self, mesh: &QuadMesh) -> Result<()> {
        if self.n < mesh.nt && self.i < mesh.nx {
            Ok(())
        } else {
            Err(MslabError::TriangleOutOfRange { n: self.n, i: self.i })
        }
    }
}

/// Field values `u^n_i` on every node, stored row-major by time.
///
/// Tangent fields (first variations) use the same type.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    mesh: QuadMesh,
    values: Array2<f64>,
}

impl DiscreteField {
    pub fn new(mesh: QuadMesh, values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = mesh.node_count();
        if values.dim() != (rows, cols) {
            return Err(MslabError::InvalidArgument(format!(
                "field shape {:?} does not match mesh nodes ({rows}, {cols})",
                values.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MslabError::NonFinite("field values"));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: QuadMesh) -> Self {
        Self { mesh, values: Array2::zeros(mesh.node_count()) }
    }

    pub fn from_node_fn(mesh: QuadMesh, mut f: impl FnMut(Node) -> f64) -> Result<Self> {
        let values = Array2::from_shape_fn(mesh.node_count(), |(n, i)| f(Node::new(n, i)));
        Self::new(mesh, values)
    }

    /// Samples `f(t, x)` at node coordinates.
    pub fn from_fn(mesh: QuadMesh, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_node_fn(mesh, |node| {
            let (t, x) = mesh.coords(node);
            f(t, x)
        })
    }

    pub fn mesh(&self) -> &QuadMesh {
        &self.mesh
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, node: Node) -> f64 {
        self.values[[node.n, node.i]]
    }

    pub fn try_get(&self, node: Node) -> Option<f64> {
        self.values.get([node.n, node.i]).copied()
    }

    pub fn set(&mut self, node: Node, value: f64) {
        self.values[[node.n, node.i]] = value;
    }

    pub fn row(&self, n: usize) -> Vec<f64> {
        self.values.row(n).to_vec()
    }

    pub fn set_row(&mut self, n: usize, row: &[f64]) {
        for (slot, v) in self.values.row_mut(n).iter_mut().zip(row) {
            *slot = *v;
        }
    }

    /// `self + k·other`, the affine combination used for tangent updates.
    pub fn axpy(&self, k: f64, other: &DiscreteField) -> DiscreteField {
        Self { mesh: self.mesh, values: &self.values + &(&other.values * k) }
    }

    pub fn scaled(&self, k: f64) -> DiscreteField {
        Self { mesh: self.mesh, values: &self.values * k }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV with header `n,i,u`, one row per node, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,i,u\n");
        for ((n, i), v) in self.values.indexed_iter() {
            out.push_str(&format!("{n},{i},{v:e}\n"));
        }
        out
    }

    pub fn from_csv(mesh: QuadMesh, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("n,i,u") => {}
            other => return Err(MslabError::Parse(format!("expected header `n,i,u`, got {other:?}"))),
        }
        let mut values = Array2::from_elem(mesh.node_count(), f64::NAN);
        let mut seen = 0usize;
        for (lineno, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let [n, i, u] = parts[..] else {
                return Err(MslabError::Parse(format!("line {}: expected 3 columns", lineno + 2)));
            };
            let parse_idx =
                |s: &str| s.parse::<usize>().map_err(|e| MslabError::Parse(format!("line {}: {e}", lineno + 2)));
            let (n, i) = (parse_idx(n)?, parse_idx(i)?);
            let u: f64 = u.parse().map_err(|e| MslabError::Parse(format!("line {}: {e}", lineno + 2)))?;
            let slot =
                values.get_mut([n, i]).ok_or_else(|| MslabError::Parse(format!("node ({n},{i}) outside mesh")))?;
            if !slot.is_nan() {
                return Err(MslabError::Parse(format!("node ({n},{i}) listed twice")));
            }
            *slot = u;
            seen += 1;
        }
        if seen != values.len() {
            return Err(MslabError::Parse(format!("expected {} nodes, found {seen}", values.len())));
        }
        Self::new(mesh, values)
    }
}

/// Field values on a triangle with forward-difference velocities
/// `v = (u3 − u1)/dt`, `w = (u2 − u1)/dx` and midpoint `ū = (u1+u2+u3)/3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetTriple {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub v: f64,
    pub w: f64,
    pub ubar: f64,
}

impl JetTriple {
    pub fn new(u: [f64; 3], mesh: &QuadMesh) -> Result<Self> {
        let [u1, u2, u3] = u;
        let jet = Self { u1, u2, u3, v: (u3 - u1) / mesh.dt, w: (u2 - u1) / mesh.dx, ubar: (u1 + u2 + u3) / 3.0 };
        if [jet.v, jet.w, jet.ubar].iter().all(|x| x.is_finite()) {
            Ok(jet)
        } else {
            Err(MslabError::NonFinite("jet triple"))
        }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }
}

/// First jet extension of `field` at `tri`.
pub fn jet_extension(field: &DiscreteField, tri: TriangleIndex) -> Result<JetTriple> {
    tri.check(field.mesh())?;
    let [a, b, c] = tri.vertices();
    JetTriple::new([field.get(a), field.get(b), field.get(c)], field.mesh())
}

/// Restriction of a tangent field to the vertices of a triangle.
pub fn tangent_triple(field: &DiscreteField, tri: TriangleIndex) -> Result<[f64; 3]> {
    tri.check(field.mesh())?;
    let [a, b, c] = tri.vertices();
    Ok([field.get(a), field.get(b), field.get(c)])
}

/// Regions supported by the solvers.
///
/// `Rect` counts intervals: it spans nodes `n0..=n0+nt`, `i0..=i0+nx`.
/// `Patch3` is the three triangles sharing the node `(n, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Rect { n0: usize, i0: usize, nt: usize, nx: usize },
    Patch3 { n: usize, i: usize },
}

impl Region {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MslabError::Parse(format!("region: {e}")))
    }

    /// Checks the region is non-empty and fits inside `mesh`.
    pub fn validate(&self, mesh: &QuadMesh) -> Result<()> {
        match *self {
            Region::Rect { n0, i0, nt, nx } => {
                if nt == 0 || nx == 0 {
                    return Err(MslabError::InvalidRegion("empty rectangle".into()));
                }
                if n0 + nt > mesh.nt || i0 + nx > mesh.nx {
                    return Err(MslabError::InvalidRegion(format!(
                        "rectangle extends past mesh ({}x{})",
                        mesh.nt, mesh.nx
                    )));
                }
            }
            Region::Patch3 { n, i } => {
                if n == 0 || i == 0 || n + 1 > mesh.nt || i + 1 > mesh.nx {
                    return Err(MslabError::InvalidRegion(format!(
                        "three-triangle patch at ({n},{i}) does not fit the mesh"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Triangles making up the region, row-major.
    pub fn triangles(&self) -> Vec<TriangleIndex> {
        match *self {
            Region::Rect { n0, i0, nt, nx } => {
                (n0..n0 + nt).flat_map(|n| (i0..i0 + nx).map(move |i| TriangleIndex::new(n, i))).collect()
            }
            Region::Patch3 { n, i } => {
                vec![TriangleIndex::new(n - 1, i), TriangleIndex::new(n, i - 1), TriangleIndex::new(n, i)]
            }
        }
    }

    /// The three triangles of the node stencil in the order
    /// `(△ⁿᵢ, △ⁿᵢ₋₁, △ⁿ⁻¹ᵢ)`; the centre occupies slot 1, 2, 3 respectively.
    pub fn stencil(node: Node) -> Option<[TriangleIndex; 3]> {
        if node.n == 0 || node.i == 0 {
            return None;
        }
        Some([
            TriangleIndex::new(node.n, node.i),
            TriangleIndex::new(node.n, node.i - 1),
            TriangleIndex::new(node.n - 1, node.i),
        ])
    }

    /// Every node of the region, row-major.
    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes: Vec<Node> = match *self {
            Region::Rect { n0, i0, nt, nx } => {
                (n0..=n0 + nt).flat_map(|n| (i0..=i0 + nx).map(move |i| Node::new(n, i))).collect()
            }
            Region::Patch3 { n, i } => {
                let mut v = Self::patch_boundary(n, i).to_vec();
                v.push(Node::new(n, i));
                v
            }
        };
        nodes.sort();
        nodes
    }

    /// Strictly interior nodes, row-major.
    pub fn interior_nodes(&self) -> Vec<Node> {
        match *self {
            Region::Rect { n0, i0, nt, nx } => {
                (n0 + 1..n0 + nt).flat_map(|n| (i0 + 1..i0 + nx).map(move |i| Node::new(n, i))).collect()
            }
            Region::Patch3 { n, i } => vec![Node::new(n, i)],
        }
    }

    fn patch_boundary(n: usize, i: usize) -> [Node; 6] {
        [
            Node::new(n, i + 1),
            Node::new(n + 1, i),
            Node::new(n + 1, i - 1),
            Node::new(n, i - 1),
            Node::new(n - 1, i),
            Node::new(n - 1, i + 1),
        ]
    }

    /// Boundary nodes in traversal order.
    ///
    /// Rectangles start at `(n0, i0)` and walk the bottom row, right column,
    /// top row and left column. The patch lists its six nodes starting from
    /// `(n, i+1)`.
    pub fn boundary_ordered(&self) -> Vec<Node> {
        match *self {
            Region::Rect { n0, i0, nt, nx } => {
                let (n1, i1) = (n0 + nt, i0 + nx);
                let mut out = Vec::with_capacity(2 * (nt + nx));
                out.extend((i0..=i1).map(|i| Node::new(n0, i)));
                out.extend((n0 + 1..=n1).map(|n| Node::new(n, i1)));
                out.extend((i0..i1).rev().map(|i| Node::new(n1, i)));
                out.extend((n0 + 1..n1).rev().map(|n| Node::new(n, i0)));
                out
            }
            Region::Patch3 { n, i } => Self::patch_boundary(n, i).to_vec(),
        }
    }

    /// Boundary measure carried by each boundary node: half the length of
    /// each adjacent edge of the boundary polygon.
    pub fn boundary_weights(&self, mesh: &QuadMesh) -> Vec<f64> {
        let nodes = self.boundary_ordered();
        let m = nodes.len();
        let len = |a: Node, b: Node| {
            let (ta, xa) = mesh.coords(a);
            let (tb, xb) = mesh.coords(b);
            (ta - tb).hypot(xa - xb)
        };
        (0..m).map(|k| 0.5 * (len(nodes[(k + m - 1) % m], nodes[k]) + len(nodes[k], nodes[(k + 1) % m]))).collect()
    }
}

/// Ordered boundary nodes of `region`, validated against `mesh`.
pub fn boundary_nodes(region: &Region, mesh: &QuadMesh) -> Result<Vec<Node>> {
    region.validate(mesh)?;
    Ok(region.boundary_ordered())
}

/// Dirichlet data on the boundary of a region, in traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    region: Region,
    entries: Vec<(Node, f64)>,
}

impl BoundaryData {
    pub fn new(region: Region, mesh: &QuadMesh, entries: Vec<(Node, f64)>) -> Result<Self> {
        let expected = boundary_nodes(&region, mesh)?;
        if entries.len() != expected.len() || entries.iter().zip(&expected).any(|(e, n)| e.0 != *n) {
            return Err(MslabError::InvalidBoundaryData(
                "entries must list each boundary node once, in traversal order".into(),
            ));
        }
        if entries.iter().any(|(_, v)| !v.is_finite()) {
            return Err(MslabError::NonFinite("boundary data"));
        }
        Ok(Self { region, entries })
    }

    pub fn from_values(region: Region, mesh: &QuadMesh, values: &[f64]) -> Result<Self> {
        let nodes = boundary_nodes(&region, mesh)?;
        if values.len() != nodes.len() {
            return Err(MslabError::InvalidBoundaryData(format!(
                "expected {} values, got {}",
                nodes.len(),
                values.len()
            )));
        }
        Self::new(region, mesh, nodes.into_iter().zip(values.iter().copied()).collect())
    }

    pub fn from_node_fn(region: Region, mesh: &QuadMesh, mut f: impl FnMut(Node) -> f64) -> Result<Self> {
        let nodes = boundary_nodes(&region, mesh)?;
        Self::new(region, mesh, nodes.into_iter().map(|n| (n, f(n))).collect())
    }

    /// Samples a continuous function `f(t, x)` on the boundary nodes.
    pub fn from_fn(region: Region, mesh: &QuadMesh, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_node_fn(region, mesh, |node| {
            let (t, x) = mesh.coords(node);
            f(t, x)
        })
    }

    /// Reads the boundary values of `field`.
    pub fn from_field(region: Region, field: &DiscreteField) -> Result<Self> {
        Self::from_node_fn(region, field.mesh(), |node| field.get(node))
    }

    pub fn zeros(region: Region, mesh: &QuadMesh) -> Result<Self> {
        Self::from_node_fn(region, mesh, |_| 0.0)
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn entries(&self) -> &[(Node, f64)] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same region, values replaced.
    pub fn with_values(&self, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.entries.len());
        Self { region: self.region, entries: self.entries.iter().zip(values).map(|(e, v)| (e.0, *v)).collect() }
    }

    pub fn axpy(&self, k: f64, other: &BoundaryData) -> Self {
        let vals: Vec<f64> = self.entries.iter().zip(&other.entries).map(|(a, b)| a.1 + k * b.1).collect();
        self.with_values(&vals)
    }
}

/// Spatial closure for time stepping and slice sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpatialClosure {
    /// Node `nx` neighbours node `0`; the period is `(nx+1)·dx`.
    Periodic,
    /// The end nodes `i = 0` and `i = nx` are held at the given values.
    Fixed { left: f64, right: f64 },
}
