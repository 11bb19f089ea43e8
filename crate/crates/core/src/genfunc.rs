//! Generating functionals of the discrete field theory: the boundary
//! Lagrangian, normal momenta, the multi-Hamiltonian and De Donder–Weyl
//! residuals, and the boundary Hamiltonian of mixed data.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::delsolve::{action_sum, solve_bvp, ActionProblem, BvpSolveReport};
use crate::error::{MslabError, Result};
use crate::jetmesh::{jet_extension, BoundaryData, DiscreteField, JetTriple, Node, QuadMesh, Region};
use crate::lagrangian::{eval_ld, grad_ld, LagrangianDensity};

/// Boundary Lagrangian together with the solve that produced it.
#[derive(Clone, Debug)]
pub struct BoundaryLagrangian {
    pub value: f64,
    pub solve: BvpSolveReport,
}

/// Extremal value of the action sum over fields matching `bd`.
pub fn boundary_lagrangian(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    region: &Region,
    bd: &BoundaryData,
    tol: f64,
) -> Result<BoundaryLagrangian> {
    let solve = solve_bvp(l, mesh, region, bd, tol)?;
    let value = action_sum(l, &solve.field, &region.triangles())?;
    Ok(BoundaryLagrangian { value, solve })
}

/// Normal momenta on the boundary of a region.
///
/// `covector[k]` is `∂L_∂U/∂u_k` for the `k`-th boundary node in traversal
/// order; `density[k] = covector[k] / weight[k]` is the momentum per unit
/// boundary length, paired with variations by `Σ density·δφ·weight`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMomentumField {
    pub region: Region,
    pub nodes: Vec<Node>,
    pub covector: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NormalMomentumField {
    fn new(region: Region, mesh: &QuadMesh, nodes: Vec<Node>, covector: Vec<f64>) -> Self {
        Self { region, nodes, covector, weights: region.boundary_weights(mesh) }
    }

    pub fn density(&self) -> Vec<f64> {
        self.covector.iter().zip(&self.weights).map(|(c, w)| c / w).collect()
    }

    /// `⟨δφ, π⟩ = Σ π·δφ·weight`.
    pub fn pair(&self, delta: &[f64]) -> f64 {
        assert_eq!(delta.len(), self.covector.len());
        self.covector.iter().zip(delta).map(|(c, d)| c * d).sum()
    }

    pub fn max_abs_difference(&self, other: &NormalMomentumField) -> f64 {
        self.covector.iter().zip(&other.covector).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `∂S/∂u_b` for every node in `nodes`: the sum of `D_sL_d` over the
/// triangles of `triangles` having `b` in slot `s`.
pub fn theta_sum(
    l: &LagrangianDensity,
    field: &DiscreteField,
    triangles: &[crate::jetmesh::TriangleIndex],
    nodes: &[Node],
) -> Result<Vec<f64>> {
    let index: HashMap<Node, usize> = nodes.iter().enumerate().map(|(k, n)| (*n, k)).collect();
    let mut out = vec![0.0; nodes.len()];
    for tri in triangles {
        let verts = tri.vertices();
        if verts.iter().all(|v| !index.contains_key(v)) {
            continue;
        }
        let g = grad_ld(l, &jet_extension(field, *tri)?, field.mesh())?.to_array();
        for (s, v) in verts.iter().enumerate() {
            if let Some(&k) = index.get(v) {
                out[k] += g[s];
            }
        }
    }
    Ok(out)
}

/// Normal momenta as Θ-slot sums on the solved field.
pub fn normal_momenta(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    region: &Region,
    bd: &BoundaryData,
    tol: f64,
) -> Result<NormalMomentumField> {
    let solve = solve_bvp(l, mesh, region, bd, tol)?;
    momenta_on_solution(l, mesh, region, &solve.field)
}

/// Θ-slot momenta of an already solved field.
pub fn momenta_on_solution(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    region: &Region,
    field: &DiscreteField,
) -> Result<NormalMomentumField> {
    let nodes = region.boundary_ordered();
    let covector = theta_sum(l, field, &region.triangles(), &nodes)?;
    Ok(NormalMomentumField::new(*region, mesh, nodes, covector))
}

/// Normal momenta as the central-difference gradient of the boundary
/// Lagrangian with respect to the boundary values.
pub fn envelope_momenta(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    region: &Region,
    bd: &BoundaryData,
    tol: f64,
    step: f64,
) -> Result<NormalMomentumField> {
    let base = bd.values();
    let triangles = region.triangles();
    let mut covector = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut shifted = base.clone();
        let (hi, lo) = (base[k] + step, base[k] - step);
        shifted[k] = hi;
        let plus = solve_bvp(l, mesh, region, &bd.with_values(&shifted), tol)?.field;
        shifted[k] = lo;
        let minus = solve_bvp(l, mesh, region, &bd.with_values(&shifted), tol)?.field;
        let mut delta = 0.0;
        for t in &triangles {
            delta += ld_difference(l, &jet_extension(&plus, *t)?, &jet_extension(&minus, *t)?, mesh)?;
        }
        // Divide by the representable perturbation.
        covector.push(delta / (hi - lo));
    }
    let nodes = bd.entries().iter().map(|e| e.0).collect();
    Ok(NormalMomentumField::new(*region, mesh, nodes, covector))
}

/// `L_d(a) − L_d(b)`. Quadratic densities use `½(a − b)ᵀQ(a + b)`.
fn ld_difference(l: &LagrangianDensity, a: &JetTriple, b: &JetTriple, mesh: &QuadMesh) -> Result<f64> {
    let Some(q) = l.quadratic_coefficients() else {
        return Ok(eval_ld(l, a, mesh)? - eval_ld(l, b, mesh)?);
    };
    let d = JetTriple::new([a.u1 - b.u1, a.u2 - b.u2, a.u3 - b.u3], mesh)?;
    let s = JetTriple::new([a.u1 + b.u1, a.u2 + b.u2, a.u3 + b.u3], mesh)?;
    let (dz, sz) = ([d.v, d.w, d.ubar], [s.v, s.w, s.ubar]);
    let m = q.matrix();
    let quad: f64 = (0..3).map(|r| dz[r] * (0..3).map(|c| m[r][c] * sz[c]).sum::<f64>()).sum();
    Ok(0.25 * mesh.dt * mesh.dx * quad)
}

/// Multi-momenta and multi-Hamiltonian at a jet point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendreData {
    pub p_t: f64,
    pub p_x: f64,
    /// `p_t·v + p_x·w − L`.
    pub h: f64,
    /// The scalar momentum `L − p_t·v − p_x·w` for which the extended
    /// Hamiltonian vanishes.
    pub p_scalar: f64,
}

/// The multi-Hamiltonian `H(y, p_t, p_x)` of a quadratic density.
///
/// With `L = ½zᵀMz + y·cᵀz + ½·uu·y²`, `z = (v, w)`:
/// `H = ½(p − cy)ᵀM⁻¹(p − cy) − ½·uu·y²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiHamiltonian {
    minv: [[f64; 2]; 2],
    c: [f64; 2],
    uu: f64,
}

impl MultiHamiltonian {
    pub fn from_density(l: &LagrangianDensity) -> Result<Self> {
        let q = l
            .quadratic_coefficients()
            .ok_or_else(|| MslabError::Unsupported(format!("Legendre transform of density `{}`", l.name())))?;
        let det = q.vv * q.ww - q.vw * q.vw;
        let scale = q.vv.abs().max(q.ww.abs()).max(q.vw.abs());
        if !(det.abs() > 1e-12 * scale * scale) {
            return Err(MslabError::Unsupported("velocity Hessian is not invertible".into()));
        }
        Ok(Self { minv: [[q.ww / det, -q.vw / det], [-q.vw / det, q.vv / det]], c: [q.vu, q.wu], uu: q.uu })
    }

    /// `∂H/∂(p_t, p_x)`, the velocities.
    pub fn dp(&self, y: f64, p_t: f64, p_x: f64) -> [f64; 2] {
        let r = [p_t - self.c[0] * y, p_x - self.c[1] * y];
        [self.minv[0][0] * r[0] + self.minv[0][1] * r[1], self.minv[1][0] * r[0] + self.minv[1][1] * r[1]]
    }

    pub fn value(&self, y: f64, p_t: f64, p_x: f64) -> f64 {
        let z = self.dp(y, p_t, p_x);
        let r = [p_t - self.c[0] * y, p_x - self.c[1] * y];
        0.5 * (r[0] * z[0] + r[1] * z[1]) - 0.5 * self.uu * y * y
    }

    /// `∂H/∂y`.
    pub fn dy(&self, y: f64, p_t: f64, p_x: f64) -> f64 {
        let z = self.dp(y, p_t, p_x);
        -(self.c[0] * z[0] + self.c[1] * z[1]) - self.uu * y
    }
}

/// Legendre transform `p = ∂L/∂(v, w)`, `H = p·z − L`.
pub fn legendre(l: &LagrangianDensity, v: f64, w: f64, ubar: f64) -> Result<LegendreData> {
    MultiHamiltonian::from_density(l)?;
    let g = l.gradient(v, w, ubar)?;
    let lag = l.eval(v, w, ubar)?;
    let h = g[0] * v + g[1] * w - lag;
    Ok(LegendreData { p_t: g[0], p_x: g[1], h, p_scalar: -h })
}

/// Residuals of the De Donder–Weyl equations at a node, with forward
/// differences in `t` and `x`:
/// `r_y = (∂_t y − ∂H/∂p_t, ∂_x y − ∂H/∂p_x)`,
/// `r_p = ∂_t p_t + ∂_x p_x + ∂H/∂y`.
pub fn ddw_residual(
    ham: &MultiHamiltonian,
    y: &DiscreteField,
    p_t: &DiscreteField,
    p_x: &DiscreteField,
    node: Node,
) -> Result<([f64; 2], f64)> {
    let mesh = y.mesh();
    if p_t.mesh() != mesh || p_x.mesh() != mesh {
        return Err(MslabError::InvalidArgument("fields live on different meshes".into()));
    }
    if node.n + 1 > mesh.nt || node.i + 1 > mesh.nx {
        return Err(MslabError::StencilOutOfRange { n: node.n, i: node.i });
    }
    let up = Node::new(node.n + 1, node.i);
    let right = Node::new(node.n, node.i + 1);
    let dt = |f: &DiscreteField| (f.get(up) - f.get(node)) / mesh.dt;
    let dx = |f: &DiscreteField| (f.get(right) - f.get(node)) / mesh.dx;
    let (yv, pt, px) = (y.get(node), p_t.get(node), p_x.get(node));
    let z = ham.dp(yv, pt, px);
    let ry = [dt(y) - z[0], dx(y) - z[1]];
    let rp = dt(p_t) + dx(p_x) + ham.dy(yv, pt, px);
    Ok((ry, rp))
}

/// Max-norm of [`ddw_residual`] over every node with a forward stencil.
pub fn max_ddw_residual(
    ham: &MultiHamiltonian,
    y: &DiscreteField,
    p_t: &DiscreteField,
    p_x: &DiscreteField,
) -> Result<f64> {
    let mesh = y.mesh();
    let mut worst = 0.0f64;
    for n in 0..mesh.nt {
        for i in 0..mesh.nx {
            let (ry, rp) = ddw_residual(ham, y, p_t, p_x, Node::new(n, i))?;
            worst = worst.max(ry[0].abs()).max(ry[1].abs()).max(rp.abs());
        }
    }
    Ok(worst)
}

/// Field values on `A` and momentum densities on `B` for a rectangle.
///
/// `B` is the top row without its two corners; `A` is the rest of the
/// boundary. Both lists follow the boundary traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedBoundaryData {
    region: Region,
    phi_a: Vec<(Node, f64)>,
    pi_b: Vec<(Node, f64)>,
}

/// The supported A/B split of a rectangle's boundary.
pub fn mixed_partition(region: &Region, mesh: &QuadMesh) -> Result<(Vec<Node>, Vec<Node>)> {
    region.validate(mesh)?;
    let Region::Rect { n0, i0, nt, nx } = *region else {
        return Err(MslabError::Unsupported("mixed boundary data needs a rectangle".into()));
    };
    if nt < 2 || nx < 2 {
        return Err(MslabError::InvalidRegion("mixed problems need at least two intervals per side".into()));
    }
    let top = n0 + nt;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for node in region.boundary_ordered() {
        if node.n == top && node.i > i0 && node.i < i0 + nx {
            b.push(node);
        } else {
            a.push(node);
        }
    }
    Ok((a, b))
}

fn parse_node_key(key: &str) -> Result<Node> {
    let inner = key.trim().trim_start_matches('(').trim_end_matches(')');
    let mut parts = inner.split(',').map(str::trim);
    let bad = || MslabError::Parse(format!("node key `{key}` is not of the form `n,i`"));
    let n = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let i = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Node::new(n, i))
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MixedJson {
    #[serde(rename = "A")]
    a: BTreeMap<String, f64>,
    #[serde(rename = "B")]
    b: BTreeMap<String, f64>,
}

impl MixedBoundaryData {
    pub fn new(region: Region, mesh: &QuadMesh, phi_a: Vec<f64>, pi_b: Vec<f64>) -> Result<Self> {
        let (a, b) = mixed_partition(&region, mesh)?;
        if phi_a.len() != a.len() || pi_b.len() != b.len() {
            return Err(MslabError::InvalidBoundaryData(format!(
                "expected {} field values and {} momenta, got {} and {}",
                a.len(),
                b.len(),
                phi_a.len(),
                pi_b.len()
            )));
        }
        if phi_a.iter().chain(&pi_b).any(|v| !v.is_finite()) {
            return Err(MslabError::NonFinite("mixed boundary data"));
        }
        Ok(Self { region, phi_a: a.into_iter().zip(phi_a).collect(), pi_b: b.into_iter().zip(pi_b).collect() })
    }

    /// `{"A":{"n,i":value,..},"B":{"n,i":value,..}}`; every node of the
    /// partition must appear exactly once.
    pub fn from_json(region: Region, mesh: &QuadMesh, text: &str) -> Result<Self> {
        let raw: MixedJson = serde_json::from_str(text).map_err(|e| MslabError::Parse(format!("mixed data: {e}")))?;
        let (a, b) = mixed_partition(&region, mesh)?;
        let lookup = |map: &BTreeMap<String, f64>, nodes: &[Node], side: &str| -> Result<Vec<f64>> {
            let mut parsed = HashMap::new();
            for (k, v) in map {
                if parsed.insert(parse_node_key(k)?, *v).is_some() {
                    return Err(MslabError::Parse(format!("node {k} repeated in {side}")));
                }
            }
            if parsed.len() != nodes.len() {
                return Err(MslabError::InvalidBoundaryData(format!(
                    "{side} must list {} nodes, found {}",
                    nodes.len(),
                    parsed.len()
                )));
            }
            nodes
                .iter()
                .map(|n| {
                    parsed
                        .get(n)
                        .copied()
                        .ok_or_else(|| MslabError::InvalidBoundaryData(format!("{side} is missing node {n}")))
                })
                .collect()
        };
        Self::new(region, mesh, lookup(&raw.a, &a, "A")?, lookup(&raw.b, &b, "B")?)
    }

    pub fn to_json(&self) -> String {
        let key = |n: &Node| format!("{},{}", n.n, n.i);
        let raw = MixedJson {
            a: self.phi_a.iter().map(|(n, v)| (key(n), *v)).collect(),
            b: self.pi_b.iter().map(|(n, v)| (key(n), *v)).collect(),
        };
        serde_json::to_string(&raw).expect("plain maps serialize")
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn phi_a(&self) -> &[(Node, f64)] {
        &self.phi_a
    }

    pub fn pi_b(&self) -> &[(Node, f64)] {
        &self.pi_b
    }

    pub fn with_values(&self, phi_a: &[f64], pi_b: &[f64]) -> Self {
        assert_eq!(phi_a.len(), self.phi_a.len());
        assert_eq!(pi_b.len(), self.pi_b.len());
        Self {
            region: self.region,
            phi_a: self.phi_a.iter().zip(phi_a).map(|(e, v)| (e.0, *v)).collect(),
            pi_b: self.pi_b.iter().zip(pi_b).map(|(e, v)| (e.0, *v)).collect(),
        }
    }

    /// Reads `φ_A` and the Θ-slot momentum densities on `B` off a solved
    /// Dirichlet field.
    pub fn from_solution(l: &LagrangianDensity, region: Region, field: &DiscreteField) -> Result<Self> {
        let mesh = field.mesh();
        let (a, b) = mixed_partition(&region, mesh)?;
        let momenta = momenta_on_solution(l, mesh, &region, field)?;
        let density: HashMap<Node, f64> = momenta.nodes.iter().copied().zip(momenta.density()).collect();
        Self::new(region, mesh, a.iter().map(|n| field.get(*n)).collect(), b.iter().map(|n| density[n]).collect())
    }
}

/// Boundary Hamiltonian and the data of its solve.
#[derive(Clone, Debug)]
pub struct BoundaryHamiltonian {
    pub value: f64,
    pub field: DiscreteField,
    /// Boundary weight of each `B` node.
    pub weights_b: Vec<f64>,
    /// Boundary weight of each `A` node.
    pub weights_a: Vec<f64>,
    /// Θ-slot momentum densities on `A` at the solution.
    pub pi_a: Vec<f64>,
    /// Solved field values on `B`.
    pub phi_b: Vec<f64>,
    pub rcond: f64,
}

/// `H_∂U = −S + Σ_B w_b·π_b·φ_b`, with the field fixed on `A`, stationary
/// inside, and `∂S/∂u_b = w_b·π_b` on `B`.
pub fn boundary_hamiltonian(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    mixed: &MixedBoundaryData,
    tol: f64,
) -> Result<BoundaryHamiltonian> {
    if !l.is_quadratic() {
        return Err(MslabError::Unsupported("boundary Hamiltonian needs a quadratic density".into()));
    }
    let region = mixed.region;
    let (a, b) = mixed_partition(&region, mesh)?;
    let all_weights: HashMap<Node, f64> =
        region.boundary_ordered().into_iter().zip(region.boundary_weights(mesh)).collect();
    let weights_a: Vec<f64> = a.iter().map(|n| all_weights[n]).collect();
    let weights_b: Vec<f64> = b.iter().map(|n| all_weights[n]).collect();

    let mut field = DiscreteField::zeros(*mesh);
    for (node, v) in &mixed.phi_a {
        field.set(*node, *v);
    }
    let mut free = region.interior_nodes();
    let mut forcing = vec![0.0; free.len()];
    free.extend(&b);
    forcing.extend(mixed.pi_b.iter().zip(&weights_b).map(|((_, p), w)| p * w));
    // Row-major ordering keeps the band narrow.
    let mut order: Vec<usize> = (0..free.len()).collect();
    order.sort_by_key(|&k| free[k]);
    let free: Vec<Node> = order.iter().map(|&k| free[k]).collect();
    let forcing: Vec<f64> = order.iter().map(|&k| forcing[k]).collect();

    let triangles = region.triangles();
    let problem = ActionProblem::new(l, triangles.clone(), free, forcing);
    let summary = problem.solve(&mut field, tol)?;

    let s = action_sum(l, &field, &triangles)?;
    let phi_b: Vec<f64> = b.iter().map(|n| field.get(*n)).collect();
    let pairing: f64 = mixed.pi_b.iter().zip(&weights_b).zip(&phi_b).map(|(((_, p), w), f)| p * w * f).sum();
    let cov_a = theta_sum(l, &field, &triangles, &a)?;
    let pi_a = cov_a.iter().zip(&weights_a).map(|(c, w)| c / w).collect();
    Ok(BoundaryHamiltonian { value: -s + pairing, field, weights_b, weights_a, pi_a, phi_b, rcond: summary.rcond })
}
