//! Discrete Euler–Lagrange equations: residuals, row stepping, boundary-value
//! solves and the linearized solver.
//!
//! The DEL equation at a node is the derivative of the action sum
//! `S = Σ L_d` with respect to that node's value, so every solve below is a
//! stationarity problem for `S`. Jacobians are Hessians of `S` and hence
//! symmetric.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{MslabError, Result};
use crate::jetmesh::{
    jet_extension, BoundaryData, DiscreteField, JetTriple, Node, QuadMesh, Region, SpatialClosure, TriangleIndex,
};
use crate::lagrangian::{eval_ld, grad_ld, hess_ld, LagrangianDensity};
use crate::linalg::{BandLu, BandMatrix};

/// Default Newton tolerance on the max-norm residual.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Reciprocal condition estimates below this raise [`MslabError::SingularSystem`].
pub const SINGULAR_RCOND: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
const ARMIJO_C: f64 = 1e-4;

/// DEL residual at `(n, i)`:
/// `D₁L_d(△ⁿᵢ) + D₂L_d(△ⁿᵢ₋₁) + D₃L_d(△ⁿ⁻¹ᵢ)`.
pub fn del_residual(l: &LagrangianDensity, field: &DiscreteField, n: usize, i: usize) -> Result<f64> {
    let mesh = field.mesh();
    if n == 0 || i == 0 || n + 1 > mesh.nt || i + 1 > mesh.nx {
        return Err(MslabError::StencilOutOfRange { n, i });
    }
    let [a, b, c] = Region::stencil(Node::new(n, i)).expect("n, i >= 1");
    Ok(grad_ld(l, &jet_extension(field, a)?, mesh)?.d1
        + grad_ld(l, &jet_extension(field, b)?, mesh)?.d2
        + grad_ld(l, &jet_extension(field, c)?, mesh)?.d3)
}

/// Largest `|del_residual|` over the interior nodes of `region`.
pub fn max_del_residual(l: &LagrangianDensity, field: &DiscreteField, region: &Region) -> Result<f64> {
    region.interior_nodes().iter().try_fold(0.0f64, |m, node| Ok(m.max(del_residual(l, field, node.n, node.i)?.abs())))
}

/// `Σ L_d` over `triangles`.
pub fn action_sum(l: &LagrangianDensity, field: &DiscreteField, triangles: &[TriangleIndex]) -> Result<f64> {
    triangles.iter().try_fold(0.0, |acc, t| Ok(acc + eval_ld(l, &jet_extension(field, *t)?, field.mesh())?))
}

/// Dense Hessian of `Σ L_d` over `triangles`, restricted to `nodes`.
pub fn action_hessian(
    l: &LagrangianDensity,
    field: &DiscreteField,
    triangles: &[TriangleIndex],
    nodes: &[Node],
) -> Result<Vec<Vec<f64>>> {
    let index: HashMap<Node, usize> = nodes.iter().enumerate().map(|(k, n)| (*n, k)).collect();
    let mut h = vec![vec![0.0; nodes.len()]; nodes.len()];
    for tri in triangles {
        let hl = hess_ld(l, &jet_extension(field, *tri)?, field.mesh())?;
        let verts = tri.vertices();
        for (s, a) in verts.iter().enumerate() {
            let Some(&ra) = index.get(a) else { continue };
            for (t, b) in verts.iter().enumerate() {
                if let Some(&cb) = index.get(b) {
                    h[ra][cb] += hl[s][t];
                }
            }
        }
    }
    Ok(h)
}

/// Stationarity of `S(u) − Σ_a f_a u_a` over a set of free nodes, with every
/// other node held at its current value.
///
/// `f ≡ 0` gives the DEL equations; nonzero forcing on boundary nodes
/// prescribes their normal momenta.
#[derive(Clone, Debug)]
pub struct ActionProblem<'a> {
    l: &'a LagrangianDensity,
    triangles: Vec<TriangleIndex>,
    free: Vec<Node>,
    index: HashMap<Node, usize>,
    forcing: Vec<f64>,
    kl: usize,
}

/// Outcome of a Newton solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub residual: f64,
    pub rcond: f64,
}

impl<'a> ActionProblem<'a> {
    pub fn new(l: &'a LagrangianDensity, triangles: Vec<TriangleIndex>, free: Vec<Node>, forcing: Vec<f64>) -> Self {
        assert_eq!(free.len(), forcing.len());
        let index: HashMap<Node, usize> = free.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        let mut kl = 0;
        for tri in &triangles {
            let ids: Vec<usize> = tri.vertices().iter().filter_map(|v| index.get(v).copied()).collect();
            for a in &ids {
                for b in &ids {
                    kl = kl.max(a.abs_diff(*b));
                }
            }
        }
        Self { l, triangles, free, index, forcing, kl }
    }

    pub fn free_nodes(&self) -> &[Node] {
        &self.free
    }

    /// `∂S/∂u_a − f_a` for every free node.
    pub fn residual(&self, field: &DiscreteField) -> Result<Vec<f64>> {
        let mut r: Vec<f64> = self.forcing.iter().map(|f| -f).collect();
        for tri in &self.triangles {
            let verts = tri.vertices();
            if verts.iter().all(|v| !self.index.contains_key(v)) {
                continue;
            }
            let g = grad_ld(self.l, &jet_extension(field, *tri)?, field.mesh())?.to_array();
            for (s, v) in verts.iter().enumerate() {
                if let Some(&k) = self.index.get(v) {
                    r[k] += g[s];
                }
            }
        }
        Ok(r)
    }

    /// Jacobian over the free nodes and the infinity norm of the full
    /// Jacobian rows, held nodes included.
    pub fn jacobian(&self, field: &DiscreteField) -> Result<(BandMatrix, f64)> {
        let n = self.free.len();
        let mut j = BandMatrix::zeros(n, self.kl, self.kl);
        let mut held: Vec<HashMap<Node, f64>> = vec![HashMap::new(); n];
        for tri in &self.triangles {
            let verts = tri.vertices();
            if verts.iter().all(|v| !self.index.contains_key(v)) {
                continue;
            }
            let h = hess_ld(self.l, &jet_extension(field, *tri)?, field.mesh())?;
            for (s, a) in verts.iter().enumerate() {
                let Some(&ra) = self.index.get(a) else { continue };
                for (t, b) in verts.iter().enumerate() {
                    match self.index.get(b) {
                        Some(&cb) => j.add(ra, cb, h[s][t]),
                        None => *held[ra].entry(*b).or_insert(0.0) += h[s][t],
                    }
                }
            }
        }
        let mut scale = 0.0f64;
        for (r, extra) in held.iter().enumerate() {
            let lo = r.saturating_sub(self.kl);
            let hi = (r + self.kl).min(n - 1);
            let row: f64 =
                (lo..=hi).map(|c| j.get(r, c).abs()).sum::<f64>() + extra.values().map(|v| v.abs()).sum::<f64>();
            scale = scale.max(row);
        }
        Ok((j, scale))
    }

    fn factor(&self, field: &DiscreteField) -> Result<(BandLu, f64)> {
        let (j, scale) = self.jacobian(field)?;
        let lu = j.factor();
        let rcond = lu.rcond_inf(scale);
        if !(rcond >= SINGULAR_RCOND) {
            return Err(MslabError::SingularSystem { rcond });
        }
        Ok((lu, rcond))
    }

    fn update(&self, field: &DiscreteField, step: &[f64], alpha: f64) -> DiscreteField {
        let mut out = field.clone();
        for (node, d) in self.free.iter().zip(step) {
            out.set(*node, field.get(*node) + alpha * d);
        }
        out
    }

    /// Newton with Armijo backtracking on `½‖r‖²`. The Jacobian is factored
    /// at every iterate, including the accepted one, so singular systems are
    /// reported even when the initial guess already solves them.
    pub fn solve(&self, field: &mut DiscreteField, tol: f64) -> Result<NewtonSummary> {
        if self.free.is_empty() {
            return Err(MslabError::InvalidRegion("no free nodes to solve for".into()));
        }
        let mut r = self.residual(field)?;
        for iteration in 0..=MAX_NEWTON_ITERATIONS {
            let (lu, rcond) = self.factor(field)?;
            let norm = max_abs(&r);
            if norm <= tol {
                return Ok(NewtonSummary { iterations: iteration, residual: norm, rcond });
            }
            if iteration == MAX_NEWTON_ITERATIONS {
                break;
            }
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let step = lu.solve(&neg);
            let merit = sum_sq(&r);
            let mut alpha = 1.0;
            let (trial, r_trial) = loop {
                let trial = self.update(field, &step, alpha);
                match self.residual(&trial) {
                    Ok(rt) if sum_sq(&rt) <= (1.0 - 2.0 * ARMIJO_C * alpha) * merit => break (trial, rt),
                    Ok(rt) if alpha < 1e-10 => break (trial, rt),
                    _ if alpha < 1e-10 => {
                        return Err(MslabError::NonConvergence { iterations: iteration, residual: norm })
                    }
                    _ => alpha *= 0.5,
                }
            };
            *field = trial;
            r = r_trial;
        }
        Err(MslabError::NonConvergence { iterations: MAX_NEWTON_ITERATIONS, residual: max_abs(&r) })
    }

    /// Solves `J δ = rhs` at `field` with the singularity check applied.
    pub fn linear_solve(&self, field: &DiscreteField, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (lu, rcond) = self.factor(field)?;
        Ok((lu.solve(rhs), rcond))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Result of [`solve_bvp`].
#[derive(Clone, Debug)]
pub struct BvpSolveReport {
    /// Full field: boundary data on ∂U, solved values inside, zero elsewhere.
    pub field: DiscreteField,
    /// Solved interior values, row-major.
    pub interior: Vec<(Node, f64)>,
    pub residual: f64,
    pub iterations: usize,
    /// Reciprocal condition estimate of the final Jacobian.
    pub rcond: f64,
}

fn check_region(region: &Region, bd: &BoundaryData, mesh: &QuadMesh) -> Result<()> {
    region.validate(mesh)?;
    if bd.region() != *region {
        return Err(MslabError::InvalidBoundaryData("boundary data belongs to a different region".into()));
    }
    Ok(())
}

/// Dirichlet problem on `region`: boundary nodes are data, strictly interior
/// nodes are unknowns, one DEL equation per interior node.
pub fn solve_bvp(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    region: &Region,
    bd: &BoundaryData,
    tol: f64,
) -> Result<BvpSolveReport> {
    solve_bvp_from(l, region, bd, tol, DiscreteField::zeros(*mesh))
}

/// [`solve_bvp`] starting Newton from the interior values of `guess`.
pub fn solve_bvp_from(
    l: &LagrangianDensity,
    region: &Region,
    bd: &BoundaryData,
    tol: f64,
    guess: DiscreteField,
) -> Result<BvpSolveReport> {
    let mesh = *guess.mesh();
    check_region(region, bd, &mesh)?;
    if !(tol > 0.0) {
        return Err(MslabError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let interior = region.interior_nodes();
    if interior.is_empty() {
        return Err(MslabError::InvalidRegion("region has no interior node".into()));
    }
    let mut field = guess;
    for (node, value) in bd.entries() {
        field.set(*node, *value);
    }
    let forcing = vec![0.0; interior.len()];
    let problem = ActionProblem::new(l, region.triangles(), interior.clone(), forcing);
    let summary = problem.solve(&mut field, tol)?;
    Ok(BvpSolveReport {
        interior: interior.iter().map(|n| (*n, field.get(*n))).collect(),
        field,
        residual: summary.residual,
        iterations: summary.iterations,
        rcond: summary.rcond,
    })
}

/// First variation about `base` on `region` with tangent boundary values
/// `tangent_bd`: solves the linearized DEL equations `J_II δu_I = −J_IB δu_B`.
pub fn tangent_solve(
    l: &LagrangianDensity,
    base: &DiscreteField,
    region: &Region,
    tangent_bd: &BoundaryData,
) -> Result<DiscreteField> {
    let mesh = *base.mesh();
    check_region(region, tangent_bd, &mesh)?;
    let interior = region.interior_nodes();
    if interior.is_empty() {
        return Err(MslabError::InvalidRegion("region has no interior node".into()));
    }
    let del = max_del_residual(l, base, region)?;
    if del > 1e-8 {
        return Err(MslabError::Precondition(format!("base field is not a solution (DEL residual {del:.3e})")));
    }
    let boundary: Vec<Node> = tangent_bd.entries().iter().map(|e| e.0).collect();
    let mut all = interior.clone();
    all.extend(&boundary);
    let h = action_hessian(l, base, &region.triangles(), &all)?;
    let ni = interior.len();
    let rhs: Vec<f64> = (0..ni)
        .map(|r| -tangent_bd.entries().iter().enumerate().map(|(b, e)| h[r][ni + b] * e.1).sum::<f64>())
        .collect();
    let problem = ActionProblem::new(l, region.triangles(), interior.clone(), vec![0.0; ni]);
    let (x, _) = problem.linear_solve(base, &rhs)?;
    let mut out = DiscreteField::zeros(mesh);
    for (node, v) in tangent_bd.entries() {
        out.set(*node, *v);
    }
    for (node, v) in interior.iter().zip(x) {
        out.set(*node, v);
    }
    Ok(out)
}

fn row_index(i: isize, len: usize, closure: &SpatialClosure) -> Option<usize> {
    match closure {
        SpatialClosure::Periodic => Some(i.rem_euclid(len as isize) as usize),
        SpatialClosure::Fixed { .. } => (i >= 0 && (i as usize) < len).then_some(i as usize),
    }
}

/// Solves the DEL equations of row `n` for row `n+1`, given rows `n−1`
/// (`prev`) and `n` (`cur`).
///
/// With [`SpatialClosure::Periodic`] node `len−1` neighbours node `0` and
/// every node carries an equation. With [`SpatialClosure::Fixed`] the end
/// values of the new row are prescribed and the inner nodes carry the
/// equations.
pub fn step_row(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    prev: &[f64],
    cur: &[f64],
    closure: SpatialClosure,
) -> Result<Vec<f64>> {
    let len = cur.len();
    if prev.len() != len || len < 3 {
        return Err(MslabError::InvalidArgument("rows must have equal length of at least 3".into()));
    }
    if prev.iter().chain(cur).any(|x| !x.is_finite()) {
        return Err(MslabError::NonFinite("row data"));
    }
    let (eqs, free): (Vec<usize>, Vec<usize>) = match closure {
        SpatialClosure::Periodic => ((0..len).collect(), (0..len).collect()),
        SpatialClosure::Fixed { .. } => ((1..len - 1).collect(), (1..len - 1).collect()),
    };
    let slot: HashMap<usize, usize> = free.iter().enumerate().map(|(k, i)| (*i, k)).collect();
    let mut next: Vec<f64> = (0..len).map(|i| 2.0 * cur[i] - prev[i]).collect();
    if let SpatialClosure::Fixed { left, right } = closure {
        next[0] = left;
        next[len - 1] = right;
    }
    let at = |row: &[f64], i: isize| row[row_index(i, len, &closure).expect("index in row")];
    let jet = |a: f64, b: f64, c: f64| JetTriple::new([a, b, c], mesh);

    let eval = |next: &[f64], with_jacobian: bool| -> Result<(Vec<f64>, Option<BandMatrix>)> {
        let m = free.len();
        let mut r = vec![0.0; m];
        let mut jac = with_jacobian.then(|| BandMatrix::zeros(m, m.saturating_sub(1), m.saturating_sub(1)));
        for (k, &i) in eqs.iter().enumerate() {
            let i = i as isize;
            let ta = jet(at(cur, i), at(cur, i + 1), at(next, i))?;
            let tb = jet(at(cur, i - 1), at(cur, i), at(next, i - 1))?;
            let tc = jet(at(prev, i), at(prev, i + 1), at(cur, i))?;
            r[k] = grad_ld(l, &ta, mesh)?.d1 + grad_ld(l, &tb, mesh)?.d2 + grad_ld(l, &tc, mesh)?.d3;
            if let Some(j) = jac.as_mut() {
                let ha = hess_ld(l, &ta, mesh)?;
                let hb = hess_ld(l, &tb, mesh)?;
                let ia = row_index(i, len, &closure).expect("in row");
                let ib = row_index(i - 1, len, &closure).expect("in row");
                if let Some(&c) = slot.get(&ia) {
                    j.add(k, c, ha[0][2]);
                }
                if let Some(&c) = slot.get(&ib) {
                    j.add(k, c, hb[1][2]);
                }
            }
        }
        Ok((r, jac))
    };

    for _ in 0..=MAX_NEWTON_ITERATIONS {
        let (r, jac) = eval(&next, true)?;
        let jac = jac.expect("requested");
        let scale = jac.norm_inf();
        let lu = jac.factor();
        let rcond = lu.rcond_inf(scale);
        if !(rcond >= SINGULAR_RCOND) {
            return Err(MslabError::SingularSystem { rcond });
        }
        if max_abs(&r) <= DEFAULT_TOL {
            return Ok(next);
        }
        let step = lu.solve(&r.iter().map(|x| -x).collect::<Vec<_>>());
        let merit = sum_sq(&r);
        let mut alpha = 1.0;
        loop {
            let mut trial = next.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += alpha * step[k];
            }
            let ok = eval(&trial, false).map(|(rt, _)| sum_sq(&rt) <= (1.0 - 2.0 * ARMIJO_C * alpha) * merit);
            if matches!(ok, Ok(true)) || alpha < 1e-10 {
                next = trial;
                break;
            }
            alpha *= 0.5;
        }
    }
    let (r, _) = eval(&next, false)?;
    Err(MslabError::NonConvergence { iterations: MAX_NEWTON_ITERATIONS, residual: max_abs(&r) })
}

/// Fills rows `2..=nt` of a field from its first two rows by repeated
/// [`step_row`].
pub fn evolve(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    row0: &[f64],
    row1: &[f64],
    closure: SpatialClosure,
) -> Result<DiscreteField> {
    let mut field = DiscreteField::zeros(*mesh);
    if row0.len() != mesh.nx + 1 || row1.len() != mesh.nx + 1 {
        return Err(MslabError::InvalidArgument(format!("initial rows must have {} entries", mesh.nx + 1)));
    }
    field.set_row(0, row0);
    field.set_row(1, row1);
    for n in 1..mesh.nt {
        let next = step_row(l, mesh, &field.row(n - 1), &field.row(n), closure)?;
        field.set_row(n + 1, &next);
    }
    Ok(field)
}

/// A discrete solution grown from random initial rows in `[-1, 1]`.
///
/// With a fixed closure the end values of the initial rows are set to the
/// closure's values so every row is consistent.
pub fn random_solution<R: Rng>(
    l: &LagrangianDensity,
    mesh: &QuadMesh,
    closure: SpatialClosure,
    rng: &mut R,
) -> Result<DiscreteField> {
    let mut rows: [Vec<f64>; 2] = [0, 1].map(|_| (0..=mesh.nx).map(|_| rng.gen_range(-1.0..1.0)).collect());
    if let SpatialClosure::Fixed { left, right } = closure {
        for row in rows.iter_mut() {
            row[0] = left;
            row[mesh.nx] = right;
        }
    }
    evolve(l, mesh, &rows[0], &rows[1], closure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const WAVE: LagrangianDensity = LagrangianDensity::LinearWave;

    fn leapfrog(field: &DiscreteField, n: usize, i: usize) -> f64 {
        let m = field.mesh();
        let u = |a: usize, b: usize| field.get(Node::new(a, b));
        let tt = (u(n + 1, i) - 2.0 * u(n, i) + u(n - 1, i)) / (m.dt * m.dt);
        let xx = (u(n, i + 1) - 2.0 * u(n, i) + u(n, i - 1)) / (m.dx * m.dx);
        0.5 * m.dt * m.dx * (xx - tt)
    }

    #[test]
    fn residual_vanishes_on_affine_fields() {
        let m = QuadMesh::new(0.3, 0.7, 4, 4).unwrap();
        let c = DiscreteField::from_node_fn(m, |_| 5.0).unwrap();
        let a = DiscreteField::from_node_fn(m, |nd| 2.0 * nd.n as f64 + 3.0 * nd.i as f64).unwrap();
        for f in [c, a] {
            for n in 1..4 {
                for i in 1..4 {
                    assert!(del_residual(&WAVE, &f, n, i).unwrap().abs() < 1e-14);
                }
            }
        }
        assert!(matches!(
            del_residual(&WAVE, &DiscreteField::zeros(m), 0, 1),
            Err(MslabError::StencilOutOfRange { .. })
        ));
        assert!(del_residual(&WAVE, &DiscreteField::zeros(m), 4, 1).is_err());
    }

    #[test]
    fn residual_is_scaled_leapfrog() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = QuadMesh::new(0.4, 0.9, 5, 5).unwrap();
        let mut spike = DiscreteField::zeros(m);
        spike.set(Node::new(3, 2), 1.0);
        let f = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        for field in [spike, f] {
            for n in 1..5 {
                for i in 1..5 {
                    let r = del_residual(&WAVE, &field, n, i).unwrap();
                    assert!((r - leapfrog(&field, n, i)).abs() < 1e-13);
                }
            }
        }
        let unit = QuadMesh::new(1.0, 1.0, 2, 2).unwrap();
        let mut spike = DiscreteField::zeros(unit);
        spike.set(Node::new(2, 1), 1.0);
        assert!((del_residual(&WAVE, &spike, 1, 1).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn explicit_step_hand_value() {
        let m = QuadMesh::new(0.5, 1.0, 2, 4).unwrap();
        let next =
            step_row(&WAVE, &m, &[0.0; 5], &[0.0, 0.0, 1.0, 0.0, 0.0], SpatialClosure::Fixed { left: 0.0, right: 0.0 })
                .unwrap();
        assert!((next[2] - 1.5).abs() < 1e-14);
        assert!((next[1] - 0.25).abs() < 1e-14);
        let k = step_row(&WAVE, &m, &[2.0; 5], &[2.0; 5], SpatialClosure::Periodic).unwrap();
        assert!(k.iter().all(|x| (x - 2.0).abs() < 1e-14));
    }

    #[test]
    fn stepped_fields_satisfy_del() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = QuadMesh::new(0.02, 0.04, 30, 25).unwrap();
        let f = random_solution(&WAVE, &m, SpatialClosure::Fixed { left: 0.3, right: -0.1 }, &mut rng).unwrap();
        let region = Region::Rect { n0: 0, i0: 0, nt: 30, nx: 25 };
        assert!(max_del_residual(&WAVE, &f, &region).unwrap() <= 1e-12);
        let l = LagrangianDensity::quartic_wave(0.5);
        let f = random_solution(&l, &m, SpatialClosure::Fixed { left: 0.0, right: 0.0 }, &mut rng).unwrap();
        assert!(max_del_residual(&l, &f, &region).unwrap() <= 1e-12);
    }

    #[test]
    fn standing_wave_converges_at_second_order() {
        let exact = |t: f64, x: f64| (PI * x).sin() * (PI * t).cos();
        let mut errs = Vec::new();
        for nx in [16usize, 32, 64] {
            let dx = 1.0 / nx as f64;
            let dt = 0.5 * dx;
            let nt = (0.5 / dt).round() as usize;
            let m = QuadMesh::new(dt, dx, nt, nx).unwrap();
            let row = |n: usize| (0..=nx).map(|i| exact(n as f64 * dt, i as f64 * dx)).collect::<Vec<_>>();
            let f = evolve(&WAVE, &m, &row(0), &row(1), SpatialClosure::Fixed { left: 0.0, right: 0.0 }).unwrap();
            let err = (0..=nx).map(|i| (f.get(Node::new(nt, i)) - exact(0.5, i as f64 * dx)).abs()).fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn patch_hand_solution() {
        let m = QuadMesh::new(1.0, 2.0, 4, 4).unwrap();
        let r = Region::Patch3 { n: 2, i: 2 };
        let zero = solve_bvp(&WAVE, &m, &r, &BoundaryData::zeros(r, &m).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(zero.interior[0].1, 0.0);
        let bd = BoundaryData::from_values(r, &m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let rep = solve_bvp(&WAVE, &m, &r, &bd, DEFAULT_TOL).unwrap();
        assert!((rep.interior[0].1 + 1.0 / 6.0).abs() < 1e-14);
        assert!(rep.rcond >= 1e-3);
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn characteristic_patch_is_singular() {
        let m = QuadMesh::new(1.0, 1.0, 4, 4).unwrap();
        let r = Region::Patch3 { n: 2, i: 2 };
        let bd = BoundaryData::from_values(r, &m, &[0.3, -1.0, 0.2, 0.5, 0.7, -0.4]).unwrap();
        assert!(matches!(solve_bvp(&WAVE, &m, &r, &bd, DEFAULT_TOL), Err(MslabError::SingularSystem { .. })));
        let rect = Region::Rect { n0: 0, i0: 0, nt: 4, nx: 4 };
        let bd = BoundaryData::from_fn(rect, &m, |t, x| t * x).unwrap();
        assert!(matches!(solve_bvp(&WAVE, &m, &rect, &bd, DEFAULT_TOL), Err(MslabError::SingularSystem { .. })));
    }

    #[test]
    fn condition_degrades_towards_characteristic() {
        let r = Region::Patch3 { n: 1, i: 1 };
        let mut last = f64::INFINITY;
        for c in [0.5, 0.9, 0.99, 0.999999] {
            let m = QuadMesh::new(c, 1.0, 2, 2).unwrap();
            let bd = BoundaryData::from_values(r, &m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
            let rc = solve_bvp(&WAVE, &m, &r, &bd, 1e-10).unwrap().rcond;
            assert!(rc < last);
            last = rc;
        }
        let m = QuadMesh::new(1.0 - 1e-13, 1.0, 2, 2).unwrap();
        let bd = BoundaryData::from_values(r, &m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(solve_bvp(&WAVE, &m, &r, &bd, 1e-10), Err(MslabError::SingularSystem { .. })));
    }

    #[test]
    fn superposition_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = QuadMesh::new(0.05, 0.1, 12, 10).unwrap();
        let r = Region::Rect { n0: 1, i0: 2, nt: 9, nx: 7 };
        let n = boundary_len(&r, &m);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let solve =
            |v: &[f64]| solve_bvp(&WAVE, &m, &r, &BoundaryData::from_values(r, &m, v).unwrap(), DEFAULT_TOL).unwrap();
        let (sa, sb, sab) = (solve(&a), solve(&b), solve(&ab));
        for k in 0..sa.interior.len() {
            assert!((sa.interior[k].1 + sb.interior[k].1 - sab.interior[k].1).abs() < 1e-12);
        }
        assert!(max_del_residual(&WAVE, &sab.field, &r).unwrap() <= DEFAULT_TOL);
    }

    fn boundary_len(r: &Region, m: &QuadMesh) -> usize {
        crate::jetmesh::boundary_nodes(r, m).unwrap().len()
    }

    #[test]
    fn nonlinear_bvp_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = LagrangianDensity::quartic_harmonic(2.0);
        let m = QuadMesh::new(0.1, 0.1, 8, 8).unwrap();
        let r = Region::Rect { n0: 0, i0: 0, nt: 8, nx: 8 };
        let bd = BoundaryData::from_node_fn(r, &m, |_| rng.gen_range(-1.5..1.5)).unwrap();
        let rep = solve_bvp(&l, &m, &r, &bd, DEFAULT_TOL).unwrap();
        assert!(rep.residual <= DEFAULT_TOL);
        assert!(rep.iterations > 1);
        assert!(max_del_residual(&l, &rep.field, &r).unwrap() <= DEFAULT_TOL);
    }

    #[test]
    fn tangent_solve_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = QuadMesh::new(0.1, 0.1, 6, 6).unwrap();
        let r = Region::Rect { n0: 0, i0: 0, nt: 6, nx: 6 };
        let l = LagrangianDensity::quartic_harmonic(1.5);
        let bd = BoundaryData::from_node_fn(r, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let delta = BoundaryData::from_node_fn(r, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let base = solve_bvp(&l, &m, &r, &bd, DEFAULT_TOL).unwrap();
        let tan = tangent_solve(&l, &base.field, &r, &delta).unwrap();
        let eps = 1e-5;
        let plus = solve_bvp(&l, &m, &r, &bd.axpy(eps, &delta), DEFAULT_TOL).unwrap();
        let minus = solve_bvp(&l, &m, &r, &bd.axpy(-eps, &delta), DEFAULT_TOL).unwrap();
        for (k, node) in r.interior_nodes().iter().enumerate() {
            let fd = (plus.interior[k].1 - minus.interior[k].1) / (2.0 * eps);
            let t = tan.get(*node);
            assert!((fd - t).abs() <= 1e-6 * (1.0 + t.abs()), "{node}: {fd} vs {t}");
        }
        let zero = tangent_solve(&l, &base.field, &r, &BoundaryData::zeros(r, &m).unwrap()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn tangent_of_linear_density_is_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = QuadMesh::new(0.05, 0.1, 8, 8).unwrap();
        let r = Region::Rect { n0: 0, i0: 0, nt: 8, nx: 8 };
        let bd = BoundaryData::from_node_fn(r, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let delta = BoundaryData::from_node_fn(r, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let base = solve_bvp(&WAVE, &m, &r, &bd, DEFAULT_TOL).unwrap();
        let tan = tangent_solve(&WAVE, &base.field, &r, &delta).unwrap();
        let direct = solve_bvp(&WAVE, &m, &r, &delta, DEFAULT_TOL).unwrap();
        assert!(tan.axpy(-1.0, &direct.field).max_abs() < 1e-12);
        assert!(matches!(
            tangent_solve(&WAVE, &DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap(), &r, &delta),
            Err(MslabError::Precondition(_))
        ));
    }
}
