//! Multisymplectic residuals: the discrete form formula, the Bridges
//! conservation law, slice fluxes, Hessian symmetry of the boundary
//! Lagrangian and the continuous boundary integral.

use serde::Serialize;

use crate::delsolve::{action_hessian, del_residual, solve_bvp, ActionProblem, DEFAULT_TOL};
use crate::error::{MslabError, Result};
use crate::genfunc::theta_sum;
use crate::jetmesh::{
    jet_extension, tangent_triple, BoundaryData, DiscreteField, Node, QuadMesh, Region, SpatialClosure,
};
use crate::lagrangian::{hess_ld, omega_from_hessian, LagrangianDensity};
use crate::oracles::AnalyticField;
use crate::quadrature::gauss_legendre;

/// Largest DEL residual accepted at a patch centre.
pub const SOLUTION_TOL: f64 = 1e-8;
/// Finite-difference step for non-quadratic Hessians.
pub const HESSIAN_FD_STEP: f64 = 1e-4;
pub const DEFAULT_QUAD_ORDER: usize = 32;

/// Where a residual contribution comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "site", rename_all = "lowercase")]
pub enum TermSite {
    /// `Ω^form` on triangle `(n, i)`.
    Triangle {
        n: usize,
        i: usize,
        form: usize,
    },
    Node {
        n: usize,
        i: usize,
    },
}

/// A residual with its per-term breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct FormResidualReport {
    pub residual: f64,
    pub terms: Vec<(TermSite, f64)>,
    pub tolerance: f64,
}

#[derive(Serialize)]
struct ReportJson {
    residual: f64,
    max_term: f64,
    n_terms: usize,
}

impl FormResidualReport {
    pub fn from_terms(terms: Vec<(TermSite, f64)>, tolerance: f64) -> Self {
        let residual = terms.iter().map(|t| t.1).sum();
        Self { residual, terms, tolerance }
    }

    pub fn max_term(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.1.abs()))
    }

    fn merge(reports: Vec<FormResidualReport>, tolerance: f64) -> Self {
        Self::from_terms(reports.into_iter().flat_map(|r| r.terms).collect(), tolerance)
    }

    /// `{"residual":..,"max_term":..,"n_terms":..}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ReportJson {
            residual: self.residual,
            max_term: self.max_term(),
            n_terms: self.terms.len(),
        })
        .expect("plain numbers serialize")
    }
}

fn same_mesh(a: &DiscreteField, b: &DiscreteField) -> Result<()> {
    if a.mesh() != b.mesh() {
        return Err(MslabError::InvalidArgument("fields live on different meshes".into()));
    }
    Ok(())
}

/// `Σ_l Σ_{k≠l} Ω^k(△_l)(V, W)` over the stencil `(△ⁿᵢ, △ⁿᵢ₋₁, △ⁿ⁻¹ᵢ)` of
/// `centre`, with `Ω^k` built from the Hessian of `L_d` at `solution`.
pub fn msff_residual_patch(
    l: &LagrangianDensity,
    solution: &DiscreteField,
    v: &DiscreteField,
    w: &DiscreteField,
    centre: Node,
) -> Result<FormResidualReport> {
    same_mesh(solution, v)?;
    same_mesh(solution, w)?;
    let del = del_residual(l, solution, centre.n, centre.i)?;
    if !(del.abs() <= SOLUTION_TOL) {
        return Err(MslabError::Precondition(format!("DEL residual {del:.3e} at {centre} exceeds {SOLUTION_TOL:e}")));
    }
    let stencil = Region::stencil(centre).expect("del_residual checked the stencil");
    let mesh = solution.mesh();
    let mut terms = Vec::with_capacity(6);
    for (l_slot, tri) in stencil.iter().enumerate() {
        let h = hess_ld(l, &jet_extension(solution, *tri)?, mesh)?;
        let xi = tangent_triple(v, *tri)?;
        let eta = tangent_triple(w, *tri)?;
        for k in (0..3).filter(|k| *k != l_slot) {
            terms.push((TermSite::Triangle { n: tri.n, i: tri.i, form: k + 1 }, omega_from_hessian(&h, k, xi, eta)));
        }
    }
    Ok(FormResidualReport::from_terms(terms, SOLUTION_TOL))
}

/// Sum of [`msff_residual_patch`] over the interior nodes of `region`.
pub fn msff_residual_region(
    l: &LagrangianDensity,
    solution: &DiscreteField,
    v: &DiscreteField,
    w: &DiscreteField,
    region: &Region,
) -> Result<FormResidualReport> {
    region.validate(solution.mesh())?;
    let reports = region
        .interior_nodes()
        .into_iter()
        .map(|c| msff_residual_patch(l, solution, v, w, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(FormResidualReport::merge(reports, SOLUTION_TOL))
}

/// `(v(V), w(V), u(V))` at a node from forward differences, with column
/// indices supplied by the caller.
fn forward_jet(f: &DiscreteField, n: usize, i: usize, ip: usize) -> (f64, f64, f64) {
    let m = f.mesh();
    let u = f.get(Node::new(n, i));
    ((f.get(Node::new(n + 1, i)) - u) / m.dt, (f.get(Node::new(n, ip)) - u) / m.dx, u)
}

fn wedges(v: &DiscreteField, w: &DiscreteField, n: usize, i: usize, ip: usize) -> (f64, f64) {
    let (vv, wv, uv) = forward_jet(v, n, i, ip);
    let (vw, ww, uw) = forward_jet(w, n, i, ip);
    (vv * uw - vw * uv, wv * uw - ww * uv)
}

fn bridges_at(v: &DiscreteField, w: &DiscreteField, n: usize, i: usize, im: usize, ip: usize, ipm: usize) -> f64 {
    let m = v.mesh();
    let (dv_c, dw_c) = wedges(v, w, n, i, ip);
    let (_, dw_left) = wedges(v, w, n, im, ipm);
    let (dv_down, _) = wedges(v, w, n - 1, i, ip);
    (dw_c - dw_left) / m.dx - (dv_c - dv_down) / m.dt
}

/// `(1/Δx)(dw∧du|ₙ,ᵢ − dw∧du|ₙ,ᵢ₋₁) − (1/Δt)(dv∧du|ₙ,ᵢ − dv∧du|ₙ₋₁,ᵢ)` for
/// the linear wave discretization.
pub fn bridges_residual(v: &DiscreteField, w: &DiscreteField, n: usize, i: usize) -> Result<f64> {
    same_mesh(v, w)?;
    let m = v.mesh();
    if n == 0 || i == 0 || n + 1 > m.nt || i + 1 > m.nx {
        return Err(MslabError::StencilOutOfRange { n, i });
    }
    Ok(bridges_at(v, w, n, i, i - 1, i + 1, i))
}

/// [`bridges_residual`] on a periodic row of `nx + 1` nodes, valid for every
/// column.
pub fn bridges_residual_periodic(v: &DiscreteField, w: &DiscreteField, n: usize, i: usize) -> Result<f64> {
    same_mesh(v, w)?;
    let m = v.mesh();
    let len = m.nx + 1;
    if n == 0 || n + 1 > m.nt || i >= len {
        return Err(MslabError::StencilOutOfRange { n, i });
    }
    let im = (i + len - 1) % len;
    Ok(bridges_at(v, w, n, i, im, (i + 1) % len, i))
}

/// `Σ_i dv∧du(V, W)` over slice `n` of a periodic field.
pub fn symplectic_flux(v: &DiscreteField, w: &DiscreteField, n: usize, closure: SpatialClosure) -> Result<f64> {
    if closure != SpatialClosure::Periodic {
        return Err(MslabError::Unsupported("symplectic flux needs a periodic closure".into()));
    }
    same_mesh(v, w)?;
    let m = v.mesh();
    if n + 1 > m.nt {
        return Err(MslabError::InvalidArgument(format!("slice {n} has no successor row")));
    }
    let len = m.nx + 1;
    Ok((0..len).map(|i| wedges(v, w, n, i, (i + 1) % len).0).sum())
}

/// Largest `|H_ab − H_ba|` of the Hessian of the discrete boundary
/// Lagrangian in the boundary values at `bd`.
///
/// Quadratic densities use the Schur complement `K_BB − K_BI K_II⁻¹ K_IB`;
/// others difference the Θ-sum momenta with step [`HESSIAN_FD_STEP`].
pub fn hessian_symmetry(l: &LagrangianDensity, mesh: &QuadMesh, region: &Region, bd: &BoundaryData) -> Result<f64> {
    let solved = solve_bvp(l, mesh, region, bd, DEFAULT_TOL)?;
    let boundary: Vec<Node> = bd.entries().iter().map(|e| e.0).collect();
    let nb = boundary.len();
    let h = if l.is_quadratic() {
        schur_hessian(l, &solved.field, region, &boundary)?
    } else {
        let base = bd.values();
        let momenta = |vals: &[f64]| -> Result<Vec<f64>> {
            let s = solve_bvp(l, mesh, region, &bd.with_values(vals), DEFAULT_TOL)?;
            theta_sum(l, &s.field, &region.triangles(), &boundary)
        };
        let mut h = vec![vec![0.0; nb]; nb];
        for b in 0..nb {
            let mut shifted = base.clone();
            shifted[b] = base[b] + HESSIAN_FD_STEP;
            let plus = momenta(&shifted)?;
            shifted[b] = base[b] - HESSIAN_FD_STEP;
            let minus = momenta(&shifted)?;
            for a in 0..nb {
                h[a][b] = (plus[a] - minus[a]) / (2.0 * HESSIAN_FD_STEP);
            }
        }
        h
    };
    let mut worst = 0.0f64;
    for a in 0..nb {
        for b in a + 1..nb {
            worst = worst.max((h[a][b] - h[b][a]).abs());
        }
    }
    Ok(worst)
}

fn schur_hessian(
    l: &LagrangianDensity,
    field: &DiscreteField,
    region: &Region,
    boundary: &[Node],
) -> Result<Vec<Vec<f64>>> {
    let interior = region.interior_nodes();
    let ni = interior.len();
    let mut all = interior.clone();
    all.extend(boundary);
    let k = action_hessian(l, field, &region.triangles(), &all)?;
    let problem = ActionProblem::new(l, region.triangles(), interior, vec![0.0; ni]);
    let nb = boundary.len();
    let mut h: Vec<Vec<f64>> = (0..nb).map(|a| k[ni + a][ni..].to_vec()).collect();
    for b in 0..nb {
        let col: Vec<f64> = (0..ni).map(|r| k[r][ni + b]).collect();
        let (x, _) = problem.linear_solve(field, &col)?;
        for a in 0..nb {
            h[a][b] -= (0..ni).map(|r| k[ni + a][r] * x[r]).sum::<f64>();
        }
    }
    Ok(h)
}

/// Axis-aligned rectangle `[t0, t1] × [x0, x1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareDomain {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl SquareDomain {
    pub const UNIT: SquareDomain = SquareDomain { t0: 0.0, t1: 1.0, x0: 0.0, x1: 1.0 };
}

/// `∮ ∂²L/∂y_μ∂y_ν (V W_ν − W V_ν) d¹x_μ` over the boundary of `domain`,
/// counterclockwise in the `(x, t)` plane, with `d¹x₀ = dx`, `d¹x₁ = −dt` and
/// `order`-point Gauss–Legendre per edge.
///
/// The velocity Hessian is taken at the jet of `phi`; densities coupling `ū`
/// to the velocities are rejected.
pub fn continuous_msff_residual(
    l: &LagrangianDensity,
    phi: &AnalyticField,
    v: &AnalyticField,
    w: &AnalyticField,
    domain: SquareDomain,
    order: usize,
) -> Result<f64> {
    if order == 0 {
        return Err(MslabError::InvalidArgument("quadrature order must be positive".into()));
    }
    let rule = gauss_legendre(order);
    // (J⁰, J¹) at a point.
    let current = |t: f64, x: f64| -> Result<(f64, f64)> {
        let p = phi.jet(t, x);
        let h = l.hessian(p.ut, p.ux, p.u)?;
        if h[0][2] != 0.0 || h[1][2] != 0.0 {
            return Err(MslabError::Unsupported(format!(
                "density `{}` couples the field to its derivatives",
                l.name()
            )));
        }
        let (a, b) = (v.jet(t, x), w.jet(t, x));
        let s = [a.u * b.ut - b.u * a.ut, a.u * b.ux - b.u * a.ux];
        Ok((h[0][0] * s[0] + h[0][1] * s[1], h[1][0] * s[0] + h[1][1] * s[1]))
    };
    let mut err = None;
    let mut edge = |from: (f64, f64), to: (f64, f64)| -> f64 {
        let (dt, dx) = (to.0 - from.0, to.1 - from.1);
        rule.integrate(0.0, 1.0, |s| match current(from.0 + s * dt, from.1 + s * dx) {
            Ok((j0, j1)) => j0 * dx - j1 * dt,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        })
    };
    let d = domain;
    let total = edge((d.t0, d.x0), (d.t0, d.x1))
        + edge((d.t0, d.x1), (d.t1, d.x1))
        + edge((d.t1, d.x1), (d.t1, d.x0))
        + edge((d.t1, d.x0), (d.t0, d.x0));
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delsolve::random_solution;
    use crate::lagrangian::{linear_wave_omega, QuadraticCoefficients};
    use crate::oracles::{wave_exact_solutions, FieldJet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const WAVE: LagrangianDensity = LagrangianDensity::LinearWave;

    fn mesh(nt: usize, nx: usize) -> QuadMesh {
        QuadMesh::new(0.5, 1.0, nt, nx).unwrap()
    }

    fn solutions(m: &QuadMesh, closure: SpatialClosure, seed: u64, count: usize) -> Vec<DiscreteField> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_solution(&WAVE, m, closure, &mut rng).unwrap()).collect()
    }

    fn fixed() -> SpatialClosure {
        SpatialClosure::Fixed { left: 0.0, right: 0.0 }
    }

    #[test]
    fn patch_residual_vanishes_for_wave_variations() {
        let m = mesh(12, 12);
        let f = solutions(&m, fixed(), 1, 3);
        for n in 1..12 {
            for i in 1..12 {
                let r = msff_residual_patch(&WAVE, &f[0], &f[1], &f[2], Node::new(n, i)).unwrap();
                assert!(r.residual.abs() <= 1e-12, "{}", r.residual);
                assert_eq!(r.terms.len(), 6);
                let same = msff_residual_patch(&WAVE, &f[0], &f[1], &f[1], Node::new(n, i)).unwrap();
                assert_eq!(same.residual, 0.0);
            }
        }
    }

    #[test]
    fn negative_control_and_precondition() {
        let m = mesh(8, 8);
        let f = solutions(&m, fixed(), 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bad = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let r = msff_residual_patch(&WAVE, &f[0], &f[1], &bad, Node::new(4, 4)).unwrap();
        assert!(r.residual.abs() > 1e-6);
        assert!(matches!(
            msff_residual_patch(&WAVE, &bad, &f[0], &f[1], Node::new(4, 4)),
            Err(MslabError::Precondition(_))
        ));
        assert!(matches!(
            msff_residual_patch(&WAVE, &f[0], &f[0], &f[1], Node::new(0, 4)),
            Err(MslabError::StencilOutOfRange { .. })
        ));
    }

    #[test]
    fn patch_residual_is_bilinear_and_antisymmetric() {
        let m = mesh(6, 6);
        let f = solutions(&m, fixed(), 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let b = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let c = Node::new(3, 3);
        let r = |x: &DiscreteField, y: &DiscreteField| msff_residual_patch(&WAVE, &f[0], x, y, c).unwrap().residual;
        assert!((r(&a, &b) + r(&b, &a)).abs() < 1e-14);
        let combo = a.axpy(2.5, &f[1]);
        assert!((r(&combo, &b) - r(&a, &b) - 2.5 * r(&f[1], &b)).abs() < 1e-13);
    }

    #[test]
    fn hessian_forms_match_closed_forms_and_bridges() {
        let m = mesh(6, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let b = DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let base = DiscreteField::zeros(m);
        let c = Node::new(2, 3);
        let r = msff_residual_patch(&WAVE, &base, &a, &b, c).unwrap();
        let closed: f64 = Region::stencil(c)
            .unwrap()
            .iter()
            .enumerate()
            .flat_map(|(s, t)| {
                let (xi, eta) = (tangent_triple(&a, *t).unwrap(), tangent_triple(&b, *t).unwrap());
                (1..=3).filter(move |k| *k != s + 1).map(move |k| linear_wave_omega(&m, k, xi, eta).unwrap())
            })
            .sum();
        assert!((r.residual - closed).abs() <= 1e-13);
        // Even off-shell the two expressions agree up to the cell area.
        let br = bridges_residual(&a, &b, c.n, c.i).unwrap();
        assert!((r.residual - 0.5 * m.dt * m.dx * br).abs() <= 1e-13);
    }

    #[test]
    fn region_residual_sums_patches() {
        let m = mesh(10, 10);
        let f = solutions(&m, fixed(), 7, 3);
        let region = Region::Rect { n0: 0, i0: 0, nt: 10, nx: 10 };
        let r = msff_residual_region(&WAVE, &f[0], &f[1], &f[2], &region).unwrap();
        assert!(r.residual.abs() <= 1e-11);
        assert_eq!(r.terms.len(), 6 * 81);
        let sum: f64 = r.terms.iter().map(|t| t.1).sum();
        assert!((sum - r.residual).abs() <= 1e-14 * (1.0 + sum.abs()));
        let patch = Region::Patch3 { n: 4, i: 5 };
        let single = msff_residual_region(&WAVE, &f[0], &f[1], &f[2], &patch).unwrap();
        assert_eq!(single, msff_residual_patch(&WAVE, &f[0], &f[1], &f[2], Node::new(4, 5)).unwrap());
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json.as_object().unwrap().len(), 3);
        assert_eq!(json["n_terms"], 486);
    }

    #[test]
    fn bridges_hand_case() {
        let m = mesh(5, 5);
        let v = DiscreteField::from_node_fn(m, |nd| nd.n as f64 * m.dt).unwrap();
        let w = DiscreteField::from_node_fn(m, |_| 1.0).unwrap();
        for n in 1..5 {
            for i in 1..5 {
                assert_eq!(bridges_residual(&v, &w, n, i).unwrap(), 0.0);
                assert_eq!(bridges_residual(&v, &v, n, i).unwrap(), 0.0);
            }
        }
        for n in 0..5 {
            assert!((symplectic_flux(&v, &w, n, SpatialClosure::Periodic).unwrap() - 6.0).abs() < 1e-14);
            assert_eq!(symplectic_flux(&v, &v, n, SpatialClosure::Periodic).unwrap(), 0.0);
        }
        assert!(bridges_residual(&v, &w, 5, 1).is_err());
        assert!(matches!(symplectic_flux(&v, &w, 0, fixed()), Err(MslabError::Unsupported(_))));
    }

    #[test]
    fn periodic_flux_is_conserved() {
        let m = mesh(20, 15);
        let f = solutions(&m, SpatialClosure::Periodic, 8, 2);
        let flux: Vec<f64> =
            (0..20).map(|n| symplectic_flux(&f[0], &f[1], n, SpatialClosure::Periodic).unwrap()).collect();
        for n in 1..20 {
            let sum: f64 = (0..=15).map(|i| bridges_residual_periodic(&f[0], &f[1], n, i).unwrap()).sum();
            assert!((sum + (flux[n] - flux[n - 1]) / m.dt).abs() <= 1e-13);
            assert!((flux[n] - flux[0]).abs() <= 1e-12);
        }
        for n in 1..19 {
            for i in 1..15 {
                assert!(bridges_residual(&f[0], &f[1], n, i).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hessian_symmetry_linear_and_nonlinear() {
        let m = mesh(6, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let patch = Region::Patch3 { n: 2, i: 2 };
        let bd = BoundaryData::from_node_fn(patch, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        assert!(hessian_symmetry(&WAVE, &m, &patch, &bd).unwrap() <= 1e-12);
        let rect = Region::Rect { n0: 1, i0: 1, nt: 4, nx: 4 };
        let bd = BoundaryData::from_node_fn(rect, &m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let harmonic = LagrangianDensity::HarmonicDirichlet;
        assert!(hessian_symmetry(&harmonic, &m, &rect, &bd).unwrap() <= 1e-12);
        let quartic = LagrangianDensity::quartic_harmonic(1.0);
        let asym = hessian_symmetry(
            &quartic,
            &m,
            &rect,
            &bd.with_values(&bd.values().iter().map(|x| 0.5 * x).collect::<Vec<_>>()),
        )
        .unwrap();
        assert!(asym <= 1e-6, "{asym}");
    }

    #[test]
    fn schur_hessian_matches_finite_differences() {
        let m = mesh(4, 4);
        let patch = Region::Patch3 { n: 1, i: 1 };
        let bd = BoundaryData::zeros(patch, &m).unwrap();
        let solved = solve_bvp(&WAVE, &m, &patch, &bd, DEFAULT_TOL).unwrap();
        let nodes: Vec<Node> = bd.entries().iter().map(|e| e.0).collect();
        let h = schur_hessian(&WAVE, &solved.field, &patch, &nodes).unwrap();
        let e = 1e-3;
        for b in 0..nodes.len() {
            let mut vals = vec![0.0; nodes.len()];
            vals[b] = e;
            let s = solve_bvp(&WAVE, &m, &patch, &bd.with_values(&vals), DEFAULT_TOL).unwrap();
            let p = theta_sum(&WAVE, &s.field, &patch.triangles(), &nodes).unwrap();
            for a in 0..nodes.len() {
                assert!((p[a] / e - h[a][b]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn continuous_msff_cases() {
        let zero = wave_exact_solutions("zero").unwrap();
        let t = wave_exact_solutions("time").unwrap();
        let x = wave_exact_solutions("space").unwrap();
        let s1 = wave_exact_solutions("standing:1").unwrap();
        let s2 = wave_exact_solutions("standing:2").unwrap();
        let sq = SquareDomain::UNIT;
        assert_eq!(continuous_msff_residual(&WAVE, &zero, &s1, &s1, sq, 32).unwrap(), 0.0);
        assert!(continuous_msff_residual(&WAVE, &zero, &t, &x, sq, 32).unwrap().abs() <= 1e-14);
        assert!(continuous_msff_residual(&WAVE, &zero, &s1, &s2, sq, 32).unwrap().abs() <= 1e-10);
        let off = SquareDomain { t0: 0.1, t1: 0.7, x0: -0.3, x1: 0.4 };
        assert!(continuous_msff_residual(&WAVE, &zero, &s1, &s2, off, 32).unwrap().abs() <= 1e-10);
        // A non-solution breaks it: V = x², W = 1 gives ∮ 2x dt = 2 over the unit square.
        let sq_x = AnalyticField::new("x2", |_, x| FieldJet { u: x * x, ux: 2.0 * x, uxx: 2.0, ..Default::default() });
        let one = AnalyticField::new("one", |_, _| FieldJet { u: 1.0, ..Default::default() });
        let r = continuous_msff_residual(&WAVE, &zero, &one, &sq_x, sq, 32).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        let coupled =
            LagrangianDensity::Quadratic(QuadraticCoefficients { vv: 1.0, ww: -1.0, vu: 0.3, ..Default::default() });
        assert!(matches!(continuous_msff_residual(&coupled, &zero, &t, &x, sq, 32), Err(MslabError::Unsupported(_))));
    }
}
