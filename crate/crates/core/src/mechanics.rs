//! Discrete mechanics: exact discrete Lagrangians and Hamiltonians by
//! spectral collocation, the discrete Legendre map, and order and
//! symplecticity checks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::{gradient_hessian2, Dual2};
use crate::error::{MslabError, Result};
use crate::linalg::BandMatrix;
use crate::quadrature::{gauss_lobatto, lobatto_differentiation};

/// Collocation nodes per step.
pub const GLL_NODES: usize = 8;
const NEWTON_TOL: f64 = 1e-12;
const MAX_ITER: usize = 50;
const SINGULAR: f64 = 1e-12;

type MechFn = dyn Fn(Dual2, Dual2) -> Dual2 + Send + Sync;

/// `f(q, ·)` written against [`Dual2`].
#[derive(Clone)]
pub struct CustomMech {
    name: String,
    f: Arc<MechFn>,
}

impl CustomMech {
    pub fn new(name: impl Into<String>, f: impl Fn(Dual2, Dual2) -> Dual2 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for CustomMech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMech").field("name", &self.name).finish()
    }
}

/// Value, gradient and Hessian in `(q, second argument)`.
type Jet2 = (f64, [f64; 2], [[f64; 2]; 2]);

/// `L(q, q̇)`.
#[derive(Clone, Debug)]
pub enum MechLagrangian {
    /// `½q̇²`.
    FreeParticle,
    /// `½(q̇² − ω²q²)`.
    Harmonic {
        omega: f64,
    },
    Custom(CustomMech),
}

/// `H(q, p)`.
#[derive(Clone, Debug)]
pub enum MechHamiltonian {
    /// `½p²`.
    FreeParticle,
    /// `½(p² + ω²q²)`.
    Harmonic {
        omega: f64,
    },
    Custom(CustomMech),
}

fn check_finite(j: Jet2, what: &'static str) -> Result<Jet2> {
    let (v, g, h) = j;
    if v.is_finite() && g.iter().chain(h.iter().flatten()).all(|x| x.is_finite()) {
        Ok(j)
    } else {
        Err(MslabError::NonFinite(what))
    }
}

impl MechLagrangian {
    pub fn name(&self) -> String {
        match self {
            MechLagrangian::FreeParticle => "free_particle".into(),
            MechLagrangian::Harmonic { omega } => format!("harmonic(ω={omega})"),
            MechLagrangian::Custom(c) => c.name.clone(),
        }
    }

    /// Value, `(L_q, L_q̇)` and the Hessian.
    pub fn jet(&self, q: f64, v: f64) -> Result<Jet2> {
        let j = match self {
            MechLagrangian::FreeParticle => (0.5 * v * v, [0.0, v], [[0.0, 0.0], [0.0, 1.0]]),
            MechLagrangian::Harmonic { omega } => {
                let w2 = omega * omega;
                (0.5 * (v * v - w2 * q * q), [-w2 * q, v], [[-w2, 0.0], [0.0, 1.0]])
            }
            MechLagrangian::Custom(c) => gradient_hessian2(|a, b| (c.f)(a, b), [q, v]),
        };
        check_finite(j, "mechanical Lagrangian")
    }

    pub fn eval(&self, q: f64, v: f64) -> Result<f64> {
        Ok(self.jet(q, v)?.0)
    }

    /// Legendre transform of the built-ins.
    pub fn hamiltonian(&self) -> Result<MechHamiltonian> {
        match self {
            MechLagrangian::FreeParticle => Ok(MechHamiltonian::FreeParticle),
            MechLagrangian::Harmonic { omega } => Ok(MechHamiltonian::Harmonic { omega: *omega }),
            MechLagrangian::Custom(_) => {
                Err(MslabError::Unsupported("Legendre transform of a custom Lagrangian".into()))
            }
        }
    }

    /// Exact flow of the built-ins over time `h`.
    pub fn exact_flow(&self, z: PhasePoint, h: f64) -> Result<PhasePoint> {
        match self {
            MechLagrangian::FreeParticle => Ok(PhasePoint::new(z.q + h * z.p, z.p)),
            MechLagrangian::Harmonic { omega } => {
                let (s, c) = (omega * h).sin_cos();
                Ok(PhasePoint::new(z.q * c + z.p * s / omega, -z.q * omega * s + z.p * c))
            }
            MechLagrangian::Custom(_) => Err(MslabError::Unsupported("exact flow of a custom Lagrangian".into())),
        }
    }

    /// Largest step with a unique extremal between any two positions.
    fn max_step(&self) -> f64 {
        match self {
            MechLagrangian::Harmonic { omega } => std::f64::consts::PI / omega.abs(),
            _ => f64::INFINITY,
        }
    }
}

impl MechHamiltonian {
    pub fn jet(&self, q: f64, p: f64) -> Result<Jet2> {
        let j = match self {
            MechHamiltonian::FreeParticle => (0.5 * p * p, [0.0, p], [[0.0, 0.0], [0.0, 1.0]]),
            MechHamiltonian::Harmonic { omega } => {
                let w2 = omega * omega;
                (0.5 * (p * p + w2 * q * q), [w2 * q, p], [[w2, 0.0], [0.0, 1.0]])
            }
            MechHamiltonian::Custom(c) => gradient_hessian2(|a, b| (c.f)(a, b), [q, p]),
        };
        check_finite(j, "mechanical Hamiltonian")
    }

    /// Largest step for which `q(0) = q₀`, `p(h) = p₁` has a unique solution.
    fn max_step(&self) -> f64 {
        match self {
            MechHamiltonian::Harmonic { omega } => std::f64::consts::FRAC_PI_2 / omega.abs(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub fn distance(self, other: PhasePoint) -> f64 {
        (self.q - other.q).hypot(self.p - other.p)
    }
}

fn check_step(h: f64, limit: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(MslabError::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if h >= limit {
        return Err(MslabError::Precondition(format!(
            "step {h} is at or past {limit}, where the two-point problem loses uniqueness"
        )));
    }
    Ok(())
}

struct Gll {
    tau: Vec<f64>,
    w: Vec<f64>,
    d: Vec<Vec<f64>>,
}

fn gll() -> Gll {
    let rule = gauss_lobatto(GLL_NODES);
    let d = lobatto_differentiation(&rule);
    Gll { tau: rule.nodes, w: rule.weights, d }
}

fn mat_vec(d: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    d.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Newton on a small dense system `r(x) = 0`.
fn dense_newton(
    mut x: Vec<f64>,
    mut eval: impl FnMut(&[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)>,
) -> Result<Vec<f64>> {
    let n = x.len();
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (r, j, scale) = eval(&x)?;
        let mut m = BandMatrix::zeros(n, n - 1, n - 1);
        for (a, row) in j.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                m.add(a, b, *v);
            }
        }
        let norm = m.norm_inf();
        let lu = m.factor();
        let rcond = lu.rcond_inf(norm);
        if !(rcond >= SINGULAR) {
            return Err(MslabError::SingularSystem { rcond });
        }
        last = r.iter().fold(0.0, |a, b| a.max(b.abs()));
        if last <= NEWTON_TOL * scale {
            return Ok(x);
        }
        let step = lu.solve(&r.iter().map(|v| -v).collect::<Vec<_>>());
        let size = step.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
        for (xi, s) in x.iter_mut().zip(&step) {
            *xi += s;
        }
        if size <= 1e-15 * (1.0 + x.iter().fold(0.0, |a: f64, b| a.max(b.abs()))) {
            return Ok(x);
        }
    }
    Err(MslabError::NonConvergence { iterations: MAX_ITER, residual: last })
}

/// Exact discrete Lagrangian with its partials and the extremal.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLagrangianSolve {
    pub value: f64,
    /// `D₁L_d`.
    pub d1: f64,
    /// `D₂L_d`.
    pub d2: f64,
    /// `(t, q(t))` at the collocation nodes.
    pub path: Vec<(f64, f64)>,
}

/// Stationary point of the Lobatto-quadrature action over degree-7 paths
/// joining `q0` to `q1` in time `h`.
pub fn solve_exact_lagrangian(l: &MechLagrangian, q0: f64, q1: f64, h: f64) -> Result<ExactLagrangianSolve> {
    check_step(h, l.max_step())?;
    if !q0.is_finite() || !q1.is_finite() {
        return Err(MslabError::NonFinite("endpoint positions"));
    }
    let g = gll();
    let m = GLL_NODES - 1;
    let k = 2.0 / h;
    let full = |x: &[f64]| -> Vec<f64> {
        let mut q = Vec::with_capacity(GLL_NODES);
        q.push(q0);
        q.extend_from_slice(x);
        q.push(q1);
        q
    };
    let guess: Vec<f64> = (1..m).map(|j| q0 + (q1 - q0) * 0.5 * (g.tau[j] + 1.0)).collect();
    let eval = |x: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        let q = full(x);
        let v: Vec<f64> = mat_vec(&g.d, &q).iter().map(|d| k * d).collect();
        let jets = q.iter().zip(&v).map(|(a, b)| l.jet(*a, *b)).collect::<Result<Vec<_>>>()?;
        let mut r = vec![0.0; m - 1];
        let mut jac = vec![vec![0.0; m - 1]; m - 1];
        let mut scale = 0.0f64;
        for (a, ra) in r.iter_mut().enumerate() {
            let ma = a + 1;
            for (j, (_, gr, _)) in jets.iter().enumerate() {
                let term = g.w[j] * (if j == ma { gr[0] } else { 0.0 } + gr[1] * k * g.d[j][ma]);
                scale = scale.max(g.w[j] * (gr[0].abs() + (gr[1] * k * g.d[j][ma]).abs()));
                *ra += term;
            }
            for (b, jb) in jac[a].iter_mut().enumerate() {
                let mb = b + 1;
                for (j, (_, _, hs)) in jets.iter().enumerate() {
                    let (da, db) = (k * g.d[j][ma], k * g.d[j][mb]);
                    let (ea, eb) = ((j == ma) as u8 as f64, (j == mb) as u8 as f64);
                    *jb += g.w[j] * (hs[0][0] * ea * eb + hs[0][1] * ea * db + hs[1][0] * da * eb + hs[1][1] * da * db);
                }
            }
        }
        Ok((r, jac, 1.0 + scale))
    };
    let x = dense_newton(guess, eval)?;
    let q = full(&x);
    let v: Vec<f64> = mat_vec(&g.d, &q).iter().map(|d| k * d).collect();
    let jets = q.iter().zip(&v).map(|(a, b)| l.jet(*a, *b)).collect::<Result<Vec<_>>>()?;
    let half = 0.5 * h;
    let value = half * jets.iter().zip(&g.w).map(|(j, w)| w * j.0).sum::<f64>();
    let partial = |node: usize| {
        half * jets
            .iter()
            .enumerate()
            .map(|(j, (_, gr, _))| g.w[j] * (if j == node { gr[0] } else { 0.0 } + gr[1] * k * g.d[j][node]))
            .sum::<f64>()
    };
    let path = g.tau.iter().zip(&q).map(|(t, q)| (half * (t + 1.0), *q)).collect();
    Ok(ExactLagrangianSolve { value, d1: partial(0), d2: partial(m), path })
}

/// `ext ∫₀ʰ L(q, q̇) dt` over paths with `q(0) = q0`, `q(h) = q1`.
pub fn exact_discrete_lagrangian(l: &MechLagrangian, q0: f64, q1: f64, h: f64) -> Result<f64> {
    Ok(solve_exact_lagrangian(l, q0, q1, h)?.value)
}

/// `(q1 − q0)²/(2h)`.
pub fn free_particle_exact_ld(q0: f64, q1: f64, h: f64) -> f64 {
    (q1 - q0).powi(2) / (2.0 * h)
}

/// `(ω / (2 sin ωh))((q0² + q1²) cos ωh − 2 q0 q1)`.
pub fn harmonic_exact_ld(omega: f64, q0: f64, q1: f64, h: f64) -> f64 {
    let (s, c) = (omega * h).sin_cos();
    omega / (2.0 * s) * ((q0 * q0 + q1 * q1) * c - 2.0 * q0 * q1)
}

/// Exact discrete Hamiltonian with its partials and the extremal endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactHamiltonianSolve {
    pub value: f64,
    /// `D₁H_d⁺ ≈ p0`.
    pub d1: f64,
    /// `D₂H_d⁺ ≈ q1`.
    pub d2: f64,
    pub q1: f64,
    pub p0: f64,
}

/// `p1·q(h) − ∫₀ʰ (p q̇ − H) dt` on the extremal with `q(0) = q0`,
/// `p(h) = p1`.
///
/// Collocation on the Lobatto nodes imposes `q̇ = H_p` at all but the last
/// node and `ṗ = −H_q` at all but the first, the stationarity conditions of
/// the quadrature functional.
pub fn solve_exact_hamiltonian(hm: &MechHamiltonian, q0: f64, p1: f64, h: f64) -> Result<ExactHamiltonianSolve> {
    check_step(h, hm.max_step())?;
    if !q0.is_finite() || !p1.is_finite() {
        return Err(MslabError::NonFinite("endpoint data"));
    }
    let g = gll();
    let m = GLL_NODES - 1;
    let k = 2.0 / h;
    // Unknowns: q_1..q_m then p_0..p_{m-1}.
    let unpack = |x: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut q = vec![q0];
        q.extend_from_slice(&x[..m]);
        let mut p = x[m..].to_vec();
        p.push(p1);
        (q, p)
    };
    let guess: Vec<f64> = (0..m).map(|_| q0 + h * p1).chain((0..m).map(|_| p1)).collect();
    let eval = |x: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        let (q, p) = unpack(x);
        let dq = mat_vec(&g.d, &q);
        let dp = mat_vec(&g.d, &p);
        let jets = q.iter().zip(&p).map(|(a, b)| hm.jet(*a, *b)).collect::<Result<Vec<_>>>()?;
        let n = 2 * m;
        let mut r = vec![0.0; n];
        let mut jac = vec![vec![0.0; n]; n];
        let qcol = |node: usize| (node >= 1).then(|| node - 1);
        let pcol = |node: usize| (node < m).then(|| m + node);
        let mut scale = 0.0f64;
        for j in 0..m {
            // q̇ = H_p at node j.
            let (_, gr, hs) = &jets[j];
            r[j] = k * dq[j] - gr[1];
            scale = scale.max((k * dq[j]).abs() + gr[1].abs());
            for c in 0..GLL_NODES {
                if let Some(col) = qcol(c) {
                    jac[j][col] += k * g.d[j][c];
                }
            }
            if let Some(col) = qcol(j) {
                jac[j][col] -= hs[1][0];
            }
            if let Some(col) = pcol(j) {
                jac[j][col] -= hs[1][1];
            }
            // ṗ = −H_q at node j + 1.
            let node = j + 1;
            let (_, gr, hs) = &jets[node];
            let row = m + j;
            r[row] = k * dp[node] + gr[0];
            scale = scale.max((k * dp[node]).abs() + gr[0].abs());
            for c in 0..GLL_NODES {
                if let Some(col) = pcol(c) {
                    jac[row][col] += k * g.d[node][c];
                }
            }
            if let Some(col) = qcol(node) {
                jac[row][col] += hs[0][0];
            }
            if let Some(col) = pcol(node) {
                jac[row][col] += hs[0][1];
            }
        }
        Ok((r, jac, 1.0 + scale))
    };
    let x = dense_newton(guess, eval)?;
    let (q, p) = unpack(&x);
    let dq = mat_vec(&g.d, &q);
    let dp = mat_vec(&g.d, &p);
    let jets = q.iter().zip(&p).map(|(a, b)| hm.jet(*a, *b)).collect::<Result<Vec<_>>>()?;
    let half = 0.5 * h;
    let integral = half * (0..GLL_NODES).map(|j| g.w[j] * (p[j] * k * dq[j] - jets[j].0)).sum::<f64>();
    let value = p1 * q[m] - integral;
    let d1 = p[0] + half * g.w[0] * (k * dp[0] + jets[0].1[0]);
    let d2 = q[m] - half * g.w[m] * (k * dq[m] - jets[m].1[1]);
    // The boundary-corrected partials are far more accurate than the raw
    // endpoint nodes, so they stand in for q(h) and p(0).
    Ok(ExactHamiltonianSolve { value, d1, d2, q1: d2, p0: d1 })
}

pub fn exact_discrete_hamiltonian(hm: &MechHamiltonian, q0: f64, p1: f64, h: f64) -> Result<f64> {
    Ok(solve_exact_hamiltonian(hm, q0, p1, h)?.value)
}

/// Discrete Lagrangians `L_d(q0, q1; h)` built from a continuous one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// [`exact_discrete_lagrangian`].
    Exact,
    /// `h·L((q0+q1)/2, (q1−q0)/h)`.
    Midpoint,
    /// `h·L(q0, (q1−q0)/h)`.
    Rectangle,
}

/// A discrete Lagrangian with its partials and `∂D₁/∂q1`.
#[derive(Clone, Debug)]
pub struct DiscreteLagrangian {
    pub family: Family,
    pub l: MechLagrangian,
}

impl DiscreteLagrangian {
    pub fn new(family: Family, l: MechLagrangian) -> Self {
        Self { family, l }
    }

    /// `(L_d, D₁L_d, D₂L_d, ∂D₁L_d/∂q1)`.
    pub fn eval(&self, q0: f64, q1: f64, h: f64) -> Result<[f64; 4]> {
        let v = (q1 - q0) / h;
        match self.family {
            Family::Midpoint => {
                check_step(h, f64::INFINITY)?;
                let (val, g, hs) = self.l.jet(0.5 * (q0 + q1), v)?;
                let d1 = 0.5 * h * g[0] - g[1];
                let d2 = 0.5 * h * g[0] + g[1];
                let d11 = 0.5 * h * (0.5 * hs[0][0] + hs[0][1] / h) - (0.5 * hs[1][0] + hs[1][1] / h);
                Ok([h * val, d1, d2, d11])
            }
            Family::Rectangle => {
                check_step(h, f64::INFINITY)?;
                let (val, g, hs) = self.l.jet(q0, v)?;
                Ok([h * val, h * g[0] - g[1], g[1], hs[0][1] - hs[1][1] / h])
            }
            Family::Exact => {
                let s = solve_exact_lagrangian(&self.l, q0, q1, h)?;
                let e = 1e-5 * (1.0 + q1.abs());
                let plus = solve_exact_lagrangian(&self.l, q0, q1 + e, h)?.d1;
                let minus = solve_exact_lagrangian(&self.l, q0, q1 - e, h)?.d1;
                Ok([s.value, s.d1, s.d2, (plus - minus) / (2.0 * e)])
            }
        }
    }

    pub fn value(&self, q0: f64, q1: f64, h: f64) -> Result<f64> {
        Ok(self.eval(q0, q1, h)?[0])
    }
}

/// `p0 = −D₁L_d(q0, q1)` solved for `q1`, then `p1 = D₂L_d(q0, q1)`.
pub fn type1_map(ld: &DiscreteLagrangian, z0: PhasePoint, h: f64) -> Result<PhasePoint> {
    if !z0.q.is_finite() || !z0.p.is_finite() {
        return Err(MslabError::NonFinite("phase point"));
    }
    let mut q1 = z0.q + h * z0.p;
    let mut last = f64::INFINITY;
    // Once within tolerance, a few extra steps; keep the smallest residual.
    let mut best: Option<(f64, f64, f64)> = None;
    let mut polish = 0;
    for _ in 0..MAX_ITER {
        let [_, d1, d2, d11] = ld.eval(z0.q, q1, h)?;
        let g = z0.p + d1;
        last = g.abs();
        if best.is_none_or(|b| last < b.0) && (best.is_some() || last <= 1e-12 * (1.0 + z0.p.abs())) {
            best = Some((last, q1, d2));
        }
        if best.is_some() {
            polish += 1;
            if last == 0.0 || polish > 3 {
                break;
            }
        }
        if !(d11.abs() > 0.0) || !d11.is_finite() {
            return Err(MslabError::SingularSystem { rcond: 0.0 });
        }
        let step = g / d11;
        q1 -= step;
        if best.is_none() && step.abs() <= 1e-14 * (1.0 + q1.abs()) {
            let d2 = ld.eval(z0.q, q1, h)?[2];
            return Ok(PhasePoint::new(q1, d2));
        }
    }
    if let Some((_, q1, d2)) = best {
        return Ok(PhasePoint::new(q1, d2));
    }
    Err(MslabError::NonConvergence { iterations: MAX_ITER, residual: last })
}

/// `|det J − 1|` for the central-difference Jacobian of `map` at `z`.
pub fn symplecticity_check(map: impl Fn(PhasePoint) -> Result<PhasePoint>, z: PhasePoint, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(MslabError::InvalidArgument("finite-difference step must be positive".into()));
    }
    let col = |dq: f64, dp: f64| -> Result<[f64; 2]> {
        let a = map(PhasePoint::new(z.q + dq, z.p + dp))?;
        let b = map(PhasePoint::new(z.q - dq, z.p - dp))?;
        Ok([(a.q - b.q) / (2.0 * step), (a.p - b.p) / (2.0 * step)])
    };
    let c0 = col(step, 0.0)?;
    let c1 = col(0.0, step)?;
    Ok((c0[0] * c1[1] - c1[0] * c0[1] - 1.0).abs())
}

/// Observed convergence of a discrete Lagrangian family.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OrderOutcome {
    Slopes {
        functional: f64,
        map: f64,
    },
    /// Errors sit at the solver floor; slopes carry no information.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderReport {
    pub steps: Vec<f64>,
    pub functional_errors: Vec<f64>,
    pub map_errors: Vec<f64>,
    pub outcome: OrderOutcome,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(MslabError::InvalidArgument("need at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(MslabError::InvalidArgument("degenerate regression: non-positive value".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(MslabError::InvalidArgument("degenerate regression: repeated steps".into()));
    }
    Ok(lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx)
}

/// Functional error `|L_d − L_d^E|` at `(z0.q, q(h))` on the exact
/// trajectory and global map error after `horizon / h` steps from `z0`,
/// with their log-log slopes.
pub fn variational_order_check(
    family: Family,
    l: &MechLagrangian,
    steps: &[f64],
    z0: PhasePoint,
    horizon: f64,
) -> Result<OrderReport> {
    if steps.len() < 4 {
        return Err(MslabError::InvalidArgument(format!("need at least 4 steps, got {}", steps.len())));
    }
    if steps.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(MslabError::InvalidArgument("steps must be positive".into()));
    }
    let ratio = steps[1] / steps[0];
    if ratio == 1.0 || steps.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return Err(MslabError::InvalidArgument("steps must form a geometric progression".into()));
    }
    let ld = DiscreteLagrangian::new(family, l.clone());
    let mut functional_errors = Vec::with_capacity(steps.len());
    let mut map_errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let n = (horizon / h).round();
        if n < 1.0 || (n * h - horizon).abs() > 1e-9 * horizon {
            return Err(MslabError::InvalidArgument(format!("step {h} does not divide the horizon {horizon}")));
        }
        let q1 = l.exact_flow(z0, h)?.q;
        let exact = exact_discrete_lagrangian(l, z0.q, q1, h)?;
        functional_errors.push((ld.value(z0.q, q1, h)? - exact).abs());
        let mut z = z0;
        for _ in 0..n as usize {
            z = type1_map(&ld, z, h)?;
        }
        map_errors.push(z.distance(l.exact_flow(z0, horizon)?));
    }
    let at_floor = functional_errors.iter().all(|e| *e <= 1e-11) && map_errors.iter().all(|e| *e <= 1e-9);
    let outcome = if at_floor {
        OrderOutcome::Exact
    } else {
        OrderOutcome::Slopes {
            functional: loglog_slope(steps, &functional_errors)?,
            map: loglog_slope(steps, &map_errors)?,
        }
    };
    Ok(OrderReport { steps: steps.to_vec(), functional_errors, map_errors, outcome })
}
