//! Closed-form ground truth: exact wave solutions, d'Alembert reconstruction
//! on the unit square, the wave-square boundary Lagrangian, and harmonic
//! extensions on the unit disc.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MslabError, Result};
use crate::quadrature::{adaptive_gauss_kronrod, adaptive_with_breaks};

/// Absolute tolerance for every oracle integral.
pub const ORACLE_TOL: f64 = 1e-10;

/// Value and derivatives of a field at `(t, x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldJet {
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
    pub utt: f64,
    pub uxx: f64,
}

type JetFn = dyn Fn(f64, f64) -> FieldJet + Send + Sync;

/// A closed-form field `φ(t, x)` with analytic derivatives.
#[derive(Clone)]
pub struct AnalyticField {
    name: String,
    f: Arc<JetFn>,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField").field("name", &self.name).finish()
    }
}

impl AnalyticField {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, f64) -> FieldJet + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn jet(&self, t: f64, x: f64) -> FieldJet {
        (self.f)(t, x)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.jet(t, x).u
    }

    /// `φ_tt − φ_xx` at `(t, x)`.
    pub fn wave_residual(&self, t: f64, x: f64) -> f64 {
        let j = self.jet(t, x);
        j.utt - j.uxx
    }

    /// Traces of the field on the four edges of the unit square.
    pub fn square_traces(&self) -> SquareBoundary {
        let f = self.clone();
        let edge = |at: fn(f64) -> (f64, f64), tangent: fn(&FieldJet) -> f64| {
            let (fv, fd) = (f.clone(), f.clone());
            EdgeTrace::new(
                move |s| {
                    let (t, x) = at(s);
                    fv.value(t, x)
                },
                move |s| {
                    let (t, x) = at(s);
                    tangent(&fd.jet(t, x))
                },
            )
        };
        SquareBoundary {
            bottom: edge(|s| (0.0, s), |j| j.ux),
            top: edge(|s| (1.0, s), |j| j.ux),
            left: edge(|s| (s, 0.0), |j| j.ut),
            right: edge(|s| (s, 1.0), |j| j.ut),
        }
    }
}

/// Catalog of exact solutions of `φ_tt = φ_xx`.
pub const CATALOG: &[(&str, &str)] = &[
    ("zero", "0"),
    ("standing:k", "sin(kπx)·cos(kπt), k ≥ 1"),
    ("cubic", "t³ + 3tx²"),
    ("bilinear", "t·x"),
    ("time", "t"),
    ("space", "x"),
    ("travelling:k", "(x − t)^k, k ≥ 0"),
];

fn parse_order(name: &str, arg: Option<&str>, min: u32) -> Result<u32> {
    let k: u32 = arg
        .ok_or_else(|| MslabError::InvalidArgument(format!("oracle `{name}` needs `:k`")))?
        .parse()
        .map_err(|_| MslabError::InvalidArgument(format!("bad order in oracle `{name}`")))?;
    if k < min {
        return Err(MslabError::InvalidArgument(format!("oracle `{name}` needs k ≥ {min}")));
    }
    Ok(k)
}

/// Looks up an exact wave solution by catalog name.
pub fn wave_exact_solutions(name: &str) -> Result<AnalyticField> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let no_arg = |f: AnalyticField| {
        if arg.is_some() {
            Err(MslabError::InvalidArgument(format!("oracle `{head}` takes no argument")))
        } else {
            Ok(f)
        }
    };
    match head {
        "zero" => no_arg(AnalyticField::new(name, |_, _| FieldJet::default())),
        "cubic" => no_arg(AnalyticField::new(name, |t, x| FieldJet {
            u: t * t * t + 3.0 * t * x * x,
            ut: 3.0 * t * t + 3.0 * x * x,
            ux: 6.0 * t * x,
            utt: 6.0 * t,
            uxx: 6.0 * t,
        })),
        "bilinear" => {
            no_arg(AnalyticField::new(name, |t, x| FieldJet { u: t * x, ut: x, ux: t, ..Default::default() }))
        }
        "time" => no_arg(AnalyticField::new(name, |t, _| FieldJet { u: t, ut: 1.0, ..Default::default() })),
        "space" => no_arg(AnalyticField::new(name, |_, x| FieldJet { u: x, ux: 1.0, ..Default::default() })),
        "standing" => {
            let k = parse_order(head, arg, 1)? as f64 * PI;
            Ok(AnalyticField::new(name, move |t, x| {
                let (sx, cx) = (k * x).sin_cos();
                let (st, ct) = (k * t).sin_cos();
                FieldJet { u: sx * ct, ut: -k * sx * st, ux: k * cx * ct, utt: -k * k * sx * ct, uxx: -k * k * sx * ct }
            }))
        }
        "travelling" => {
            let k = parse_order(head, arg, 0)? as i32;
            let kf = k as f64;
            Ok(AnalyticField::new(name, move |t, x| {
                let s = x - t;
                let p = |e: i32| if e < 0 { 0.0 } else { s.powi(e) };
                let d1 = kf * p(k - 1);
                let d2 = kf * (kf - 1.0) * p(k - 2);
                FieldJet { u: p(k), ut: -d1, ux: d1, utt: d2, uxx: d2 }
            }))
        }
        _ => Err(MslabError::InvalidArgument(format!("unknown oracle `{name}`"))),
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A function on `[0, 1]` with its derivative.
#[derive(Clone)]
pub struct EdgeTrace {
    value: Arc<ScalarFn>,
    derivative: Arc<ScalarFn>,
}

impl fmt::Debug for EdgeTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EdgeTrace")
    }
}

impl EdgeTrace {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    pub fn at(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    pub fn d(&self, s: f64) -> f64 {
        (self.derivative)(s)
    }
}

/// Dirichlet data on the unit square: `bottom(s) = φ(0, s)`,
/// `top(s) = φ(1, s)`, `left(s) = φ(s, 0)`, `right(s) = φ(s, 1)`.
#[derive(Clone, Debug)]
pub struct SquareBoundary {
    pub bottom: EdgeTrace,
    pub top: EdgeTrace,
    pub left: EdgeTrace,
    pub right: EdgeTrace,
}

const CORNER_TOL: f64 = 1e-12;

impl SquareBoundary {
    fn check_corners(&self) -> Result<()> {
        let pairs = [
            (self.bottom.at(0.0), self.left.at(0.0), "(0,0)"),
            (self.bottom.at(1.0), self.right.at(0.0), "(0,1)"),
            (self.top.at(0.0), self.left.at(1.0), "(1,0)"),
            (self.top.at(1.0), self.right.at(1.0), "(1,1)"),
        ];
        for (a, b, corner) in pairs {
            if !((a - b).abs() <= CORNER_TOL * (1.0 + a.abs())) {
                return Err(MslabError::InvalidBoundaryData(format!("edges disagree at corner {corner}: {a} vs {b}")));
            }
        }
        Ok(())
    }

    /// `φ(s,0) + φ(1−s,1) − φ(0,s) − φ(1,1−s)` at one parameter value.
    pub fn compatibility_at(&self, s: f64) -> f64 {
        self.left.at(s) + self.right.at(1.0 - s) - self.bottom.at(s) - self.top.at(1.0 - s)
    }
}

/// Sup-norm of the compatibility condition over `samples` equispaced
/// parameters in `[0, 1]`.
pub fn compatibility_residual(bd: &SquareBoundary, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(MslabError::InvalidArgument("need at least two samples".into()));
    }
    bd.check_corners()?;
    Ok((0..samples).map(|k| bd.compatibility_at(k as f64 / (samples - 1) as f64).abs()).fold(0.0, f64::max))
}

/// `φ(t, x) = F(x − t) + G(x + t)` reconstructed from square data.
///
/// With `a(s) = φ(0,s)`, `b(s) = φ(s,0)`, `c(s) = φ(1−s,1)`, `δ = b − a`
/// and `κ = φ(0,0)/2`:
/// `F(±s) = κ ∓ δ(s)/2`, `G(s) = a(s) − F(s)`, `G(2−s) = c(s) − F(s)`.
#[derive(Clone, Debug)]
pub struct DalembertSolution {
    bd: SquareBoundary,
    kappa: f64,
}

impl DalembertSolution {
    fn delta(&self, s: f64) -> f64 {
        self.bd.left.at(s) - self.bd.bottom.at(s)
    }

    fn delta_d(&self, s: f64) -> f64 {
        self.bd.left.d(s) - self.bd.bottom.d(s)
    }

    /// `F` on `[−1, 1]`.
    pub fn f(&self, s: f64) -> f64 {
        if s >= 0.0 {
            self.kappa - 0.5 * self.delta(s)
        } else {
            self.kappa + 0.5 * self.delta(-s)
        }
    }

    pub fn f_d(&self, s: f64) -> f64 {
        -0.5 * self.delta_d(s.abs())
    }

    /// `G` on `[0, 2]`.
    pub fn g(&self, s: f64) -> f64 {
        if s <= 1.0 {
            self.bd.bottom.at(s) - self.f(s)
        } else {
            let r = 2.0 - s;
            self.bd.right.at(1.0 - r) - self.f(r)
        }
    }

    pub fn g_d(&self, s: f64) -> f64 {
        if s <= 1.0 {
            self.bd.bottom.d(s) - self.f_d(s)
        } else {
            let r = 2.0 - s;
            self.bd.right.d(1.0 - r) + self.f_d(r)
        }
    }

    pub fn phi(&self, t: f64, x: f64) -> f64 {
        self.f(x - t) + self.g(x + t)
    }

    /// `(φ_t, φ_x)`.
    pub fn gradient(&self, t: f64, x: f64) -> (f64, f64) {
        let (fd, gd) = (self.f_d(x - t), self.g_d(x + t));
        (gd - fd, fd + gd)
    }
}

/// Reconstructs `F` and `G` from compatible square data.
pub fn dalembert_solve(bd: &SquareBoundary) -> Result<DalembertSolution> {
    let residual = compatibility_residual(bd, 201)?;
    if residual > 1e-10 {
        return Err(MslabError::IncompatibleData { residual });
    }
    Ok(DalembertSolution { bd: bd.clone(), kappa: 0.5 * bd.bottom.at(0.0) })
}

/// The boundary-Lagrangian formula and the action of the reconstructed
/// interior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveSquareValues {
    pub formula: f64,
    pub action: f64,
}

/// `∫₀¹ (φ_x(α,0) − φ_t(0,α))(φ(1−α,1) − φ(0,α)) dα`, with the normal
/// derivatives expressed through the data as `−δ'(α)`, and
/// `∫∫ ½(φ_t² − φ_x²) = ∫∫ −2F'(x−t)G'(x+t)` over the unit square.
pub fn wave_square_boundary_lagrangian(bd: &SquareBoundary) -> Result<WaveSquareValues> {
    let sol = dalembert_solve(bd)?;
    Ok(WaveSquareValues { formula: boundary_formula(&sol, bd), action: square_action(&sol) })
}

fn boundary_formula(sol: &DalembertSolution, bd: &SquareBoundary) -> f64 {
    adaptive_gauss_kronrod(|a| -sol.delta_d(a) * (bd.right.at(1.0 - a) - bd.bottom.at(a)), 0.0, 1.0, ORACLE_TOL)
}

fn square_action(sol: &DalembertSolution) -> f64 {
    let inner = |x: f64| {
        adaptive_with_breaks(|t| -2.0 * sol.f_d(x - t) * sol.g_d(x + t), 0.0, 1.0, &[x, 1.0 - x], 0.1 * ORACLE_TOL)
    };
    adaptive_with_breaks(inner, 0.0, 1.0, &[0.5], ORACLE_TOL)
}

/// `φ(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)` on the unit circle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierBoundaryData {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl FourierBoundaryData {
    pub fn validate(&self) -> Result<()> {
        if std::iter::once(&self.a0).chain(&self.a).chain(&self.b).all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(MslabError::NonFinite("Fourier coefficients"))
        }
    }

    pub fn modes(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    fn ak(&self, k: usize) -> f64 {
        self.a.get(k - 1).copied().unwrap_or(0.0)
    }

    fn bk(&self, k: usize) -> f64 {
        self.b.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.a0
            + (1..=self.modes())
                .map(|k| self.ak(k) * (k as f64 * theta).cos() + self.bk(k) * (k as f64 * theta).sin())
                .sum::<f64>()
    }

    /// `∫₀^{2π} φψ dθ`.
    pub fn l2_pairing(&self, other: &FourierBoundaryData) -> f64 {
        let k = self.modes().max(other.modes());
        2.0 * PI * self.a0 * other.a0
            + PI * (1..=k).map(|m| self.ak(m) * other.ak(m) + self.bk(m) * other.bk(m)).sum::<f64>()
    }
}

/// Harmonic extension of Fourier data into the unit disc.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscHarmonic {
    pub data: FourierBoundaryData,
}

impl DiscHarmonic {
    /// `u(r, θ) = a0 + Σ r^k (a_k cos kθ + b_k sin kθ)`.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let d = &self.data;
        d.a0 + (1..=d.modes())
            .map(|k| r.powi(k as i32) * (d.ak(k) * (k as f64 * theta).cos() + d.bk(k) * (k as f64 * theta).sin()))
            .sum::<f64>()
    }

    /// Dirichlet-to-Neumann image: mode `k` scaled by `k`.
    pub fn dtn(&self) -> FourierBoundaryData {
        dtn(&self.data)
    }

    /// `(π/2)·Σ k(a_k² + b_k²)`.
    pub fn boundary_lagrangian(&self) -> f64 {
        0.5 * dtn_pairing(&self.data, &self.data)
    }
}

/// Mode `k` scaled by `k`.
pub fn dtn(phi: &FourierBoundaryData) -> FourierBoundaryData {
    FourierBoundaryData {
        a0: 0.0,
        a: phi.a.iter().enumerate().map(|(k, c)| (k + 1) as f64 * c).collect(),
        b: phi.b.iter().enumerate().map(|(k, c)| (k + 1) as f64 * c).collect(),
    }
}

/// `⟨Λφ, ψ⟩ = π·Σ k(a_k a'_k + b_k b'_k)`, evaluated so that swapping the
/// arguments gives a bitwise identical result.
pub fn dtn_pairing(phi: &FourierBoundaryData, psi: &FourierBoundaryData) -> f64 {
    let k = phi.modes().max(psi.modes());
    PI * (1..=k).map(|m| m as f64 * (phi.ak(m) * psi.ak(m) + phi.bk(m) * psi.bk(m))).sum::<f64>()
}

pub fn harmonic_extension_disc(bd: &FourierBoundaryData) -> Result<DiscHarmonic> {
    bd.validate()?;
    Ok(DiscHarmonic { data: bd.clone() })
}
