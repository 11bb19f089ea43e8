//! Lagrangian densities `L(v, w, ū)`, the triangle Lagrangian
//! `L_d = (dt·dx/2)·L(v, w, ū)` and its Poincaré–Cartan forms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::{gradient_hessian3, Dual2, Scalar};
use crate::error::{MslabError, Result};
use crate::jetmesh::{JetTriple, QuadMesh};

/// Coefficients of `½(vv·v² + ww·w² + uu·ū²) + vw·v·w + vu·v·ū + wu·w·ū`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticCoefficients {
    pub vv: f64,
    pub ww: f64,
    pub uu: f64,
    pub vw: f64,
    pub vu: f64,
    pub wu: f64,
}

impl QuadraticCoefficients {
    /// Symmetric matrix `Q` with `L = ½ zᵀ Q z`, `z = (v, w, ū)`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [[self.vv, self.vw, self.vu], [self.vw, self.ww, self.wu], [self.vu, self.wu, self.uu]]
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.vv, self.ww, self.uu, self.vw, self.vu, self.wu];
        if all.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(MslabError::NonFinite("quadratic coefficients"))
        }
    }
}

type DensityFn = dyn Fn(Dual2, Dual2, Dual2) -> Dual2 + Send + Sync;

/// A density written once against [`Dual2`]; values and derivatives are
/// read off nested dual numbers.
#[derive(Clone)]
pub struct CustomDensity {
    name: String,
    quadratic: bool,
    f: Arc<DensityFn>,
}

impl CustomDensity {
    pub fn new(
        name: impl Into<String>,
        quadratic: bool,
        f: impl Fn(Dual2, Dual2, Dual2) -> Dual2 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), quadratic, f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity").field("name", &self.name).field("quadratic", &self.quadratic).finish()
    }
}

/// A first-order density `L(v, w, ū)` with `v = φ_t`, `w = φ_x`.
#[derive(Clone, Debug)]
pub enum LagrangianDensity {
    /// `½(v² − w²)`.
    LinearWave,
    /// `½(v² + w²)`, whose extremals are harmonic.
    HarmonicDirichlet,
    Quadratic(QuadraticCoefficients),
    Custom(CustomDensity),
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(MslabError::NonFinite("density evaluation"))
    }
}

impl LagrangianDensity {
    /// `½(v² − w²) − (λ/4)ū⁴`.
    pub fn quartic_wave(lambda: f64) -> Self {
        Self::Custom(CustomDensity::new(format!("quartic-wave:{lambda}"), false, move |v, w, u| {
            (v * v - w * w).scale(0.5) - u.powi(4).scale(0.25 * lambda)
        }))
    }

    /// `½(v² + w²) + (λ/4)ū⁴`; convex, so rectangle problems stay well posed.
    pub fn quartic_harmonic(lambda: f64) -> Self {
        Self::Custom(CustomDensity::new(format!("quartic-harmonic:{lambda}"), false, move |v, w, u| {
            (v * v + w * w).scale(0.5) + u.powi(4).scale(0.25 * lambda)
        }))
    }

    pub fn name(&self) -> String {
        match self {
            Self::LinearWave => "wave".into(),
            Self::HarmonicDirichlet => "harmonic".into(),
            Self::Quadratic(_) => "quadratic".into(),
            Self::Custom(c) => c.name.clone(),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        match self {
            Self::Custom(c) => c.quadratic,
            _ => true,
        }
    }

    /// Coefficients of the quadratic form, for the non-custom variants.
    pub fn quadratic_coefficients(&self) -> Option<QuadraticCoefficients> {
        match self {
            Self::LinearWave => Some(QuadraticCoefficients { vv: 1.0, ww: -1.0, ..Default::default() }),
            Self::HarmonicDirichlet => Some(QuadraticCoefficients { vv: 1.0, ww: 1.0, ..Default::default() }),
            Self::Quadratic(q) => Some(*q),
            Self::Custom(_) => None,
        }
    }

    pub fn eval(&self, v: f64, w: f64, ubar: f64) -> Result<f64> {
        let value = match self.quadratic_coefficients() {
            Some(q) => {
                let z = [v, w, ubar];
                let m = q.matrix();
                0.5 * (0..3).map(|a| (0..3).map(|b| z[a] * m[a][b] * z[b]).sum::<f64>()).sum::<f64>()
            }
            None => {
                let Self::Custom(c) = self else { unreachable!() };
                (c.f)(Dual2::constant(v), Dual2::constant(w), Dual2::constant(ubar)).value()
            }
        };
        finite(value)
    }

    /// `(∂L/∂v, ∂L/∂w, ∂L/∂ū)`.
    pub fn gradient(&self, v: f64, w: f64, ubar: f64) -> Result<[f64; 3]> {
        let g = match self.quadratic_coefficients() {
            Some(q) => {
                let z = [v, w, ubar];
                let m = q.matrix();
                [0, 1, 2].map(|a| (0..3).map(|b| m[a][b] * z[b]).sum::<f64>())
            }
            None => self.custom_derivatives(v, w, ubar).1,
        };
        g.iter().try_for_each(|x| finite(*x).map(|_| ()))?;
        Ok(g)
    }

    /// Hessian in `(v, w, ū)`.
    pub fn hessian(&self, v: f64, w: f64, ubar: f64) -> Result<[[f64; 3]; 3]> {
        let h = match self.quadratic_coefficients() {
            Some(q) => q.matrix(),
            None => self.custom_derivatives(v, w, ubar).2,
        };
        h.iter().flatten().try_for_each(|x| finite(*x).map(|_| ()))?;
        Ok(h)
    }

    fn custom_derivatives(&self, v: f64, w: f64, ubar: f64) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let Self::Custom(c) = self else { unreachable!() };
        gradient_hessian3(|a, b, u| (c.f)(a, b, u), [v, w, ubar])
    }
}

/// Density specification accepted in configuration files:
/// `"wave"`, `"harmonic"`, `{"quadratic": {..}}` or
/// `{"quartic_wave": λ}` / `{"quartic_harmonic": λ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Wave,
    Harmonic,
    Quadratic(QuadraticCoefficients),
    QuarticWave(f64),
    QuarticHarmonic(f64),
}

impl DensitySpec {
    pub fn build(&self) -> Result<LagrangianDensity> {
        Ok(match self {
            Self::Wave => LagrangianDensity::LinearWave,
            Self::Harmonic => LagrangianDensity::HarmonicDirichlet,
            Self::Quadratic(q) => {
                q.validate()?;
                LagrangianDensity::Quadratic(*q)
            }
            Self::QuarticWave(l) => LagrangianDensity::quartic_wave(finite(*l)?),
            Self::QuarticHarmonic(l) => LagrangianDensity::quartic_harmonic(finite(*l)?),
        })
    }
}

/// Components `(d1, d2, d3)` of a one-form on jet space in the basis
/// `(du₁, du₂, du₃)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CovectorAtTriple {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CovectorAtTriple {
    pub fn from_array(d: [f64; 3]) -> Self {
        Self { d1: d[0], d2: d[1], d3: d[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    pub fn apply(self, xi: [f64; 3]) -> f64 {
        self.d1 * xi[0] + self.d2 * xi[1] + self.d3 * xi[2]
    }
}

/// Derivatives of `(v, w, ū)` with respect to `(u₁, u₂, u₃)`.
fn jet_jacobian(mesh: &QuadMesh) -> [[f64; 3]; 3] {
    let third = 1.0 / 3.0;
    [[-1.0 / mesh.dt, 0.0, 1.0 / mesh.dt], [-1.0 / mesh.dx, 1.0 / mesh.dx, 0.0], [third, third, third]]
}

fn area_factor(mesh: &QuadMesh) -> f64 {
    0.5 * mesh.dt * mesh.dx
}

/// `L_d = (dt·dx/2)·L(v, w, ū)`.
pub fn eval_ld(l: &LagrangianDensity, jt: &JetTriple, mesh: &QuadMesh) -> Result<f64> {
    Ok(area_factor(mesh) * l.eval(jt.v, jt.w, jt.ubar)?)
}

/// `(D₁L_d, D₂L_d, D₃L_d)`.
pub fn grad_ld(l: &LagrangianDensity, jt: &JetTriple, mesh: &QuadMesh) -> Result<CovectorAtTriple> {
    let g = l.gradient(jt.v, jt.w, jt.ubar)?;
    let j = jet_jacobian(mesh);
    let s = area_factor(mesh);
    Ok(CovectorAtTriple::from_array([0, 1, 2].map(|k| s * (0..3).map(|a| g[a] * j[a][k]).sum::<f64>())))
}

/// `D_jD_kL_d`, symmetric.
pub fn hess_ld(l: &LagrangianDensity, jt: &JetTriple, mesh: &QuadMesh) -> Result<[[f64; 3]; 3]> {
    let h = l.hessian(jt.v, jt.w, jt.ubar)?;
    let j = jet_jacobian(mesh);
    let s = area_factor(mesh);
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += j[a][r] * h[a][b] * j[b][c];
                }
            }
            *slot = s * acc;
        }
    }
    Ok(out)
}

fn check_slot(k: usize) -> Result<usize> {
    if (1..=3).contains(&k) {
        Ok(k - 1)
    } else {
        Err(MslabError::InvalidArgument(format!("form index must be 1, 2 or 3, got {k}")))
    }
}

/// `Θ^k = D_kL_d du_k`.
pub fn theta_k(l: &LagrangianDensity, jt: &JetTriple, mesh: &QuadMesh, k: usize) -> Result<CovectorAtTriple> {
    let slot = check_slot(k)?;
    let g = grad_ld(l, jt, mesh)?.to_array();
    let mut out = [0.0; 3];
    out[slot] = g[slot];
    Ok(CovectorAtTriple::from_array(out))
}

/// `Ω^k(ξ, η) = −Σ_j D_jD_kL_d (ξ_j η_k − η_j ξ_k)`.
pub fn omega_k(
    l: &LagrangianDensity,
    jt: &JetTriple,
    mesh: &QuadMesh,
    k: usize,
    xi: [f64; 3],
    eta: [f64; 3],
) -> Result<f64> {
    let slot = check_slot(k)?;
    let h = hess_ld(l, jt, mesh)?;
    Ok(omega_from_hessian(&h, slot, xi, eta))
}

/// `Ω^k` from a precomputed Hessian; `slot` is zero-based.
pub fn omega_from_hessian(h: &[[f64; 3]; 3], slot: usize, xi: [f64; 3], eta: [f64; 3]) -> f64 {
    -(0..3).map(|j| h[j][slot] * (xi[j] * eta[slot] - eta[j] * xi[slot])).sum::<f64>()
}

/// Closed forms of `Ω¹, Ω², Ω³` for the linear wave density:
/// `½(dx·dv∧du − dt·dw∧du)`, `½dt·dw∧du`, `−½dx·dv∧du`, with `u = u₁`.
pub fn linear_wave_omega(mesh: &QuadMesh, k: usize, xi: [f64; 3], eta: [f64; 3]) -> Result<f64> {
    check_slot(k)?;
    let v = |z: [f64; 3]| (z[2] - z[0]) / mesh.dt;
    let w = |z: [f64; 3]| (z[1] - z[0]) / mesh.dx;
    let dv_du = v(xi) * eta[0] - v(eta) * xi[0];
    let dw_du = w(xi) * eta[0] - w(eta) * xi[0];
    Ok(match k {
        1 => 0.5 * (mesh.dx * dv_du - mesh.dt * dw_du),
        2 => 0.5 * mesh.dt * dw_du,
        _ => -0.5 * mesh.dx * dv_du,
    })
}
