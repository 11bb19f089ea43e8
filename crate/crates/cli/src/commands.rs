use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use mslab_core::delsolve::{random_solution, solve_bvp, DEFAULT_TOL};
use mslab_core::genfunc::boundary_lagrangian;
use mslab_core::lagrangian::DensitySpec;
use mslab_core::mechanics::{variational_order_check, Family, OrderOutcome};
use mslab_core::msforms::{
    bridges_residual, bridges_residual_periodic, msff_residual_patch, msff_residual_region, symplectic_flux,
};
use mslab_core::oracles::{harmonic_extension_disc, wave_exact_solutions, wave_square_boundary_lagrangian};
use mslab_core::quadrature::adaptive_gauss_kronrod;
use mslab_core::{BoundaryData, DiscreteField, LagrangianDensity, MslabError, Node, QuadMesh, Region, SpatialClosure};

use crate::config::{BoundaryFile, BoundarySource, BridgesMode, ExperimentConfig};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(MslabError),
}

impl From<MslabError> for Failure {
    fn from(e: MslabError) -> Self {
        match e {
            MslabError::SingularSystem { .. } | MslabError::NonConvergence { .. } | MslabError::NonFinite(_) => {
                Failure::Solver(e)
            }
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Config(e)
    }
}

pub struct Outcome {
    pub report: Value,
    pub pass: bool,
    pub fields: Vec<(String, DiscreteField)>,
}

/// Independent stream `k` of the run's generator.
fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn density(cfg: &ExperimentConfig) -> Result<(LagrangianDensity, String), Failure> {
    let spec = cfg.density.clone().unwrap_or(DensitySpec::Wave);
    let l = spec.build()?;
    let name = l.name().to_string();
    Ok((l, name))
}

fn mesh(cfg: &ExperimentConfig) -> Result<QuadMesh, Failure> {
    let m = *ExperimentConfig::require(&cfg.mesh, "mesh")?;
    m.validate()?;
    Ok(m)
}

fn region_or_full(cfg: &ExperimentConfig, m: &QuadMesh) -> Result<Region, Failure> {
    let r = cfg.region.unwrap_or(Region::Rect { n0: 0, i0: 0, nt: m.nt, nx: m.nx });
    r.validate(m)?;
    Ok(r)
}

fn wave_only(l: &LagrangianDensity, what: &str) -> Result<(), Failure> {
    match l {
        LagrangianDensity::LinearWave => Ok(()),
        other => Err(Failure::Config(format!("{what} needs the wave density, got `{}`", other.name()))),
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn msff_check(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let (l, name) = density(cfg)?;
    let m = mesh(cfg)?;
    let region = region_or_full(cfg, &m)?;
    let closure = cfg.closure.unwrap_or(SpatialClosure::Fixed { left: 0.0, right: 0.0 });
    let tol = cfg.tolerance(1e-11)?;

    let solution = random_solution(&l, &m, closure, &mut stream(cfg.seed, 0))?;
    let v = random_solution(&l, &m, closure, &mut stream(cfg.seed, 1))?;
    let w = if cfg.negative_control {
        let mut rng = stream(cfg.seed, 2);
        DiscreteField::from_node_fn(m, |_| rng.gen_range(-1.0..1.0))?
    } else if cfg.same_variation {
        v.clone()
    } else {
        random_solution(&l, &m, closure, &mut stream(cfg.seed, 2))?
    };

    let nodes = region.interior_nodes();
    let patches = nodes
        .par_iter()
        .map(|c| msff_residual_patch(&l, &solution, &v, &w, *c).map(|r| r.residual))
        .collect::<Result<Vec<f64>, _>>()?;
    let total = msff_residual_region(&l, &solution, &v, &w, &region)?;
    let max_patch = max_abs(&patches);
    let pass = max_patch <= tol && total.residual.abs() <= tol;
    let report = json!({
        "command": "msff-check",
        "seed": cfg.seed,
        "density": name,
        "mesh": m,
        "region": region,
        "closure": closure,
        "tol": tol,
        "negative_control": cfg.negative_control,
        "patches": patches.len(),
        "max_patch_residual": max_patch,
        "region_residual": total.residual,
        "region_max_term": total.max_term(),
        "pass": pass,
    });
    let fields = vec![("solution".into(), solution), ("v".into(), v), ("w".into(), w)];
    Ok(Outcome { report, pass, fields })
}

pub fn bridges_check(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let (l, name) = density(cfg)?;
    wave_only(&l, "bridges-check")?;
    let m = mesh(cfg)?;
    let tol = cfg.tolerance(1e-12)?;
    let closure = cfg.closure.unwrap_or(SpatialClosure::Periodic);

    let (v, w, nodes, periodic) = match cfg.mode {
        BridgesMode::Evolve => {
            let v = random_solution(&l, &m, closure, &mut stream(cfg.seed, 1))?;
            let w = if cfg.same_variation {
                v.clone()
            } else {
                random_solution(&l, &m, closure, &mut stream(cfg.seed, 2))?
            };
            let periodic = closure == SpatialClosure::Periodic;
            let cols: Vec<usize> = if periodic { (0..=m.nx).collect() } else { (1..m.nx).collect() };
            let nodes: Vec<Node> = (1..m.nt).flat_map(|n| cols.iter().map(move |&i| Node::new(n, i))).collect();
            (v, w, nodes, periodic)
        }
        BridgesMode::Bvp => {
            let region = *ExperimentConfig::require(&cfg.region, "region")?;
            region.validate(&m)?;
            let solve = |k: u64| -> Result<DiscreteField, Failure> {
                let mut rng = stream(cfg.seed, k);
                let bd = BoundaryData::from_node_fn(region, &m, |_| rng.gen_range(-1.0..1.0))?;
                Ok(solve_bvp(&l, &m, &region, &bd, DEFAULT_TOL)?.field)
            };
            let v = solve(1)?;
            let w = if cfg.same_variation { v.clone() } else { solve(2)? };
            (v, w, region.interior_nodes(), false)
        }
    };

    let residuals =
        nodes
            .par_iter()
            .map(|c| {
                if periodic {
                    bridges_residual_periodic(&v, &w, c.n, c.i)
                } else {
                    bridges_residual(&v, &w, c.n, c.i)
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
    let max_node = max_abs(&residuals);
    let flux = if periodic {
        Some((0..m.nt).map(|n| symplectic_flux(&v, &w, n, closure)).collect::<Result<Vec<f64>, _>>()?)
    } else {
        None
    };
    let spread = flux
        .as_ref()
        .map(|f| f.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - f.iter().cloned().fold(f64::INFINITY, f64::min));
    let pass = max_node <= tol && spread.is_none_or(|s| s <= tol);
    let report = json!({
        "command": "bridges-check",
        "seed": cfg.seed,
        "density": name,
        "mesh": m,
        "mode": format!("{:?}", cfg.mode).to_lowercase(),
        "closure": closure,
        "tol": tol,
        "nodes": residuals.len(),
        "max_node_residual": max_node,
        "flux": flux,
        "flux_spread": spread,
        "pass": pass,
    });
    Ok(Outcome { report, pass, fields: vec![("v".into(), v), ("w".into(), w)] })
}

pub fn boundary_lagrangian_cmd(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let source = ExperimentConfig::require(&cfg.boundary, "boundary")?;
    match source {
        BoundarySource::Disc(data) => {
            data.validate()?;
            let tol = cfg.tolerance(1e-8)?;
            let disc = harmonic_extension_disc(data)?;
            let value = disc.boundary_lagrangian();
            let dtn = disc.dtn();
            let quadrature = 0.5 * adaptive_gauss_kronrod(|t| data.eval(t) * dtn.eval(t), 0.0, 2.0 * PI, 1e-12);
            let pass = (value - quadrature).abs() <= tol;
            let report = json!({
                "command": "boundary-lagrangian",
                "source": "disc",
                "value": value,
                "quadrature": quadrature,
                "tol": tol,
                "pass": pass,
            });
            Ok(Outcome { report, pass, fields: vec![] })
        }
        BoundarySource::File(path) => {
            let (l, name) = density(cfg)?;
            let m = mesh(cfg)?;
            let region = region_or_full(cfg, &m)?;
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let file: BoundaryFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let bd = BoundaryData::from_values(region, &m, &file.values)?;
            let lag = boundary_lagrangian(&l, &m, &region, &bd, DEFAULT_TOL)?;
            let report = json!({
                "command": "boundary-lagrangian",
                "source": "file",
                "density": name,
                "mesh": m,
                "region": region,
                "value": lag.value,
                "rcond": lag.solve.rcond,
                "pass": true,
            });
            Ok(Outcome { report, pass: true, fields: vec![("solution".into(), lag.solve.field)] })
        }
        BoundarySource::Oracle(name) => oracle_ladder(cfg, name),
    }
}

fn oracle_ladder(cfg: &ExperimentConfig, name: &str) -> Result<Outcome, Failure> {
    let (l, density_name) = density(cfg)?;
    wave_only(&l, "the wave-square oracle")?;
    let exact = wave_exact_solutions(name)?;
    let ladder = ExperimentConfig::require(&cfg.ladder, "ladder")?.clone();
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] == 0 {
        return Err(Failure::Config("ladder needs at least two increasing positive entries".into()));
    }
    let aspect = cfg.aspect.unwrap_or(0.5);
    let min_order = cfg.min_order.unwrap_or(0.9);
    let tol = cfg.tolerance(1e-12)?;
    let meshes = ladder
        .iter()
        .map(|&nx| {
            let dx = 1.0 / nx as f64;
            let steps = 1.0 / (aspect * dx);
            let nt = steps.round() as usize;
            if !(aspect > 0.0) || nt == 0 || (steps - nt as f64).abs() > 1e-9 {
                return Err(Failure::Config(format!("aspect {aspect} does not tile the unit square at nx={nx}")));
            }
            Ok(QuadMesh::new(aspect * dx, dx, nt, nx)?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let reference = wave_square_boundary_lagrangian(&exact.square_traces())?;
    let values = meshes
        .par_iter()
        .map(|m| {
            let r = Region::Rect { n0: 0, i0: 0, nt: m.nt, nx: m.nx };
            let bd = BoundaryData::from_fn(r, m, |t, x| exact.value(t, x))?;
            Ok(boundary_lagrangian(&l, m, &r, &bd, DEFAULT_TOL)?.value)
        })
        .collect::<Result<Vec<f64>, MslabError>>()?;
    let errors: Vec<f64> = values.iter().map(|v| (v - reference.action).abs()).collect();
    let orders: Vec<f64> = (1..ladder.len())
        .map(|k| (errors[k - 1] / errors[k]).ln() / (ladder[k] as f64 / ladder[k - 1] as f64).ln())
        .collect();
    let exact_match = errors.iter().all(|e| *e <= tol);
    let observed = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = exact_match || observed >= min_order;
    let k = values.len() - 1;
    let ratio = ladder[k] as f64 / ladder[k - 1] as f64;
    let extrapolated = (ratio * values[k] - values[k - 1]) / (ratio - 1.0);
    let report = json!({
        "command": "boundary-lagrangian",
        "source": "oracle",
        "oracle": name,
        "density": density_name,
        "aspect": aspect,
        "ladder": ladder,
        "values": values,
        "continuous_action": reference.action,
        "continuous_formula": reference.formula,
        "errors": errors,
        "orders": orders,
        "observed_order": if exact_match { None } else { Some(observed) },
        "min_order": min_order,
        "first_order_extrapolation": extrapolated,
        "pass": pass,
    });
    Ok(Outcome { report, pass, fields: vec![] })
}

pub fn mechanics_cmd(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let mc = ExperimentConfig::require(&cfg.mechanics, "mechanics")?;
    let l = mc.lagrangian.build();
    let report = variational_order_check(mc.family, &l, &mc.steps, mc.z0, mc.horizon)?;
    let expected = mc.expected_order.or(match mc.family {
        Family::Midpoint => Some(2.0),
        Family::Rectangle => Some(1.0),
        Family::Exact => None,
    });
    let window = mc.order_window.unwrap_or(0.15);
    let pass = match (&report.outcome, expected) {
        (OrderOutcome::Exact, _) => true,
        (OrderOutcome::Slopes { map, .. }, Some(e)) => (map - e).abs() <= window,
        (OrderOutcome::Slopes { .. }, None) => false,
    };
    let out = json!({
        "command": "mechanics",
        "lagrangian": l.name(),
        "family": mc.family,
        "z0": mc.z0,
        "horizon": mc.horizon,
        "expected_map_order": expected,
        "order_window": window,
        "study": report,
        "pass": pass,
    });
    Ok(Outcome { report: out, pass, fields: vec![] })
}
