use std::path::{Path, PathBuf};

use serde::Deserialize;

use mslab_core::lagrangian::DensitySpec;
use mslab_core::mechanics::Family;
use mslab_core::{FourierBoundaryData, MechLagrangian, PhasePoint, QuadMesh, Region, SpatialClosure};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub command: Option<String>,
    pub density: Option<DensitySpec>,
    pub mesh: Option<QuadMesh>,
    pub region: Option<Region>,
    pub closure: Option<SpatialClosure>,
    pub boundary: Option<BoundarySource>,
    #[serde(default)]
    pub seed: u64,
    pub tol: Option<f64>,
    /// Replace the second variation by a random non-solution.
    #[serde(default)]
    pub negative_control: bool,
    /// Use the same variation for both slots.
    #[serde(default)]
    pub same_variation: bool,
    #[serde(default)]
    pub mode: BridgesMode,
    /// Refinement ladder for `boundary-lagrangian` (space intervals per unit length).
    pub ladder: Option<Vec<usize>>,
    /// `dt/dx` for ladder meshes.
    pub aspect: Option<f64>,
    pub min_order: Option<f64>,
    pub mechanics: Option<MechanicsConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgesMode {
    /// Random solutions grown by time stepping.
    #[default]
    Evolve,
    /// Solutions of seeded boundary-value problems on `region`.
    Bvp,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySource {
    /// A catalogued exact wave solution sampled on the boundary.
    Oracle(String),
    /// Fourier data on the unit circle.
    Disc(FourierBoundaryData),
    /// JSON file `{"values": [...]}` in boundary traversal order.
    File(PathBuf),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MechSpec {
    FreeParticle,
    Harmonic { omega: f64 },
}

impl MechSpec {
    pub fn build(&self) -> MechLagrangian {
        match *self {
            MechSpec::FreeParticle => MechLagrangian::FreeParticle,
            MechSpec::Harmonic { omega } => MechLagrangian::Harmonic { omega },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicsConfig {
    pub lagrangian: MechSpec,
    pub family: Family,
    pub steps: Vec<f64>,
    pub z0: PhasePoint,
    pub horizon: f64,
    pub expected_order: Option<f64>,
    pub order_window: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Report file name inside the output directory.
    pub report: Option<String>,
    /// Write solution fields as CSV next to the report.
    #[serde(default)]
    pub fields: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(BoundarySource::File(p)) = &mut cfg.boundary {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, String> {
        field.as_ref().ok_or_else(|| format!("missing `{name}`"))
    }

    pub fn tolerance(&self, default: f64) -> Result<f64, String> {
        let tol = self.tol.unwrap_or(default);
        if tol.is_finite() && tol > 0.0 {
            Ok(tol)
        } else {
            Err(format!("tolerance must be positive, got {tol}"))
        }
    }

    pub fn report_name(&self) -> &str {
        self.output.report.as_deref().unwrap_or("report.json")
    }
}
