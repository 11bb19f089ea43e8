//! Discrete and continuous generating functionals for first-order
//! Lagrangian field theories in one space dimension.

pub mod delsolve;
pub mod dual;
pub mod error;
pub mod genfunc;
pub mod jetmesh;
pub mod lagrangian;
pub mod linalg;
pub mod mechanics;
pub mod msforms;
pub mod oracles;
pub mod quadrature;

pub use error::{MslabError, Result};
pub use jetmesh::{
    boundary_nodes, build_mesh, jet_extension, BoundaryData, DiscreteField, JetTriple, Node, QuadMesh, Region,
    SpatialClosure, TriangleIndex,
};
pub use lagrangian::{CovectorAtTriple, DensitySpec, LagrangianDensity, QuadraticCoefficients};
pub use mechanics::{MechHamiltonian, MechLagrangian, PhasePoint};
pub use msforms::FormResidualReport;
pub use oracles::{AnalyticField, DalembertSolution, FourierBoundaryData};
