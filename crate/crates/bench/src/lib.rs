//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mslab_core::delsolve::random_solution;
use mslab_core::{BoundaryData, DiscreteField, LagrangianDensity, QuadMesh, Region, SpatialClosure};

pub const WAVE: LagrangianDensity = LagrangianDensity::LinearWave;

/// Square wave mesh with `c = 0.5`.
pub fn wave_mesh(n: usize) -> QuadMesh {
    QuadMesh::new(0.5, 1.0, n, n).expect("valid mesh")
}

pub fn full_rect(m: &QuadMesh) -> Region {
    Region::Rect { n0: 0, i0: 0, nt: m.nt, nx: m.nx }
}

pub fn seeded_solution(m: &QuadMesh, seed: u64) -> DiscreteField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_solution(&WAVE, m, SpatialClosure::Periodic, &mut rng).expect("stable evolution")
}

pub fn seeded_boundary(region: Region, m: &QuadMesh, seed: u64) -> BoundaryData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BoundaryData::from_node_fn(region, m, |_| rng.gen_range(-1.0..1.0)).expect("boundary fits mesh")
}
