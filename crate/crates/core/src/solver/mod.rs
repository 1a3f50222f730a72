//! Explicit leapfrog evolution of `□u = −u⁵` (or `□u = 0`) on a masked
//! Cartesian grid outside the obstacle, with homogeneous Dirichlet data.

pub mod checkpoint;
pub mod config;
pub mod grid;
pub mod integrals;
pub mod run;
pub mod state;

pub use checkpoint::Checkpoint;
pub use config::{BumpSpec, OuterBoundary, SceneRef, SolverConfig};
pub use grid::{build_grid, Cell, CellCounts, ExteriorNode, Grid};
pub use integrals::{flux_rate, mantle_slab, node_fields, region_integrals, NodeFields, RegionIntegrals};
pub use run::{run_simulation, Simulation, SimulationOutput};
pub use state::{advance, energy_between, init_state, step, total_energy, WaveState};
