//! A desk-scale numerical laboratory for stochastic reduction dynamics.
//!
//! The crate implements and cross-checks the pieces of a measurement model in
//! which the probabilities of the measurement channels fluctuate and diffuse
//! to a single outcome:
//!
//! - [`model`] — shared domain types with validated invariants: channel
//!   probabilities on the simplex, density-matrix blocks, Hamiltonian blocks,
//!   proximity and diffusion parameters.
//! - [`blocks`] — coupled evolution of the channel blocks `rho1, rho2, rho12`
//!   under a block Hamiltonian, with the probability-flow identity
//!   `dp1/dt = 2 Im tr(h12 rho21) = -dp2/dt`.
//! - [`proximity`] — the spectator-overlap factor
//!   `exp(-n' xi^2 / 4 delta^2)` that suppresses inter-pointer transitions
//!   once the pointer separation exceeds the lattice spread.
//! - [`reduction`] — Monte Carlo engine for the zero-drift diffusion of
//!   channel probabilities with absorbing vertices; absorption frequencies
//!   reproduce the Born weights of the initial state.
//! - [`fokker_planck`] — the deterministic two-channel distribution solver
//!   with exactly conserved mean, used to cross-validate the Monte Carlo
//!   engine.
//! - [`epr`] — two independent apparatuses measuring an entangled pair on
//!   four joint channels, with forbidden channels pinned at zero.
//! - [`scenario`] / [`config`] — the batch runner behind the `redlab` binary:
//!   flat `key = value` configs, seeded runs, CSV results, and a manifest
//!   that reproduces every run byte for byte.
//!
//! Every stochastic result is reproducible: ensembles are seeded through the
//! splittable scheme in [`rng`] and parallel execution does not change any
//! output byte.
//!
//! Each major capability has a runnable example under `examples/`; start with
//! `born_statistics` and `epr_pair`:
//!
//! ```bash
//! cargo run --release -p reduction-lab --example born_statistics
//! cargo run --release -p reduction-lab --example epr_pair
//! ```

pub mod blocks;
pub mod config;
pub mod epr;
pub mod fokker_planck;
pub mod linalg;
pub mod model;
pub mod proximity;
pub mod reduction;
pub mod report;
pub mod rng;
pub mod scenario;

pub use blocks::{dp1_dt, dp2_dt, evolve_blocks, BlockError, BlockSample};
pub use epr::{epr_run, independence_check, EprConfig, EprError, EprOutcome};
pub use fokker_planck::{absorbed_fractions, fp_step, FpError, FpGrid};
pub use model::{
    BlockDensityMatrix, ChannelState, DiffusionSpec, HamiltonianBlocks, ModelError,
    ProximityParams,
};
pub use proximity::{jump_amplitude, overlap, proximity_window, spread_fluctuation};
pub use reduction::{
    born_statistics, correlation_matrix, pearle_step, run_trajectory, BornStatistics,
    NoiseStreams, ReductionError, StepMode, TrajectoryOutcome, TrajectoryRecord,
};
pub use scenario::{run_scenario, RunError, RunRequest, Scenario};
