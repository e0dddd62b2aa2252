//! Cross-validation of the two routes to the absorption statistics: the
//! Monte Carlo ensemble and the deterministic distribution solver share one
//! generator, so their absorption estimates must agree within error bars.
//!
//! ```bash
//! cargo run --release -p reduction-lab --example sde_pde_crosscheck
//! ```

use reduction_lab::fokker_planck::FpGrid;
use reduction_lab::model::{ChannelState, DiffusionSpec};
use reduction_lab::reduction::born_statistics;

fn main() {
    let spec = DiffusionSpec::new(1.0, 1, 1e-4).unwrap();
    let p_start = 0.3;
    let p0 = ChannelState::new(&[p_start, 1.0 - p_start]).unwrap();

    let runs = 50_000;
    let stats = born_statistics(&p0, &spec, 1_000_000, runs, 99).unwrap();
    let mc = stats.frequencies[0];
    let se = stats.standard_errors[0];
    println!("monte carlo ({runs} runs):  f(channel 0) = {mc:.5} +- {se:.5}");

    for resolution in [160usize, 320] {
        let mut grid = FpGrid::delta_at(p_start, resolution).unwrap();
        let dt = grid.stable_dt(&spec);
        grid.advance_until_interior_below(&spec, dt, 1e-4, 50_000_000)
            .unwrap();
        let a1 = grid.absorbed_mass()[1];
        let interior = grid.interior_mass();
        let diff = (mc - a1).abs();
        let bound = 3.0 * se + interior;
        println!(
            "pde (n = {resolution:3}):          absorbed_1 = {a1:.5} (interior {interior:.1e}) \
             -> |mc - pde| = {diff:.1e} vs bound {bound:.1e} [{}]",
            if diff <= bound { "ok" } else { "MISMATCH" }
        );
    }
    println!("\nboth estimate the Born weight {p_start} of channel 0");
}
