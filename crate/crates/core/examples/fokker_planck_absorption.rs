//! The deterministic route to the same statistics: evolve the distribution
//! of the channel probability and watch the absorbed masses converge to the
//! Born weights while the mean never moves.
//!
//! ```bash
//! cargo run --release -p reduction-lab --example fokker_planck_absorption
//! ```

use reduction_lab::fokker_planck::{absorbed_fractions, FpGrid};
use reduction_lab::model::DiffusionSpec;

fn main() {
    let spec = DiffusionSpec::new(1.0, 1, 1e-4).unwrap();
    let p_start = 0.3;
    let mut grid = FpGrid::delta_at(p_start, 160).unwrap();
    let dt = grid.stable_dt(&spec);
    println!(
        "delta start at p = {p_start}, {} cells, dt = {dt:.3e}",
        grid.num_cells()
    );
    println!(
        "{:>7}  {:>10}  {:>10}  {:>10}  {:>12}",
        "t", "absorbed_0", "absorbed_1", "interior", "mean drift"
    );

    let m0 = grid.mean();
    let chunk = (0.25 / dt).round() as u64;
    for _ in 0..20 {
        grid.advance(&spec, dt, chunk).unwrap();
        let (a0, a1, interior) = absorbed_fractions(&grid);
        println!(
            "{:7.2}  {:10.6}  {:10.6}  {:10.2e}  {:12.2e}",
            grid.time(),
            a0,
            a1,
            interior,
            (grid.mean() - m0).abs()
        );
        if interior < 1e-6 {
            break;
        }
    }

    let (a0, a1, _) = absorbed_fractions(&grid);
    println!(
        "\nfinal split {a1:.4} / {a0:.4} vs Born weights {p_start} / {}",
        1.0 - p_start
    );
}
