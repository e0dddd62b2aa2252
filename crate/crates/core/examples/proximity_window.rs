//! The proximity window: how fast spectator atoms shut down inter-pointer
//! transitions as the two pointer positions separate.
//!
//! ```bash
//! cargo run --release -p reduction-lab --example proximity_window
//! ```

use num_complex::Complex64 as C64;

use reduction_lab::model::ProximityParams;
use reduction_lab::proximity::{jump_amplitude, overlap, proximity_window, spread_fluctuation};

fn main() {
    // 100 spectator atoms within the correlation sphere, lattice spread 1,
    // a 10-atom cluster in a 1000-atom pointer
    let params = ProximityParams::new(100, 0.0, 1.0, 10, 1000, C64::new(0.8, 0.2)).unwrap();

    println!("spectator overlap vs pointer separation (n' = 100, delta = 1):");
    println!("{:>8}  {:>12}  {:>12}", "xi", "overlap", "|jump amp|");
    for k in 0..=10 {
        let xi = 0.06 * k as f64;
        let p = params.with_xi(xi).unwrap();
        println!(
            "{:8.3}  {:12.6e}  {:12.6e}",
            xi,
            overlap(&p),
            jump_amplitude(&p).norm()
        );
    }

    for threshold in [0.5, 0.1, 0.01] {
        let window = proximity_window(&params, threshold);
        println!(
            "\noverlap stays >= {threshold} only while xi <= {window:.5} \
             (check: overlap there = {:.5})",
            overlap(&params.with_xi(window).unwrap())
        );
    }

    let local = 0.02;
    println!(
        "\na local cluster fluctuation dp = {local} spreads over the pointer to {:.2e}",
        spread_fluctuation(local, &params)
    );
}
