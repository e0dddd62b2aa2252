//! Absorption statistics of the reduction process reproduce the Born
//! weights: the frequency of landing on channel j estimates the initial p_j.
//!
//! ```bash
//! cargo run --release -p reduction-lab --example born_statistics
//! ```

use reduction_lab::model::{ChannelState, DiffusionSpec};
use reduction_lab::reduction::born_statistics;
use reduction_lab::report::born_summary;

fn main() {
    let spec = DiffusionSpec::new(1.0, 1, 1e-4).unwrap();
    let runs = 20_000;

    for p0 in [vec![0.5, 0.5], vec![0.36, 0.64], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]] {
        let state = ChannelState::new(&p0).unwrap();
        let stats = born_statistics(&state, &spec, 1_000_000, runs, 7).unwrap();
        println!("p0 = {:?}, {runs} runs:", state.probs());
        print!("{}", born_summary(&stats));
        for j in 0..p0.len() {
            let pull = (stats.frequencies[j] - stats.expected[j])
                / stats.standard_errors[j].max(1e-300);
            println!("  channel {j}: deviation = {pull:+.2} standard errors");
        }
        println!();
    }
}
