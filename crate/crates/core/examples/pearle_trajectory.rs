//! A single reduction trajectory: channel probabilities diffusing on the
//! simplex until one of them absorbs at 1.
//!
//! ```bash
//! cargo run --release -p reduction-lab --example pearle_trajectory
//! ```

use reduction_lab::model::{ChannelState, DiffusionSpec};
use reduction_lab::reduction::{run_trajectory_with, StepMode, TrajectoryOptions, TrajectoryOutcome};

fn main() {
    let p0 = ChannelState::new(&[0.2, 0.5, 0.3]).unwrap();
    let spec = DiffusionSpec::new(1.0, 1, 1e-4).unwrap();
    let opts = TrajectoryOptions {
        mode: StepMode::Auto,
        path_stride: Some(2000),
    };
    let record = run_trajectory_with(&p0, &spec, 1_000_000, 12345, &opts);

    println!("seed {} starting from {:?}", record.seed, p0.probs());
    println!("{:>8}  {:>8}  {:>8}  {:>8}  {:>6}", "t", "p0", "p1", "p2", "live");
    for state in record.path.as_ref().unwrap() {
        println!(
            "{:8.3}  {:8.5}  {:8.5}  {:8.5}  {:>6}",
            state.time(),
            state.probs()[0],
            state.probs()[1],
            state.probs()[2],
            state.live_channels()
        );
    }
    match record.outcome {
        TrajectoryOutcome::Absorbed(j) => println!(
            "\nabsorbed in channel {j} after {} steps (t = {}); final state {:?}",
            record.steps,
            record.absorption_time,
            record.final_state.probs()
        ),
        TrajectoryOutcome::Unabsorbed => println!(
            "\nstill diffusing after {} steps; rerun with a larger budget",
            record.steps
        ),
    }
}
