//! Monte Carlo engine for the diffusion of channel probabilities.
//!
//! Channel probabilities perform a zero-drift Brownian motion on the simplex
//! with state-dependent correlations `A_jk = lambda (delta_jk p_j - p_j p_k)`
//! and absorbing vertices. Because the drift vanishes, `p` is a martingale,
//! and the probability of absorbing at vertex `j` equals the initial `p_j`:
//! absorption statistics reproduce the Born weights of the initial state.
//!
//! Increments are Euler-Maruyama: each independent source `s` contributes a
//! Gaussian draw with covariance `2 lambda_s (diag(p) - p p^T) dt`, realized
//! through the exact square root `B = diag(sqrt(p)) (I - sqrt(p) sqrt(p)^T)`
//! restricted to live channels. The factor 2 fixes the process generator to
//! `sum_s lambda_s * d^2/dp^2 [p(1-p) .]` in the two-channel reduction, the
//! same generator the deterministic solver in [`crate::fokker_planck`]
//! discretizes, so the two routes are directly comparable.
//!
//! The summed increment is projected onto the zero-sum hyperplane of the live
//! channels, components driven to zero or below are clamped to exact `0.0`
//! and stay dead, and a lone survivor absorbs at exactly `1.0`.
//!
//! For two live channels the step collapses to the closed form
//! `dp_0 = sqrt(2 m lambda p_0 p_1 dt) g`, `dp_1 = -dp_0`; this fast path is
//! distributionally identical to the general path and the general path stays
//! available through [`StepMode::GeneralOnly`] for validation.
//!
//! Intensities are constant over a run. Correlations that also depend on time
//! would slot into [`correlation_matrix`] and the step kernel without
//! touching the absorption logic, but no such schedule is implemented.

use rayon::prelude::*;
use thiserror::Error;

use ndarray::Array2;

use crate::model::{clamp_nonpositive, finalize_probs, ChannelState, DiffusionSpec};
use crate::rng::{child_seed, GaussianStream};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("need at least {needed} runs, got {got}")]
    TooFewRuns { needed: u64, got: u64 },
    #[error("step needs {expected} noise streams, got {got}")]
    SourceCount { expected: usize, got: usize },
    #[error("source intensity {index} is {value}; intensities must be finite, >= 0, with positive sum")]
    BadIntensity { index: usize, value: f64 },
}

/// Which step implementation to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Closed-form two-channel step when possible, general path otherwise.
    #[default]
    Auto,
    /// Always use the general square-root-factorization path.
    GeneralOnly,
}

/// Per-source Gaussian streams of one trajectory.
///
/// Stream `s` is seeded with `child_seed(trajectory_seed, s)`, so the sources
/// are independent sub-streams of the trajectory seed and two-apparatus runs
/// draw their fluctuations from uncorrelated generators.
#[derive(Clone, Debug)]
pub struct NoiseStreams {
    streams: Vec<GaussianStream>,
}

impl NoiseStreams {
    pub fn for_trajectory(trajectory_seed: u64, num_sources: usize) -> Self {
        Self {
            streams: (0..num_sources)
                .map(|s| GaussianStream::from_seed(child_seed(trajectory_seed, s as u64)))
                .collect(),
        }
    }

    pub fn num_sources(&self) -> usize {
        self.streams.len()
    }

    pub fn stream_mut(&mut self, source: usize) -> &mut GaussianStream {
        &mut self.streams[source]
    }
}

fn check_intensities(intensities: &[f64]) -> Result<(), ReductionError> {
    let mut total = 0.0;
    for (index, &value) in intensities.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ReductionError::BadIntensity { index, value });
        }
        total += value;
    }
    if intensities.is_empty() || total <= 0.0 {
        return Err(ReductionError::BadIntensity {
            index: 0,
            value: total,
        });
    }
    Ok(())
}

/// Correlation matrix of the probability fluctuations,
/// `A_jk = lambda (delta_jk p_j - p_j p_k)`.
///
/// Rows sum to zero (total probability cannot fluctuate), the matrix is
/// positive semidefinite, and every row/column of a dead channel vanishes
/// identically, which is what keeps dead channels dead.
pub fn correlation_matrix(state: &ChannelState, spec: &DiffusionSpec) -> Array2<f64> {
    let p = state.probs();
    let k = p.len();
    let lam = spec.intensity();
    Array2::from_shape_fn((k, k), |(j, l)| {
        if p[j] == 0.0 || p[l] == 0.0 {
            0.0
        } else if j == l {
            lam * (p[j] * (1.0 - p[j]))
        } else {
            // grouped so that A_jl and A_lj are bitwise equal
            -(lam * (p[j] * p[l]))
        }
    })
}

/// Raw increment of a single source with intensity `lambda`:
/// `out = sqrt(2 lambda dt) * B(p) g` with fresh normals `g` for the live
/// channels. Dead channels receive exactly `0.0`.
pub(crate) fn source_increment(
    probs: &[f64],
    lambda: f64,
    dt: f64,
    stream: &mut GaussianStream,
    out: &mut [f64],
) {
    let scale = (2.0 * lambda * dt).sqrt();
    let mut proj = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        if p != 0.0 {
            let sg = p.sqrt() * stream.next_normal();
            out[j] = sg;
            proj += sg;
        } else {
            out[j] = 0.0;
        }
    }
    for (j, &p) in probs.iter().enumerate() {
        if p != 0.0 {
            out[j] = scale * (out[j] - p * proj);
        }
    }
}

/// Fill `delta` with the summed, zero-sum-projected increment of one step.
fn general_increment(
    probs: &[f64],
    intensities: &[f64],
    dt: f64,
    streams: &mut [GaussianStream],
    delta: &mut [f64],
    scratch: &mut [f64],
) {
    delta.fill(0.0);
    for (s, &lam) in intensities.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        source_increment(probs, lam, dt, &mut streams[s], scratch);
        for (d, &x) in delta.iter_mut().zip(scratch.iter()) {
            *d += x;
        }
    }
    // project onto the zero-sum hyperplane of the live channels
    let mut sum = 0.0;
    let mut live = 0usize;
    for (j, &p) in probs.iter().enumerate() {
        if p != 0.0 {
            sum += delta[j];
            live += 1;
        }
    }
    if live > 0 {
        let mean = sum / live as f64;
        for (j, &p) in probs.iter().enumerate() {
            if p != 0.0 {
                delta[j] -= mean;
            }
        }
    }
}

struct StepEngine {
    intensities: Vec<f64>,
    total_intensity: f64,
    dt: f64,
    mode: StepMode,
    delta: Vec<f64>,
    scratch: Vec<f64>,
}

impl StepEngine {
    fn new(intensities: Vec<f64>, dt: f64, mode: StepMode, k: usize) -> Self {
        let total_intensity = intensities.iter().sum();
        Self {
            intensities,
            total_intensity,
            dt,
            mode,
            delta: vec![0.0; k],
            scratch: vec![0.0; k],
        }
    }

    /// Advance `probs` by one step; returns the absorbing channel if the
    /// state reached a vertex.
    fn step(&mut self, probs: &mut [f64], streams: &mut [GaussianStream]) -> Option<usize> {
        let k = probs.len();
        let fast = self.mode == StepMode::Auto && k == 2 && probs[0] != 0.0 && probs[1] != 0.0;
        if fast {
            let nu = 2.0 * self.total_intensity * self.dt;
            let d = (nu * probs[0] * probs[1]).sqrt() * streams[0].next_normal();
            probs[0] += d;
            probs[1] -= d;
        } else {
            general_increment(
                probs,
                &self.intensities,
                self.dt,
                streams,
                &mut self.delta,
                &mut self.scratch,
            );
            for (p, &d) in probs.iter_mut().zip(self.delta.iter()) {
                if *p != 0.0 {
                    *p += d;
                }
            }
        }
        clamp_nonpositive(probs);
        finalize_probs(probs)
    }
}

/// One diffusion step on a state.
///
/// Draws the summed increment of `spec.num_sources()` independent sources,
/// enforces the zero-sum constraint exactly, clamps components driven to or
/// below zero to exact `0.0`, and renormalizes. Vertices are absorbing: an
/// already-absorbed state passes through unchanged, with no noise consumed.
pub fn pearle_step(
    state: &ChannelState,
    spec: &DiffusionSpec,
    streams: &mut NoiseStreams,
) -> Result<ChannelState, ReductionError> {
    pearle_step_with(state, spec, streams, StepMode::Auto)
}

/// [`pearle_step`] with an explicit step-path choice.
pub fn pearle_step_with(
    state: &ChannelState,
    spec: &DiffusionSpec,
    streams: &mut NoiseStreams,
    mode: StepMode,
) -> Result<ChannelState, ReductionError> {
    if state.is_absorbed() {
        return Ok(state.clone());
    }
    let wanted = spec.num_sources() as usize;
    if streams.num_sources() < wanted {
        return Err(ReductionError::SourceCount {
            expected: wanted,
            got: streams.num_sources(),
        });
    }
    let mut probs = state.probs().to_vec();
    let mut engine = StepEngine::new(
        vec![spec.intensity(); wanted],
        spec.dt(),
        mode,
        probs.len(),
    );
    engine.step(&mut probs, &mut streams.streams);
    Ok(ChannelState::from_step(probs, state.time() + spec.dt()))
}

/// Terminal status of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryOutcome {
    /// Reached the vertex of this channel.
    Absorbed(usize),
    /// Still diffusing when the step budget ran out.
    Unabsorbed,
}

/// Result of a single trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// Downsampled states, present when a path stride was requested.
    pub path: Option<Vec<ChannelState>>,
    pub outcome: TrajectoryOutcome,
    /// Time at termination (absorption or step exhaustion).
    pub absorption_time: f64,
    pub steps: u64,
    /// State at termination; resuming from it continues the same Markov
    /// process.
    pub final_state: ChannelState,
}

/// Knobs for a trajectory run.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrajectoryOptions {
    pub mode: StepMode,
    /// Record every n-th state (plus initial and terminal) into `path`.
    pub path_stride: Option<u64>,
}

/// Run one trajectory to absorption or `max_steps`, deterministically in
/// `seed`.
pub fn run_trajectory(
    p0: &ChannelState,
    spec: &DiffusionSpec,
    max_steps: u64,
    seed: u64,
) -> TrajectoryRecord {
    run_trajectory_with(p0, spec, max_steps, seed, &TrajectoryOptions::default())
}

/// [`run_trajectory`] with explicit options.
pub fn run_trajectory_with(
    p0: &ChannelState,
    spec: &DiffusionSpec,
    max_steps: u64,
    seed: u64,
    opts: &TrajectoryOptions,
) -> TrajectoryRecord {
    let intensities = vec![spec.intensity(); spec.num_sources() as usize];
    run_trajectory_sources(p0, &intensities, spec.dt(), max_steps, seed, opts)
        .expect("intensities from a validated DiffusionSpec are valid")
}

/// Trajectory driver with per-source intensities; the two-apparatus scenario
/// runs through this with distinct intensities per source.
pub(crate) fn run_trajectory_sources(
    p0: &ChannelState,
    intensities: &[f64],
    dt: f64,
    max_steps: u64,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord, ReductionError> {
    check_intensities(intensities)?;
    let mut streams = NoiseStreams::for_trajectory(seed, intensities.len());
    let mut probs = p0.probs().to_vec();
    let t0 = p0.time();
    let mut path = opts.path_stride.map(|_| vec![p0.clone()]);

    if let Some(j) = p0.absorbed() {
        return Ok(TrajectoryRecord {
            seed,
            path,
            outcome: TrajectoryOutcome::Absorbed(j),
            absorption_time: t0,
            steps: 0,
            final_state: p0.clone(),
        });
    }

    let mut engine = StepEngine::new(intensities.to_vec(), dt, opts.mode, probs.len());
    let mut steps = 0u64;
    let mut absorbed = None;
    while steps < max_steps {
        steps += 1;
        absorbed = engine.step(&mut probs, &mut streams.streams);
        if let (Some(stride), Some(path)) = (opts.path_stride, path.as_mut()) {
            if steps.is_multiple_of(stride.max(1)) || absorbed.is_some() {
                path.push(ChannelState::from_step(
                    probs.clone(),
                    t0 + steps as f64 * dt,
                ));
            }
        }
        if absorbed.is_some() {
            break;
        }
    }

    let time = t0 + steps as f64 * dt;
    let final_state = ChannelState::from_step(probs, time);
    let outcome = match absorbed {
        Some(j) => TrajectoryOutcome::Absorbed(j),
        None => TrajectoryOutcome::Unabsorbed,
    };
    Ok(TrajectoryRecord {
        seed,
        path,
        outcome,
        absorption_time: time,
        steps,
        final_state,
    })
}

/// Resume a paused trajectory from its terminal state under a fresh seed.
///
/// The process is Markov in `p`, so a run that is interrupted and restarted
/// from its latest state (here: with a new noise stream) has the same
/// absorption statistics as an uninterrupted one.
pub fn resume_trajectory(
    record: &TrajectoryRecord,
    spec: &DiffusionSpec,
    max_steps: u64,
    seed: u64,
) -> TrajectoryRecord {
    run_trajectory(&record.final_state, spec, max_steps, seed)
}

/// Absorption statistics over an ensemble.
#[derive(Clone, Debug)]
pub struct BornStatistics {
    pub num_runs: u64,
    /// Absorption counts per channel.
    pub counts: Vec<u64>,
    /// `counts / num_runs`.
    pub frequencies: Vec<f64>,
    /// Binomial standard error `sqrt(f (1-f) / num_runs)` per channel.
    pub standard_errors: Vec<f64>,
    /// The initial probabilities the frequencies estimate.
    pub expected: Vec<f64>,
    /// Runs that exhausted `max_steps` without absorbing.
    pub unabsorbed: u64,
    pub mean_absorption_time: f64,
    /// Per-run records in seed order (run `i` has seed `child_seed(seed, i)`).
    pub records: Vec<TrajectoryRecord>,
}

/// Run `num_runs` independently seeded trajectories (in parallel) and report
/// per-channel absorption frequencies with binomial error bars.
///
/// Run `i` is seeded with `child_seed(seed, i)`, so results are reproducible
/// regardless of the parallel schedule.
pub fn born_statistics(
    p0: &ChannelState,
    spec: &DiffusionSpec,
    max_steps: u64,
    num_runs: u64,
    seed: u64,
) -> Result<BornStatistics, ReductionError> {
    born_statistics_with(
        p0,
        spec,
        max_steps,
        num_runs,
        seed,
        &TrajectoryOptions::default(),
    )
}

/// [`born_statistics`] with explicit trajectory options.
pub fn born_statistics_with(
    p0: &ChannelState,
    spec: &DiffusionSpec,
    max_steps: u64,
    num_runs: u64,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<BornStatistics, ReductionError> {
    if num_runs < 100 {
        return Err(ReductionError::TooFewRuns {
            needed: 100,
            got: num_runs,
        });
    }
    let records: Vec<TrajectoryRecord> = (0..num_runs)
        .into_par_iter()
        .map(|i| run_trajectory_with(p0, spec, max_steps, child_seed(seed, i), opts))
        .collect();

    let k = p0.num_channels();
    let mut counts = vec![0u64; k];
    let mut unabsorbed = 0u64;
    let mut time_sum = 0.0;
    for r in &records {
        match r.outcome {
            TrajectoryOutcome::Absorbed(j) => counts[j] += 1,
            TrajectoryOutcome::Unabsorbed => unabsorbed += 1,
        }
        time_sum += r.absorption_time;
    }
    let n = num_runs as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let standard_errors: Vec<f64> = frequencies
        .iter()
        .map(|&f| (f * (1.0 - f) / n).sqrt())
        .collect();
    Ok(BornStatistics {
        num_runs,
        counts,
        frequencies,
        standard_errors,
        expected: p0.probs().to_vec(),
        unabsorbed,
        mean_absorption_time: time_sum / n,
        records,
    })
}

/// Ensemble mean of the channel probabilities after exactly `steps` steps.
///
/// Absorbed trajectories stay at their vertex and keep contributing, which is
/// what makes the mean a constant of the motion (the martingale property).
pub fn ensemble_mean_at(
    p0: &ChannelState,
    spec: &DiffusionSpec,
    steps: u64,
    num_runs: u64,
    seed: u64,
) -> Vec<f64> {
    let finals: Vec<Vec<f64>> = (0..num_runs)
        .into_par_iter()
        .map(|i| {
            let r = run_trajectory(p0, spec, steps, child_seed(seed, i));
            r.final_state.probs().to_vec()
        })
        .collect();
    let k = p0.num_channels();
    let mut mean = vec![0.0; k];
    for f in &finals {
        for (m, &x) in mean.iter_mut().zip(f.iter()) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= num_runs as f64;
    }
    mean
}
