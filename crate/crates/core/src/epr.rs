//! Two spacelike-separated apparatuses measuring an entangled photon pair.
//!
//! The pair arrives in a superposition of `H'V"` and `V'H"`; the joint
//! measurement channels are ordered `[H'V", V'H", H'H", V'V"]` and the last
//! two start at exactly zero probability. Each apparatus contributes its own
//! fluctuation source acting on the joint 4-channel probability vector; the
//! sources draw from independent noise streams, which is the whole content of
//! "spacelike separated" used here; both stay active for the whole
//! trajectory. Only the sum of the two correlation matrices enters the
//! dynamics, so the outcome statistics depend on `lambda' + lambda"` alone,
//! while the dead channels stay dead: completed runs land only on the
//! anticorrelated outcomes, at Born frequencies.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{ChannelState, ModelError, SUM_TOL};
use crate::reduction::{
    run_trajectory_sources, source_increment, NoiseStreams, TrajectoryOptions, TrajectoryOutcome,
};
use crate::rng::child_seed;

/// Joint channel order.
pub const CHANNEL_LABELS: [&str; 4] = ["H'V\"", "V'H\"", "H'H\"", "V'V\""];
/// Channels that must never absorb.
pub const FORBIDDEN_CHANNELS: [usize; 2] = [2, 3];

#[derive(Debug, Error)]
pub enum EprError {
    #[error("joint amplitudes have |c|^2 sum {0}, more than 1e-9 from 1")]
    AmplitudesNotNormalized(f64),
    #[error("apparatus intensities must be finite, >= 0, and sum to > 0; got ({0}, {1})")]
    BadIntensities(f64, f64),
    #[error("time step must be finite and > 0, got {0}")]
    BadTimeStep(f64),
    #[error("max_steps and num_runs must be positive")]
    EmptyRun,
    #[error("run with seed {seed} absorbed on forbidden channel {channel} ({label})")]
    ForbiddenOutcome {
        seed: u64,
        channel: usize,
        label: &'static str,
    },
    #[error("independence check needs at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Configuration of a two-apparatus run.
///
/// `amplitudes` are the joint amplitudes `(c_HV, c_VH)` of the two live
/// channels; the default is the singlet-like pair `(1, -1)/sqrt(2)`.
/// One apparatus may have zero intensity (a degenerate source), but not both.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EprConfig {
    pub amplitudes: [C64; 2],
    pub intensity_a: f64,
    pub intensity_b: f64,
    pub dt: f64,
    pub max_steps: u64,
    pub num_runs: u64,
    pub seed: u64,
}

impl Default for EprConfig {
    fn default() -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: [C64::new(inv_sqrt2, 0.0), C64::new(-inv_sqrt2, 0.0)],
            intensity_a: 1.0,
            intensity_b: 1.0,
            dt: 1e-4,
            max_steps: 1_000_000,
            num_runs: 10_000,
            seed: 0,
        }
    }
}

impl EprConfig {
    pub fn validate(&self) -> Result<(), EprError> {
        let norm_sq: f64 = self.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > SUM_TOL {
            return Err(EprError::AmplitudesNotNormalized(norm_sq));
        }
        let la = self.intensity_a;
        let lb = self.intensity_b;
        if !la.is_finite() || !lb.is_finite() || la < 0.0 || lb < 0.0 || la + lb <= 0.0 {
            return Err(EprError::BadIntensities(la, lb));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(EprError::BadTimeStep(self.dt));
        }
        if self.max_steps == 0 || self.num_runs == 0 {
            return Err(EprError::EmptyRun);
        }
        Ok(())
    }

    /// Joint 4-channel initial state `[|c_HV|^2, |c_VH|^2, 0, 0]`, with the
    /// forbidden channels at exact zero.
    pub fn initial_state(&self) -> Result<ChannelState, EprError> {
        self.validate()?;
        let p = [
            self.amplitudes[0].norm_sqr(),
            self.amplitudes[1].norm_sqr(),
            0.0,
            0.0,
        ];
        Ok(ChannelState::new(&p)?)
    }

    fn intensities(&self) -> Vec<f64> {
        vec![self.intensity_a, self.intensity_b]
    }
}

/// One completed joint measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EprRunRecord {
    pub run: u64,
    pub seed: u64,
    pub outcome: TrajectoryOutcome,
    pub absorption_time: f64,
}

/// Outcome statistics of a two-apparatus ensemble.
#[derive(Clone, Debug)]
pub struct EprOutcome {
    pub counts: [u64; 4],
    pub frequencies: [f64; 4],
    pub standard_errors: [f64; 4],
    /// Born weights the frequencies estimate: `(|c_HV|^2, |c_VH|^2, 0, 0)`.
    pub expected: [f64; 4],
    pub unabsorbed: u64,
    /// 2x2 contingency table: rows = apparatus-A' outcome (H', V'),
    /// columns = apparatus-A" outcome (H", V").
    pub contingency: [[u64; 2]; 2],
    pub records: Vec<EprRunRecord>,
}

impl EprOutcome {
    /// Marginal frequency of the `H'` outcome at the first apparatus.
    pub fn marginal_h_prime(&self) -> f64 {
        self.frequencies[0] + self.frequencies[2]
    }
}

fn contingency_cell(channel: usize) -> (usize, usize) {
    // channel -> (A' outcome, A" outcome), 0 = H, 1 = V
    match channel {
        0 => (0, 1), // H'V"
        1 => (1, 0), // V'H"
        2 => (0, 0), // H'H"
        _ => (1, 1), // V'V"
    }
}

/// Run the reduction engine on the joint 4-channel state with two
/// independent per-apparatus noise sources.
///
/// A trajectory absorbing on a forbidden channel is a hard failure and is
/// reported with its seed.
pub fn epr_run(config: &EprConfig) -> Result<EprOutcome, EprError> {
    let p0 = config.initial_state()?;
    let intensities = config.intensities();
    let opts = TrajectoryOptions::default();

    let records: Vec<EprRunRecord> = (0..config.num_runs)
        .into_par_iter()
        .map(|run| {
            let seed = child_seed(config.seed, run);
            let r = run_trajectory_sources(&p0, &intensities, config.dt, config.max_steps, seed, &opts)
                .expect("validated intensities");
            EprRunRecord {
                run,
                seed,
                outcome: r.outcome,
                absorption_time: r.absorption_time,
            }
        })
        .collect();

    let mut counts = [0u64; 4];
    let mut unabsorbed = 0u64;
    let mut contingency = [[0u64; 2]; 2];
    for r in &records {
        match r.outcome {
            TrajectoryOutcome::Absorbed(j) => {
                if FORBIDDEN_CHANNELS.contains(&j) {
                    return Err(EprError::ForbiddenOutcome {
                        seed: r.seed,
                        channel: j,
                        label: CHANNEL_LABELS[j],
                    });
                }
                counts[j] += 1;
                let (a, b) = contingency_cell(j);
                contingency[a][b] += 1;
            }
            TrajectoryOutcome::Unabsorbed => unabsorbed += 1,
        }
    }
    let n = config.num_runs as f64;
    let mut frequencies = [0.0; 4];
    let mut standard_errors = [0.0; 4];
    for j in 0..4 {
        let f = counts[j] as f64 / n;
        frequencies[j] = f;
        standard_errors[j] = (f * (1.0 - f) / n).sqrt();
    }
    let expected = [
        config.amplitudes[0].norm_sqr(),
        config.amplitudes[1].norm_sqr(),
        0.0,
        0.0,
    ];
    Ok(EprOutcome {
        counts,
        frequencies,
        standard_errors,
        expected,
        unabsorbed,
        contingency,
        records,
    })
}

/// Sample statistics of the two sources' raw increments at the initial state.
#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub num_samples: u64,
    /// Per-channel sample correlation of `(dp'_j, dp"_j)`; defined as 0 when
    /// either source is degenerate on that channel.
    pub correlations: [f64; 4],
    pub var_a: [f64; 4],
    pub var_b: [f64; 4],
    /// Per-channel variance of the summed increment `dp' + dp"`.
    pub var_sum: [f64; 4],
}

/// Draw `num_samples` pairs of per-apparatus increments at the initial state
/// and report their per-channel correlation and variances.
///
/// The increments of the two apparatuses come from independent sub-streams,
/// so the correlations vanish within sampling error and the summed variance
/// is additive.
pub fn independence_check(
    config: &EprConfig,
    num_samples: u64,
) -> Result<IndependenceReport, EprError> {
    const MIN_SAMPLES: u64 = 10_000;
    if num_samples < MIN_SAMPLES {
        return Err(EprError::TooFewSamples {
            min: MIN_SAMPLES,
            got: num_samples,
        });
    }
    let p0 = config.initial_state()?;
    let probs = p0.probs();
    let mut streams = NoiseStreams::for_trajectory(config.seed, 2);
    let mut da = [0.0f64; 4];
    let mut db = [0.0f64; 4];

    let mut sum_a = [0.0f64; 4];
    let mut sum_b = [0.0f64; 4];
    let mut sum_aa = [0.0f64; 4];
    let mut sum_bb = [0.0f64; 4];
    let mut sum_ab = [0.0f64; 4];
    let mut sum_s = [0.0f64; 4];
    let mut sum_ss = [0.0f64; 4];

    for _ in 0..num_samples {
        if config.intensity_a > 0.0 {
            source_increment(probs, config.intensity_a, config.dt, streams.stream_mut(0), &mut da);
        } else {
            da = [0.0; 4];
        }
        if config.intensity_b > 0.0 {
            source_increment(probs, config.intensity_b, config.dt, streams.stream_mut(1), &mut db);
        } else {
            db = [0.0; 4];
        }
        for j in 0..4 {
            let a = da[j];
            let b = db[j];
            let s = a + b;
            sum_a[j] += a;
            sum_b[j] += b;
            sum_aa[j] += a * a;
            sum_bb[j] += b * b;
            sum_ab[j] += a * b;
            sum_s[j] += s;
            sum_ss[j] += s * s;
        }
    }

    let n = num_samples as f64;
    let mut correlations = [0.0; 4];
    let mut var_a = [0.0; 4];
    let mut var_b = [0.0; 4];
    let mut var_sum = [0.0; 4];
    for j in 0..4 {
        let ma = sum_a[j] / n;
        let mb = sum_b[j] / n;
        var_a[j] = sum_aa[j] / n - ma * ma;
        var_b[j] = sum_bb[j] / n - mb * mb;
        var_sum[j] = sum_ss[j] / n - (sum_s[j] / n).powi(2);
        let cov = sum_ab[j] / n - ma * mb;
        let denom = (var_a[j] * var_b[j]).sqrt();
        correlations[j] = if denom > 0.0 { cov / denom } else { 0.0 };
    }
    Ok(IndependenceReport {
        num_samples,
        correlations,
        var_a,
        var_b,
        var_sum,
    })
}
