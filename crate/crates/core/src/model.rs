//! Domain types shared by all solvers.
//!
//! Constructors enforce the model invariants up front so that the solvers can
//! assume them: channel probabilities live on the simplex with exact-zero dead
//! channels, density-matrix blocks are Hermitian with unit total trace, and
//! parameter sets are validated once at the boundary.
//!
//! A channel is *dead* only when its stored probability is bitwise `0.0`;
//! values within [`ZERO_CLAMP_TOL`] below zero are clamped to exact zero at
//! construction. Renormalization rescales nonzero entries only, so a dead
//! channel can never be revived by any operation in this crate.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{adjoint, hermitian_eigenvalues, hermiticity_defect, trace};

/// Entries in `[-ZERO_CLAMP_TOL, 0]` are clamped to exact `0.0`.
pub const ZERO_CLAMP_TOL: f64 = 1e-12;
/// Probability vectors must sum to 1 within this tolerance at construction.
pub const SUM_TOL: f64 = 1e-9;
/// Hermiticity tolerance for matrix blocks at construction.
pub const HERM_TOL: f64 = 1e-12;
/// Tolerance on `tr(rho1) + tr(rho2) = 1` at construction.
pub const TRACE_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("probability vector is empty")]
    EmptyProbs,
    #[error("probability entry {index} is {value:e}, below -{tolerance:e}")]
    NegativeEntry {
        index: usize,
        value: f64,
        tolerance: f64,
    },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("probabilities sum to {sum}, more than {tolerance:e} from 1")]
    NotNormalized { sum: f64, tolerance: f64 },
    #[error("amplitude vector has |c|^2 sum {norm_sq}, more than {tolerance:e} from 1")]
    AmplitudesNotNormalized { norm_sq: f64, tolerance: f64 },
    #[error("matrix {name} is {rows}x{cols}; blocks must be square")]
    NotSquare {
        name: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix {name} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("matrix {name} deviates from Hermitian by {defect:e} (tolerance {tolerance:e})")]
    NotHermitian {
        name: &'static str,
        defect: f64,
        tolerance: f64,
    },
    #[error("block traces sum to {sum}, more than {tolerance:e} from 1")]
    TraceSum { sum: f64, tolerance: f64 },
    #[error("trace of {name} is {value}, outside [0, 1] beyond tolerance {tolerance:e}")]
    TraceRange {
        name: &'static str,
        value: f64,
        tolerance: f64,
    },
    #[error("trace of {name} has imaginary part {imag:e}")]
    TraceNotReal { name: &'static str, imag: f64 },
    #[error("parameter {name} is invalid: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
        value: f64,
    },
}

// ---------------------------------------------------------------------------
// ChannelState
// ---------------------------------------------------------------------------

/// Probabilities of the measurement channels, plus absorption status.
///
/// Invariants maintained by every constructor and solver step:
/// - entries are finite, in `[0, 1]`, and sum to 1 within `1e-12`;
/// - an entry that is bitwise `0.0` stays `0.0` in every derived state;
/// - `absorbed == Some(j)` exactly when `probs[j] == 1.0` and all other
///   entries are exactly `0.0`.
///
/// Values are immutable after construction and safe to share across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelState {
    probs: Vec<f64>,
    absorbed: Option<usize>,
    time: f64,
}

/// Clamp non-positive entries to exact `0.0` (stepping rule: any channel
/// driven to or below zero dies).
pub(crate) fn clamp_nonpositive(probs: &mut [f64]) {
    for p in probs.iter_mut() {
        if *p <= 0.0 {
            *p = 0.0;
        }
    }
}

/// Renormalize nonzero entries in place and detect absorption.
///
/// Assumes all entries are non-negative and the sum is already close to 1.
/// A lone surviving channel is set to exactly `1.0`. Division is skipped
/// when the sum is within `1e-12` of 1, which makes the operation idempotent:
/// re-finalizing an already-finalized vector changes nothing.
pub(crate) fn finalize_probs(probs: &mut [f64]) -> Option<usize> {
    let mut live = 0usize;
    let mut last_live = 0usize;
    for (j, &p) in probs.iter().enumerate() {
        if p != 0.0 {
            live += 1;
            last_live = j;
        }
    }
    if live == 1 {
        probs[last_live] = 1.0;
        return Some(last_live);
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        for p in probs.iter_mut() {
            if *p != 0.0 {
                *p /= sum;
            }
        }
    }
    for p in probs.iter_mut() {
        if *p > 1.0 {
            *p = 1.0;
        }
    }
    None
}

impl ChannelState {
    /// Build a state from raw probabilities.
    ///
    /// Entries within `ZERO_CLAMP_TOL` below zero become exact zeros; larger
    /// negative entries, non-finite entries, empty input, and sums more than
    /// `SUM_TOL` from 1 are rejected. Surviving entries are renormalized
    /// proportionally, which preserves exact zeros.
    pub fn new(probs: &[f64]) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::EmptyProbs);
        }
        let mut v = probs.to_vec();
        for (index, p) in v.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(ModelError::NonFinite { index });
            }
            if *p < -ZERO_CLAMP_TOL {
                return Err(ModelError::NegativeEntry {
                    index,
                    value: *p,
                    tolerance: ZERO_CLAMP_TOL,
                });
            }
            if *p <= 0.0 {
                *p = 0.0;
            } else if *p > 1.0 {
                *p = p.min(1.0 + SUM_TOL);
            }
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(ModelError::NotNormalized {
                sum,
                tolerance: SUM_TOL,
            });
        }
        for p in v.iter_mut() {
            if *p > 1.0 {
                *p = 1.0;
            }
        }
        let absorbed = finalize_probs(&mut v);
        Ok(Self {
            probs: v,
            absorbed,
            time: 0.0,
        })
    }

    /// Initial channel probabilities from measured-state amplitudes:
    /// `probs[j] = |c[j]|^2`, the Born weights.
    ///
    /// The squared moduli must sum to 1 within `SUM_TOL`.
    pub fn from_amplitudes(c: &[C64]) -> Result<Self, ModelError> {
        if c.is_empty() {
            return Err(ModelError::EmptyProbs);
        }
        let probs: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
        let norm_sq: f64 = probs.iter().sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > SUM_TOL {
            return Err(ModelError::AmplitudesNotNormalized {
                norm_sq,
                tolerance: SUM_TOL,
            });
        }
        Self::new(&probs)
    }

    /// Internal constructor for solver steps: entries must already be
    /// non-negative with sum near 1.
    pub(crate) fn from_step(mut probs: Vec<f64>, time: f64) -> Self {
        let absorbed = finalize_probs(&mut probs);
        Self {
            probs,
            absorbed,
            time,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_channels(&self) -> usize {
        self.probs.len()
    }

    pub fn absorbed(&self) -> Option<usize> {
        self.absorbed
    }

    pub fn is_absorbed(&self) -> bool {
        self.absorbed.is_some()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of channels with nonzero probability.
    pub fn live_channels(&self) -> usize {
        self.probs.iter().filter(|&&p| p != 0.0).count()
    }
}

// ---------------------------------------------------------------------------
// BlockDensityMatrix
// ---------------------------------------------------------------------------

/// The four blocks of the system+apparatus density matrix in the channel
/// basis. Only `rho1`, `rho2`, `rho12` are stored; `rho21` is the adjoint of
/// `rho12` by construction, so the adjoint constraint cannot drift.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDensityMatrix {
    rho1: Array2<C64>,
    rho2: Array2<C64>,
    rho12: Array2<C64>,
}

fn check_square(name: &'static str, m: &Array2<C64>) -> Result<usize, ModelError> {
    if m.nrows() != m.ncols() {
        return Err(ModelError::NotSquare {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_dim(name: &'static str, m: &Array2<C64>, expected: usize) -> Result<(), ModelError> {
    let d = check_square(name, m)?;
    if d != expected {
        return Err(ModelError::DimensionMismatch {
            name,
            got: d,
            expected,
        });
    }
    Ok(())
}

fn check_hermitian(name: &'static str, m: &Array2<C64>, tol: f64) -> Result<(), ModelError> {
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(ModelError::NotHermitian {
            name,
            defect,
            tolerance: tol,
        });
    }
    Ok(())
}

impl BlockDensityMatrix {
    /// Validates Hermiticity of the diagonal blocks, matching dimensions, and
    /// the unit-trace constraint `tr(rho1) + tr(rho2) = 1`.
    pub fn new(
        rho1: Array2<C64>,
        rho2: Array2<C64>,
        rho12: Array2<C64>,
    ) -> Result<Self, ModelError> {
        let d = check_square("rho1", &rho1)?;
        check_dim("rho2", &rho2, d)?;
        check_dim("rho12", &rho12, d)?;
        check_hermitian("rho1", &rho1, HERM_TOL)?;
        check_hermitian("rho2", &rho2, HERM_TOL)?;

        let t1 = trace(&rho1);
        let t2 = trace(&rho2);
        for (name, t) in [("rho1", t1), ("rho2", t2)] {
            if t.im.abs() > TRACE_SUM_TOL {
                return Err(ModelError::TraceNotReal { name, imag: t.im });
            }
            if t.re < -TRACE_SUM_TOL || t.re > 1.0 + TRACE_SUM_TOL {
                return Err(ModelError::TraceRange {
                    name,
                    value: t.re,
                    tolerance: TRACE_SUM_TOL,
                });
            }
        }
        let sum = t1.re + t2.re;
        if (sum - 1.0).abs() > TRACE_SUM_TOL {
            return Err(ModelError::TraceSum {
                sum,
                tolerance: TRACE_SUM_TOL,
            });
        }
        Ok(Self { rho1, rho2, rho12 })
    }

    /// Blocks of the pure state `(v1; v2)` stacked over the two channels:
    /// `rho1 = v1 v1†`, `rho2 = v2 v2†`, `rho12 = v1 v2†`.
    ///
    /// Requires `|v1|^2 + |v2|^2 = 1` within `SUM_TOL`.
    pub fn from_amplitude_vectors(v1: &Array1<C64>, v2: &Array1<C64>) -> Result<Self, ModelError> {
        if v1.len() != v2.len() {
            return Err(ModelError::DimensionMismatch {
                name: "v2",
                got: v2.len(),
                expected: v1.len(),
            });
        }
        let norm_sq: f64 = v1.iter().chain(v2.iter()).map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > SUM_TOL {
            return Err(ModelError::AmplitudesNotNormalized {
                norm_sq,
                tolerance: SUM_TOL,
            });
        }
        let d = v1.len();
        let outer = |a: &Array1<C64>, b: &Array1<C64>| {
            Array2::from_shape_fn((d, d), |(i, j)| a[i] * b[j].conj())
        };
        Self::new(outer(v1, v1), outer(v2, v2), outer(v1, v2))
    }

    /// Constructor for integrator snapshots, which are validated against the
    /// looser run tolerances by the integrator itself.
    pub(crate) fn from_blocks_unchecked(
        rho1: Array2<C64>,
        rho2: Array2<C64>,
        rho12: Array2<C64>,
    ) -> Self {
        Self { rho1, rho2, rho12 }
    }

    pub fn dim(&self) -> usize {
        self.rho1.nrows()
    }

    pub fn rho1(&self) -> &Array2<C64> {
        &self.rho1
    }

    pub fn rho2(&self) -> &Array2<C64> {
        &self.rho2
    }

    pub fn rho12(&self) -> &Array2<C64> {
        &self.rho12
    }

    /// The lower off-diagonal block, derived as `rho12†`.
    pub fn rho21(&self) -> Array2<C64> {
        adjoint(&self.rho12)
    }

    /// Channel-1 probability `tr(rho1)`.
    pub fn p1(&self) -> f64 {
        trace(&self.rho1).re
    }

    /// Channel-2 probability `tr(rho2)`.
    pub fn p2(&self) -> f64 {
        trace(&self.rho2).re
    }

    /// Max Hermiticity defect over the diagonal blocks.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho1).max(hermiticity_defect(&self.rho2))
    }

    /// `|tr(rho1) + tr(rho2) - 1|`.
    pub fn trace_defect(&self) -> f64 {
        (self.p1() + self.p2() - 1.0).abs()
    }

    /// The full `2d x 2d` density matrix `[[rho1, rho12], [rho21, rho2]]`.
    pub fn assemble_full(&self) -> Array2<C64> {
        let d = self.dim();
        let rho21 = self.rho21();
        Array2::from_shape_fn((2 * d, 2 * d), |(i, j)| match (i < d, j < d) {
            (true, true) => self.rho1[(i, j)],
            (true, false) => self.rho12[(i, j - d)],
            (false, true) => rho21[(i - d, j)],
            (false, false) => self.rho2[(i - d, j - d)],
        })
    }

    /// Smallest eigenvalue over the two diagonal blocks; a positivity
    /// monitor (negative values beyond fp noise indicate a lost invariant).
    pub fn min_block_eigenvalue(&self) -> f64 {
        let e1 = hermitian_eigenvalues(&self.rho1);
        let e2 = hermitian_eigenvalues(&self.rho2);
        let m1 = e1.first().copied().unwrap_or(0.0);
        let m2 = e2.first().copied().unwrap_or(0.0);
        m1.min(m2)
    }
}

// ---------------------------------------------------------------------------
// HamiltonianBlocks
// ---------------------------------------------------------------------------

/// Hamiltonian blocks in the channel basis. `h21` is derived as `h12†`, so
/// the assembled matrix is Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianBlocks {
    h1: Array2<C64>,
    h2: Array2<C64>,
    h12: Array2<C64>,
}

impl HamiltonianBlocks {
    pub fn new(h1: Array2<C64>, h2: Array2<C64>, h12: Array2<C64>) -> Result<Self, ModelError> {
        let d = check_square("h1", &h1)?;
        check_dim("h2", &h2, d)?;
        check_dim("h12", &h12, d)?;
        check_hermitian("h1", &h1, HERM_TOL)?;
        check_hermitian("h2", &h2, HERM_TOL)?;
        Ok(Self { h1, h2, h12 })
    }

    pub fn dim(&self) -> usize {
        self.h1.nrows()
    }

    pub fn h1(&self) -> &Array2<C64> {
        &self.h1
    }

    pub fn h2(&self) -> &Array2<C64> {
        &self.h2
    }

    pub fn h12(&self) -> &Array2<C64> {
        &self.h12
    }

    /// The lower coupling block, derived as `h12†`.
    pub fn h21(&self) -> Array2<C64> {
        adjoint(&self.h12)
    }

    /// Same blocks with the inter-channel coupling scaled by a real factor,
    /// e.g. the spectator overlap of the proximity model.
    pub fn with_coupling_scaled(&self, factor: f64) -> Self {
        Self {
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            h12: self.h12.mapv(|z| z * factor),
        }
    }

    /// The full `2d x 2d` Hamiltonian `[[h1, h12], [h21, h2]]`.
    pub fn assemble_full(&self) -> Array2<C64> {
        let d = self.dim();
        let h21 = self.h21();
        Array2::from_shape_fn((2 * d, 2 * d), |(i, j)| match (i < d, j < d) {
            (true, true) => self.h1[(i, j)],
            (true, false) => self.h12[(i, j - d)],
            (false, true) => h21[(i - d, j)],
            (false, false) => self.h2[(i - d, j - d)],
        })
    }
}

// ---------------------------------------------------------------------------
// ProximityParams
// ---------------------------------------------------------------------------

/// Parameters of the proximity model: spectator atom count, pointer
/// separation, lattice spread, the jumping cluster, and the effective
/// transition element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProximityParams {
    n_prime: u64,
    xi: f64,
    delta: f64,
    cluster_n: u64,
    pointer_total: u64,
    t_element: C64,
}

impl ProximityParams {
    pub fn new(
        n_prime: u64,
        xi: f64,
        delta: f64,
        cluster_n: u64,
        pointer_total: u64,
        t_element: C64,
    ) -> Result<Self, ModelError> {
        if n_prime == 0 {
            return Err(ModelError::InvalidParameter {
                name: "n_prime",
                reason: "spectator atom count must be at least 1",
                value: 0.0,
            });
        }
        if !xi.is_finite() || xi < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "xi",
                reason: "pointer separation must be finite and >= 0",
                value: xi,
            });
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "delta",
                reason: "lattice standard deviation must be finite and > 0",
                value: delta,
            });
        }
        if cluster_n == 0 {
            return Err(ModelError::InvalidParameter {
                name: "cluster_n",
                reason: "cluster size must be at least 1",
                value: 0.0,
            });
        }
        if cluster_n > pointer_total {
            return Err(ModelError::InvalidParameter {
                name: "cluster_n",
                reason: "cluster cannot exceed the pointer atom count",
                value: cluster_n as f64,
            });
        }
        if !t_element.re.is_finite() || !t_element.im.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "t_element",
                reason: "transition element must be finite",
                value: f64::NAN,
            });
        }
        Ok(Self {
            n_prime,
            xi,
            delta,
            cluster_n,
            pointer_total,
            t_element,
        })
    }

    /// Same parameters at a different pointer separation.
    pub fn with_xi(&self, xi: f64) -> Result<Self, ModelError> {
        Self::new(
            self.n_prime,
            xi,
            self.delta,
            self.cluster_n,
            self.pointer_total,
            self.t_element,
        )
    }

    pub fn n_prime(&self) -> u64 {
        self.n_prime
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cluster_n(&self) -> u64 {
        self.cluster_n
    }

    pub fn pointer_total(&self) -> u64 {
        self.pointer_total
    }

    pub fn t_element(&self) -> C64 {
        self.t_element
    }
}

// ---------------------------------------------------------------------------
// DiffusionSpec
// ---------------------------------------------------------------------------

/// Diffusion parameters for the reduction process: fluctuation intensity per
/// source, number of independent sources (one apparatus or two), and the
/// Euler-Maruyama time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionSpec {
    intensity: f64,
    num_sources: u32,
    dt: f64,
}

impl DiffusionSpec {
    pub fn new(intensity: f64, num_sources: u32, dt: f64) -> Result<Self, ModelError> {
        if !intensity.is_finite() || intensity <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "intensity",
                reason: "fluctuation intensity must be finite and > 0",
                value: intensity,
            });
        }
        if num_sources != 1 && num_sources != 2 {
            return Err(ModelError::InvalidParameter {
                name: "num_sources",
                reason: "number of noise sources must be 1 or 2",
                value: num_sources as f64,
            });
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "dt",
                reason: "time step must be finite and > 0",
                value: dt,
            });
        }
        Ok(Self {
            intensity,
            num_sources,
            dt,
        })
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn num_sources(&self) -> u32 {
        self.num_sources
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Summed intensity over the independent sources.
    pub fn total_intensity(&self) -> f64 {
        self.intensity * self.num_sources as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_valid_input() {
        let s = ChannelState::new(&[0.5, 0.5]).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5]);
        assert_eq!(s.absorbed(), None);
        assert_eq!(s.time(), 0.0);
    }

    #[test]
    fn vertex_input_is_absorbed() {
        let s = ChannelState::new(&[1.0, 0.0]).unwrap();
        assert_eq!(s.absorbed(), Some(0));
        assert_eq!(s.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn born_weights_from_real_amplitudes() {
        // |0.6|^2 and |0.8|^2
        let s = ChannelState::new(&[0.6f64 * 0.6, 0.8f64 * 0.8]).unwrap();
        assert!((s.probs()[0] - 0.36).abs() < 1e-15);
        assert!((s.probs()[1] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            ChannelState::new(&[]),
            Err(ModelError::EmptyProbs)
        ));
        assert!(matches!(
            ChannelState::new(&[0.7, -0.1]),
            Err(ModelError::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            ChannelState::new(&[0.4, 0.4]),
            Err(ModelError::NotNormalized { .. })
        ));
        assert!(matches!(
            ChannelState::new(&[f64::NAN, 1.0]),
            Err(ModelError::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn tiny_negatives_become_exact_zeros() {
        let s = ChannelState::new(&[1.0, -1e-13]).unwrap();
        assert_eq!(s.probs()[1], 0.0);
        assert_eq!(s.absorbed(), Some(0));
    }

    #[test]
    fn renormalization_preserves_zeros() {
        let s = ChannelState::new(&[0.3 + 1e-10, 0.7, 0.0]).unwrap();
        assert_eq!(s.probs()[2], 0.0);
        let sum: f64 = s.probs().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn construction_is_idempotent() {
        for probs in [
            vec![0.5, 0.5],
            vec![0.3 + 1e-10, 0.7, 0.0],
            vec![0.1, 0.2, 0.3, 0.4 - 1e-10],
            vec![1.0, 0.0],
        ] {
            let s1 = ChannelState::new(&probs).unwrap();
            let s2 = ChannelState::new(s1.probs()).unwrap();
            assert_eq!(s1.probs(), s2.probs(), "input {probs:?}");
            assert_eq!(s1.absorbed(), s2.absorbed());
        }
    }

    #[test]
    fn born_init_examples() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let s = ChannelState::from_amplitudes(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.probs(), &[1.0, 0.0]);
        assert_eq!(s.absorbed(), Some(0));

        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let s = ChannelState::from_amplitudes(&[c(inv_sqrt2, 0.0), c(-inv_sqrt2, 0.0)]).unwrap();
        assert!((s.probs()[0] - 0.5).abs() < 1e-15);
        assert!((s.probs()[1] - 0.5).abs() < 1e-15);

        // hand evaluation of squared moduli: (0.6, 0.8i) -> (0.36, 0.64)
        let s = ChannelState::from_amplitudes(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!((s.probs()[0] - 0.36).abs() < 1e-15);
        assert!((s.probs()[1] - 0.64).abs() < 1e-15);

        assert!(matches!(
            ChannelState::from_amplitudes(&[c(1.0, 0.0), c(0.5, 0.0)]),
            Err(ModelError::AmplitudesNotNormalized { .. })
        ));
    }

    #[test]
    fn born_init_phase_invariance() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let amps = [c(0.6, 0.0), c(0.0, 0.8)];
        let base = ChannelState::from_amplitudes(&amps).unwrap();
        for theta in [0.1f64, 1.0, 2.5, -0.7] {
            let phase = C64::new(theta.cos(), theta.sin());
            let rotated: Vec<C64> = amps.iter().map(|&a| a * phase).collect();
            let s = ChannelState::from_amplitudes(&rotated).unwrap();
            for (a, b) in base.probs().iter().zip(s.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn block_density_matrix_accepts_valid_blocks() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let rho1 = ndarray::array![[c(0.36, 0.0)]];
        let rho2 = ndarray::array![[c(0.64, 0.0)]];
        let rho12 = ndarray::array![[c(0.0, 0.48)]];
        let b = BlockDensityMatrix::new(rho1, rho2, rho12).unwrap();
        assert!((b.p1() - 0.36).abs() < 1e-15);
        assert!((b.p2() - 0.64).abs() < 1e-15);
        assert!(b.trace_defect() < 1e-12);
        let r21 = b.rho21();
        assert_eq!(r21[(0, 0)], c(0.0, -0.48));
    }

    #[test]
    fn block_density_matrix_rejects_bad_blocks() {
        let c = |re: f64, im: f64| C64::new(re, im);
        // non-Hermitian rho1
        let bad = BlockDensityMatrix::new(
            ndarray::array![[c(0.3, 0.0), c(0.1, 0.0)], [c(0.3, 0.0), c(0.2, 0.0)]],
            ndarray::array![[c(0.25, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.25, 0.0)]],
            Array2::zeros((2, 2)),
        );
        assert!(matches!(bad, Err(ModelError::NotHermitian { .. })));
        // traces not summing to 1
        let bad = BlockDensityMatrix::new(
            ndarray::array![[c(0.5, 0.0)]],
            ndarray::array![[c(0.6, 0.0)]],
            ndarray::array![[c(0.0, 0.0)]],
        );
        assert!(matches!(bad, Err(ModelError::TraceSum { .. })));
        // dimension mismatch
        let bad = BlockDensityMatrix::new(
            ndarray::array![[c(0.5, 0.0)]],
            Array2::zeros((2, 2)),
            ndarray::array![[c(0.0, 0.0)]],
        );
        assert!(matches!(bad, Err(ModelError::DimensionMismatch { .. })));
    }

    #[test]
    fn pure_state_blocks() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let v1 = ndarray::array![c(0.6, 0.0)];
        let v2 = ndarray::array![c(0.0, 0.8)];
        let b = BlockDensityMatrix::from_amplitude_vectors(&v1, &v2).unwrap();
        assert!((b.p1() - 0.36).abs() < 1e-15);
        assert!((b.p2() - 0.64).abs() < 1e-15);
        // rho12 = v1 v2† = 0.6 * conj(0.8i) = -0.48i
        assert!((b.rho12()[(0, 0)] - c(0.0, -0.48)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_blocks_assemble_hermitian() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let h = HamiltonianBlocks::new(
            ndarray::array![[c(1.0, 0.0)]],
            ndarray::array![[c(2.0, 0.0)]],
            ndarray::array![[c(0.0, 1.0)]],
        )
        .unwrap();
        let full = h.assemble_full();
        assert_eq!(full[(0, 0)], c(1.0, 0.0));
        assert_eq!(full[(0, 1)], c(0.0, 1.0));
        assert_eq!(full[(1, 0)], c(0.0, -1.0));
        assert_eq!(full[(1, 1)], c(2.0, 0.0));
        assert_eq!(crate::linalg::hermiticity_defect(&full), 0.0);

        let zero = HamiltonianBlocks::new(
            Array2::zeros((2, 2)),
            Array2::zeros((2, 2)),
            Array2::zeros((2, 2)),
        )
        .unwrap();
        assert!(zero.assemble_full().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn proximity_params_validation() {
        let c0 = C64::new(0.0, 0.0);
        assert!(ProximityParams::new(1, 0.0, 1.0, 1, 1, c0).is_ok());
        assert!(ProximityParams::new(0, 0.0, 1.0, 1, 1, c0).is_err());
        assert!(ProximityParams::new(1, -0.1, 1.0, 1, 1, c0).is_err());
        assert!(ProximityParams::new(1, 0.0, 0.0, 1, 1, c0).is_err());
        assert!(ProximityParams::new(1, 0.0, 1.0, 5, 4, c0).is_err());
    }

    #[test]
    fn diffusion_spec_validation() {
        assert!(DiffusionSpec::new(1.0, 1, 1e-4).is_ok());
        assert!(DiffusionSpec::new(1.0, 2, 1e-4).is_ok());
        assert!(DiffusionSpec::new(0.0, 1, 1e-4).is_err());
        assert!(DiffusionSpec::new(1.0, 3, 1e-4).is_err());
        assert!(DiffusionSpec::new(1.0, 1, 0.0).is_err());
        let spec = DiffusionSpec::new(0.5, 2, 1e-3).unwrap();
        assert!((spec.total_intensity() - 1.0).abs() < 1e-15);
    }
}
