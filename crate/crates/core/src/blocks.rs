//! Coupled evolution of the channel blocks of the density matrix.
//!
//! With the apparatus+system density matrix split into channel blocks
//! `rho1, rho2, rho12` (and `rho21 = rho12†`), the von Neumann equation
//! becomes the coupled system (hbar = 1)
//!
//! ```text
//! i d(rho1)/dt  = [h1, rho1]  + h12 rho21 - rho12 h21
//! i d(rho2)/dt  = [h2, rho2]  + h21 rho12 - rho21 h12
//! i d(rho12)/dt = h1 rho12 - rho12 h2 + h12 rho2 - rho1 h12
//! ```
//!
//! Taking traces gives the probability-flow identity
//! `dp1/dt = 2 Im tr(h12 rho21) = -dp2/dt`: the channel probabilities move
//! only through the inter-channel coupling `h12`. The integrator is a
//! fixed-step classical Runge-Kutta (RK4) on the stacked blocks, with
//! Hermiticity and total-trace monitors that abort on drift beyond the run
//! tolerances.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::adjoint;
use crate::model::{BlockDensityMatrix, HamiltonianBlocks};

/// Max Hermiticity defect tolerated in the diagonal blocks during a run.
pub const RUN_HERM_TOL: f64 = 1e-9;
/// Max total-trace drift tolerated during a run.
pub const RUN_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BlockError {
    #[error("hamiltonian dimension {h_dim} does not match density dimension {rho_dim}")]
    DimensionMismatch { h_dim: usize, rho_dim: usize },
    #[error("time step must be finite and > 0, got {0}")]
    BadTimeStep(f64),
    #[error("final time must be finite and >= 0, got {0}")]
    BadFinalTime(f64),
    #[error("invariant `{invariant}` violated at step {step}: magnitude {magnitude:e}")]
    InvariantViolation {
        step: usize,
        invariant: &'static str,
        magnitude: f64,
    },
}

fn check_dims(h: &HamiltonianBlocks, rho: &BlockDensityMatrix) -> Result<(), BlockError> {
    if h.dim() != rho.dim() {
        return Err(BlockError::DimensionMismatch {
            h_dim: h.dim(),
            rho_dim: rho.dim(),
        });
    }
    Ok(())
}

/// `dp1/dt = 2 Im tr(h12 rho21)`: the rate at which probability flows into
/// channel 1 through the coupling block.
pub fn dp1_dt(h: &HamiltonianBlocks, rho: &BlockDensityMatrix) -> Result<f64, BlockError> {
    check_dims(h, rho)?;
    // tr(h12 rho21) = sum_{ik} h12[i,k] conj(rho12[i,k])
    let mut tr_im = 0.0;
    let h12 = h.h12();
    let rho12 = rho.rho12();
    for i in 0..h.dim() {
        for k in 0..h.dim() {
            tr_im += (h12[(i, k)] * rho12[(i, k)].conj()).im;
        }
    }
    Ok(2.0 * tr_im)
}

/// `dp2/dt = 2 Im tr(h21 rho12)`; equals `-dp1_dt` for every input.
pub fn dp2_dt(h: &HamiltonianBlocks, rho: &BlockDensityMatrix) -> Result<f64, BlockError> {
    check_dims(h, rho)?;
    // tr(h21 rho12) = sum_{ik} conj(h12[k,i]) rho12[k,i]
    let mut tr_im = 0.0;
    let h12 = h.h12();
    let rho12 = rho.rho12();
    for i in 0..h.dim() {
        for k in 0..h.dim() {
            tr_im += (h12[(k, i)].conj() * rho12[(k, i)]).im;
        }
    }
    Ok(2.0 * tr_im)
}

/// One recorded point of a block evolution.
#[derive(Clone, Debug)]
pub struct BlockSample {
    pub time: f64,
    pub state: BlockDensityMatrix,
}

impl BlockSample {
    pub fn p1(&self) -> f64 {
        self.state.p1()
    }

    pub fn p2(&self) -> f64 {
        self.state.p2()
    }

    pub fn herm_defect(&self) -> f64 {
        self.state.hermiticity_defect()
    }

    pub fn trace_defect(&self) -> f64 {
        self.state.trace_defect()
    }
}

struct Blocks {
    rho1: Array2<C64>,
    rho2: Array2<C64>,
    rho12: Array2<C64>,
}

fn rhs(h: &HamiltonianBlocks, h21: &Array2<C64>, b: &Blocks) -> Blocks {
    let minus_i = C64::new(0.0, -1.0);
    let rho21 = adjoint(&b.rho12);
    let h1 = h.h1();
    let h2 = h.h2();
    let h12 = h.h12();

    let d1 = (h1.dot(&b.rho1) - b.rho1.dot(h1) + h12.dot(&rho21) - b.rho12.dot(h21))
        .mapv(|z| z * minus_i);
    let d2 = (h2.dot(&b.rho2) - b.rho2.dot(h2) + h21.dot(&b.rho12) - rho21.dot(h12))
        .mapv(|z| z * minus_i);
    let d12 = (h1.dot(&b.rho12) - b.rho12.dot(h2) + h12.dot(&b.rho2) - b.rho1.dot(h12))
        .mapv(|z| z * minus_i);
    Blocks {
        rho1: d1,
        rho2: d2,
        rho12: d12,
    }
}

fn axpy(b: &Blocks, k: &Blocks, factor: f64) -> Blocks {
    let f = C64::new(factor, 0.0);
    Blocks {
        rho1: &b.rho1 + &k.rho1.mapv(|z| z * f),
        rho2: &b.rho2 + &k.rho2.mapv(|z| z * f),
        rho12: &b.rho12 + &k.rho12.mapv(|z| z * f),
    }
}

/// Integrate the coupled block equations with fixed-step RK4 and return the
/// full time series (including the initial state).
///
/// The run aborts with a diagnostic if the Hermiticity defect of a diagonal
/// block exceeds [`RUN_HERM_TOL`] or the total trace drifts from its initial
/// value by more than [`RUN_TRACE_TOL`].
pub fn evolve_blocks(
    h: &HamiltonianBlocks,
    rho0: &BlockDensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<Vec<BlockSample>, BlockError> {
    check_dims(h, rho0)?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(BlockError::BadTimeStep(dt));
    }
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(BlockError::BadFinalTime(t_final));
    }
    let n_steps = (t_final / dt).round() as usize;

    let h21 = h.h21();
    let total0 = rho0.p1() + rho0.p2();
    let mut current = Blocks {
        rho1: rho0.rho1().clone(),
        rho2: rho0.rho2().clone(),
        rho12: rho0.rho12().clone(),
    };
    let mut series = Vec::with_capacity(n_steps + 1);
    series.push(BlockSample {
        time: 0.0,
        state: rho0.clone(),
    });

    for step in 1..=n_steps {
        let k1 = rhs(h, &h21, &current);
        let k2 = rhs(h, &h21, &axpy(&current, &k1, dt / 2.0));
        let k3 = rhs(h, &h21, &axpy(&current, &k2, dt / 2.0));
        let k4 = rhs(h, &h21, &axpy(&current, &k3, dt));
        let sixth = C64::new(dt / 6.0, 0.0);
        let combine = |b: &Array2<C64>,
                       a1: &Array2<C64>,
                       a2: &Array2<C64>,
                       a3: &Array2<C64>,
                       a4: &Array2<C64>| {
            b + &((a1 + &(a2 * C64::new(2.0, 0.0)) + &(a3 * C64::new(2.0, 0.0)) + a4) * sixth)
        };
        current = Blocks {
            rho1: combine(&current.rho1, &k1.rho1, &k2.rho1, &k3.rho1, &k4.rho1),
            rho2: combine(&current.rho2, &k1.rho2, &k2.rho2, &k3.rho2, &k4.rho2),
            rho12: combine(&current.rho12, &k1.rho12, &k2.rho12, &k3.rho12, &k4.rho12),
        };

        let state = BlockDensityMatrix::from_blocks_unchecked(
            current.rho1.clone(),
            current.rho2.clone(),
            current.rho12.clone(),
        );
        let herm = state.hermiticity_defect();
        if herm > RUN_HERM_TOL {
            return Err(BlockError::InvariantViolation {
                step,
                invariant: "diagonal blocks Hermitian",
                magnitude: herm,
            });
        }
        let drift = (state.p1() + state.p2() - total0).abs();
        if drift > RUN_TRACE_TOL {
            return Err(BlockError::InvariantViolation {
                step,
                invariant: "total trace conserved",
                magnitude: drift,
            });
        }
        series.push(BlockSample {
            time: step as f64 * dt,
            state,
        });
    }
    Ok(series)
}

/// Re-export of the assembled Hamiltonian, the form the oracle evolution acts
/// on: `[[h1, h12], [h21, h2]]`.
pub fn assemble_full(h: &HamiltonianBlocks) -> Array2<C64> {
    h.assemble_full()
}
