//! Deterministic counterpart of the two-channel reduction process.
//!
//! With two channels the simplex collapses to the free coordinate
//! `p = p_1 in [0, 1]` (the redundant `p_2 = 1 - p` is eliminated before
//! discretizing), and the distribution `P(p, t)` obeys
//!
//! ```text
//! dP/dt = d^2/dp^2 [ A(p) P ],    A(p) = nu p (1 - p),    nu = m lambda
//! ```
//!
//! for `m` independent sources of intensity `lambda` — the generator of the
//! Monte Carlo engine in [`crate::reduction`]. The diffusion coefficient
//! sits *inside* both derivatives; that ordering (not `A d^2P/dp^2`) is what
//! makes the first moment of `P` a constant of the motion, and with it the
//! Born-rule split of the absorbed mass.
//!
//! Discretization: nodes `p_i = i h` with `h = 1/n`. The second difference of
//! the product `q = A P` is exactly the master equation of a jump chain in
//! which node `i` sends mass to *each* neighbor at rate `A_i / h^2`. The
//! jumps are symmetric, so the discrete mean `sum_i p_i m_i + absorbed_1` is
//! conserved to rounding at every step and for every resolution. The vertex
//! nodes are width-zero absorbing cells: `A` vanishes there by its form, so
//! mass that arrives never leaves, and it is accounted as the point masses
//! `absorbed_mass[0]`, `absorbed_mass[1]` rather than as density.
//!
//! The explicit Euler step is stable (and positivity-preserving) for
//! `dt <= 0.5 h^2 / max A`; [`FpGrid::stable_dt`] returns a step inside that
//! bound and [`fp_step`] rejects steps beyond it.

use thiserror::Error;

use crate::model::DiffusionSpec;

/// Stability constant: explicit steps must satisfy `dt <= c h^2 / max A`.
pub const STABILITY_C: f64 = 0.5;
/// Safety factor applied by [`FpGrid::stable_dt`].
pub const DEFAULT_DT_SAFETY: f64 = 0.8;
/// Fewest interior cells a grid may have.
pub const MIN_CELLS: usize = 64;

#[derive(Debug, Error)]
pub enum FpError {
    #[error("grid needs at least {min} interior cells, got {got}")]
    TooFewCells { min: usize, got: usize },
    #[error("initial position {0} is outside [0, 1]")]
    PositionOutOfRange(f64),
    #[error("time step {dt:e} exceeds the stability bound {bound:e} (= {c} h^2 / max A)", c = STABILITY_C)]
    UnstableTimeStep { dt: f64, bound: f64 },
    #[error("time step must be finite and > 0, got {0}")]
    BadTimeStep(f64),
}

/// Distribution of the free channel probability on a uniform node grid, with
/// absorbing vertex cells. Two channels only; ensembles with more channels go
/// through the Monte Carlo engine.
#[derive(Clone, Debug, PartialEq)]
pub struct FpGrid {
    /// Number of intervals `n`; nodes sit at `i/n` for `i = 0..=n`, of which
    /// `1..n` are interior.
    intervals: usize,
    /// Mass per node, length `n + 1`. Entries 0 and `n` stay zero; vertex
    /// mass lives in `absorbed`.
    mass: Vec<f64>,
    /// Point masses captured at `p = 0` and `p = 1`.
    absorbed: [f64; 2],
    time: f64,
}

impl FpGrid {
    /// Unit point mass at the grid node nearest to `p1`.
    ///
    /// A delta at a vertex goes straight into the absorbed mass.
    pub fn delta_at(p1: f64, intervals: usize) -> Result<Self, FpError> {
        if intervals < MIN_CELLS + 1 {
            return Err(FpError::TooFewCells {
                min: MIN_CELLS,
                got: intervals.saturating_sub(1),
            });
        }
        if !(0.0..=1.0).contains(&p1) {
            return Err(FpError::PositionOutOfRange(p1));
        }
        let n = intervals;
        let j = (p1 * n as f64).round() as usize;
        let mut grid = Self {
            intervals: n,
            mass: vec![0.0; n + 1],
            absorbed: [0.0, 0.0],
            time: 0.0,
        };
        if j == 0 {
            grid.absorbed[0] = 1.0;
        } else if j == n {
            grid.absorbed[1] = 1.0;
        } else {
            grid.mass[j] = 1.0;
        }
        Ok(grid)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of interior cells.
    pub fn num_cells(&self) -> usize {
        self.intervals - 1
    }

    /// Node spacing `h = 1/n`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    /// Interior node positions.
    pub fn cell_centers(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.intervals).map(|i| i as f64 * h).collect()
    }

    /// Interior density (mass per unit length) at the nodes.
    pub fn density(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.intervals).map(|i| self.mass[i] / h).collect()
    }

    pub fn absorbed_mass(&self) -> [f64; 2] {
        self.absorbed
    }

    pub fn interior_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.interior_mass() + self.absorbed[0] + self.absorbed[1]
    }

    /// First moment `integral p P dp + absorbed_1`; constant in time up to
    /// rounding.
    pub fn mean(&self) -> f64 {
        let h = self.spacing();
        let mut m = 0.0;
        for i in 1..self.intervals {
            m += i as f64 * h * self.mass[i];
        }
        m + self.absorbed[1]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Peak diffusion coefficient `max A = nu / 4`.
    fn max_a(spec: &DiffusionSpec) -> f64 {
        spec.total_intensity() * 0.25
    }

    /// Largest stable step for this grid, times a safety factor.
    pub fn stable_dt(&self, spec: &DiffusionSpec) -> f64 {
        let h = self.spacing();
        DEFAULT_DT_SAFETY * STABILITY_C * h * h / Self::max_a(spec)
    }

    /// One explicit conservative step; see the module docs for the scheme.
    pub fn step_in_place(&mut self, spec: &DiffusionSpec, dt: f64) -> Result<(), FpError> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(FpError::BadTimeStep(dt));
        }
        let h = self.spacing();
        let bound = STABILITY_C * h * h / Self::max_a(spec);
        if dt > bound {
            return Err(FpError::UnstableTimeStep { dt, bound });
        }

        let n = self.intervals;
        let nu = spec.total_intensity();
        let rate = dt / (h * h);

        // w_i = dt A_i m_i / h^2, built mirror-symmetrically so that a
        // symmetric initial condition stays bitwise symmetric
        let mut w = vec![0.0; n + 1];
        for i in 1..=n / 2 {
            let x = i as f64 * h;
            let a = nu * x * (1.0 - x);
            w[i] = rate * a * self.mass[i];
            let x_mirror = (n - i) as f64 * h;
            let a_mirror = nu * x_mirror * (1.0 - x_mirror);
            debug_assert!((a - a_mirror).abs() <= 1e-12 * a.abs().max(1e-300));
            w[n - i] = rate * a * self.mass[n - i];
        }

        for i in 1..n {
            // (w[i-1] + w[i+1]) - 2 w[i], with the commutative grouping so the
            // update commutes with mirror reflection
            self.mass[i] += (w[i - 1] + w[i + 1]) - 2.0 * w[i];
        }
        self.absorbed[0] += w[1];
        self.absorbed[1] += w[n - 1];
        self.time += dt;
        Ok(())
    }

    /// Advance `steps` equal steps.
    pub fn advance(&mut self, spec: &DiffusionSpec, dt: f64, steps: u64) -> Result<(), FpError> {
        for _ in 0..steps {
            self.step_in_place(spec, dt)?;
        }
        Ok(())
    }

    /// Step until the interior mass falls below `threshold`, up to
    /// `max_steps`. Returns the number of steps taken.
    pub fn advance_until_interior_below(
        &mut self,
        spec: &DiffusionSpec,
        dt: f64,
        threshold: f64,
        max_steps: u64,
    ) -> Result<u64, FpError> {
        let mut steps = 0;
        while steps < max_steps && self.interior_mass() >= threshold {
            self.step_in_place(spec, dt)?;
            steps += 1;
        }
        Ok(steps)
    }
}

/// Functional step: returns the advanced grid, leaving the input untouched.
pub fn fp_step(grid: &FpGrid, spec: &DiffusionSpec, dt: f64) -> Result<FpGrid, FpError> {
    let mut next = grid.clone();
    next.step_in_place(spec, dt)?;
    Ok(next)
}

/// Mass split `(at p=0, at p=1, interior)`; the three parts sum to 1.
pub fn absorbed_fractions(grid: &FpGrid) -> (f64, f64, f64) {
    let [a0, a1] = grid.absorbed_mass();
    (a0, a1, grid.interior_mass())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda: f64, sources: u32) -> DiffusionSpec {
        // the SDE dt is irrelevant to the PDE; any valid value will do
        DiffusionSpec::new(lambda, sources, 1e-4).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(
            FpGrid::delta_at(0.5, 64),
            Err(FpError::TooFewCells { .. })
        ));
        assert!(FpGrid::delta_at(0.5, 65).is_ok());
        assert!(matches!(
            FpGrid::delta_at(1.5, 128),
            Err(FpError::PositionOutOfRange(_))
        ));
    }

    #[test]
    fn vertex_delta_is_immediately_absorbed() {
        let g = FpGrid::delta_at(1.0, 128).unwrap();
        assert_eq!(g.absorbed_mass(), [0.0, 1.0]);
        assert_eq!(g.interior_mass(), 0.0);
        let (a0, a1, interior) = absorbed_fractions(&g);
        assert_eq!((a0, a1, interior), (0.0, 1.0, 0.0));

        let g = FpGrid::delta_at(0.0, 128).unwrap();
        assert_eq!(g.absorbed_mass(), [1.0, 0.0]);
    }

    #[test]
    fn fresh_interior_delta_fractions() {
        let g = FpGrid::delta_at(0.37, 128).unwrap();
        let (a0, a1, interior) = absorbed_fractions(&g);
        assert_eq!((a0, a1), (0.0, 0.0));
        assert_eq!(interior, 1.0);
        assert_eq!(g.total_mass(), 1.0);
    }

    #[test]
    fn unstable_step_is_rejected_with_the_bound() {
        let g = FpGrid::delta_at(0.5, 128).unwrap();
        let s = spec(1.0, 1);
        let bound = STABILITY_C * g.spacing() * g.spacing() / (0.25 * s.total_intensity());
        match fp_step(&g, &s, 2.0 * bound) {
            Err(FpError::UnstableTimeStep { dt, bound: b }) => {
                assert_eq!(dt, 2.0 * bound);
                assert!((b - bound).abs() < 1e-18);
            }
            other => panic!("expected stability rejection, got {other:?}"),
        }
        assert!(fp_step(&g, &s, 0.0).is_err());
    }

    #[test]
    fn stable_dt_is_inside_the_bound() {
        let g = FpGrid::delta_at(0.5, 200).unwrap();
        let s = spec(2.0, 2);
        let dt = g.stable_dt(&s);
        let bound = STABILITY_C * g.spacing() * g.spacing() / (0.25 * s.total_intensity());
        assert!(dt < bound);
        assert!(fp_step(&g, &s, dt).is_ok());
    }

    #[test]
    fn mass_is_conserved_per_step() {
        let s = spec(1.0, 1);
        let mut g = FpGrid::delta_at(0.3, 160).unwrap();
        let dt = g.stable_dt(&s);
        for _ in 0..2000 {
            let before = g.total_mass();
            g.step_in_place(&s, dt).unwrap();
            assert!((g.total_mass() - before).abs() < 1e-10);
            assert!(g.density().iter().all(|&d| d >= 0.0));
        }
        assert!((g.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn symmetric_start_splits_evenly_at_all_times() {
        let s = spec(1.0, 1);
        let mut g = FpGrid::delta_at(0.5, 128).unwrap();
        let dt = g.stable_dt(&s);
        for _ in 0..5000 {
            g.step_in_place(&s, dt).unwrap();
            let [a0, a1] = g.absorbed_mass();
            assert!(
                (a0 - a1).abs() < 1e-10,
                "asymmetric absorption: {a0} vs {a1}"
            );
        }
        assert!(g.absorbed_mass()[0] > 0.01);

        // long-time limit: everything absorbed, split half and half
        g.advance_until_interior_below(&s, dt, 1e-6, 10_000_000)
            .unwrap();
        let (a0, a1, interior) = absorbed_fractions(&g);
        assert!(interior < 1e-6);
        assert!((a0 - 0.5).abs() < 1e-6, "a0 = {a0}");
        assert!((a1 - 0.5).abs() < 1e-6, "a1 = {a1}");
    }

    #[test]
    fn mean_is_conserved() {
        let s = spec(1.0, 2);
        let mut g = FpGrid::delta_at(0.3, 160).unwrap();
        let m0 = g.mean();
        assert!((m0 - 0.3).abs() < 1e-12);
        let dt = g.stable_dt(&s);
        for _ in 0..20_000 {
            g.step_in_place(&s, dt).unwrap();
        }
        assert!((g.mean() - m0).abs() < 1e-9, "mean drifted to {}", g.mean());
    }

    #[test]
    fn absorbed_split_approaches_the_initial_mean() {
        let s = spec(1.0, 1);
        let mut g = FpGrid::delta_at(0.3, 160).unwrap();
        let dt = g.stable_dt(&s);
        let steps = g
            .advance_until_interior_below(&s, dt, 1e-4, 10_000_000)
            .unwrap();
        assert!(g.interior_mass() < 1e-4, "after {steps} steps");
        let (a0, a1, _) = absorbed_fractions(&g);
        assert!((a1 - 0.3).abs() < 2e-3, "absorbed_1 = {a1}");
        assert!((a0 - 0.7).abs() < 2e-3, "absorbed_0 = {a0}");
    }

    #[test]
    fn functional_step_leaves_input_untouched() {
        let s = spec(1.0, 1);
        let g = FpGrid::delta_at(0.25, 128).unwrap();
        let before = g.clone();
        let next = fp_step(&g, &s, g.stable_dt(&s)).unwrap();
        assert_eq!(g, before);
        assert!(next.time() > g.time());
    }
}
