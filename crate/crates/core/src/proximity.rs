//! Proximity suppression of inter-pointer transitions.
//!
//! While the two superposed pointer positions are separated by `xi`, the
//! spectator atoms around a jumping cluster contribute the Gaussian overlap
//! `exp(-n' xi^2 / (4 delta^2))` to any inter-pointer transition amplitude.
//! The factor is 1 at coincidence and collapses once `xi` exceeds the lattice
//! spread `delta`, which closes the transition window.

use num_complex::Complex64 as C64;

use crate::model::ProximityParams;

/// Spectator overlap `exp(-n' xi^2 / (4 delta^2))`, exactly 1 at `xi = 0`.
pub fn overlap(params: &ProximityParams) -> f64 {
    let exponent =
        -(params.n_prime() as f64) * params.xi() * params.xi() / (4.0 * params.delta() * params.delta());
    exponent.exp()
}

/// Amplitude of a cluster jump between the two pointer positions: the
/// effective transition element times the spectator overlap.
pub fn jump_amplitude(params: &ProximityParams) -> C64 {
    params.t_element() * overlap(params)
}

/// Global probability change from a local cluster fluctuation, spread over
/// the whole pointer: `(n / N) * delta_p_local`.
pub fn spread_fluctuation(delta_p_local: f64, params: &ProximityParams) -> f64 {
    (params.cluster_n() as f64 / params.pointer_total() as f64) * delta_p_local
}

/// Largest separation at which the overlap still reaches `threshold`:
/// the closed-form inversion `xi* = 2 delta sqrt(ln(1/threshold) / n')`.
///
/// `threshold` must lie in `(0, 1)`.
pub fn proximity_window(params: &ProximityParams, threshold: f64) -> f64 {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "proximity_window: threshold must be in (0, 1), got {threshold}"
    );
    2.0 * params.delta() * ((1.0 / threshold).ln() / params.n_prime() as f64).sqrt()
}

/// Overlap and jump amplitude over a list of separations; the sweep that
/// backs the CSV export.
pub fn overlap_sweep(params: &ProximityParams, xis: &[f64]) -> Vec<(f64, f64, C64)> {
    xis.iter()
        .map(|&xi| {
            let p = params.with_xi(xi).expect("sweep xi must be valid");
            (xi, overlap(&p), jump_amplitude(&p))
        })
        .collect()
}
