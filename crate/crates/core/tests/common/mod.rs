//! Shared test oracles, independent of the solver paths they check.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for ((i, j), v) in a.indexed_iter() {
        out[(j, i)] = v.conj();
    }
    out
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn complex_eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Matrix exponential by scaling-and-squaring with a Taylor series, accurate
/// to machine precision for the small dense matrices used here.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // infinity norm decides the scaling depth
    let norm = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let k = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a.mapv(|z| z * 2f64.powi(-k));

    let mut term = complex_eye(n);
    let mut sum = complex_eye(n);
    for j in 1..=60 {
        term = term.dot(&b).mapv(|z| z / j as f64);
        sum += &term;
        if frobenius(&term) < 1e-22 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..k {
        result = result.dot(&result);
    }
    result
}

/// Full-space von Neumann evolution `exp(-iHt) rho exp(iHt)`.
pub fn evolve_full_oracle(h_full: &Array2<C64>, rho_full: &Array2<C64>, t: f64) -> Array2<C64> {
    let u = expm(&h_full.mapv(|z| z * C64::new(0.0, -t)));
    let u_dag = adjoint(&u);
    u.dot(rho_full).dot(&u_dag)
}

/// Partition a `2d x 2d` matrix into its channel blocks
/// `(top-left, bottom-right, top-right)`.
pub fn partition_blocks(full: &Array2<C64>, d: usize) -> (Array2<C64>, Array2<C64>, Array2<C64>) {
    (
        full.slice(s![..d, ..d]).to_owned(),
        full.slice(s![d.., d..]).to_owned(),
        full.slice(s![..d, d..]).to_owned(),
    )
}
