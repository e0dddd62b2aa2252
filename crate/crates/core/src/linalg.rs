//! Small dense complex-matrix helpers shared by the block solvers.
//!
//! Everything here targets the toy-model regime (dimensions of a few), so the
//! implementations favor clarity and exactness over asymptotic speed.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::rng::GaussianStream;

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for ((i, j), v) in a.indexed_iter() {
        out[(j, i)] = v.conj();
    }
    out
}

/// Max elementwise deviation from `a = a†`.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().iter().sum()
}

pub fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "frobenius_distance: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending.
///
/// Intended for monitoring (positivity of density blocks) on small matrices;
/// the input is symmetrized first so callers may pass matrices with fp-level
/// Hermiticity defects.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigenvalues: matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let adj = adjoint(a);
    let mut m: Array2<C64> = (a + &adj) * C64::new(0.5, 0.0);
    let scale = frobenius_norm(&m).max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // columns: m <- m R, with R_pp = R_qq = c, R_pq = s*phase,
                // R_qp = -s*conj(phase)
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * phase.conj() * mkq;
                    m[(k, q)] = s * phase * mkp + c * mkq;
                }
                // rows: m <- R† m
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * phase * mqk;
                    m[(q, k)] = s * phase.conj() * mpk + c * mqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut eig: Vec<f64> = m.diag().iter().map(|z| z.re).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Random complex matrix with i.i.d. standard-normal real and imaginary parts.
pub fn random_complex(d: usize, rng: &mut GaussianStream) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |_| C64::new(rng.next_normal(), rng.next_normal()))
}

/// Random Hermitian matrix `(M + M†)/2` from a normal ensemble.
pub fn random_hermitian(d: usize, rng: &mut GaussianStream) -> Array2<C64> {
    let m = random_complex(d, rng);
    (&m + &adjoint(&m)) * C64::new(0.5, 0.0)
}

/// Random unit vector with normal complex entries.
pub fn random_unit_vector(d: usize, rng: &mut GaussianStream) -> Array1<C64> {
    loop {
        let v = Array1::from_shape_fn(d, |_| C64::new(rng.next_normal(), rng.next_normal()));
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v / C64::new(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjoint_and_defect() {
        let a = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        assert_eq!(hermiticity_defect(&a), 0.0);
        let b = array![[c(1.0, 0.0), c(0.5, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        assert!((hermiticity_defect(&b) - 0.5).abs() < 1e-15);
        let badj = adjoint(&b);
        assert_eq!(badj[(0, 1)], c(0.0, 0.0));
        assert_eq!(badj[(1, 0)], c(0.5, 0.0));
    }

    #[test]
    fn eigenvalues_two_by_two_analytic() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let eig = hermitian_eigenvalues(&a);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_powers() {
        // sum(eig^k) must equal tr(A^k); an independent check that needs no
        // eigen-decomposition.
        let mut rng = GaussianStream::from_seed(11);
        for d in [2usize, 3, 4, 6] {
            let a = random_hermitian(d, &mut rng);
            let eig = hermitian_eigenvalues(&a);
            let a2 = a.dot(&a);
            let a3 = a2.dot(&a);
            let t1 = trace(&a).re;
            let t2 = trace(&a2).re;
            let t3 = trace(&a3).re;
            let s1: f64 = eig.iter().sum();
            let s2: f64 = eig.iter().map(|x| x * x).sum();
            let s3: f64 = eig.iter().map(|x| x * x * x).sum();
            let scale = 1.0 + t2.abs();
            assert!((s1 - t1).abs() < 1e-10 * scale, "d={d}: {s1} vs {t1}");
            assert!((s2 - t2).abs() < 1e-10 * scale, "d={d}: {s2} vs {t2}");
            assert!((s3 - t3).abs() < 1e-9 * scale.powf(1.5), "d={d}: {s3} vs {t3}");
        }
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let a = array![
            [c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]
        ];
        let eig = hermitian_eigenvalues(&a);
        assert_eq!(eig.len(), 3);
        assert!((eig[0] + 1.0).abs() < 1e-14);
        assert!((eig[1] - 0.5).abs() < 1e-14);
        assert!((eig[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_unit_vector_is_normalized() {
        let mut rng = GaussianStream::from_seed(3);
        for d in [1usize, 2, 5] {
            let v = random_unit_vector(d, &mut rng);
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
