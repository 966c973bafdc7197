//! Symmetric eigenvalues via cyclic Jacobi rotations.
//!
//! Plane rotations annihilate one off-diagonal element at a time; sweeping
//! over all (p, q) pairs drives the off-diagonal mass to zero. Foolproof
//! for real symmetric input and plenty fast for the small dense matrices
//! this crate produces (similarity matrices of a few hundred rows).

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix (row-major, `n x n`), sorted descending.
///
/// Rejects input that is not symmetric within `1e-9` (absolute, relative to
/// the magnitude of the entries compared).
pub fn sym_eigvals(mat: &[f64], n: usize) -> Result<Vec<f64>> {
    if mat.len() != n * n {
        return Err(Error::ShapeMismatch {
            context: "sym_eigvals",
            expected: n * n,
            got: mat.len(),
        });
    }
    for p in 0..n {
        for q in (p + 1)..n {
            let a = mat[p * n + q];
            let b = mat[q * n + p];
            if (a - b).abs() > SYMMETRY_TOL * (a.abs() + b.abs()).max(1.0) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut a = mat.to_vec();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        s
    };
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    let tol = 1e-30 * frob;

    for _ in 0..MAX_SWEEPS {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-angle root of t² + 2tθ − 1 = 0.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(eig)
}
