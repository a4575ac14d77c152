use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{AmplitudeVector, CouplingMatrix};

/// Sweeps allowed before the Jacobi iteration gives up.
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius mass (relative to the whole matrix) at which the
/// rotation sweeps stop.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    n: usize,
    values: Vec<f64>,
    // column j is the eigenvector for values[j], row-major storage
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn vector(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.n + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vector(i, j)).collect()
    }

    /// `max_j |W v_j - z_j v_j|` (Euclidean norm per column).
    pub fn max_residual(&self, w: &CouplingMatrix) -> f64 {
        (0..self.n)
            .map(|j| {
                let v = self.eigenvector(j);
                w.mul_vec(&v)
                    .iter()
                    .zip(&v)
                    .map(|(wv, vi)| (wv - self.values[j] * vi).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |Q^T Q - I|` entrywise.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                let dot: f64 = (0..self.n).map(|i| self.vector(i, a) * self.vector(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `U(A) = exp(-i A W) = Q diag(exp(-i z_j A)) Q^T`.
    pub fn propagator(&self, area: f64) -> ComplexMatrix {
        let n = self.n;
        let phases = self.phases(area);
        let mut u = ComplexMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                u.data[r * n + c] = (0..n)
                    .map(|j| phases[j] * (self.vector(r, j) * self.vector(c, j)))
                    .sum();
            }
        }
        u
    }

    /// `U(A) a` without forming the full matrix.
    pub fn evolve(&self, a: &[Complex64], area: f64) -> AmplitudeVector {
        if area == 0.0 {
            return AmplitudeVector::from_vec(a.to_vec());
        }
        let n = self.n;
        let phases = self.phases(area);
        let coeffs: Vec<Complex64> = (0..n)
            .map(|j| phases[j] * (0..n).map(|i| a[i] * self.vector(i, j)).sum::<Complex64>())
            .collect();
        AmplitudeVector::from_vec(
            (0..n)
                .map(|r| (0..n).map(|j| coeffs[j] * self.vector(r, j)).sum())
                .collect(),
        )
    }

    fn phases(&self, area: f64) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|z| Complex64::from_polar(1.0, -z * area))
            .collect()
    }
}

/// Cyclic Jacobi diagonalisation of a real symmetric matrix.
///
/// Eigenvalues come out ascending; each eigenvector's first component with
/// magnitude above `1e-12` is made positive.
pub fn eigen_decompose(w: &CouplingMatrix) -> Result<EigenSystem> {
    let n = w.dim();
    let mut a: Vec<f64> = (0..n * n).map(|k| w.get(k / n, k % n)).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = w.frobenius_norm();

    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * n + q] * a[p * n + q])
            .sum();
        if off.sqrt() <= OFF_DIAGONAL_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * n + q] * a[p * n + q])
            .sum();
        if off.sqrt() > OFF_DIAGONAL_TOL * scale {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|i| v[i * n + src])
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, f64::signum);
        for i in 0..n {
            vectors[i * n + col] = sign * v[i * n + src];
        }
    }
    Ok(EigenSystem { n, values, vectors })
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let x = self.get(r, k);
                for c in 0..n {
                    out.data[r * n + c] += x * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(a).map(|(u, x)| u * x).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U^dagger U - I|` entrywise.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn matrix(rows: &[&[f64]]) -> CouplingMatrix {
        CouplingMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn three_state_spectrum() {
        // characteristic polynomial l^3 - 2l
        let w = matrix(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let es = eigen_decompose(&w).unwrap();
        let z = es.eigenvalues();
        assert!((z[0] + SQRT_2).abs() < 1e-14);
        assert!(z[1].abs() < 1e-14);
        assert!((z[2] - SQRT_2).abs() < 1e-14);
        assert!(es.max_residual(&w) < 1e-13);
        assert!(es.orthogonality_error() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let es = eigen_decompose(&CouplingMatrix::zeros(2)).unwrap();
        assert_eq!(es.eigenvalues(), &[0.0, 0.0]);
        assert_eq!(es.eigenvector(0), vec![1.0, 0.0]);
        assert_eq!(es.eigenvector(1), vec![0.0, 1.0]);
    }

    #[test]
    fn sign_convention() {
        let w = matrix(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let es = eigen_decompose(&w).unwrap();
        for j in 0..2 {
            assert!(es.vector(0, j) > 0.0);
        }
        assert!((es.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((es.eigenvalues()[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_state_transfer_at_quarter_turn() {
        let w = matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let u = eigen_decompose(&w).unwrap().propagator(FRAC_PI_2);
        assert!((u.get(1, 0).norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn propagator_identity_and_unitarity() {
        let w = matrix(&[&[0.3, 1.0, -0.2], &[1.0, 0.0, 0.7], &[-0.2, 0.7, 1.1]]);
        let es = eigen_decompose(&w).unwrap();
        assert!(es.propagator(0.0).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
        let u = es.propagator(2.7);
        assert!(u.unitarity_error() < 1e-13);
        let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let direct = u.apply(&e1);
        let fast = es.evolve(&e1, 2.7);
        for k in 0..3 {
            assert!((direct[k] - fast[k]).norm() < 1e-14);
        }
    }
}
