use num_complex::Complex64;

use crate::error::{Error, Result};

/// Populations of the launch state, the target state, and one of the
/// `n - 2` equivalent spectator states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationTriple {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PopulationTriple {
    /// `p1 + p2 + (n - 2) p3`, which must equal 1.
    pub fn total(&self, n: usize) -> f64 {
        self.p1 + self.p2 + (n as f64 - 2.0) * self.p3
    }

    pub fn max_abs_diff(&self, other: &PopulationTriple) -> f64 {
        (self.p1 - other.p1)
            .abs()
            .max((self.p2 - other.p2).abs())
            .max((self.p3 - other.p3).abs())
    }
}

/// Effective three-level solution of the partially symmetric system with
/// `beta = gamma = 1` and zero diagonals.
///
/// The conserved combinations are `c_j = a_1 + x_j a_2 + y_j sum_{k>=3} a_k`,
/// each evolving as `exp(-i z_j A)`. Inverting `c = M a` gives the
/// amplitudes; row `j` of `M` is `(1, x_j, (n - 2) y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub n: usize,
    pub alpha: f64,
    pub x: [f64; 3],
    pub y_plus: f64,
    pub y_minus: f64,
    pub z: [f64; 3],
    pub minv: [[f64; 3]; 3],
}

/// Roots and inverse transform for `n` states at coupling ratio `alpha`.
pub fn reduced_system(n: usize, alpha: f64) -> Result<ReducedSystem> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput("alpha must be finite".into()));
    }
    // x = 1 turns the eigen-relations into (n-2) y^2 + (alpha - n + 3) y - 2 = 0
    let m = n as f64 - 2.0;
    let b = (alpha - n as f64 + 3.0) / m;
    let disc = (b * b + 8.0 / m).sqrt();
    let (y_plus, y_minus) = stable_roots(-b, disc, -2.0 / m);
    let dy = y_plus - y_minus;
    if dy == 0.0 {
        return Err(Error::DegenerateRoots);
    }
    let z = [alpha + m * y_plus, alpha + m * y_minus, -alpha];
    let s = 1.0 / (2.0 * dy);
    let minv = [
        [-y_minus * s, y_plus * s, dy * s],
        [-y_minus * s, y_plus * s, -dy * s],
        [2.0 / m * s, -2.0 / m * s, 0.0],
    ];
    Ok(ReducedSystem {
        n,
        alpha,
        x: [1.0, 1.0, -1.0],
        y_plus,
        y_minus,
        z,
        minv,
    })
}

/// Roots `(sum ± disc) / 2` of a monic quadratic with known product, computed
/// without cancellation.
fn stable_roots(sum: f64, disc: f64, product: f64) -> (f64, f64) {
    if sum >= 0.0 {
        let big = 0.5 * (sum + disc);
        (big, product / big)
    } else {
        let small = 0.5 * (sum - disc);
        (product / small, small)
    }
}

impl ReducedSystem {
    /// Rows `(1, x_j, (n - 2) y_j)`.
    pub fn m(&self) -> [[f64; 3]; 3] {
        let m = self.n as f64 - 2.0;
        let y = [self.y_plus, self.y_minus, 0.0];
        std::array::from_fn(|j| [1.0, self.x[j], m * y[j]])
    }

    /// `max |M M^-1 - I|`.
    pub fn inverse_error(&self) -> f64 {
        let m = self.m();
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| m[r][k] * self.minv[k][c]).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// `(a_1, a_2, a_3)` at phase area `area`.
    pub fn amplitudes(&self, area: f64) -> [Complex64; 3] {
        let c = self.z.map(|z| Complex64::from_polar(1.0, -z * area));
        std::array::from_fn(|k| (0..3).map(|j| self.minv[k][j] * c[j]).sum())
    }
}

/// Populations as a double cosine sum over eigenvalue differences.
pub fn reduced_populations(rs: &ReducedSystem, area: f64) -> PopulationTriple {
    let p = |k: usize| -> f64 {
        let row = &rs.minv[k];
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += row[i] * row[j] * ((rs.z[i] - rs.z[j]) * area).cos();
            }
        }
        acc
    };
    PopulationTriple {
        p1: p(0),
        p2: p(1),
        p3: p(2),
    }
}

/// Closed-form populations along a designed pulse as functions of
/// `theta = 2 pi n0 A / A0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPopulations {
    pub populations: PopulationTriple,
    /// Only `n = 3` reproduces the full solution at every `theta`; for larger
    /// `n` the forms agree with it at `theta = 0` and `theta = 2 pi n0` only.
    pub exact: bool,
}

pub fn theta_populations(theta: f64, n: usize) -> Result<ThetaPopulations> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let (c, c_half, s_half) = (theta.cos(), (0.5 * theta).cos(), (0.5 * theta).sin());
    Ok(ThetaPopulations {
        populations: PopulationTriple {
            p1: (3.0 + c + 4.0 * c_half) / 8.0,
            p2: (3.0 + c - 4.0 * c_half) / 8.0,
            p3: 0.5 * s_half * s_half / (n as f64 - 2.0),
        },
        exact: n == 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn three_state_roots() {
        let rs = reduced_system(3, 0.0).unwrap();
        assert!((rs.y_plus - SQRT_2).abs() < 1e-15);
        assert!((rs.y_minus + SQRT_2).abs() < 1e-15);
        assert!((rs.z[0] - SQRT_2).abs() < 1e-15);
        assert!((rs.z[1] + SQRT_2).abs() < 1e-15);
        assert_eq!(rs.z[2], 0.0);
    }

    #[test]
    fn four_state_design_roots() {
        let rs = reduced_system(4, -1.0 / 3.0).unwrap();
        let r10 = 10f64.sqrt();
        assert!((rs.y_plus - (1.0 + r10) / 3.0).abs() < 1e-15);
        assert!((rs.y_minus - (1.0 - r10) / 3.0).abs() < 1e-15);
        assert!((rs.z[0] - (1.0 / 3.0 + 2.0 / 3.0 * r10)).abs() < 1e-14);
        assert!((rs.z[1] - (1.0 / 3.0 - 2.0 / 3.0 * r10)).abs() < 1e-14);
        assert!((rs.z[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn root_product_and_inverse() {
        for n in 3..12 {
            for &alpha in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
                let rs = reduced_system(n, alpha).unwrap();
                assert!((rs.y_plus * rs.y_minus + 2.0 / (n as f64 - 2.0)).abs() < 1e-12);
                assert!(rs.inverse_error() < 1e-12);
                // a(0) = e1
                let a = rs.amplitudes(0.0);
                assert!((a[0] - 1.0).norm() < 1e-12 && a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn populations_cosine_sum_matches_modulus() {
        let rs = reduced_system(6, 0.9).unwrap();
        for i in 0..50 {
            let area = 0.2 * i as f64;
            let p = reduced_populations(&rs, area);
            let a = rs.amplitudes(area);
            assert!((p.p1 - a[0].norm_sqr()).abs() < 1e-12);
            assert!((p.p2 - a[1].norm_sqr()).abs() < 1e-12);
            assert!((p.p3 - a[2].norm_sqr()).abs() < 1e-12);
            assert!((p.total(6) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_state_transfer_area() {
        let rs = reduced_system(3, 0.0).unwrap();
        let p = reduced_populations(&rs, PI / SQRT_2);
        assert!(p.p1.abs() < 1e-12 && (p.p2 - 1.0).abs() < 1e-12 && p.p3.abs() < 1e-12);
        let p = reduced_populations(&rs, 0.0);
        assert!((p.p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_forms() {
        let p = theta_populations(0.0, 5).unwrap().populations;
        assert_eq!((p.p1, p.p2, p.p3), (1.0, 0.0, 0.0));
        let p = theta_populations(2.0 * PI, 5).unwrap().populations;
        assert!(p.p1.abs() < 1e-15 && (p.p2 - 1.0).abs() < 1e-15 && p.p3.abs() < 1e-15);
        let t = theta_populations(PI, 3).unwrap();
        assert!(t.exact);
        let p = t.populations;
        assert!((p.p1 - 0.25).abs() < 1e-15 && (p.p2 - 0.25).abs() < 1e-15);
        assert!((p.p3 - 0.5).abs() < 1e-15);
        assert!(!theta_populations(PI, 4).unwrap().exact);
        assert_eq!(theta_populations(1.0, 2), Err(Error::NTooSmall(2)));
    }
}
