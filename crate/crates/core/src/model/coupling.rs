use std::fmt;

use crate::error::{invalid, Error, Result};

/// Relative coupling strengths between states.
///
/// The physical couplings are `V_kj(t) = W_kj * V(t)` with a single common
/// envelope `V(t)`; this type describes how `W` is laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    /// Partially symmetric layout: states 3..n are mutually equivalent.
    ///
    /// `alpha = V12/V`, `beta = V1j/V`, `gamma = V2j/V = Vjk/V` (j, k >= 3),
    /// diagonals `(eps1, eps2, eps3)` with `eps3` shared by every state >= 3.
    Structured {
        alpha: f64,
        beta: f64,
        gamma: f64,
        epsilon: [f64; 3],
    },
    /// Two-state coupling `[[eps1, alpha], [alpha, eps2]]`.
    TwoState { alpha: f64, epsilon: [f64; 2] },
    /// Full matrix, row-major. Must be square and symmetric.
    Explicit(Vec<Vec<f64>>),
}

impl CouplingSpec {
    /// Structured layout with `beta = gamma = 1` and zero diagonals.
    pub fn structured(alpha: f64) -> Self {
        CouplingSpec::Structured {
            alpha,
            beta: 1.0,
            gamma: 1.0,
            epsilon: [0.0; 3],
        }
    }

    /// The standard two-state coupling `[[0, 1], [1, 0]]`.
    pub fn two_state() -> Self {
        CouplingSpec::TwoState {
            alpha: 1.0,
            epsilon: [0.0; 2],
        }
    }
}

/// Problem statement: state count, bare energies, and coupling layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    n: usize,
    energies: Vec<f64>,
    coupling: CouplingSpec,
}

impl SystemSpec {
    /// Degenerate system (all energies zero).
    pub fn new(n: usize, coupling: CouplingSpec) -> Result<Self> {
        Self::with_energies(vec![0.0; n], coupling)
    }

    pub fn with_energies(energies: Vec<f64>, coupling: CouplingSpec) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(invalid(format!("need at least 2 states, got {n}")));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(invalid("energies must be finite"));
        }
        match &coupling {
            CouplingSpec::Structured { .. } if n < 3 => {
                return Err(Error::StructuredRequiresN3(n));
            }
            CouplingSpec::TwoState { .. } if n != 2 => {
                return Err(invalid(format!("two-state coupling given for n = {n}")));
            }
            CouplingSpec::Explicit(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!("explicit coupling matrix must be {n}x{n}")));
                }
            }
            _ => {}
        }
        Ok(SystemSpec {
            n,
            energies,
            coupling,
        })
    }

    /// The partially symmetric system with `beta = gamma = 1`, zero diagonals.
    pub fn structured(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, CouplingSpec::structured(alpha))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    /// All energies equal.
    pub fn is_degenerate(&self) -> bool {
        let e0 = self.energies[0];
        self.energies.iter().all(|&e| e == e0)
    }

    /// Same couplings, new energies.
    pub fn with_new_energies(&self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.n {
            return Err(invalid(format!(
                "expected {} energies, got {}",
                self.n,
                energies.len()
            )));
        }
        Self::with_energies(energies, self.coupling.clone())
    }
}

/// Constant real symmetric matrix of relative coupling strengths.
#[derive(Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CouplingMatrix {
    /// Accepts a square matrix only if it is exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(invalid("coupling matrix must be square and non-empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(invalid("coupling matrix entries must be finite"));
                }
                if j > i && v != rows[j][i] {
                    return Err(Error::AsymmetricMatrix { row: i, col: j });
                }
            }
        }
        Ok(CouplingMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn zeros(n: usize) -> Self {
        CouplingMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    /// Writes both `(row, col)` and `(col, row)`.
    fn set_sym(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.n + col] = v;
        self.data[col * self.n + row] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Relabels states `a` and `b` (simultaneous row and column swap).
    pub fn swap_states(&self, a: usize, b: usize) -> Self {
        let perm = |i: usize| {
            if i == a {
                b
            } else if i == b {
                a
            } else {
                i
            }
        };
        let mut out = CouplingMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i * self.n + j] = self.get(perm(i), perm(j));
            }
        }
        out
    }

    /// `W x` for a real vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl fmt::Debug for CouplingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

/// Lays out the coupling matrix described by `spec`.
///
/// Structured layout: `W11 = eps1`, `W22 = eps2`, `Wjj = eps3`, `W12 = alpha`,
/// `W1j = beta`, `W2j = gamma` and `Wjk = gamma` for `j != k`, both >= 3.
pub fn build_coupling(spec: &SystemSpec) -> Result<CouplingMatrix> {
    let n = spec.n();
    match spec.coupling() {
        CouplingSpec::Explicit(rows) => CouplingMatrix::from_rows(rows),
        CouplingSpec::TwoState { alpha, epsilon } => {
            let mut w = CouplingMatrix::zeros(2);
            w.set_sym(0, 0, epsilon[0]);
            w.set_sym(1, 1, epsilon[1]);
            w.set_sym(0, 1, *alpha);
            Ok(w)
        }
        CouplingSpec::Structured {
            alpha,
            beta,
            gamma,
            epsilon,
        } => {
            if n < 3 {
                return Err(Error::StructuredRequiresN3(n));
            }
            let mut w = CouplingMatrix::zeros(n);
            w.set_sym(0, 0, epsilon[0]);
            w.set_sym(1, 1, epsilon[1]);
            w.set_sym(0, 1, *alpha);
            for j in 2..n {
                w.set_sym(j, j, epsilon[2]);
                w.set_sym(0, j, *beta);
                w.set_sym(1, j, *gamma);
                for k in (j + 1)..n {
                    w.set_sym(j, k, *gamma);
                }
            }
            Ok(w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_state_structured_layout() {
        let w = build_coupling(&SystemSpec::structured(3, 0.0).unwrap()).unwrap();
        assert_eq!(
            w.to_rows(),
            vec![
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0]
            ]
        );
    }

    #[test]
    fn four_state_design_layout() {
        let a = -1.0 / 3.0;
        let w = build_coupling(&SystemSpec::structured(4, a).unwrap()).unwrap();
        assert_eq!(
            w.to_rows(),
            vec![
                vec![0.0, a, 1.0, 1.0],
                vec![a, 0.0, 1.0, 1.0],
                vec![1.0, 1.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0, 0.0]
            ]
        );
    }

    #[test]
    fn structured_general_parameters() {
        let spec = SystemSpec::new(
            5,
            CouplingSpec::Structured {
                alpha: 0.3,
                beta: 0.7,
                gamma: 1.9,
                epsilon: [0.1, 0.2, 0.4],
            },
        )
        .unwrap();
        let w = build_coupling(&spec).unwrap();
        assert_eq!(w.get(0, 0), 0.1);
        assert_eq!(w.get(1, 1), 0.2);
        assert_eq!(w.get(4, 4), 0.4);
        assert_eq!(w.get(1, 0), 0.3);
        assert_eq!(w.get(3, 0), 0.7);
        assert_eq!(w.get(1, 4), 1.9);
        assert_eq!(w.get(2, 4), 1.9);
    }

    #[test]
    fn explicit_passes_through() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let spec = SystemSpec::new(2, CouplingSpec::Explicit(rows.clone())).unwrap();
        assert_eq!(build_coupling(&spec).unwrap().to_rows(), rows);
    }

    #[test]
    fn explicit_asymmetric_rejected() {
        let rows = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        let spec = SystemSpec::new(2, CouplingSpec::Explicit(rows)).unwrap();
        assert_eq!(
            build_coupling(&spec),
            Err(Error::AsymmetricMatrix { row: 0, col: 1 })
        );
    }

    #[test]
    fn structured_needs_three_states() {
        assert_eq!(
            SystemSpec::structured(2, 1.0),
            Err(Error::StructuredRequiresN3(2))
        );
        let w = build_coupling(&SystemSpec::new(2, CouplingSpec::two_state()).unwrap()).unwrap();
        assert_eq!(w.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn degenerate_flag() {
        let s = SystemSpec::structured(3, 0.0).unwrap();
        assert!(s.is_degenerate());
        let s = s.with_new_energies(vec![0.0, 0.1, 0.2]).unwrap();
        assert!(!s.is_degenerate());
        assert!(s.with_new_energies(vec![0.0; 4]).is_err());
        assert!(SystemSpec::new(1, CouplingSpec::Explicit(vec![vec![0.0]])).is_err());
    }

    #[test]
    fn swap_is_involution() {
        let w = build_coupling(&SystemSpec::structured(5, 0.25).unwrap()).unwrap();
        assert_eq!(w.swap_states(0, 3).swap_states(0, 3), w);
        // the design layout is symmetric under relabelling 1 <-> 2
        assert_eq!(w.swap_states(0, 1), w);
    }
}
