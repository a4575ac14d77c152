use std::ops::{Deref, Index};

use num_complex::Complex64;

/// Complex probability amplitudes `a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<Complex64>);

impl AmplitudeVector {
    /// All population in state `k` (`a_j = delta_jk`).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        a[k] = Complex64::new(1.0, 0.0);
        AmplitudeVector(a)
    }

    pub fn from_vec(a: Vec<Complex64>) -> Self {
        AmplitudeVector(a)
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum_k |a_k|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }
}

impl Deref for AmplitudeVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl Index<usize> for AmplitudeVector {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

/// Time-sampled evolution: amplitudes, populations, phase area, and norm.
///
/// Times are non-decreasing; a time repeats only for the pre/post samples
/// taken around an impulsive kick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub areas: Vec<f64>,
    pub amplitudes: Vec<AmplitudeVector>,
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Largest population change when the same run is repeated at half the
    /// step, if that check was requested.
    pub step_error: Option<f64>,
}

impl Trajectory {
    pub fn with_capacity(cap: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(cap),
            areas: Vec::with_capacity(cap),
            amplitudes: Vec::with_capacity(cap),
            populations: Vec::with_capacity(cap),
            norms: Vec::with_capacity(cap),
            step_error: None,
        }
    }

    pub fn push(&mut self, t: f64, area: f64, a: AmplitudeVector) {
        let pops = a.populations();
        self.norms.push(pops.iter().sum());
        self.populations.push(pops);
        self.times.push(t);
        self.areas.push(area);
        self.amplitudes.push(a);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of states (0 for an empty trajectory).
    pub fn n_states(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    /// Population of state `k` at every sample.
    pub fn series(&self, k: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[k]).collect()
    }

    pub fn last_populations(&self) -> Option<&[f64]> {
        self.populations.last().map(Vec::as_slice)
    }

    /// Largest `|1 - norm|` over all samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.norms
            .iter()
            .map(|n| (1.0 - n).abs())
            .fold(0.0, f64::max)
    }

    /// Populations lie in `[-1e-9, 1 + 1e-9]` and times never decrease.
    pub fn check_invariants(&self) -> bool {
        let pops_ok = self
            .populations
            .iter()
            .flatten()
            .all(|&p| (-1e-9..=1.0 + 1e-9).contains(&p));
        pops_ok && self.times.windows(2).all(|w| w[1] >= w[0])
    }
}
