//! Exact solution of the degenerate problem.
//!
//! With all energies equal, the couplings share one envelope and the
//! evolution depends on time only through the phase area:
//! `a(t) = exp(-i A(t) W) a(0)`. The full-matrix route (Jacobi
//! eigendecomposition plus propagator) is the reference; the reduced
//! three-level forms and the transfer design are built on top of it and
//! audited against it.

mod design;
mod eigen;
mod reduced;

pub use design::{
    design_transfer, design_transfer_2state, design_transfer_signed, Branch, TransferDesign,
};
pub use eigen::{eigen_decompose, ComplexMatrix, EigenSystem, MAX_SWEEPS};
pub use reduced::{
    reduced_populations, reduced_system, theta_populations, PopulationTriple, ReducedSystem,
    ThetaPopulations,
};

use crate::error::{invalid, Error, Result};
use crate::model::{build_coupling, AmplitudeVector, Pulse, SystemSpec, Trajectory};

/// `exp(-i A W)` for the eigensystem `es`.
pub fn propagator(es: &EigenSystem, area: f64) -> ComplexMatrix {
    es.propagator(area)
}

/// Samples `a(t) = U(A(t)) e1` of a degenerate system at `times`.
///
/// A common energy offset only contributes a global phase and is dropped.
pub fn evolve_analytic(spec: &SystemSpec, pulse: &Pulse, times: &[f64]) -> Result<Trajectory> {
    if !spec.is_degenerate() {
        return Err(Error::NotDegenerate);
    }
    pulse.validate()?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("sample times must be finite"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sample times must be strictly increasing"));
    }
    let es = eigen_decompose(&build_coupling(spec)?)?;
    let start = AmplitudeVector::basis(spec.n(), 0);
    let mut traj = Trajectory::with_capacity(times.len());
    for &t in times {
        let area = pulse.area(t);
        traj.push(t, area, es.evolve(&start, area));
    }
    Ok(traj)
}

/// Populations of the structured system from the full `n x n` route, in the
/// same `(P1, P2, P3)` form as [`reduced_populations`].
pub fn full_matrix_populations(es: &EigenSystem, area: f64, spectator: usize) -> PopulationTriple {
    let a = es.evolve(&AmplitudeVector::basis(es.dim(), 0), area);
    PopulationTriple {
        p1: a[0].norm_sqr(),
        p2: a[1].norm_sqr(),
        p3: a[spectator].norm_sqr(),
    }
}
