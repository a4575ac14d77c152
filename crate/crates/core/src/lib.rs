//! Design and simulation of complete population transfer in degenerate
//! `n`-state quantum systems driven by a single common envelope.
//!
//! All couplings share one time dependence, `V_kj(t) = W_kj V(t)`. When the
//! levels are degenerate the amplitudes depend on time only through the
//! phase area `A(t)`, so the dynamics are solved exactly by diagonalising
//! `W` ([`spectral`]). The [`integrator`] solves the same equations with
//! fixed-step RK4 and also handles split energies and impulsive kicks;
//! [`analysis`] builds fidelity, extrema and leakage studies on top.
//!
//! ```
//! use degenpop::{design_transfer, evolve_analytic, Pulse};
//!
//! let design = design_transfer(4, 1).unwrap();
//! let pulse = Pulse::constant(1.0).unwrap();
//! let traj = evolve_analytic(&design.spec(), &pulse, &[0.0, design.area]).unwrap();
//! assert!((traj.populations[1][1] - 1.0).abs() < 1e-10);
//! ```

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod model;
pub mod spectral;

pub use analysis::{
    designed_cosine, find_extrema, fit_power_law, leakage_point, leakage_scan, transfer_fidelity,
    Extremum, ExtremumKind, LeakagePoint, PowerLawFit, AREA_HEADROOM,
};
pub use error::{Error, Result};
pub use integrator::{
    convergence_order, convergence_order_with, integrate, integrate_kicks, IntegratorConfig,
    Rk4Solver, NORM_TOLERANCE,
};
pub use model::{
    build_coupling, invert_area, pulse_area, pulse_value, AmplitudeVector, CouplingMatrix,
    CouplingSpec, Kick, Pulse, SystemSpec, Trajectory,
};
pub use spectral::{
    design_transfer, design_transfer_2state, design_transfer_signed, eigen_decompose,
    evolve_analytic, full_matrix_populations, propagator, reduced_populations, reduced_system,
    theta_populations, Branch, ComplexMatrix, EigenSystem, PopulationTriple, ReducedSystem,
    ThetaPopulations, TransferDesign,
};

pub use num_complex::Complex64;
