//! Problem statement: system specification, coupling layout, pulse envelopes
//! with exact phase-area calculus, and the state/trajectory containers.

mod coupling;
mod pulse;
mod state;

pub use coupling::{build_coupling, CouplingMatrix, CouplingSpec, SystemSpec};
pub use pulse::{Kick, Pulse, AREA_TOLERANCE};
pub use state::{AmplitudeVector, Trajectory};

use crate::error::Result;

/// `V(t)` for `pulse`.
pub fn pulse_value(pulse: &Pulse, t: f64) -> f64 {
    pulse.value(t)
}

/// `A(t)`, the integral of `V` over `[0, t]`.
pub fn pulse_area(pulse: &Pulse, t: f64) -> f64 {
    pulse.area(t)
}

/// Smallest time at which `pulse` has accumulated `target` area.
pub fn invert_area(pulse: &Pulse, target: f64) -> Result<f64> {
    pulse.invert_area(target)
}
