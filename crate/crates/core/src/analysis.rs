//! Derived results: transfer fidelity, population extrema, the detuning
//! leakage study, and log-log power-law fits.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::model::{Pulse, Trajectory};
use crate::spectral::{design_transfer, TransferDesign};

/// Ratio of the cosine amplitude's peak area `chi / omega` to the designed
/// transfer area. Values above 1 put `t0` inside the first quarter period.
pub const AREA_HEADROOM: f64 = 1.05;

/// `chi cos(omega t)` with `chi / omega = AREA_HEADROOM * |A0|`, signed so the
/// designed area is reached in the first quarter period.
pub fn designed_cosine(area: f64, omega: f64) -> Result<Pulse> {
    Pulse::cosine(AREA_HEADROOM * area * omega, omega)
}

/// Population of state `target` at `t0`, linearly interpolated.
///
/// At a repeated sample time (a kick) the post-kick value is used.
pub fn transfer_fidelity(traj: &Trajectory, target: usize, t0: f64) -> Result<f64> {
    let (Some(&start), Some(&end)) = (traj.times.first(), traj.times.last()) else {
        return Err(invalid("empty trajectory"));
    };
    if target >= traj.n_states() {
        return Err(invalid(format!("state {target} out of range")));
    }
    if !(t0 >= start && t0 <= end) {
        return Err(Error::OutOfRange {
            time: t0,
            start,
            end,
        });
    }
    // first sample strictly after t0
    let hi = traj.times.partition_point(|&t| t <= t0);
    if hi == traj.len() || traj.times[hi - 1] == t0 {
        return Ok(traj.populations[hi - 1][target]);
    }
    let lo = hi - 1;
    let (t_lo, t_hi) = (traj.times[lo], traj.times[hi]);
    let (p_lo, p_hi) = (traj.populations[lo][target], traj.populations[hi][target]);
    let s = (t0 - t_lo) / (t_hi - t_lo);
    Ok(p_lo + s * (p_hi - p_lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Interior extrema of `P_k`, located by sign changes of the sampled slope
/// and refined with a parabola through the neighbouring samples.
pub fn find_extrema(traj: &Trajectory, k: usize) -> Vec<Extremum> {
    if traj.len() < 3 || k >= traj.n_states() {
        return Vec::new();
    }
    let t = &traj.times;
    let y = traj.series(k);
    let mut out = Vec::new();
    let mut last_sign = 0.0;
    for i in 0..y.len() - 1 {
        let d = y[i + 1] - y[i];
        if d == 0.0 {
            continue;
        }
        let sign = d.signum();
        if last_sign != 0.0 && sign != last_sign && i > 0 {
            let kind = if last_sign > 0.0 {
                ExtremumKind::Maximum
            } else {
                ExtremumKind::Minimum
            };
            let (time, value) = refine(t[i - 1], t[i], t[i + 1], y[i - 1], y[i], y[i + 1]);
            out.push(Extremum { time, value, kind });
        }
        last_sign = sign;
    }
    out
}

/// Vertex of the parabola through three points, kept within their span.
fn refine(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let (h0, h2) = (x0 - x1, x2 - x1);
    if h0 == 0.0 || h2 == 0.0 {
        return (x1, y1);
    }
    let (s0, s2) = ((y0 - y1) / h0, (y2 - y1) / h2);
    let a = (s2 - s0) / (h2 - h0);
    if a == 0.0 {
        return (x1, y1);
    }
    let b = s0 - a * h0;
    let u = (-b / (2.0 * a)).clamp(h0, h2);
    (x1 + u, y1 + b * u + a * u * u)
}

/// One point of the leakage study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakagePoint {
    /// Level splitting over drive frequency.
    pub detuning_ratio: f64,
    /// `1 - P2(t0)` at the degenerate design's transfer time.
    pub leakage: f64,
}

/// Runs the designed transfer with the uniform ladder `E_k = k r omega`
/// (`k = 0..n`) and records `1 - P2(t0)`.
pub fn leakage_point(design: &TransferDesign, pulse_omega: f64, ratio: f64) -> Result<LeakagePoint> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::RatioOutOfRange(ratio));
    }
    let pulse = designed_cosine(design.area, pulse_omega)?;
    let t0 = pulse.invert_area(design.area)?;
    let energies = (0..design.n)
        .map(|k| k as f64 * ratio * pulse_omega)
        .collect();
    let spec = design.spec().with_new_energies(energies)?;
    let cfg = IntegratorConfig::new(&spec, &pulse, t0)?.with_stride(usize::MAX);
    let traj = integrate(&spec, &pulse, &cfg)?;
    let p2 = traj.last_populations().expect("integration always samples")[1];
    Ok(LeakagePoint {
        detuning_ratio: ratio,
        leakage: (1.0 - p2).clamp(0.0, 1.0),
    })
}

/// Leakage at every ratio, computed in parallel, returned in input order.
pub fn leakage_scan(n: usize, n0: i64, pulse_omega: f64, ratios: &[f64]) -> Result<Vec<LeakagePoint>> {
    let design = design_transfer(n, n0)?;
    if let Some(&r) = ratios.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(Error::RatioOutOfRange(r));
    }
    ratios
        .par_iter()
        .map(|&r| leakage_point(&design, pulse_omega, r))
        .collect()
}

/// `leakage ≈ coefficient * ratio^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, ratio: f64) -> f64 {
        self.coefficient * ratio.powf(self.exponent)
    }
}

/// Least-squares line through `(ln ratio, ln leakage)`.
pub fn fit_power_law(points: &[LeakagePoint]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    if points
        .iter()
        .any(|p| !(p.detuning_ratio > 0.0 && p.leakage > 0.0))
    {
        return Err(Error::NonPositiveValue);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.detuning_ratio.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.leakage.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(PowerLawFit {
        exponent: slope,
        coefficient: intercept.exp(),
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AmplitudeVector, CouplingSpec, SystemSpec};
    use crate::spectral::evolve_analytic;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn points(f: impl Fn(f64) -> f64) -> Vec<LeakagePoint> {
        [0.01, 0.02, 0.05, 0.1, 0.3]
            .iter()
            .map(|&r| LeakagePoint {
                detuning_ratio: r,
                leakage: f(r),
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_power_law(&points(|r| 3.0 * r * r)).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-10);
        assert!((fit.coefficient - 3.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
        let fit = fit_power_law(&points(|r| 0.5 * r)).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_errors() {
        let p = points(|r| r);
        assert_eq!(fit_power_law(&p[..2]), Err(Error::InsufficientPoints(2)));
        let mut bad = p.clone();
        bad[1].leakage = 0.0;
        assert_eq!(fit_power_law(&bad), Err(Error::NonPositiveValue));
    }

    fn two_state_run(times: &[f64]) -> Trajectory {
        let spec = SystemSpec::new(2, CouplingSpec::two_state()).unwrap();
        evolve_analytic(&spec, &Pulse::constant(1.0).unwrap(), times).unwrap()
    }

    #[test]
    fn fidelity_interpolates_and_bounds() {
        let tr = two_state_run(&[0.0, 1.0, 2.0]);
        assert_eq!(transfer_fidelity(&tr, 1, 0.0).unwrap(), 0.0);
        let mid = transfer_fidelity(&tr, 1, 0.5).unwrap();
        assert!((mid - 0.5 * 1f64.sin().powi(2)).abs() < 1e-15);
        assert!(matches!(
            transfer_fidelity(&tr, 1, 2.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(transfer_fidelity(&tr, 2, 1.0).is_err());
    }

    #[test]
    fn fidelity_prefers_post_kick_sample() {
        let mut tr = Trajectory::default();
        tr.push(0.0, 0.0, AmplitudeVector::basis(2, 0));
        tr.push(1.0, 0.0, AmplitudeVector::basis(2, 0));
        tr.push(1.0, FRAC_PI_2, AmplitudeVector::basis(2, 1));
        assert_eq!(transfer_fidelity(&tr, 1, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn sine_squared_extrema() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let tr = two_state_run(&times);
        let maxima: Vec<_> = find_extrema(&tr, 1)
            .into_iter()
            .filter(|e| e.kind == ExtremumKind::Maximum)
            .collect();
        assert_eq!(maxima.len(), 3);
        for (m, e) in maxima.iter().enumerate() {
            assert!((e.time - (FRAC_PI_2 + m as f64 * PI)).abs() < 1e-5);
            assert!((e.value - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_has_no_extrema() {
        let mut tr = Trajectory::default();
        for i in 0..10 {
            tr.push(i as f64, 0.0, AmplitudeVector::basis(3, 0));
        }
        assert!(find_extrema(&tr, 0).is_empty());
        assert!(find_extrema(&tr, 1).is_empty());
    }

    #[test]
    fn ratio_bounds() {
        assert_eq!(
            leakage_scan(4, 1, 1.0, &[0.1, 1.5]),
            Err(Error::RatioOutOfRange(1.5))
        );
        assert!(leakage_scan(2, 1, 1.0, &[0.1]).is_err());
    }
}
