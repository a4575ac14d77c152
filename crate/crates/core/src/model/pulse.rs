use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Error, Result};

/// One impulsive kick `area * delta(t - time)`.
///
/// `swap` optionally relabels two states of the coupling matrix before this
/// and every later kick is applied, so a population parked in the target
/// state can be launched again.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    pub time: f64,
    pub area: f64,
    pub swap: Option<(usize, usize)>,
}

impl Kick {
    pub fn new(time: f64, area: f64) -> Self {
        Kick {
            time,
            area,
            swap: None,
        }
    }

    pub fn with_swap(mut self, a: usize, b: usize) -> Self {
        self.swap = Some((a, b));
        self
    }
}

/// Common time envelope `V(t)` shared by every coupling.
#[derive(Debug, Clone, PartialEq)]
pub enum Pulse {
    /// `chi * cos(omega * t)`.
    Cosine { chi: f64, omega: f64 },
    /// `v0`.
    Constant { v0: f64 },
    /// Sum of delta kicks. Has no pointwise value; its area is a
    /// right-continuous step function.
    KickTrain(Vec<Kick>),
    /// `peak * exp(-(t - center)^2 / (2 width^2))`.
    Gaussian { peak: f64, center: f64, width: f64 },
}

impl Pulse {
    pub fn cosine(chi: f64, omega: f64) -> Result<Self> {
        let p = Pulse::Cosine { chi, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(v0: f64) -> Result<Self> {
        let p = Pulse::Constant { v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn kicks(kicks: Vec<Kick>) -> Result<Self> {
        let p = Pulse::KickTrain(kicks);
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(peak: f64, center: f64, width: f64) -> Result<Self> {
        let p = Pulse::Gaussian {
            peak,
            center,
            width,
        };
        p.validate()?;
        Ok(p)
    }

    /// Gaussian whose full (infinite-time) area is `area`.
    pub fn gaussian_with_area(area: f64, center: f64, width: f64) -> Result<Self> {
        Self::gaussian(area / (width * (2.0 * PI).sqrt()), center, width)
    }

    /// Checks the variant's invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Pulse::Cosine { chi, omega } => {
                if !finite(&[*chi, *omega]) || *omega <= 0.0 {
                    return Err(invalid("cosine pulse needs finite chi and omega > 0"));
                }
            }
            Pulse::Constant { v0 } => {
                if !v0.is_finite() {
                    return Err(invalid("constant pulse value must be finite"));
                }
            }
            Pulse::Gaussian {
                peak,
                center,
                width,
            } => {
                if !finite(&[*peak, *center, *width]) || *width <= 0.0 {
                    return Err(invalid("gaussian pulse needs finite fields and width > 0"));
                }
            }
            Pulse::KickTrain(kicks) => {
                if kicks.iter().any(|k| !k.time.is_finite() || !k.area.is_finite()) {
                    return Err(invalid("kick times and areas must be finite"));
                }
                if kicks.windows(2).any(|w| w[1].time <= w[0].time) {
                    return Err(invalid("kick times must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    pub fn is_kick_train(&self) -> bool {
        matches!(self, Pulse::KickTrain(_))
    }

    /// `V(t)`. Kick trains evaluate to zero everywhere.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Pulse::Cosine { chi, omega } => chi * (omega * t).cos(),
            Pulse::Constant { v0 } => v0,
            Pulse::KickTrain(_) => 0.0,
            Pulse::Gaussian {
                peak,
                center,
                width,
            } => {
                let u = (t - center) / width;
                peak * (-0.5 * u * u).exp()
            }
        }
    }

    /// Phase area `A(t)`, the integral of `V` from 0 to `t`.
    pub fn area(&self, t: f64) -> f64 {
        match self {
            Pulse::Cosine { chi, omega } => chi / omega * (omega * t).sin(),
            Pulse::Constant { v0 } => v0 * t,
            Pulse::KickTrain(kicks) => kicks
                .iter()
                .take_while(|k| k.time <= t)
                .filter(|k| k.time >= 0.0)
                .map(|k| k.area)
                .sum(),
            Pulse::Gaussian {
                peak,
                center,
                width,
            } => {
                let s = std::f64::consts::SQRT_2 * width;
                let lo = (0.0 - center) / s;
                let hi = (t - center) / s;
                peak * width * FRAC_PI_2.sqrt() * erf_diff(lo, hi)
            }
        }
    }

    /// Largest `|V|` the envelope reaches (0 for kick trains).
    pub fn amplitude_scale(&self) -> f64 {
        match *self {
            Pulse::Cosine { chi, .. } => chi.abs(),
            Pulse::Constant { v0 } => v0.abs(),
            Pulse::KickTrain(_) => 0.0,
            Pulse::Gaussian { peak, .. } => peak.abs(),
        }
    }

    /// Fastest intrinsic rate of the envelope itself.
    pub fn frequency_scale(&self) -> f64 {
        match *self {
            Pulse::Cosine { omega, .. } => omega,
            Pulse::Gaussian { width, .. } => 1.0 / width,
            Pulse::Constant { .. } | Pulse::KickTrain(_) => 0.0,
        }
    }

    /// Same envelope with the sign flipped.
    pub fn negated(&self) -> Pulse {
        match self.clone() {
            Pulse::Cosine { chi, omega } => Pulse::Cosine { chi: -chi, omega },
            Pulse::Constant { v0 } => Pulse::Constant { v0: -v0 },
            Pulse::KickTrain(kicks) => Pulse::KickTrain(
                kicks
                    .into_iter()
                    .map(|k| Kick {
                        area: -k.area,
                        ..k
                    })
                    .collect(),
            ),
            Pulse::Gaussian {
                peak,
                center,
                width,
            } => Pulse::Gaussian {
                peak: -peak,
                center,
                width,
            },
        }
    }

    /// Smallest `t >= 0` with `A(t) = target`.
    ///
    /// A zero target returns `t = 0`. Fails with [`Error::Unreachable`] when
    /// the envelope never accumulates that much area.
    pub fn invert_area(&self, target: f64) -> Result<f64> {
        if !target.is_finite() {
            return Err(invalid("target area must be finite"));
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        let unreachable = Err(Error::Unreachable { target });
        let tol = AREA_TOLERANCE * target.abs().max(1.0);
        match *self {
            Pulse::Constant { v0 } => {
                if v0 == 0.0 || v0.signum() != target.signum() {
                    return unreachable;
                }
                Ok(target / v0)
            }
            Pulse::Cosine { chi, omega } => {
                let max = (chi / omega).abs();
                if chi == 0.0 || target.abs() > max {
                    return unreachable;
                }
                let quarter = FRAC_PI_2 / omega;
                // A is monotone on each quarter period; pick the first one
                // that sweeps towards the target's sign.
                let (lo, hi) = if chi.signum() == target.signum() {
                    (0.0, quarter)
                } else {
                    (2.0 * quarter, 3.0 * quarter)
                };
                Ok(self.bisect_area(target, lo, hi, tol))
            }
            Pulse::Gaussian { center, width, .. } => {
                let total = self.area(f64::INFINITY);
                if total == 0.0 || total.signum() != target.signum() || target.abs() >= total.abs()
                {
                    return unreachable;
                }
                let mut hi = center.max(0.0) + width;
                while (self.area(hi) - target) * target.signum() < 0.0 {
                    hi += 2.0 * (hi - center).max(width);
                }
                Ok(self.bisect_area(target, 0.0, hi, tol))
            }
            Pulse::KickTrain(ref kicks) => {
                let mut acc = 0.0;
                for k in kicks.iter().filter(|k| k.time >= 0.0) {
                    acc += k.area;
                    if (acc - target).abs() <= tol {
                        return Ok(k.time);
                    }
                }
                unreachable
            }
        }
    }

    /// Bisection on a bracket where `A` is monotone and crosses `target`.
    fn bisect_area(&self, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        let rising = self.area(hi) > self.area(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let below = self.area(mid) < target;
            if below == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (
            (self.area(lo) - target).abs(),
            (self.area(hi) - target).abs(),
        );
        let t = if flo <= fhi { lo } else { hi };
        debug_assert!((self.area(t) - target).abs() <= tol, "bisection missed tolerance");
        t
    }
}

/// Required accuracy of [`Pulse::invert_area`], relative to `max(1, |target|)`.
pub const AREA_TOLERANCE: f64 = 1e-12;

/// `erf(hi) - erf(lo)` without cancellation in either tail.
fn erf_diff(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 && hi >= 0.0 {
        libm::erfc(lo) - libm::erfc(hi)
    } else if lo <= 0.0 && hi <= 0.0 {
        libm::erfc(-hi) - libm::erfc(-lo)
    } else {
        libm::erf(hi) - libm::erf(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let c = Pulse::cosine(1.0, 2.0).unwrap();
        assert!(c.value(PI / 4.0).abs() < 1e-15);
        assert_eq!(Pulse::constant(0.5).unwrap().value(7.0), 0.5);
        let k = Pulse::kicks(vec![Kick::new(1.0, FRAC_PI_2)]).unwrap();
        assert_eq!(k.value(1.0), 0.0);
        let g = Pulse::gaussian(2.0, 1.0, 0.5).unwrap();
        assert_eq!(g.value(1.0), 2.0);
        assert!((g.value(1.5) - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn areas() {
        let c = Pulse::cosine(1.0, 2.0).unwrap();
        assert!((c.area(PI / 4.0) - 0.5).abs() < 1e-15);
        let k = Pulse::kicks(vec![Kick::new(1.0, 0.3), Kick::new(2.0, 0.4)]).unwrap();
        assert_eq!(k.area(1.5), 0.3);
        assert_eq!(k.area(0.999), 0.0);
        // right-continuous
        assert_eq!(k.area(1.0), 0.3);
        assert!((k.area(2.0) - 0.7).abs() < 1e-15);
        assert_eq!(Pulse::constant(2.0).unwrap().area(3.0), 6.0);
    }

    #[test]
    fn gaussian_area_matches_reference() {
        // mpmath quadrature, 30 digits: 0.525940229872170270319406284621
        let g = Pulse::gaussian(0.7, 1.0, 0.3).unwrap();
        let a = g.area(2.0);
        assert!((a - 0.525_940_229_872_170_3).abs() <= 1e-12 * a);
        // full area of a pulse centred far from the origin
        let g = Pulse::gaussian_with_area(1.25, 40.0, 0.5).unwrap();
        assert!((g.area(f64::INFINITY) - 1.25).abs() < 1e-14);
        assert!(g.area(10.0).abs() < 1e-100);
    }

    #[test]
    fn inversion() {
        let c = Pulse::cosine(1.0, 1.0).unwrap();
        assert!((c.invert_area(0.5).unwrap() - 0.5f64.asin()).abs() < 1e-12);
        assert_eq!(c.invert_area(2.0), Err(Error::Unreachable { target: 2.0 }));
        let t = c.invert_area(-0.5).unwrap();
        assert!(t > PI && (c.area(t) + 0.5).abs() < 1e-12);
        assert_eq!(Pulse::constant(2.0).unwrap().invert_area(6.0), Ok(3.0));
        assert!(matches!(
            Pulse::constant(2.0).unwrap().invert_area(-1.0),
            Err(Error::Unreachable { .. })
        ));
        // exactly the peak area
        let t = c.invert_area(1.0).unwrap();
        assert!((c.area(t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_gaussian_and_kicks() {
        let g = Pulse::gaussian_with_area(2.0, 3.0, 0.4).unwrap();
        let t = g.invert_area(1.0).unwrap();
        assert!((t - 3.0).abs() < 1e-3);
        assert!((g.area(t) - 1.0).abs() <= 1e-12);
        assert!(matches!(g.invert_area(2.5), Err(Error::Unreachable { .. })));
        assert!(matches!(g.invert_area(-0.1), Err(Error::Unreachable { .. })));

        let k = Pulse::kicks(vec![Kick::new(1.0, 0.3), Kick::new(2.0, 0.4)]).unwrap();
        assert_eq!(k.invert_area(0.7).unwrap(), 2.0);
        assert!(k.invert_area(0.5).is_err());
    }

    #[test]
    fn invalid_pulses() {
        assert!(Pulse::cosine(1.0, 0.0).is_err());
        assert!(Pulse::gaussian(1.0, 0.0, 0.0).is_err());
        assert!(Pulse::kicks(vec![Kick::new(1.0, 0.1), Kick::new(1.0, 0.1)]).is_err());
        assert!(Pulse::kicks(vec![Kick::new(2.0, 0.1), Kick::new(1.0, 0.1)]).is_err());
    }

    #[test]
    fn negation_flips_area() {
        let g = Pulse::gaussian(1.0, 0.5, 0.2).unwrap();
        assert_eq!(g.negated().area(0.7), -g.area(0.7));
    }
}
