use std::f64::consts::{FRAC_PI_2, PI};

use super::reduced::reduced_system;
use crate::error::{Error, Result};
use crate::model::SystemSpec;

/// Sign of the transfer area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// Coupling ratios and pulse area that move all population from state 1 to
/// state 2 of the partially symmetric `n`-state system.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferDesign {
    pub n: usize,
    pub n0: i64,
    pub alpha: f64,
    pub beta: f64,
    /// Phase area `A(t0)` at which the transfer completes.
    pub area: f64,
    /// `(z1 - z2) A0 / pi`.
    pub k: i64,
    /// `(z2 - z3) A0 / pi`.
    pub k_prime: i64,
}

/// Design on the positive branch.
pub fn design_transfer(n: usize, n0: i64) -> Result<TransferDesign> {
    design_transfer_signed(n, n0, Branch::Positive)
}

/// `alpha = -(n - 3) / 3`, `beta = 1`, and
/// `A0 = ± n0 pi sqrt(9 / (18 (n - 2) + 4 (n - 3)^2))` for odd `n0`.
pub fn design_transfer_signed(n: usize, n0: i64, branch: Branch) -> Result<TransferDesign> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    if n0 % 2 == 0 {
        return Err(Error::EvenN0(n0));
    }
    let nf = n as f64;
    let area = branch.sign()
        * n0 as f64
        * PI
        * (9.0 / (18.0 * (nf - 2.0) + 4.0 * (nf - 3.0).powi(2))).sqrt();
    let s = if branch == Branch::Positive { 1 } else { -1 };
    Ok(TransferDesign {
        n,
        n0,
        alpha: -(nf - 3.0) / 3.0,
        beta: 1.0,
        area,
        k: 2 * n0 * s,
        k_prime: -n0 * s,
    })
}

/// Transfer area `n0 pi / 2` of the two-state system `[[0, 1], [1, 0]]`.
pub fn design_transfer_2state(n0: i64) -> Result<f64> {
    if n0 % 2 == 0 {
        return Err(Error::EvenN0(n0));
    }
    Ok(n0 as f64 * FRAC_PI_2)
}

impl TransferDesign {
    /// The designed (degenerate) system.
    pub fn spec(&self) -> SystemSpec {
        SystemSpec::structured(self.n, self.alpha).expect("design always has n >= 3")
    }

    /// Measured `((z1 - z2) A0 / pi, (z2 - z3) A0 / pi)`.
    pub fn phase_conditions(&self) -> Result<(f64, f64)> {
        let rs = reduced_system(self.n, self.alpha)?;
        Ok((
            (rs.z[0] - rs.z[1]) * self.area / PI,
            (rs.z[1] - rs.z[2]) * self.area / PI,
        ))
    }

    /// `theta = 2 pi n0 A / A0`.
    pub fn theta(&self, area: f64) -> f64 {
        2.0 * PI * self.n0 as f64 * area / self.area
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn three_state() {
        let d = design_transfer(3, 1).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert!((d.area - PI / SQRT_2).abs() < 1e-15);
        assert!((d.area - 2.221_441_469_079_183).abs() < 1e-14);
    }

    #[test]
    fn four_state() {
        let d = design_transfer(4, 1).unwrap();
        assert_eq!(d.alpha, -1.0 / 3.0);
        // 3 pi / sqrt(40)
        assert!((d.area - 1.490_188_239_869_415_2).abs() < 1e-14);
        assert_eq!((d.k, d.k_prime), (2, -1));
    }

    #[test]
    fn even_and_small() {
        assert_eq!(design_transfer(5, 2), Err(Error::EvenN0(2)));
        assert_eq!(design_transfer(2, 1), Err(Error::NTooSmall(2)));
        assert_eq!(design_transfer_2state(2), Err(Error::EvenN0(2)));
        assert!((design_transfer_2state(3).unwrap() - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn phase_conditions_hold() {
        for n in 3..=12 {
            for n0 in [1, 3, 5, -1] {
                for branch in [Branch::Positive, Branch::Negative] {
                    let d = design_transfer_signed(n, n0, branch).unwrap();
                    let (k, kp) = d.phase_conditions().unwrap();
                    assert!((k - d.k as f64).abs() < 1e-10, "n={n} n0={n0}");
                    assert!((kp - d.k_prime as f64).abs() < 1e-10, "n={n} n0={n0}");
                }
            }
        }
    }
}
