//! Constant-absolute-risk-loving (CARL) utility.
//!
//! `u(x) = (1 - exp(-rho * x)) / rho` with `rho < 0`, normalised so that
//! `u(0) = 0`. The risk-neutral limit `rho -> 0` is the identity and is
//! represented exactly rather than as a tiny coefficient.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `-rho * x` accepted before `exp` leaves the double range. Large
/// losses (`-rho * x -> -inf`) only underflow and stay valid.
pub const MAX_EXPONENT: f64 = 700.0;

/// Below this `|rho * x|` the Taylor expansion is used instead of `expm1`.
const TAYLOR_CUTOFF: f64 = 1e-8;

/// Arrow-Pratt coefficient of a risk-loving (or risk-neutral) bidder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RiskCoefficient {
    Neutral,
    /// Strictly negative coefficient.
    Loving(f64),
}

impl RiskCoefficient {
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::NonFinite {
                name: "rho",
                value: rho,
            });
        }
        if rho > 0.0 {
            return Err(Error::RiskAverse(rho));
        }
        if rho == 0.0 {
            Ok(RiskCoefficient::Neutral)
        } else {
            Ok(RiskCoefficient::Loving(rho))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            RiskCoefficient::Neutral => 0.0,
            RiskCoefficient::Loving(rho) => rho,
        }
    }

    pub fn is_neutral(self) -> bool {
        matches!(self, RiskCoefficient::Neutral)
    }
}

/// The utility kernel shared by every bidder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlUtility {
    rho: RiskCoefficient,
}

impl CarlUtility {
    pub fn new(rho: RiskCoefficient) -> Self {
        Self { rho }
    }

    pub fn from_rho(rho: f64) -> Result<Self> {
        RiskCoefficient::new(rho).map(Self::new)
    }

    pub fn risk(&self) -> RiskCoefficient {
        self.rho
    }

    /// `-rho * x`, the exponent of the kernel, after the range checks.
    fn exponent(rho: f64, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                name: "x",
                value: x,
            });
        }
        let z = -rho * x;
        if z > MAX_EXPONENT {
            return Err(Error::Overflow(z));
        }
        Ok(z)
    }

    /// `u(x)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        match self.rho {
            RiskCoefficient::Neutral => {
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::NonFinite {
                        name: "x",
                        value: x,
                    })
                }
            }
            RiskCoefficient::Loving(rho) => {
                let z = Self::exponent(rho, x)?;
                if z.abs() < TAYLOR_CUTOFF {
                    // (1 - e^z) / rho = x (1 + z/2 + z^2/6 + z^3/24 + ...)
                    Ok(x * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))))
                } else {
                    Ok(-z.exp_m1() / rho)
                }
            }
        }
    }

    /// `u'(x) = exp(-rho * x)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        match self.rho {
            RiskCoefficient::Neutral => {
                if x.is_finite() {
                    Ok(1.0)
                } else {
                    Err(Error::NonFinite {
                        name: "x",
                        value: x,
                    })
                }
            }
            RiskCoefficient::Loving(rho) => Self::exponent(rho, x).map(f64::exp),
        }
    }

    /// `u(w) + exp(-rho * w) * u(x)`, which equals `u(w + x)`.
    ///
    /// Shifting every outcome by `w` rescales expected utility by `u'(w) > 0`
    /// and adds `u(w)`, so comparisons between lotteries ignore wealth.
    ///
    /// The identity is symmetric in `w` and `x`; the smaller of the two is
    /// used as the shift, which keeps a large `u'` out of cancelling sums.
    pub fn shift_decompose(&self, w: f64, x: f64) -> Result<f64> {
        let (shift, rest) = if w <= x { (w, x) } else { (x, w) };
        Ok(self
            .derivative(shift)?
            .mul_add(self.evaluate(rest)?, self.evaluate(shift)?))
    }

    /// Expected utility of a finite lottery given as `(probability, outcome)` pairs.
    pub fn expected_utility(&self, lottery: &[(f64, f64)]) -> Result<f64> {
        lottery.iter().try_fold(0.0, |acc, &(prob, outcome)| {
            Ok(acc + prob * self.evaluate(outcome)?)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carl(rho: f64) -> CarlUtility {
        CarlUtility::from_rho(rho).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(carl(-0.1).evaluate(0.0).unwrap(), 0.0);
        assert_eq!(carl(0.0).evaluate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn neutral_is_identity() {
        assert_eq!(carl(0.0).evaluate(5.0).unwrap(), 5.0);
        assert_eq!(carl(0.0).derivative(7.0).unwrap(), 1.0);
        assert_eq!(carl(0.0).shift_decompose(3.0, 4.0).unwrap(), 7.0);
    }

    #[test]
    fn negative_zero_is_neutral() {
        assert!(RiskCoefficient::new(-0.0).unwrap().is_neutral());
    }

    #[test]
    fn slope_at_origin_is_one() {
        assert_eq!(carl(-0.1).derivative(0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_risk_aversion() {
        assert_eq!(RiskCoefficient::new(0.1), Err(Error::RiskAverse(0.1)));
        assert!(RiskCoefficient::new(f64::NAN).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        let u = carl(-1.0);
        assert_eq!(u.evaluate(701.0), Err(Error::Overflow(701.0)));
        assert!(u.derivative(800.0).unwrap_err().is_numerical());
        assert!(u.evaluate(699.0).is_ok());
        // Large losses underflow towards the lower bound 1 / rho.
        assert_eq!(u.evaluate(-5000.0).unwrap(), -1.0);
        assert_eq!(u.derivative(-5000.0).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(carl(-0.1).evaluate(f64::INFINITY).is_err());
        assert!(carl(0.0).evaluate(f64::NAN).is_err());
    }

    #[test]
    fn taylor_branch_meets_expm1_branch() {
        let rho = -1e-9;
        let u = carl(rho);
        // |rho x| just below and just above the cutoff.
        for x in [9.999, 10.001] {
            let z = -rho * x;
            let expansion = x * (1.0 + z / 2.0 + z * z / 6.0);
            assert!(
                (u.evaluate(x).unwrap() - expansion).abs() <= 1e-15 * x,
                "x = {x}"
            );
        }
    }
}
