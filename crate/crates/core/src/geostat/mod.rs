//! Semivariograms and kriging.
//!
//! The variogram family is spherical with microscale variability represented
//! as a *measurement-error variance* rather than a nugget effect: the error
//! variance enters the data covariance diagonal but not the target covariance
//! vector, which turns ordinary kriging and kriging with external drift into
//! smoothers instead of exact interpolators.

mod empirical;
mod fit;
mod kriging;

pub use empirical::{empirical_variogram_robust, LagLayout, VariogramLag};
pub use fit::{fit_spherical_irls, IrlsFit};
pub use kriging::{KrigingPrediction, KrigingSystem};

use serde::{Deserialize, Serialize};

/// Errors from variogram estimation and kriging.
#[derive(Debug, thiserror::Error)]
pub enum GeostatError {
    #[error("variogram estimation needs at least 2 observations")]
    TooFewObservations,
    #[error("no usable point pairs within the lag range")]
    NoPairs,
    #[error("IRLS fit needs at least 3 non-empty lags, got {0}")]
    TooFewLags(usize),
    #[error("observations {i} and {j} share a location and the measurement-error variance is 0; the kriging system is singular")]
    DuplicateLocations { i: usize, j: usize },
    #[error("kriging system is singular")]
    SingularSystem,
    #[error("{0}")]
    Invalid(String),
}

/// A spherical semivariogram: measurement-error variance, partial sill, and
/// range.
///
/// Evaluation follows the standard spherical form,
/// `gamma(h) = me_var + psill * (1.5 h/a - 0.5 (h/a)^3)` for `0 < h <= a`,
/// saturating at `me_var + psill` beyond the range and 0 at `h = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variogram {
    /// Measurement-error variance (response units squared).
    pub me_var: f64,
    /// Partial sill (response units squared).
    pub psill: f64,
    /// Range in meters.
    pub range: f64,
}

impl Variogram {
    pub fn new(me_var: f64, psill: f64, range: f64) -> Self {
        Variogram { me_var, psill, range }
    }

    /// Semivariance at lag `h >= 0`.
    pub fn gamma(&self, h: f64) -> f64 {
        debug_assert!(h >= 0.0);
        if h == 0.0 {
            0.0
        } else {
            self.me_var + self.correlated_gamma(h)
        }
    }

    /// The spatially correlated part of the semivariance (excluding the
    /// measurement-error variance), continuous at the origin.
    pub fn correlated_gamma(&self, h: f64) -> f64 {
        if h <= 0.0 {
            0.0
        } else if h >= self.range {
            self.psill
        } else {
            let s = h / self.range;
            self.psill * (1.5 * s - 0.5 * s * s * s)
        }
    }

    /// Covariance of the correlated component: `psill - correlated_gamma(h)`.
    pub fn covariance(&self, h: f64) -> f64 {
        self.psill - self.correlated_gamma(h)
    }

    pub fn total_sill(&self) -> f64 {
        self.me_var + self.psill
    }

    /// Measurement-error (nugget) variance divided by the total sill.
    pub fn nugget_to_sill_ratio(&self) -> f64 {
        if self.total_sill() == 0.0 {
            0.0
        } else {
            self.me_var / self.total_sill()
        }
    }

    /// Heuristic starting point for the IRLS fit: half the first-lag estimate
    /// as error variance, the mean of the last three lags minus that as
    /// partial sill, and half the maximum lag as range.
    pub fn initial_guess(emp: &EmpiricalVariogram) -> Variogram {
        let lags = &emp.lags;
        let first = lags.first().map(|l| l.gamma).unwrap_or(0.0);
        let tail: Vec<f64> = lags.iter().rev().take(3).map(|l| l.gamma).collect();
        let level = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
        let me_var = 0.5 * first;
        let psill = (level - me_var).max(1e-12);
        let range = lags.last().map(|l| l.center * 0.5).unwrap_or(1.0).max(f64::MIN_POSITIVE);
        Variogram { me_var, psill, range }
    }
}

/// Binned empirical semivariogram estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    /// Non-empty lags with strictly increasing centers.
    pub lags: Vec<VariogramLag>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spherical_gamma_endpoints() {
        let v = Variogram::new(0.1, 0.9, 100.0);
        assert_eq!(v.gamma(0.0), 0.0);
        assert_relative_eq!(v.gamma(100.0), 1.0);
        assert_relative_eq!(v.gamma(250.0), 1.0);
    }

    #[test]
    fn spherical_gamma_midpoint_hand_value() {
        // me_var 0.1, psill 0.9, a 100, h 50: 0.1 + 0.9*(0.75 - 0.0625).
        let v = Variogram::new(0.1, 0.9, 100.0);
        assert_relative_eq!(v.gamma(50.0), 0.71875, epsilon = 1e-12);
    }

    #[test]
    fn gamma_is_nondecreasing() {
        let v = Variogram::new(0.05, 0.6, 180.0);
        let mut prev = 0.0;
        for k in 1..=100 {
            let g = v.gamma(k as f64 * 3.0);
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn ratio_uses_total_sill() {
        let v = Variogram::new(0.25, 0.75, 50.0);
        assert_relative_eq!(v.nugget_to_sill_ratio(), 0.25);
    }
}
