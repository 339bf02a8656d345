//! Robust empirical semivariogram estimation.

use serde::{Deserialize, Serialize};

use super::{EmpiricalVariogram, GeostatError};
use crate::dataset::Location;

/// One lag bin of an empirical variogram.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VariogramLag {
    /// Representative lag distance (bin midpoint), meters.
    pub center: f64,
    /// Number of point pairs in the bin.
    pub pairs: usize,
    /// Robust semivariance estimate.
    pub gamma: f64,
}

/// Equal-width lag binning for empirical variograms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LagLayout {
    pub n_lags: usize,
    pub max_lag: f64,
}

impl LagLayout {
    /// Default layout: 10 lags out to 45% of the maximum pairwise distance.
    ///
    /// Short enough to stay densely populated, long enough to pin the sill.
    pub fn default_for(locations: &[Location]) -> LagLayout {
        let mut maxd: f64 = 0.0;
        for i in 0..locations.len() {
            for j in (i + 1)..locations.len() {
                maxd = maxd.max(locations[i].distance(&locations[j]));
            }
        }
        LagLayout {
            n_lags: 10,
            max_lag: (0.45 * maxd).max(f64::MIN_POSITIVE),
        }
    }
}

/// Estimates the empirical semivariogram with Cressie's robust estimator.
///
/// Per lag bin `h` with pair set `N(h)`:
/// `2 gamma(h) = [(1/|N|) sum |z_i - z_j|^(1/2)]^4 / (0.457 + 0.494/|N|)`.
/// Bins without pairs are omitted; zero-distance pairs contribute to no bin.
pub fn empirical_variogram_robust(
    values: &[f64],
    locations: &[Location],
    max_lag: f64,
    n_lags: usize,
) -> Result<EmpiricalVariogram, GeostatError> {
    if values.len() < 2 || values.len() != locations.len() {
        return Err(GeostatError::TooFewObservations);
    }
    if !(max_lag > 0.0) || n_lags == 0 {
        return Err(GeostatError::Invalid(
            "lag layout needs max_lag > 0 and n_lags >= 1".into(),
        ));
    }
    let width = max_lag / n_lags as f64;
    let mut sum_root = vec![0.0f64; n_lags];
    let mut count = vec![0usize; n_lags];
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let h = locations[i].distance(&locations[j]);
            if h <= 0.0 || h > max_lag {
                continue;
            }
            let bin = ((h / width).ceil() as usize - 1).min(n_lags - 1);
            sum_root[bin] += (values[i] - values[j]).abs().sqrt();
            count[bin] += 1;
        }
    }
    let lags: Vec<VariogramLag> = (0..n_lags)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let nb = count[b] as f64;
            let mean_root = sum_root[b] / nb;
            let two_gamma = mean_root.powi(4) / (0.457 + 0.494 / nb);
            VariogramLag {
                center: width * (b as f64 + 0.5),
                pairs: count[b],
                gamma: 0.5 * two_gamma,
            }
        })
        .collect();
    if lags.is_empty() {
        return Err(GeostatError::NoPairs);
    }
    Ok(EmpiricalVariogram { lags })
}
