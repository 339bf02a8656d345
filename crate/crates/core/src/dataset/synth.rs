//! Synthetic dataset generation: a Gaussian random field plus linear trend.
//!
//! Used as a controllable fixture wherever a real dataset is unavailable or a
//! known ground truth is required. The spatially correlated part is drawn by
//! factorizing the covariance matrix implied by a spherical variogram at the
//! sampled locations; measurement error is added as independent noise.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, DatasetError, Location, Observation, Response, ResponseKind};
use crate::geostat::Variogram;

/// Configuration for [`synth_dataset`].
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Number of observations.
    pub n: usize,
    /// Master seed; equal seeds give identical datasets.
    pub seed: u64,
    /// Sampling domain size in meters: locations are uniform on
    /// `[0, width] x [0, height]`.
    pub domain: (f64, f64),
    /// Number of iid standard-normal features (named `f1`, `f2`, ...).
    pub n_features: usize,
    /// Trend coefficients: intercept followed by one coefficient per feature.
    pub trend: Vec<f64>,
    /// Spherical variogram of the residual field. `psill = 0` disables the
    /// correlated component, `me_var = 0` the independent noise.
    pub variogram: Variogram,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 100,
            seed: 0,
            domain: (1000.0, 1000.0),
            n_features: 2,
            trend: vec![0.0, 1.0, 1.0],
            variogram: Variogram::new(0.0, 1.0, 300.0),
        }
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; one value per call keeps the draw sequence simple.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws a synthetic regression dataset: uniform random locations, iid
/// standard-normal features, and a response equal to the linear trend plus a
/// Gaussian random field realization plus measurement noise.
pub fn synth_dataset(config: &SynthConfig) -> Result<Dataset, DatasetError> {
    if config.n < 2 {
        return Err(DatasetError::TooSmall(config.n));
    }
    if config.trend.len() != config.n_features + 1 {
        return Err(DatasetError::Invalid(format!(
            "trend has {} coefficients, expected intercept + {} features",
            config.trend.len(),
            config.n_features
        )));
    }
    let v = &config.variogram;
    if !(v.me_var >= 0.0 && v.psill >= 0.0 && v.range > 0.0) {
        return Err(DatasetError::Invalid(
            "variogram parameters must satisfy me_var >= 0, psill >= 0, range > 0".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n;
    let locations: Vec<Location> = (0..n)
        .map(|_| {
            Location::new(
                rng.random_range(0.0..config.domain.0),
                rng.random_range(0.0..config.domain.1),
            )
        })
        .collect();
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..config.n_features).map(|_| standard_normal(&mut rng)).collect())
        .collect();

    // Correlated field via Cholesky of the spherical covariance.
    let mut field = vec![0.0; n];
    if v.psill > 0.0 {
        let cov = DMatrix::from_fn(n, n, |i, j| v.covariance(locations[i].distance(&locations[j])));
        let chol = cov.cholesky().ok_or(DatasetError::NotPositiveDefinite)?;
        let z = nalgebra::DVector::from_iterator(n, (0..n).map(|_| standard_normal(&mut rng)));
        let corr = chol.l() * z;
        field.copy_from_slice(corr.as_slice());
    }

    let noise_sd = v.me_var.sqrt();
    let observations: Vec<Observation> = (0..n)
        .map(|i| {
            let mut y = config.trend[0];
            for (j, f) in features[i].iter().enumerate() {
                y += config.trend[j + 1] * f;
            }
            y += field[i];
            if noise_sd > 0.0 {
                y += noise_sd * standard_normal(&mut rng);
            }
            Observation {
                location: locations[i],
                response: Response::Numeric(y),
                features: features[i].clone(),
                group_id: None,
            }
        })
        .collect();

    let schema = (1..=config.n_features).map(|j| format!("f{j}")).collect();
    Dataset::new(schema, observations, ResponseKind::Regression, vec![], None)
}
