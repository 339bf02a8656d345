//! Global ordinary kriging and kriging with external drift.
//!
//! One bordered system is assembled and LU-factorized per training sample and
//! reused across prediction points. The data covariance is
//! `C(h_ij) + me_var * delta_ij` from the variogram's correlated part; the
//! target covariance vector excludes the measurement-error variance, so the
//! predictor smooths rather than interpolates exactly when `me_var > 0`.

use nalgebra::{DMatrix, DVector};

use super::{GeostatError, Variogram};
use crate::dataset::Location;

/// Point prediction with its kriging variance.
#[derive(Debug, Clone, Copy)]
pub struct KrigingPrediction {
    pub value: f64,
    pub variance: f64,
}

/// An assembled, factorized universal kriging system.
///
/// Ordinary kriging is the special case with a constant-only trend; external
/// drift adds one linear term per drift feature. Immutable after assembly and
/// safe to share across prediction workers.
#[derive(Debug, Clone)]
pub struct KrigingSystem {
    locations: Vec<Location>,
    responses: DVector<f64>,
    variogram: Variogram,
    n_drift: usize,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl KrigingSystem {
    /// Assembles an ordinary kriging system (constant unknown mean).
    pub fn ordinary(
        locations: &[Location],
        responses: &[f64],
        variogram: Variogram,
    ) -> Result<Self, GeostatError> {
        Self::assemble(locations, responses, &[], variogram)
    }

    /// Assembles a kriging system with external drift; `drift[k]` holds the
    /// drift feature vector of training observation `k`.
    pub fn with_drift(
        locations: &[Location],
        responses: &[f64],
        drift: &[Vec<f64>],
        variogram: Variogram,
    ) -> Result<Self, GeostatError> {
        Self::assemble(locations, responses, drift, variogram)
    }

    fn assemble(
        locations: &[Location],
        responses: &[f64],
        drift: &[Vec<f64>],
        variogram: Variogram,
    ) -> Result<Self, GeostatError> {
        let n = locations.len();
        if n == 0 || responses.len() != n {
            return Err(GeostatError::Invalid(
                "kriging needs matching non-empty locations and responses".into(),
            ));
        }
        let n_drift = if drift.is_empty() { 0 } else { drift[0].len() };
        if !drift.is_empty() && drift.len() != n {
            return Err(GeostatError::Invalid(
                "drift rows must match the number of observations".into(),
            ));
        }
        let q = 1 + n_drift; // intercept + drift terms
        let dim = n + q;
        let mut a = DMatrix::zeros(dim, dim);
        for i in 0..n {
            for j in i..n {
                let h = locations[i].distance(&locations[j]);
                if i != j && h == 0.0 && variogram.me_var == 0.0 {
                    return Err(GeostatError::DuplicateLocations { i, j });
                }
                let mut c = variogram.covariance(h);
                if i == j {
                    c += variogram.me_var;
                }
                a[(i, j)] = c;
                a[(j, i)] = c;
            }
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
            for k in 0..n_drift {
                a[(i, n + 1 + k)] = drift[i][k];
                a[(n + 1 + k, i)] = drift[i][k];
            }
        }
        let lu = a.lu();
        Ok(KrigingSystem {
            locations: locations.to_vec(),
            responses: DVector::from_column_slice(responses),
            variogram,
            n_drift,
            lu,
        })
    }

    pub fn variogram(&self) -> &Variogram {
        &self.variogram
    }

    pub fn n_observations(&self) -> usize {
        self.locations.len()
    }

    /// Predicts at `target`; KED systems require the target's drift feature
    /// vector. Returns the BLUP and its kriging variance.
    pub fn predict(
        &self,
        target: &Location,
        drift: Option<&[f64]>,
    ) -> Result<KrigingPrediction, GeostatError> {
        let n = self.locations.len();
        let drift = drift.unwrap_or(&[]);
        if drift.len() != self.n_drift {
            return Err(GeostatError::Invalid(format!(
                "target drift vector has {} entries, system expects {}",
                drift.len(),
                self.n_drift
            )));
        }
        let dim = n + 1 + self.n_drift;
        let mut rhs = DVector::zeros(dim);
        for i in 0..n {
            rhs[i] = self.variogram.covariance(self.locations[i].distance(target));
        }
        rhs[n] = 1.0;
        for k in 0..self.n_drift {
            rhs[n + 1 + k] = drift[k];
        }
        let sol = self.lu.solve(&rhs).ok_or(GeostatError::SingularSystem)?;
        let weights = sol.rows(0, n);
        let value = weights.dot(&self.responses);
        // sigma^2 = C(0) - lambda' c0 - mu' f0, with C(0) = psill.
        let variance = (self.variogram.psill - sol.dot(&rhs)).max(0.0);
        debug_assert!(
            (weights.sum() - 1.0).abs() <= 1e-8,
            "kriging weights must sum to 1, got {}",
            weights.sum()
        );
        Ok(KrigingPrediction { value, variance })
    }
}
