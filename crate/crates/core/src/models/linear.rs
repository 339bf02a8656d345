//! Multiple linear regression by ordinary least squares.

use nalgebra::{DMatrix, DVector};

use crate::dataset::DatasetView;

use super::ModelError;

/// An OLS linear model over a feature subset.
#[derive(Debug, Clone)]
pub struct LinearModel {
    intercept: f64,
    coefficients: Vec<f64>,
    feature_idx: Vec<usize>,
}

/// Solves min ||X b - y|| with an SVD, tolerating rank deficiency.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
    x.clone()
        .svd(true, true)
        .solve(y, 1e-12)
        .map_err(|e| ModelError::Numeric(e.to_string()))
}

impl LinearModel {
    pub fn fit(train: &DatasetView, feature_idx: &[usize]) -> Result<Self, ModelError> {
        let n = train.len();
        let p = feature_idx.len();
        let y = DVector::from_vec(
            train
                .numeric_responses()
                .map_err(|e| ModelError::Invalid(e.to_string()))?,
        );
        let x = DMatrix::from_fn(n, p + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                train.observation(i).features[feature_idx[j - 1]]
            }
        });
        let beta = least_squares(&x, &y)?;
        Ok(LinearModel {
            intercept: beta[0],
            coefficients: beta.as_slice()[1..].to_vec(),
            feature_idx: feature_idx.to_vec(),
        })
    }

    /// Affine prediction from a full schema-length feature vector.
    pub fn predict(&self, features: &[f64]) -> f64 {
        self.intercept
            + self
                .feature_idx
                .iter()
                .zip(&self.coefficients)
                .map(|(&idx, c)| c * features[idx])
                .sum::<f64>()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// Fitted coefficients, parallel to the feature subset.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "intercept": self.intercept,
            "coefficients": self.coefficients,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Location, Observation, Response, ResponseKind};
    use approx::assert_relative_eq;

    fn linear_data() -> Dataset {
        // y = 1 + 2 a - 3 b, exactly.
        let obs = (0..12)
            .map(|i| {
                let a = (i % 4) as f64;
                let b = (i / 4) as f64;
                Observation {
                    location: Location::new(i as f64, 0.0),
                    response: Response::Numeric(1.0 + 2.0 * a - 3.0 * b),
                    features: vec![a, b],
                    group_id: None,
                }
            })
            .collect();
        Dataset::new(
            vec!["a".into(), "b".into()],
            obs,
            ResponseKind::Regression,
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn recovers_exact_coefficients() {
        let ds = linear_data();
        let m = LinearModel::fit(&ds.full_view(), &[0, 1]).unwrap();
        assert_relative_eq!(m.intercept(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(m.coefficients()[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(m.coefficients()[1], -3.0, epsilon = 1e-10);
        assert_relative_eq!(m.predict(&[2.0, 1.0]), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn feature_subset_restricts_the_design() {
        let ds = linear_data();
        let m = LinearModel::fit(&ds.full_view(), &[0]).unwrap();
        assert_eq!(m.coefficients().len(), 1);
        // Changing the excluded feature must not move the prediction.
        assert_relative_eq!(m.predict(&[2.0, 0.0]), m.predict(&[2.0, 9.9]));
    }

    #[test]
    fn rank_deficient_design_still_fits() {
        // Two identical columns; SVD resolves the ambiguity.
        let obs = (0..6)
            .map(|i| Observation {
                location: Location::new(i as f64, 0.0),
                response: Response::Numeric(i as f64),
                features: vec![i as f64, i as f64],
                group_id: None,
            })
            .collect();
        let ds = Dataset::new(
            vec!["a".into(), "b".into()],
            obs,
            ResponseKind::Regression,
            vec![],
            None,
        )
        .unwrap();
        let m = LinearModel::fit(&ds.full_view(), &[0, 1]).unwrap();
        assert_relative_eq!(m.predict(&[3.0, 3.0]), 3.0, epsilon = 1e-8);
    }
}
