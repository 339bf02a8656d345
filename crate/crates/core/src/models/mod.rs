//! Built-in spatial prediction models behind one fit/predict interface.
//!
//! The zoo spans pure interpolation (nearest neighbour, ordinary kriging),
//! trend models (multiple linear regression, kriging with external drift,
//! geographically weighted regression), machine learning (random forest,
//! linear discriminant analysis), and the distance-blended hybrids OK–RF and
//! NN–LDA.
//!
//! Every fitted model predicts from a geometric target location plus a full
//! schema-length feature vector. `predict_with_features` substitutes override
//! values into the feature channels first; when the coordinate columns are
//! registered as features and an override touches them, models that interpret
//! geometry (NN, kriging, GWR, and the hybrids' blend distance) recompute
//! their geometry from the overridden coordinates. Permuting the coordinate
//! channels therefore genuinely relocates the target from the model's point
//! of view, while the recorded prediction distance of a diagnostics iteration
//! stays tied to the true geometry.

mod forest;
mod gwr;
mod kriging_model;
mod lda;
mod linear;
mod nearest;

pub use forest::{ForestModel, RfParams};
pub use gwr::{GwrModel, GwrParams};
pub use kriging_model::KrigingModel;
pub use lda::LdaModel;
pub use linear::LinearModel;
pub use nearest::NearestModel;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetView, Location, Response, ResponseKind};
use crate::geostat::GeostatError;

/// Errors from model fitting and prediction.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot fit on an empty training set")]
    EmptyTraining,
    #[error("{kind:?} requires a {expected:?} response")]
    WrongResponseKind { kind: ModelKind, expected: ResponseKind },
    #[error("feature {0:?} is not in the dataset schema")]
    UnknownFeature(String),
    #[error("feature vector has {got} entries, schema has {expected}")]
    FeatureLength { got: usize, expected: usize },
    #[error("class {0:?} is absent from the training sample")]
    ClassAbsent(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Geostat(#[from] GeostatError),
    #[error("{0}")]
    Invalid(String),
}

/// The model families in the zoo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Nearest-neighbour interpolation (regression) or classification.
    Nn,
    /// Ordinary kriging with a variogram refitted to each training sample.
    Ok,
    /// Kriging with external drift over the configured features.
    Ked,
    /// Multiple linear regression.
    Mlr,
    /// Geographically weighted regression with a global Gaussian bandwidth.
    Gwr,
    /// Random forest (regression or classification).
    Rf,
    /// OK–RF hybrid: fades linearly from OK at distance 0 to RF at `d_max`.
    OkRf,
    /// Linear discriminant analysis.
    Lda,
    /// NN–LDA hybrid: 1-NN label within the switch distance, LDA beyond.
    NnLda,
}

impl ModelKind {
    pub fn expected_response(self) -> ResponseKind {
        match self {
            ModelKind::Lda | ModelKind::NnLda => ResponseKind::Classification,
            ModelKind::Ok | ModelKind::Ked | ModelKind::Mlr | ModelKind::Gwr | ModelKind::OkRf => {
                ResponseKind::Regression
            }
            // NN and RF adapt to the dataset's response kind.
            ModelKind::Nn | ModelKind::Rf => ResponseKind::Regression,
        }
    }

    fn adapts_to_response(self) -> bool {
        matches!(self, ModelKind::Nn | ModelKind::Rf)
    }
}

/// Hyperparameters of the OK–RF hybrid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OkRfParams {
    /// Distance at which the blend becomes pure RF, meters.
    pub d_max: f64,
}

impl Default for OkRfParams {
    fn default() -> Self {
        OkRfParams { d_max: 500.0 }
    }
}

/// Hyperparameters of the NN–LDA hybrid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NnLdaParams {
    /// Separation distance of the hard NN-to-LDA switch, meters.
    pub switch_distance: f64,
}

impl Default for NnLdaParams {
    fn default() -> Self {
        NnLdaParams { switch_distance: 100.0 }
    }
}

/// A model recipe: the kind, the feature subset it may use, and per-kind
/// hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Feature subset by name; `None` uses the whole schema.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default)]
    pub rf: RfParams,
    #[serde(default)]
    pub gwr: GwrParams,
    #[serde(default)]
    pub ok_rf: OkRfParams,
    #[serde(default)]
    pub nn_lda: NnLdaParams,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            features: None,
            rf: RfParams::default(),
            gwr: GwrParams::default(),
            ok_rf: OkRfParams::default(),
            nn_lda: NnLdaParams::default(),
        }
    }

    /// Short lowercase name, used in output files and plot legends.
    pub fn label(&self) -> &'static str {
        match self.kind {
            ModelKind::Nn => "nn",
            ModelKind::Ok => "ok",
            ModelKind::Ked => "ked",
            ModelKind::Mlr => "mlr",
            ModelKind::Gwr => "gwr",
            ModelKind::Rf => "rf",
            ModelKind::OkRf => "ok_rf",
            ModelKind::Lda => "lda",
            ModelKind::NnLda => "nn_lda",
        }
    }
}

/// Feature-channel overrides for [`FittedModel::predict_with_features`],
/// keyed by schema index.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pairs: Vec<(usize, f64)>,
}

impl Overrides {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(pairs: Vec<(usize, f64)>) -> Self {
        Overrides { pairs }
    }

    /// Builds overrides from feature names, validating against the schema.
    pub fn from_named(schema: &[String], pairs: &[(&str, f64)]) -> Result<Self, ModelError> {
        let mut out = Vec::with_capacity(pairs.len());
        for (name, value) in pairs {
            let idx = schema
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ModelError::UnknownFeature(name.to_string()))?;
            out.push((idx, *value));
        }
        Ok(Overrides { pairs: out })
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, f64)] {
        &self.pairs
    }

    fn touches(&self, idx: usize) -> bool {
        self.pairs.iter().any(|(i, _)| *i == idx)
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Nn(NearestModel),
    Kriging(KrigingModel),
    Mlr(LinearModel),
    Gwr(GwrModel),
    Forest(ForestModel),
    OkRf {
        ok: KrigingModel,
        rf: ForestModel,
        geometry: NearestModel,
        d_max: f64,
    },
    Lda(LdaModel),
    NnLda {
        nn: NearestModel,
        lda: LdaModel,
        switch: f64,
    },
}

/// A trained model: opaque state plus the retained geometry needed by
/// distance-aware predictors. Deterministic given `(spec, training set, seed)`
/// and immutable after fitting.
#[derive(Debug, Clone)]
pub struct FittedModel {
    kind: ModelKind,
    schema_len: usize,
    coord_features: Option<(usize, usize)>,
    seed: u64,
    inner: Inner,
}

/// Trains `spec` on the given rows. The seed drives every stochastic part of
/// fitting (currently the random forest); equal inputs give equal models.
pub fn fit(spec: &ModelSpec, train: &DatasetView, seed: u64) -> Result<FittedModel, ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    let kind = spec.kind;
    if !kind.adapts_to_response() && train.response_kind() != kind.expected_response() {
        return Err(ModelError::WrongResponseKind {
            kind,
            expected: kind.expected_response(),
        });
    }
    let schema = train.schema();
    let feature_idx: Vec<usize> = match &spec.features {
        None => (0..schema.len()).collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                schema
                    .iter()
                    .position(|s| s == n)
                    .ok_or_else(|| ModelError::UnknownFeature(n.clone()))
            })
            .collect::<Result<_, _>>()?,
    };
    let coord_features = train.dataset().coord_features();

    let inner = match kind {
        ModelKind::Nn => Inner::Nn(NearestModel::fit(train)),
        ModelKind::Ok => Inner::Kriging(KrigingModel::fit_ordinary(train)?),
        ModelKind::Ked => Inner::Kriging(KrigingModel::fit_with_drift(train, &feature_idx)?),
        ModelKind::Mlr => Inner::Mlr(LinearModel::fit(train, &feature_idx)?),
        ModelKind::Gwr => Inner::Gwr(GwrModel::fit(train, &feature_idx, coord_features, &spec.gwr)?),
        ModelKind::Rf => Inner::Forest(ForestModel::fit(train, &feature_idx, &spec.rf, seed)?),
        ModelKind::OkRf => Inner::OkRf {
            ok: KrigingModel::fit_ordinary(train)?,
            rf: ForestModel::fit(train, &feature_idx, &spec.rf, seed)?,
            geometry: NearestModel::fit(train),
            d_max: spec.ok_rf.d_max,
        },
        ModelKind::Lda => Inner::Lda(LdaModel::fit(train, &feature_idx)?),
        ModelKind::NnLda => Inner::NnLda {
            nn: NearestModel::fit(train),
            lda: LdaModel::fit(train, &feature_idx)?,
            switch: spec.nn_lda.switch_distance,
        },
    };
    Ok(FittedModel {
        kind,
        schema_len: schema.len(),
        coord_features,
        seed,
        inner,
    })
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Predicts at a target location with the given schema-length feature
    /// vector.
    pub fn predict(&self, target: &Location, features: &[f64]) -> Result<Response, ModelError> {
        self.predict_with_features(target, features, &Overrides::empty())
    }

    /// Predicts with override values substituted into the feature channels.
    ///
    /// Overrides of the coordinate channels relocate the target for every
    /// geometry-aware component (neighbour lookups, kriging covariances, GWR
    /// kernels, and the hybrids' blend distance).
    pub fn predict_with_features(
        &self,
        target: &Location,
        features: &[f64],
        overrides: &Overrides,
    ) -> Result<Response, ModelError> {
        if features.len() != self.schema_len {
            return Err(ModelError::FeatureLength {
                got: features.len(),
                expected: self.schema_len,
            });
        }
        let mut feats: Vec<f64> = features.to_vec();
        for &(idx, value) in overrides.pairs() {
            if idx >= feats.len() {
                return Err(ModelError::FeatureLength {
                    got: idx + 1,
                    expected: self.schema_len,
                });
            }
            feats[idx] = value;
        }
        let loc = match self.coord_features {
            Some((xi, yi)) if overrides.touches(xi) || overrides.touches(yi) => {
                Location::new(feats[xi], feats[yi])
            }
            _ => *target,
        };

        match &self.inner {
            Inner::Nn(m) => Ok(m.predict(&loc)),
            Inner::Kriging(m) => Ok(Response::Numeric(m.predict(&loc, &feats)?)),
            Inner::Mlr(m) => Ok(Response::Numeric(m.predict(&feats))),
            Inner::Gwr(m) => Ok(Response::Numeric(m.predict(&loc, &feats)?)),
            Inner::Forest(m) => Ok(m.predict(&feats)),
            Inner::OkRf { ok, rf, geometry, d_max } => {
                let d = geometry.nearest_distance(&loc);
                let rho = (d / d_max).min(1.0);
                let value = if rho >= 1.0 {
                    rf.predict_numeric(&feats)
                } else if rho <= 0.0 {
                    ok.predict(&loc, &feats)?
                } else {
                    rho * rf.predict_numeric(&feats) + (1.0 - rho) * ok.predict(&loc, &feats)?
                };
                Ok(Response::Numeric(value))
            }
            Inner::Lda(m) => Ok(Response::Class(m.predict(&feats))),
            Inner::NnLda { nn, lda, switch } => {
                let d = nn.nearest_distance(&loc);
                if d <= *switch {
                    Ok(nn.predict(&loc))
                } else {
                    Ok(Response::Class(lda.predict(&feats)))
                }
            }
        }
    }

    /// A JSON summary of the fitted state for reproducibility logs:
    /// coefficients, variogram parameters, bandwidth, or forest size,
    /// depending on the kind.
    pub fn summary(&self) -> serde_json::Value {
        let mut value = match &self.inner {
            Inner::Nn(m) => serde_json::json!({ "n_train": m.len() }),
            Inner::Kriging(m) => m.summary(),
            Inner::Mlr(m) => m.summary(),
            Inner::Gwr(m) => m.summary(),
            Inner::Forest(m) => m.summary(),
            Inner::OkRf { ok, rf, d_max, .. } => serde_json::json!({
                "d_max": d_max,
                "ok": ok.summary(),
                "rf": rf.summary(),
            }),
            Inner::Lda(m) => m.summary(),
            Inner::NnLda { lda, switch, .. } => serde_json::json!({
                "switch_distance": switch,
                "lda": lda.summary(),
            }),
        };
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("kind".into(), serde_json::json!(self.kind));
            map.insert("seed".into(), serde_json::json!(self.seed));
        }
        value
    }
}

#[cfg(test)]
mod tests;
