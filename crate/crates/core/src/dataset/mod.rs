//! Point datasets: the data model, CSV ingestion, and spatial geometry.
//!
//! A [`Dataset`] is an immutable collection of point [`Observation`]s sharing a
//! feature schema. All geometry is planar Euclidean over projected `(x, y)`
//! coordinates in meters; a k-d tree built at construction time backs the
//! neighbour and radius queries used by the resampling engine.

mod csv;
mod geometry;
mod kdtree;
mod synth;

pub use csv::{load_csv, load_locations_csv, ColumnRoles};
pub use geometry::{
    buffer_exclude, nn_distance_stats, prediction_distance_distribution, DistanceSummary,
    Histogram, HistogramBins,
};
pub use kdtree::KdTree;
pub use synth::{synth_dataset, SynthConfig};

use serde::{Deserialize, Serialize};

/// Errors from dataset construction, ingestion, and geometry queries.
#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse {column:?} value {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("dataset needs at least 2 observations, got {0}")]
    TooSmall(usize),
    #[error("observation {index} has {got} features, schema has {expected}")]
    SchemaMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("classification dataset needs at least 2 distinct labels")]
    TooFewLabels,
    #[error("all observations are co-located; distance statistics are undefined")]
    DegenerateGeometry,
    #[error("excluding radius {r} around observation {index} empties the training set")]
    ExhaustedBuffer { index: usize, r: f64 },
    #[error("covariance matrix is not positive definite for the given variogram")]
    NotPositiveDefinite,
    #[error("{0}")]
    Invalid(String),
}

/// A projected planar coordinate in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance in the `(x, y)` plane.
    pub fn distance(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A response value: numeric for regression, a label index for classification.
///
/// Class values index into the owning dataset's label table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Response {
    Numeric(f64),
    Class(u32),
}

impl Response {
    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            Response::Numeric(v) => Some(*v),
            Response::Class(_) => None,
        }
    }

    pub fn as_class(&self) -> Option<u32> {
        match self {
            Response::Numeric(_) => None,
            Response::Class(c) => Some(*c),
        }
    }
}

/// Whether a dataset's response is quantitative or categorical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Regression,
    Classification,
}

/// One point observation: location, response, named feature values, and an
/// optional group (field) id.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub location: Location,
    pub response: Response,
    pub features: Vec<f64>,
    pub group_id: Option<u64>,
}

/// An immutable point dataset with a fixed feature schema.
///
/// The schema is an ordered list of feature names; every observation carries
/// one value per schema entry. When the coordinate columns are also registered
/// as features (the usual setup for trend models), their schema indices are
/// remembered so that models which interpret coordinates geometrically can map
/// feature-channel overrides back to an effective location.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Vec<String>,
    observations: Vec<Observation>,
    response_kind: ResponseKind,
    labels: Vec<String>,
    coord_features: Option<(usize, usize)>,
    index: KdTree,
    has_duplicate_locations: bool,
}

impl Dataset {
    /// Builds a dataset, validating the schema and label invariants.
    pub fn new(
        schema: Vec<String>,
        observations: Vec<Observation>,
        response_kind: ResponseKind,
        labels: Vec<String>,
        coord_features: Option<(usize, usize)>,
    ) -> Result<Self, DatasetError> {
        if observations.len() < 2 {
            return Err(DatasetError::TooSmall(observations.len()));
        }
        for (i, obs) in observations.iter().enumerate() {
            if obs.features.len() != schema.len() {
                return Err(DatasetError::SchemaMismatch {
                    index: i,
                    got: obs.features.len(),
                    expected: schema.len(),
                });
            }
            match (response_kind, &obs.response) {
                (ResponseKind::Regression, Response::Class(_))
                | (ResponseKind::Classification, Response::Numeric(_)) => {
                    return Err(DatasetError::Invalid(format!(
                        "observation {i} response does not match the declared response kind"
                    )));
                }
                (ResponseKind::Classification, Response::Class(c)) => {
                    if *c as usize >= labels.len() {
                        return Err(DatasetError::Invalid(format!(
                            "observation {i} has label index {c} outside the label set"
                        )));
                    }
                }
                _ => {}
            }
        }
        if response_kind == ResponseKind::Classification && labels.len() < 2 {
            return Err(DatasetError::TooFewLabels);
        }
        let locations: Vec<Location> = observations.iter().map(|o| o.location).collect();
        let index = KdTree::build(&locations);
        let has_duplicate_locations = (0..locations.len()).any(|i| {
            index
                .nearest_excluding(&locations[i], Some(i))
                .is_some_and(|(_, d)| d == 0.0)
        });
        Ok(Self {
            schema,
            observations,
            response_kind,
            labels,
            coord_features,
            index,
            has_duplicate_locations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }

    pub fn response_kind(&self) -> ResponseKind {
        self.response_kind
    }

    /// Class label table (empty for regression datasets).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Schema indices of the coordinate channels, when x/y are registered as
    /// features.
    pub fn coord_features(&self) -> Option<(usize, usize)> {
        self.coord_features
    }

    pub fn observation(&self, i: usize) -> &Observation {
        &self.observations[i]
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn location(&self, i: usize) -> &Location {
        &self.observations[i].location
    }

    /// The k-d tree over all observation locations.
    pub fn spatial_index(&self) -> &KdTree {
        &self.index
    }

    /// True when two or more observations share an exact location. Duplicate
    /// locations are allowed but flagged: with duplicates present, spatial LOO
    /// at r = 0 is no longer equivalent to conventional LOO.
    pub fn has_duplicate_locations(&self) -> bool {
        self.has_duplicate_locations
    }

    /// Group ids in first-appearance order, or `None` when no observation
    /// carries a group.
    pub fn group_ids(&self) -> Option<Vec<u64>> {
        let mut ids: Vec<u64> = Vec::new();
        for obs in &self.observations {
            let id = obs.group_id?;
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        Some(ids)
    }

    /// A borrowed view over a subset of rows (training subsets during
    /// resampling). Indices must be in range.
    pub fn view(&self, indices: Vec<usize>) -> DatasetView<'_> {
        DatasetView { ds: self, indices }
    }

    /// A view over every row.
    pub fn full_view(&self) -> DatasetView<'_> {
        self.view((0..self.len()).collect())
    }
}

/// A borrowed row subset of a [`Dataset`]; what models are fitted on.
#[derive(Debug, Clone)]
pub struct DatasetView<'a> {
    ds: &'a Dataset,
    indices: Vec<usize>,
}

impl<'a> DatasetView<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn observation(&self, k: usize) -> &'a Observation {
        self.ds.observation(self.indices[k])
    }

    pub fn location(&self, k: usize) -> &'a Location {
        self.ds.location(self.indices[k])
    }

    pub fn locations(&self) -> Vec<Location> {
        self.indices.iter().map(|&i| *self.ds.location(i)).collect()
    }

    pub fn response(&self, k: usize) -> Response {
        self.observation(k).response
    }

    /// Numeric responses of all rows; errors on a classification dataset.
    pub fn numeric_responses(&self) -> Result<Vec<f64>, DatasetError> {
        self.indices
            .iter()
            .map(|&i| {
                self.ds
                    .observation(i)
                    .response
                    .as_numeric()
                    .ok_or_else(|| DatasetError::Invalid("expected a numeric response".into()))
            })
            .collect()
    }

    pub fn schema(&self) -> &'a [String] {
        self.ds.schema()
    }

    pub fn response_kind(&self) -> ResponseKind {
        self.ds.response_kind()
    }
}
