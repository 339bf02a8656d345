//! Nearest-neighbour interpolation and classification.

use crate::dataset::{DatasetView, KdTree, Location, Response};

/// Predicts the response of the single nearest training observation.
#[derive(Debug, Clone)]
pub struct NearestModel {
    tree: KdTree,
    responses: Vec<Response>,
}

impl NearestModel {
    pub fn fit(train: &DatasetView) -> Self {
        let locations = train.locations();
        let responses = (0..train.len()).map(|k| train.response(k)).collect();
        NearestModel {
            tree: KdTree::build(&locations),
            responses,
        }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn predict(&self, target: &Location) -> Response {
        let (idx, _) = self
            .tree
            .nearest_excluding(target, None)
            .expect("training set is non-empty");
        self.responses[idx]
    }

    /// Distance from `target` to the nearest retained training location.
    pub fn nearest_distance(&self, target: &Location) -> f64 {
        self.tree
            .nearest_excluding(target, None)
            .map(|(_, d)| d)
            .expect("training set is non-empty")
    }
}
