//! Distance statistics and the buffered leave-one-out exclusion primitive.

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, Location};

/// Histogram binning rule for distance summaries. The bin width for these
/// reports is a free configuration choice.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum HistogramBins {
    Count(usize),
    Width(f64),
}

impl Default for HistogramBins {
    fn default() -> Self {
        HistogramBins::Count(20)
    }
}

/// Explicit-edge histogram; `counts.len() + 1 == edges.len()`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn from_values(values: &[f64], bins: HistogramBins) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = (max - min).max(f64::MIN_POSITIVE);
        let n_bins = match bins {
            HistogramBins::Count(n) => n.max(1),
            HistogramBins::Width(w) => ((span / w).ceil() as usize).max(1),
        };
        let width = match bins {
            HistogramBins::Count(_) => span / n_bins as f64,
            HistogramBins::Width(w) => w,
        };
        let edges: Vec<f64> = (0..=n_bins).map(|j| min + width * j as f64).collect();
        let mut counts = vec![0u64; n_bins];
        for &v in values {
            let j = (((v - min) / width) as usize).min(n_bins - 1);
            counts[j] += 1;
        }
        Histogram { edges, counts }
    }
}

/// Summary of a set of distances: moments, quartiles, and a histogram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub mean: f64,
    pub min: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub histogram: Histogram,
}

impl DistanceSummary {
    /// Summarizes a non-empty set of distances.
    pub fn from_values(mut values: Vec<f64>, bins: HistogramBins) -> Result<Self, DatasetError> {
        if values.is_empty() {
            return Err(DatasetError::Invalid(
                "cannot summarize an empty distance set".into(),
            ));
        }
        let histogram = Histogram::from_values(&values, bins);
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(DistanceSummary {
            mean,
            min: values[0],
            median: quantile_sorted(&values, 0.5),
            q1: quantile_sorted(&values, 0.25),
            q3: quantile_sorted(&values, 0.75),
            histogram,
        })
    }

    /// Number of values the histogram covers.
    pub fn count(&self) -> u64 {
        self.histogram.counts.iter().sum()
    }
}

/// Linear-interpolation quantile on a sorted slice (the common default of
/// statistical software).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// For each observation, the distance to its nearest *distinct-location*
/// neighbour, summarized over the whole dataset.
///
/// Errors when every observation shares a single location.
pub fn nn_distance_stats(ds: &Dataset) -> Result<DistanceSummary, DatasetError> {
    nn_distance_stats_with_bins(ds, HistogramBins::default())
}

pub fn nn_distance_stats_with_bins(
    ds: &Dataset,
    bins: HistogramBins,
) -> Result<DistanceSummary, DatasetError> {
    let tree = ds.spatial_index();
    let dists: Vec<f64> = (0..ds.len())
        .filter_map(|i| tree.nearest_beyond(ds.location(i), 0.0, Some(i)).map(|(_, d)| d))
        .collect();
    if dists.is_empty() {
        return Err(DatasetError::DegenerateGeometry);
    }
    DistanceSummary::from_values(dists, bins)
}

/// For each target location, the distance to the nearest training
/// observation, summarized.
pub fn prediction_distance_distribution(
    train: &Dataset,
    targets: &[Location],
) -> Result<DistanceSummary, DatasetError> {
    prediction_distance_distribution_with_bins(train, targets, HistogramBins::default())
}

pub fn prediction_distance_distribution_with_bins(
    train: &Dataset,
    targets: &[Location],
    bins: HistogramBins,
) -> Result<DistanceSummary, DatasetError> {
    if targets.is_empty() {
        return Err(DatasetError::Invalid("no target locations given".into()));
    }
    let tree = train.spatial_index();
    let dists: Vec<f64> = targets
        .iter()
        .map(|t| tree.nearest_excluding(t, None).map(|(_, d)| d).unwrap_or(f64::NAN))
        .collect();
    DistanceSummary::from_values(dists, bins)
}

/// Forms the buffered leave-one-out training set for observation `i` and
/// exclusion radius `r`.
///
/// Returns the retained observation indices (all observations at distance
/// `> r` from observation `i`; for `r < 0`, all except `i` itself) together
/// with the actual separation distance — the distance from `i` to the nearest
/// retained observation. Negative radii embed conventional LOO in the same
/// scheme.
pub fn buffer_exclude(ds: &Dataset, i: usize, r: f64) -> Result<(Vec<usize>, f64), DatasetError> {
    assert!(i < ds.len(), "observation index {i} out of range");
    let loc = ds.location(i);
    let retained: Vec<usize> = if r < 0.0 {
        (0..ds.len()).filter(|&j| j != i).collect()
    } else {
        let mut excluded = ds.spatial_index().within(loc, r);
        if !excluded.contains(&i) {
            excluded.push(i);
        }
        excluded.sort_unstable();
        (0..ds.len()).filter(|j| excluded.binary_search(j).is_err()).collect()
    };
    if retained.is_empty() {
        return Err(DatasetError::ExhaustedBuffer { index: i, r });
    }
    let d_actual = ds
        .spatial_index()
        .nearest_beyond(loc, r.max(f64::NEG_INFINITY), Some(i))
        .map(|(_, d)| d)
        .expect("retained set is non-empty");
    Ok((retained, d_actual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Observation, Response, ResponseKind};
    use approx::assert_relative_eq;

    fn line_dataset(xs: &[f64]) -> Dataset {
        let obs = xs
            .iter()
            .map(|&x| Observation {
                location: Location::new(x, 0.0),
                response: Response::Numeric(x),
                features: vec![],
                group_id: None,
            })
            .collect();
        Dataset::new(vec![], obs, ResponseKind::Regression, vec![], None).unwrap()
    }

    #[test]
    fn two_points_symmetric_nn() {
        let ds = line_dataset(&[0.0, 10.0]);
        let s = nn_distance_stats(&ds).unwrap();
        assert_relative_eq!(s.mean, 10.0);
        assert_relative_eq!(s.min, 10.0);
    }

    #[test]
    fn nn_stats_match_brute_force() {
        // 5 fixed pseudo-random points.
        let pts = [(3.1, 9.2), (54.0, 1.7), (22.5, 40.0), (60.1, 58.3), (10.0, 33.3)];
        let obs: Vec<Observation> = pts
            .iter()
            .map(|&(x, y)| Observation {
                location: Location::new(x, y),
                response: Response::Numeric(0.0),
                features: vec![],
                group_id: None,
            })
            .collect();
        let ds = Dataset::new(vec![], obs, ResponseKind::Regression, vec![], None).unwrap();
        let s = nn_distance_stats(&ds).unwrap();
        let mut brute = Vec::new();
        for i in 0..pts.len() {
            let mut best = f64::INFINITY;
            for j in 0..pts.len() {
                if i != j {
                    let d = Location::new(pts[i].0, pts[i].1).distance(&Location::new(pts[j].0, pts[j].1));
                    best = best.min(d);
                }
            }
            brute.push(best);
        }
        let mean = brute.iter().sum::<f64>() / brute.len() as f64;
        assert_relative_eq!(s.mean, mean, max_relative = 1e-12);
        assert_relative_eq!(s.min, brute.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn degenerate_geometry_errors() {
        let ds = line_dataset(&[5.0, 5.0, 5.0]);
        assert!(matches!(
            nn_distance_stats(&ds),
            Err(DatasetError::DegenerateGeometry)
        ));
    }

    #[test]
    fn prediction_distances_zero_on_training_locations() {
        let ds = line_dataset(&[0.0, 10.0, 20.0]);
        let targets: Vec<Location> = (0..3).map(|i| *ds.location(i)).collect();
        let s = prediction_distance_distribution(&ds, &targets).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.count(), 3);
    }

    #[test]
    fn prediction_distances_match_brute_force() {
        let ds = line_dataset(&[0.0, 7.0, 30.0, 100.0]);
        let targets: Vec<Location> = (0..10).map(|k| Location::new(k as f64 * 11.0, 3.0)).collect();
        let s = prediction_distance_distribution(&ds, &targets).unwrap();
        let brute: Vec<f64> = targets
            .iter()
            .map(|t| {
                (0..ds.len())
                    .map(|i| ds.location(i).distance(t))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        assert_relative_eq!(s.mean, brute.iter().sum::<f64>() / 10.0, max_relative = 1e-12);
    }

    #[test]
    fn buffer_exclude_negative_radius_is_loo() {
        let ds = line_dataset(&[0.0, 1.0, 3.0, 6.0, 10.0, 15.0]);
        let (retained, d) = buffer_exclude(&ds, 0, -1.0).unwrap();
        assert_eq!(retained, vec![1, 2, 3, 4, 5]);
        assert_relative_eq!(d, 1.0);
    }

    #[test]
    fn buffer_exclude_zero_equals_loo_when_unique() {
        let ds = line_dataset(&[0.0, 1.0, 3.0, 6.0]);
        for i in 0..4 {
            let a = buffer_exclude(&ds, i, -1.0).unwrap();
            let b = buffer_exclude(&ds, i, 0.0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn buffer_exclude_on_a_line() {
        // Points at 0, 1, 2, 3, 4, 5 scaled by 1 meter; i = 0, r = 2.5.
        let ds = line_dataset(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let (retained, d) = buffer_exclude(&ds, 0, 2.5).unwrap();
        assert_eq!(retained, vec![3, 4, 5]);
        assert_relative_eq!(d, 3.0);
    }

    #[test]
    fn buffer_exclude_exhaustion() {
        let ds = line_dataset(&[0.0, 1.0]);
        assert!(matches!(
            buffer_exclude(&ds, 0, 10.0),
            Err(DatasetError::ExhaustedBuffer { index: 0, .. })
        ));
    }

    #[test]
    fn buffer_exclude_monotone_in_radius() {
        let ds = line_dataset(&[0.0, 2.0, 5.0, 9.0, 14.0, 20.0]);
        for i in 0..ds.len() {
            let mut prev: Option<Vec<usize>> = None;
            for r in [0.0, 3.0, 6.0, 12.0] {
                match buffer_exclude(&ds, i, r) {
                    Ok((retained, d)) => {
                        assert!(d > r);
                        for &j in &retained {
                            assert!(ds.location(i).distance(ds.location(j)) > r);
                        }
                        if let Some(p) = &prev {
                            assert!(retained.iter().all(|j| p.contains(j)));
                        }
                        prev = Some(retained);
                    }
                    Err(_) => break,
                }
            }
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_relative_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_relative_eq!(quantile_sorted(&v, 0.75), 3.25);
    }

    #[test]
    fn histogram_counts_cover_all_values() {
        let s = DistanceSummary::from_values(vec![1.0, 2.0, 2.5, 9.0], HistogramBins::Count(4)).unwrap();
        assert_eq!(s.count(), 4);
        assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3);
    }
}
