//! A 2-d k-d tree over observation locations.
//!
//! Built once per dataset and shared read-only across workers. Queries return
//! the original observation indices. Brute-force scans remain the test oracle
//! for every query type.

use super::Location;

#[derive(Debug, Clone)]
struct Node {
    point: Location,
    index: usize,
    axis: u8,
    left: Option<usize>,
    right: Option<usize>,
}

/// Static k-d tree supporting nearest-neighbour and radius queries.
#[derive(Debug, Clone, Default)]
pub struct KdTree {
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl KdTree {
    pub fn build(points: &[Location]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        tree.root = tree.build_rec(points, &mut order, 0);
        tree
    }

    fn build_rec(&mut self, points: &[Location], order: &mut [usize], depth: usize) -> Option<usize> {
        if order.is_empty() {
            return None;
        }
        let axis = (depth % 2) as u8;
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            let (ka, kb) = if axis == 0 {
                (points[a].x, points[b].x)
            } else {
                (points[a].y, points[b].y)
            };
            ka.total_cmp(&kb)
        });
        let index = order[mid];
        let slot = self.nodes.len();
        self.nodes.push(Node {
            point: points[index],
            index,
            axis,
            left: None,
            right: None,
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.build_rec(points, lo, depth + 1);
        let right = self.build_rec(points, &mut hi[1..], depth + 1);
        self.nodes[slot].left = left;
        self.nodes[slot].right = right;
        Some(slot)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nearest point to `q`, optionally skipping one observation index.
    /// Returns `(index, distance)`.
    pub fn nearest_excluding(&self, q: &Location, skip: Option<usize>) -> Option<(usize, f64)> {
        self.nearest_beyond(q, f64::NEG_INFINITY, skip)
    }

    /// Nearest point to `q` among those at distance strictly greater than
    /// `min_dist`, optionally skipping one observation index.
    ///
    /// `min_dist < 0` places no lower bound, so plain nearest-neighbour search
    /// is the special case `min_dist = -inf`.
    pub fn nearest_beyond(
        &self,
        q: &Location,
        min_dist: f64,
        skip: Option<usize>,
    ) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.nearest_rec(self.root, q, min_dist, skip, &mut best);
        best
    }

    fn nearest_rec(
        &self,
        node: Option<usize>,
        q: &Location,
        min_dist: f64,
        skip: Option<usize>,
        best: &mut Option<(usize, f64)>,
    ) {
        let Some(n) = node else { return };
        let node = &self.nodes[n];
        let d = node.point.distance(q);
        if d > min_dist && skip != Some(node.index) && best.is_none_or(|(_, bd)| d < bd) {
            *best = Some((node.index, d));
        }
        let diff = if node.axis == 0 {
            q.x - node.point.x
        } else {
            q.y - node.point.y
        };
        let (near, far) = if diff <= 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.nearest_rec(near, q, min_dist, skip, best);
        if best.is_none_or(|(_, bd)| diff.abs() < bd) {
            self.nearest_rec(far, q, min_dist, skip, best);
        }
    }

    /// Indices of all points at distance `<= radius` from `q`.
    pub fn within(&self, q: &Location, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.within_rec(self.root, q, radius, &mut out);
        out
    }

    fn within_rec(&self, node: Option<usize>, q: &Location, radius: f64, out: &mut Vec<usize>) {
        let Some(n) = node else { return };
        let node = &self.nodes[n];
        if node.point.distance(q) <= radius {
            out.push(node.index);
        }
        let diff = if node.axis == 0 {
            q.x - node.point.x
        } else {
            q.y - node.point.y
        };
        let (near, far) = if diff <= 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.within_rec(near, q, radius, out);
        if diff.abs() <= radius {
            self.within_rec(far, q, radius, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_nearest_beyond(
        points: &[Location],
        q: &Location,
        min_dist: f64,
        skip: Option<usize>,
    ) -> Option<(usize, f64)> {
        points
            .iter()
            .enumerate()
            .filter(|(i, _)| skip != Some(*i))
            .map(|(i, p)| (i, p.distance(q)))
            .filter(|(_, d)| *d > min_dist)
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn brute_within(points: &[Location], q: &Location, radius: f64) -> Vec<usize> {
        points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.distance(q) <= radius)
            .map(|(i, _)| i)
            .collect()
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<Location>> {
        prop::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), 1..max)
            .prop_map(|v| v.into_iter().map(|(x, y)| Location::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn nearest_matches_brute_force(points in arb_points(50), qx in 0.0..1000.0f64, qy in 0.0..1000.0f64) {
            let tree = KdTree::build(&points);
            let q = Location::new(qx, qy);
            let got = tree.nearest_excluding(&q, None);
            let want = brute_nearest_beyond(&points, &q, f64::NEG_INFINITY, None);
            prop_assert_eq!(got.map(|(_, d)| d), want.map(|(_, d)| d));
        }

        #[test]
        fn nearest_beyond_matches_brute_force(
            points in arb_points(50),
            qi in 0usize..50,
            min_dist in 0.0..500.0f64,
        ) {
            let qi = qi % points.len();
            let tree = KdTree::build(&points);
            let q = points[qi];
            let got = tree.nearest_beyond(&q, min_dist, Some(qi));
            let want = brute_nearest_beyond(&points, &q, min_dist, Some(qi));
            prop_assert_eq!(got.map(|(_, d)| d), want.map(|(_, d)| d));
            if let Some((_, d)) = got {
                prop_assert!(d > min_dist);
            }
        }

        #[test]
        fn within_matches_brute_force(points in arb_points(50), qx in 0.0..1000.0f64, qy in 0.0..1000.0f64, radius in 0.0..800.0f64) {
            let tree = KdTree::build(&points);
            let q = Location::new(qx, qy);
            let mut got = tree.within(&q, radius);
            got.sort_unstable();
            let want = brute_within(&points, &q, radius);
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn ties_are_broken_consistently_on_distance() {
        // Four corners equidistant from the center: any index is acceptable,
        // but the distance must be exact.
        let pts = vec![
            Location::new(0.0, 0.0),
            Location::new(2.0, 0.0),
            Location::new(0.0, 2.0),
            Location::new(2.0, 2.0),
        ];
        let tree = KdTree::build(&pts);
        let (_, d) = tree.nearest_excluding(&Location::new(1.0, 1.0), None).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
    }
}
