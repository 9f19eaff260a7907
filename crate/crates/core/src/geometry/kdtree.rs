//! Exact k-nearest-neighbour search over a static 3-D point set.
//!
//! Nodes split at the median of their widest axis; leaves hold at most
//! [`LEAF_SIZE`] points. Neighbours are ranked by squared distance, then by
//! lower point index, so results match an exhaustive scan exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// A neighbour hit: point index and Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[inline]
pub fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl KdTree {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        let mut tree = KdTree {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            let n = tree.points.len();
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for a in 0..3 {
                lo[a] = lo[a].min(self.points[i][a]);
                hi[a] = hi[a].max(self.points[i][a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap();

        let mid = (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&i, &j| {
            pts[i][axis].total_cmp(&pts[j][axis]).then(i.cmp(&j))
        });
        let value = self.points[self.order[start + mid]][axis];

        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` points nearest to `query`, ascending by distance then index.
    /// `exclude` drops one point index from consideration (typically the query itself).
    pub fn knn(&self, query: &[f64; 3], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.d2.sqrt(),
            })
            .collect()
    }

    /// Neighbours of stored point `i`, excluding itself.
    pub fn knn_of(&self, i: usize, k: usize) -> Vec<Neighbor> {
        self.knn(&self.points[i], k, Some(i))
    }

    pub fn nearest(&self, query: &[f64; 3], exclude: Option<usize>) -> Option<Neighbor> {
        self.knn(query, 1, exclude).into_iter().next()
    }

    fn search(
        &self,
        node: usize,
        q: &[f64; 3],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let c = Candidate {
                        d2: dist2(q, &self.points[i]),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, k, exclude, heap);
                // ties with the current worst must still be visited: a lower index may win them
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    self.search(far, q, k, exclude, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(
        points: &[[f64; 3]],
        q: &[f64; 3],
        k: usize,
        exclude: Option<usize>,
    ) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, p)| {
                let d = (0..3)
                    .map(|a| (q[a] - p[a]) * (q[a] - p[a]))
                    .fold(0.0, |s, v| s + v);
                (d, i)
            })
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter()
            .take(k)
            .map(|(d, i)| (i, d.sqrt()))
            .collect()
    }

    #[test]
    fn collinear() {
        let t = KdTree::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let n = t.nearest(&[0.0, 0.0, 0.0], Some(0)).unwrap();
        assert_eq!(n.index, 1);
        assert_eq!(n.distance, 1.0);
    }

    #[test]
    fn duplicates_break_ties_by_index() {
        let mut pts = vec![[5.0, 5.0, 5.0]; 3];
        pts.extend((0..40).map(|i| [i as f64, 0.0, 0.0]));
        let t = KdTree::new(pts);
        let n = t.knn_of(2, 1)[0];
        assert_eq!((n.index, n.distance), (0, 0.0));
        let n = t.knn_of(0, 2);
        assert_eq!(n.iter().map(|x| x.index).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 3]> = (0..500)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let t = KdTree::new(pts.clone());
        for i in 0..pts.len() {
            let got: Vec<(usize, f64)> = t
                .knn_of(i, 5)
                .iter()
                .map(|n| (n.index, n.distance))
                .collect();
            assert_eq!(got, brute(&pts, &pts[i], 5, Some(i)));
        }
        let q = [0.5, 0.5, 0.5];
        let got: Vec<(usize, f64)> = t
            .knn(&q, 600, None)
            .iter()
            .map(|n| (n.index, n.distance))
            .collect();
        assert_eq!(got, brute(&pts, &q, 600, None));
    }

    #[test]
    fn grid_with_many_ties() {
        let pts: Vec<[f64; 3]> = (0..8)
            .flat_map(|x| {
                (0..8).flat_map(move |y| (0..4).map(move |z| [x as f64, y as f64, z as f64]))
            })
            .collect();
        let t = KdTree::new(pts.clone());
        for i in 0..pts.len() {
            for k in [1, 6, 19, 32] {
                let got: Vec<(usize, f64)> = t
                    .knn_of(i, k)
                    .iter()
                    .map(|n| (n.index, n.distance))
                    .collect();
                assert_eq!(got, brute(&pts, &pts[i], k, Some(i)));
            }
        }
    }

    #[test]
    fn empty_and_zero_k() {
        let t = KdTree::new(Vec::new());
        assert!(t.knn(&[0.0; 3], 3, None).is_empty());
        let t = KdTree::new(vec![[0.0; 3]]);
        assert!(t.knn(&[0.0; 3], 0, None).is_empty());
        assert!(t.knn_of(0, 3).is_empty());
    }
}
