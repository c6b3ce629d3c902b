//! Kd-tree for exact nearest-neighbor queries over 3D point sets.
//!
//! Queries are exact and reproduce the brute-force ordering: candidates are
//! ranked by squared Euclidean distance with ties broken by the lower point
//! index. This tie rule is part of the scar-projection contract, so the tree
//! and any brute-force oracle compare with the identical `(dist2, index)` key.

use crate::vec3::dist2;

const LEAF_SIZE: usize = 16;

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

pub struct KdTree3 {
    points: Vec<[f64; 3]>,
    /// Permutation of point indices; leaves reference contiguous ranges.
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree3 {
    /// Builds a tree over `points`. Duplicate points are allowed.
    pub fn new(points: &[[f64; 3]]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let root = if points.is_empty() {
            nodes.push(Node::Leaf { start: 0, end: 0 });
            0
        } else {
            let n = points.len();
            build(points, &mut order, 0, n, 0, &mut nodes)
        };
        KdTree3 {
            points: points.to_vec(),
            order,
            nodes,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and squared distance of the nearest point, `None` on an empty tree.
    pub fn nearest(&self, query: [f64; 3]) -> Option<(usize, f64)> {
        self.k_nearest(query, 1).into_iter().next()
    }

    /// The `k` nearest points as `(index, dist2)`, sorted ascending by
    /// `(dist2, index)`. Returns fewer than `k` entries only when the tree
    /// holds fewer points.
    pub fn k_nearest(&self, query: [f64; 3], k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.search(self.root, query, k, &mut best);
        best.into_iter().map(|(d, i)| (i as usize, d)).collect()
    }

    fn search(&self, node: usize, query: [f64; 3], k: usize, best: &mut Vec<(f64, u32)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &idx in &self.order[start..end] {
                    let d = dist2(self.points[idx as usize], query);
                    push_candidate(best, k, (d, idx));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[axis] - value;
                let (near, far) = if delta <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, best);
                if best.len() < k || delta * delta <= best[best.len() - 1].0 {
                    self.search(far, query, k, best);
                }
            }
        }
    }
}

/// Inserts a `(dist2, index)` candidate into the sorted top-k buffer.
fn push_candidate(best: &mut Vec<(f64, u32)>, k: usize, cand: (f64, u32)) {
    if best.len() == k {
        let worst = best[k - 1];
        if cmp_key(cand, worst) == std::cmp::Ordering::Less {
            best.pop();
        } else {
            return;
        }
    }
    let pos = best.partition_point(|&b| cmp_key(b, cand) == std::cmp::Ordering::Less);
    best.insert(pos, cand);
}

fn cmp_key(a: (f64, u32), b: (f64, u32)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn build(
    points: &[[f64; 3]],
    order: &mut [u32],
    start: usize,
    end: usize,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let len = end - start;
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }
    let axis = depth % 3;
    let mid = start + len / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let split_value = points[order[mid] as usize][axis];
    let left = build(points, order, start, mid, depth + 1, nodes);
    let right = build(points, order, mid, end, depth + 1, nodes);
    nodes.push(Node::Split {
        axis,
        value: split_value,
        left,
        right,
    });
    nodes.len() - 1
}

/// Brute-force distance from each point of `from` to its nearest point in `to`.
///
/// Quadratic; used as the thickness/ASD oracle in tests and as the fallback
/// for tiny inputs.
pub fn nearest_distances_brute(from: &[[f64; 3]], to: &[[f64; 3]]) -> Vec<f64> {
    from.iter()
        .map(|&p| {
            to.iter()
                .map(|&q| dist2(p, q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect()
}
