use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::csum;

/// Default neighbour rank.
pub const DEFAULT_K: usize = 4;
/// Blocks used for the jackknife standard error.
pub const JACKKNIFE_BLOCKS: usize = 20;
/// Smallest accepted sample size.
pub const MIN_SAMPLES: usize = 1000;

const LEAF_SIZE: usize = 16;

/// Balanced kd-tree over `m` points of dimension `d`. Points are stored in
/// tree order so each leaf is a contiguous slice.
struct KdTree {
    d: usize,
    /// Coordinates in tree order, row-major.
    data: Vec<f64>,
    /// `order[p]` is the original index of the point stored at position `p`.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

impl KdTree {
    fn build(points: &[f64], d: usize) -> Self {
        let m = points.len() / d;
        let mut idx: Vec<usize> = (0..m).collect();
        let mut nodes = Vec::new();
        Self::build_node(points, d, &mut idx, 0, m, &mut nodes);
        let data = idx.iter().flat_map(|&i| points[i * d..(i + 1) * d].iter().cloned()).collect();
        KdTree { d, data, order: idx, nodes }
    }

    fn build_node(points: &[f64], d: usize, idx: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
        if end - start <= LEAF_SIZE {
            nodes.push(Node::Leaf { start, end });
            return nodes.len() - 1;
        }
        // split on the widest coordinate
        let dim = (0..d)
            .map(|k| {
                let (lo, hi) = idx[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = points[i * d + k];
                    (lo.min(v), hi.max(v))
                });
                (k, hi - lo)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let mid = (start + end) / 2;
        idx[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * d + dim].total_cmp(&points[b * d + dim]).then(a.cmp(&b))
        });
        let value = points[idx[mid] * d + dim];
        let slot = nodes.len();
        nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = Self::build_node(points, d, idx, start, mid, nodes);
        let right = Self::build_node(points, d, idx, mid, end, nodes);
        nodes[slot] = Node::Split { dim, value, left, right };
        slot
    }

    /// Squared distances from the point stored at position `pos` to its `k`
    /// nearest other points, ascending.
    fn nearest(&self, pos: usize, k: usize) -> Vec<f64> {
        let query = &self.data[pos * self.d..(pos + 1) * self.d];
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        self.search(0, pos, query, k, &mut best);
        best
    }

    fn search(&self, node: usize, pos: usize, query: &[f64], k: usize, best: &mut Vec<f64>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in start..end {
                    if p == pos {
                        continue;
                    }
                    let worst = if best.len() < k { f64::INFINITY } else { best[k - 1] };
                    let row = &self.data[p * self.d..(p + 1) * self.d];
                    let mut dist = 0.0;
                    for (a, b) in row.iter().zip(query) {
                        let t = a - b;
                        dist += t * t;
                        if dist > worst {
                            break;
                        }
                    }
                    if dist < worst || (best.len() < k && dist <= worst) {
                        let at = best.partition_point(|&b| b <= dist);
                        best.insert(at, dist);
                        best.truncate(k);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, pos, query, k, best);
                if best.len() < k || diff * diff <= best[k - 1] {
                    self.search(far, pos, query, k, best);
                }
            }
        }
    }

    /// `(nearest, k-th nearest)` squared distances, indexed by original point.
    fn all_nearest(&self, k: usize) -> Vec<(f64, f64)> {
        let m = self.order.len();
        let by_pos: Vec<(f64, f64)> = (0..m)
            .into_par_iter()
            .map(|p| {
                let b = self.nearest(p, k);
                (b[0], b[k - 1])
            })
            .collect();
        let mut out = vec![(0.0, 0.0); m];
        for (p, v) in by_pos.into_iter().enumerate() {
            out[self.order[p]] = v;
        }
        out
    }
}

/// `psi(m)` for a positive integer `m`.
fn digamma_int(m: usize) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    csum((1..m).map(|j| 1.0 / j as f64)) - EULER_GAMMA
}

/// Log-volume of the unit Euclidean ball in dimension `d`.
fn log_unit_ball(d: usize) -> f64 {
    0.5 * d as f64 * std::f64::consts::PI.ln() - libm::lgamma(0.5 * d as f64 + 1.0)
}

/// Kozachenko-Leonenko estimate (nats) and jackknife standard error for
/// `m` points of dimension `d`, row-major.
///
/// `h = psi(m) - psi(k) + ln V_d + (d/m) sum ln eps_i` with `eps_i` the
/// distance to the `k`-th neighbour. The standard error comes from deleting
/// each of 20 contiguous blocks in turn.
pub fn knn_entropy_points(points: &[f64], d: usize, k: usize) -> Result<(f64, f64)> {
    if d == 0 || !points.len().is_multiple_of(d) {
        return Err(Error::InvalidArgument(format!("{} coordinates do not form points of dimension {d}", points.len())));
    }
    let m = points.len() / d;
    if m < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} points, got {m}")));
    }
    if k == 0 || k >= m {
        return Err(Error::InvalidArgument(format!("neighbour rank {k} out of range")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateBatch("non-finite coordinates".into()));
    }
    let (nearest, kth): (Vec<f64>, Vec<f64>) = KdTree::build(points, d).all_nearest(k).into_iter().unzip();
    let duplicates = nearest.iter().filter(|&&r| r == 0.0).count();
    if duplicates as f64 > 1e-3 * m as f64 {
        return Err(Error::DegenerateBatch(format!("{duplicates} of {m} points have an exact duplicate")));
    }
    if kth.contains(&0.0) {
        return Err(Error::DegenerateBatch(format!("zero distance to the {k}-th neighbour")));
    }
    // d ln eps_i = (d/2) ln eps_i^2
    let terms: Vec<f64> = kth.iter().map(|r| 0.5 * d as f64 * r.ln()).collect();
    let constant = |count: usize| digamma_int(count) - digamma_int(k) + log_unit_ball(d);
    let total = csum(terms.iter().cloned());
    let estimate = constant(m) + total / m as f64;

    let blocks = JACKKNIFE_BLOCKS;
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * m / blocks).collect();
    let leave_out: Vec<f64> = (0..blocks)
        .map(|b| {
            let block = csum(terms[bounds[b]..bounds[b + 1]].iter().cloned());
            let count = m - (bounds[b + 1] - bounds[b]);
            constant(count) + (total - block) / count as f64
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / blocks as f64;
    let var = (blocks - 1) as f64 / blocks as f64 * leave_out.iter().map(|h| (h - mean).powi(2)).sum::<f64>();
    Ok((estimate, var.sqrt()))
}
