//! Least-squares regression trees.
//!
//! Growth is greedy and top-down. At each node every feature is scanned in
//! sorted order and every midpoint between consecutive distinct values is a
//! candidate threshold; the split with the largest reduction in squared
//! error wins. Ties go to the lowest feature index, then the lowest
//! threshold. Samples with `x < threshold` go left.

use serde::{Deserialize, Serialize};

use super::{Matrix, Regressor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 3, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Arena of nodes; index 0 is the root.
    pub nodes: Vec<Node>,
    pub width: usize,
    pub params: TreeParams,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Applies `f` to every split threshold of `feature`.
    pub fn map_thresholds(&mut self, feature: usize, f: impl Fn(f64) -> f64) {
        for node in &mut self.nodes {
            if let Node::Split { feature: ft, threshold, .. } = node {
                if *ft == feature {
                    *threshold = f(*threshold);
                }
            }
        }
    }
}

impl Regressor for RegressionTree {
    fn width(&self) -> usize {
        self.width
    }

    fn predict_one(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }
}

/// Per-feature sample orderings, sorted by `(value, index)`. Building this
/// once lets boosting reuse it for every tree.
pub struct SortedColumns {
    orders: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(x: &Matrix) -> SortedColumns {
        let orders = (0..x.cols())
            .map(|f| {
                let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
                idx.sort_by(|&a, &b| {
                    x.get(a as usize, f)
                        .total_cmp(&x.get(b as usize, f))
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        SortedColumns { orders }
    }
}

pub fn fit_tree(x: &Matrix, y: &[f64], params: TreeParams) -> RegressionTree {
    fit_tree_sorted(x, y, params, &SortedColumns::new(x))
}

pub fn fit_tree_sorted(x: &Matrix, y: &[f64], params: TreeParams, sorted: &SortedColumns) -> RegressionTree {
    assert_eq!(x.rows(), y.len(), "one target per row");
    let mut builder = Builder {
        x,
        y,
        params,
        nodes: Vec::new(),
        mask: vec![false; x.rows()],
    };
    builder.grow(sorted.orders.clone(), 0);
    RegressionTree { nodes: builder.nodes, width: x.cols(), params }
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: TreeParams,
    nodes: Vec<Node>,
    /// Scratch: true for samples going left at the split being applied.
    mask: Vec<bool>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    /// `orders[f]` holds this node's samples sorted by feature `f`.
    fn grow(&mut self, orders: Vec<Vec<u32>>, depth: usize) -> usize {
        let samples = &orders[0];
        let n = samples.len();
        let mean = samples.iter().map(|&i| self.y[i as usize]).sum::<f64>() / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });

        if depth >= self.params.max_depth || n < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some(best) = self.best_split(&orders, mean) else {
            return id;
        };

        for &i in samples {
            self.mask[i as usize] = self.x.get(i as usize, best.feature) < best.threshold;
        }
        let mut left_orders = Vec::with_capacity(orders.len());
        let mut right_orders = Vec::with_capacity(orders.len());
        for order in orders {
            let (l, r): (Vec<u32>, Vec<u32>) = order.into_iter().partition(|&i| self.mask[i as usize]);
            left_orders.push(l);
            right_orders.push(r);
        }
        let left = self.grow(left_orders, depth + 1);
        let right = self.grow(right_orders, depth + 1);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        id
    }

    fn best_split(&self, orders: &[Vec<u32>], mean: f64) -> Option<BestSplit> {
        let n = orders[0].len();
        let nf = n as f64;
        let centered: Vec<f64> = orders[0].iter().map(|&i| self.y[i as usize] - mean).collect();
        let total_sse: f64 = centered.iter().map(|t| t * t).sum();
        let total_sum: f64 = centered.iter().sum();
        if total_sse <= 0.0 {
            return None;
        }
        let tolerance = 1e-12 * total_sse;
        let base = total_sum * total_sum / nf;
        let mut best: Option<BestSplit> = None;

        for (feature, order) in orders.iter().enumerate() {
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                let i = order[k] as usize;
                left_sum += self.y[i] - mean;
                let v = self.x.get(i, feature);
                let next = self.x.get(order[k + 1] as usize, feature);
                if !(v < next) {
                    continue;
                }
                let nl = (k + 1) as f64;
                let right_sum = total_sum - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / (nf - nl) - base;
                if best.as_ref().is_none_or(|b| gain > b.gain + tolerance) {
                    let mut threshold = 0.5 * (v + next);
                    if !(threshold > v) {
                        threshold = next;
                    }
                    best = Some(BestSplit { feature, threshold, gain });
                }
            }
        }
        best.filter(|b| b.gain > tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> (Matrix, Vec<f64>) {
        (Matrix::from_rows(1, (0..4).map(|i| [i as f64])), vec![0.0, 1.0, 2.0, 3.0])
    }

    #[test]
    fn single_split_on_ramp() {
        let (x, y) = ramp();
        let t = fit_tree(&x, &y, TreeParams { max_depth: 1, min_samples_split: 2 });
        match t.nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (0, 1.5)),
            ref n => panic!("expected a split, got {n:?}"),
        }
        let preds: Vec<f64> = (0..4).map(|i| t.predict_one(x.row(i))).collect();
        assert_eq!(preds, vec![0.5, 0.5, 2.5, 2.5]);
    }

    #[test]
    fn identical_targets_make_one_leaf() {
        let x = Matrix::from_rows(2, (0..10).map(|i| [i as f64, (i * i) as f64]));
        let t = fit_tree(&x, &[4.25; 10], TreeParams::default());
        assert_eq!(t.nodes, vec![Node::Leaf { value: 4.25 }]);
    }

    #[test]
    fn respects_depth_and_min_split() {
        let x = Matrix::from_rows(1, (0..64).map(|i| [i as f64]));
        let y: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        for depth in 0..5 {
            let t = fit_tree(&x, &y, TreeParams { max_depth: depth, min_samples_split: 2 });
            assert!(t.depth() <= depth);
        }
        let t = fit_tree(&x, &y, TreeParams { max_depth: 10, min_samples_split: 100 });
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn routing_is_strictly_less_to_the_left() {
        let t = RegressionTree {
            nodes: vec![
                Node::Split { feature: 1, threshold: 2.0, left: 1, right: 2 },
                Node::Leaf { value: -1.0 },
                Node::Leaf { value: 1.0 },
            ],
            width: 2,
            params: TreeParams::default(),
        };
        assert_eq!(t.predict_one(&[0.0, 1.999]), -1.0);
        assert_eq!(t.predict_one(&[0.0, 2.0]), 1.0);
    }

    #[test]
    fn ties_prefer_the_lowest_feature() {
        // both columns separate the targets identically
        let x = Matrix::from_rows(2, [[0.0, 10.0], [1.0, 11.0], [2.0, 12.0], [3.0, 13.0]]);
        let t = fit_tree(&x, &[0.0, 0.0, 5.0, 5.0], TreeParams { max_depth: 1, min_samples_split: 2 });
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn adjacent_doubles_route_correctly() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = Matrix::from_rows(1, [[a], [b]]);
        let t = fit_tree(&x, &[0.0, 1.0], TreeParams { max_depth: 1, min_samples_split: 2 });
        assert_eq!(t.predict_one(&[a]), 0.0);
        assert_eq!(t.predict_one(&[b]), 1.0);
    }

    /// Naive greedy growth by full enumeration, returning the tree's SSE.
    fn naive_greedy_sse(x: &Matrix, y: &[f64], idx: &[usize], depth: usize) -> f64 {
        let sse = |ids: &[usize]| {
            let m = ids.iter().map(|&i| y[i]).sum::<f64>() / ids.len() as f64;
            ids.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>()
        };
        let here = sse(idx);
        if depth == 0 || idx.len() < 2 {
            return here;
        }
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        for f in 0..x.cols() {
            let mut vals: Vec<f64> = idx.iter().map(|&i| x.row(i)[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = w[0] + (w[1] - w[0]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x.row(i)[f] < t);
                let s = sse(&l) + sse(&r);
                if best.as_ref().map_or(true, |b| s < b.0) {
                    best = Some((s, l, r));
                }
            }
        }
        match best {
            Some((s, l, r)) if here - s > 1e-12 => {
                naive_greedy_sse(x, y, &l, depth - 1) + naive_greedy_sse(x, y, &r, depth - 1)
            }
            _ => here,
        }
    }

    #[test]
    fn matches_naive_greedy_growth() {
        use crate::rng::rng;
        use rand::Rng as _;
        for seed in 0..30u64 {
            let mut r = rng(seed);
            let n = r.random_range(5..120);
            let p = r.random_range(1..4);
            let x = Matrix::from_rows(p, (0..n).map(|_| (0..p).map(|_| r.random::<f64>()).collect::<Vec<_>>()));
            let y: Vec<f64> = (0..n).map(|i| (x.row(i)[0] * 7.0).sin() * 10.0 + r.random::<f64>()).collect();
            let idx: Vec<usize> = (0..n).collect();
            for depth in 1..=3 {
                let t = fit_tree(&x, &y, TreeParams { max_depth: depth, min_samples_split: 2 });
                let got: f64 = (0..n).map(|i| (t.predict_one(x.row(i)) - y[i]).powi(2)).sum();
                let want = naive_greedy_sse(&x, &y, &idx, depth);
                assert!((got - want).abs() < 1e-9 * want.max(1.0), "seed {seed} depth {depth}: {got} vs {want}");
            }
        }
    }
}
