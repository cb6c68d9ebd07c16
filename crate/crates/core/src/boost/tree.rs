//! Regression trees fit to first- and second-order gradients.
//!
//! Splits are chosen by exact greedy search over the sorted values of each
//! feature, scoring a node as `G² / (H + λ)`. Nodes with at most
//! [`LOOKAHEAD_ROWS`] rows and room for two more levels instead pick the
//! split whose best subtree within the remaining depth scores highest, so
//! trees over such small row sets are loss-optimal.

use serde::Serialize;

/// Node size at or below which subtrees are searched exhaustively.
pub const LOOKAHEAD_ROWS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Node {
    Split {
        feature: usize,
        /// Rows with `x[feature] < threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        n_samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(value: f64, n_samples: usize) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { value, n_samples }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Evaluate the tree for one sample given a feature accessor.
    pub fn predict_with(&self, feature: impl Fn(usize) -> f64) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature: f,
                    threshold,
                    left,
                    right,
                } => idx = if feature(f) < threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_with(|f| row[f])
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Leaf { value, n_samples } => Some((value, n_samples)),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub l2_leaf: f64,
}

/// Column-major training matrix with per-feature row orderings.
pub struct FeatureMatrix {
    cols: Vec<Vec<f64>>,
    /// Row indices of every feature, ascending by value then index.
    order: Vec<Vec<u32>>,
    n_rows: usize,
}

impl FeatureMatrix {
    pub fn new(x: ndarray::ArrayView2<f64>) -> Self {
        let (n, m) = x.dim();
        let cols: Vec<Vec<f64>> = (0..m).map(|j| x.column(j).to_vec()).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        FeatureMatrix { cols, order, n_rows: n }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.cols[feature][row]
    }
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        g * g / d
    } else {
        0.0
    }
}

fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        -g / d
    } else {
        0.0
    }
}

/// Midpoint between two consecutive distinct values, never equal to `lo`.
fn cut_point(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    /// Position in `features`.
    slot: usize,
    threshold: f64,
    gain: f64,
}

/// Builds one tree; reusable scratch lives here.
pub struct TreeBuilder<'a> {
    data: &'a FeatureMatrix,
    grad: &'a [f64],
    hess: &'a [f64],
    params: TreeParams,
    features: Vec<usize>,
    goes_left: Vec<bool>,
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(data: &'a FeatureMatrix, grad: &'a [f64], hess: &'a [f64], params: TreeParams, features: Vec<usize>) -> Self {
        TreeBuilder {
            data,
            grad,
            hess,
            params,
            features,
            goes_left: vec![false; data.n_rows()],
            nodes: Vec::new(),
        }
    }

    /// Grow a tree on the given rows (each row at most once).
    pub fn build(mut self, rows: &[u32]) -> DecisionTree {
        let mut member = vec![false; self.data.n_rows()];
        for &r in rows {
            member[r as usize] = true;
        }
        let lists: Vec<Vec<u32>> = self
            .features
            .iter()
            .map(|&f| self.data.order[f].iter().copied().filter(|&r| member[r as usize]).collect())
            .collect();
        let rows = rows.to_vec();
        self.grow(rows, lists, 0);
        DecisionTree { nodes: self.nodes }
    }

    fn sums(&self, rows: &[u32]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(g, h), &r| {
            (g + self.grad[r as usize], h + self.hess[r as usize])
        })
    }

    fn grow(&mut self, rows: Vec<u32>, lists: Vec<Vec<u32>>, depth: usize) -> usize {
        let idx = self.nodes.len();
        let (g, h) = self.sums(&rows);
        let lambda = self.params.l2_leaf;
        self.nodes.push(Node::Leaf {
            value: leaf_value(g, h, lambda),
            n_samples: rows.len(),
        });

        let count = rows.len();
        let can_split = depth < self.params.max_depth
            && count >= 2 * self.params.min_samples_leaf
            && !self.features.is_empty();
        if !can_split {
            return idx;
        }
        let remaining = self.params.max_depth - depth;
        let choice = if count <= LOOKAHEAD_ROWS && remaining >= 2 {
            self.exact_split(&rows, &lists, g, h, remaining)
        } else {
            self.greedy_split(&lists, g, h)
        };
        let Some(choice) = choice else { return idx };

        let feature = self.features[choice.slot];
        for &r in &rows {
            self.goes_left[r as usize] = self.data.value(r as usize, feature) < choice.threshold;
        }
        let flags = &self.goes_left;
        let split = |mut list: Vec<u32>, n_left: usize| -> (Vec<u32>, Vec<u32>) {
            let mut left = Vec::with_capacity(n_left);
            left.extend(list.iter().copied().filter(|&r| flags[r as usize]));
            list.retain(|&r| !flags[r as usize]);
            (left, list)
        };
        let n_left = rows.iter().filter(|&&r| flags[r as usize]).count();
        let (left_rows, right_rows) = split(rows, n_left);
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for list in lists {
            let (l, r) = split(list, n_left);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.grow(left_rows, left_lists, depth + 1);
        let right = self.grow(right_rows, right_lists, depth + 1);
        self.nodes[idx] = Node::Split {
            feature,
            threshold: choice.threshold,
            left,
            right,
        };
        idx
    }

    fn greedy_split(&self, lists: &[Vec<u32>], g: f64, h: f64) -> Option<SplitChoice> {
        let lambda = self.params.l2_leaf;
        let min_leaf = self.params.min_samples_leaf;
        let parent = score(g, h, lambda);
        let mut best: Option<SplitChoice> = None;
        for (slot, list) in lists.iter().enumerate() {
            let column = &self.data.cols[self.features[slot]];
            let n = list.len();
            let (mut gl, mut hl) = (0.0, 0.0);
            for p in 0..n.saturating_sub(1) {
                let r = list[p] as usize;
                gl += self.grad[r];
                hl += self.hess[r];
                let (lo, hi) = (column[r], column[list[p + 1] as usize]);
                if lo < hi && p + 1 >= min_leaf && n - p > min_leaf {
                    let gain = score(gl, hl, lambda) + score(g - gl, h - hl, lambda) - parent;
                    if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                        best = Some(SplitChoice {
                            slot,
                            threshold: cut_point(lo, hi),
                            gain,
                        });
                    }
                }
            }
        }
        best
    }

    /// Split of a small node chosen so that the subtree grown below it,
    /// within the remaining depth, has the highest total score. Subtrees are
    /// searched exhaustively over row subsets encoded as bit masks.
    fn exact_split(&self, rows: &[u32], lists: &[Vec<u32>], g: f64, h: f64, remaining: usize) -> Option<SplitChoice> {
        let mut search = SubsetSearch::new(self, rows, lists, remaining);
        let full = search.full;
        let parent = score(g, h, self.params.l2_leaf);
        let mut best: Option<SplitChoice> = None;
        for slot in 0..lists.len() {
            let order = search.orders[slot];
            let mut left = 0u8;
            for p in 0..search.len - 1 {
                left |= 1 << order[p].0;
                let (lo, hi) = (order[p].1, order[p + 1].1);
                if lo < hi && search.admissible(left, full) {
                    let total = search.best(left, remaining - 1) + search.best(full & !left, remaining - 1);
                    let gain = total - parent;
                    if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                        best = Some(SplitChoice {
                            slot,
                            threshold: cut_point(lo, hi),
                            gain,
                        });
                    }
                }
            }
        }
        best
    }
}

/// Memoized best subtree score over subsets of at most eight rows.
struct SubsetSearch {
    full: u8,
    /// Per feature slot: (local row, value), ascending by value.
    orders: Vec<[(u8, f64); LOOKAHEAD_ROWS]>,
    len: usize,
    /// Leaf score of every subset.
    leaf: [f64; 256],
    min_leaf: u32,
    /// Indexed by `(depth - 1) * 256 + mask`; NaN when unset.
    memo: Vec<f64>,
}

impl SubsetSearch {
    fn new(builder: &TreeBuilder<'_>, rows: &[u32], lists: &[Vec<u32>], remaining: usize) -> Self {
        let len = rows.len();
        let local = |r: u32| rows.iter().position(|&x| x == r).expect("row of this node") as u8;
        let orders = lists
            .iter()
            .enumerate()
            .map(|(slot, list)| {
                let feature = builder.features[slot];
                let mut order = [(0u8, 0.0); LOOKAHEAD_ROWS];
                for (p, &r) in list.iter().enumerate() {
                    order[p] = (local(r), builder.data.value(r as usize, feature));
                }
                order
            })
            .collect();
        let full = ((1u16 << len) - 1) as u8;
        let (mut g, mut h) = ([0.0; 256], [0.0; 256]);
        let mut leaf = [0.0; 256];
        for mask in 1..=full as usize {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            g[mask] = g[rest] + builder.grad[rows[low] as usize];
            h[mask] = h[rest] + builder.hess[rows[low] as usize];
            leaf[mask] = score(g[mask], h[mask], builder.params.l2_leaf);
        }
        SubsetSearch {
            full,
            orders,
            len,
            leaf,
            min_leaf: builder.params.min_samples_leaf as u32,
            memo: vec![f64::NAN; remaining.min(len) * 256],
        }
    }

    fn admissible(&self, left: u8, mask: u8) -> bool {
        left.count_ones() >= self.min_leaf && (mask & !left).count_ones() >= self.min_leaf
    }

    fn best(&mut self, mask: u8, depth: usize) -> f64 {
        let count = mask.count_ones();
        // a subset of c rows never needs more than c - 1 levels
        let depth = depth.min(count.saturating_sub(1) as usize);
        if depth == 0 || count < 2 * self.min_leaf {
            return self.leaf[mask as usize];
        }
        let key = (depth - 1) * 256 + mask as usize;
        if !self.memo[key].is_nan() {
            return self.memo[key];
        }
        let mut best = self.leaf[mask as usize];
        let mut seen = [0u64; 4];
        for slot in 0..self.orders.len() {
            let mut left = 0u8;
            let mut prev: Option<f64> = None;
            for p in 0..self.len {
                let (i, v) = self.orders[slot][p];
                if mask & (1 << i) == 0 {
                    continue;
                }
                if let Some(lo) = prev {
                    let right = mask & !left;
                    let fresh = seen[left as usize >> 6] & (1 << (left & 63)) == 0;
                    if lo < v && fresh && self.admissible(left, mask) {
                        seen[left as usize >> 6] |= 1 << (left & 63);
                        seen[right as usize >> 6] |= 1 << (right & 63);
                        let total = self.best(left, depth - 1) + self.best(right, depth - 1);
                        if total > best {
                            best = total;
                        }
                    }
                }
                left |= 1 << i;
                prev = Some(v);
            }
        }
        self.memo[key] = best;
        best
    }
}
