use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Gini-impurity binary tree. Unlimited depth when `max_depth` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartParams {
    pub min_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            min_split: 2,
            max_depth: None,
        }
    }
}

/// Nodes refer to children by index into [`CartModel::nodes`]; rows with
/// `x[attr] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        gamma: usize,
        total: usize,
    },
    Split {
        attr: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gamma: usize,
        total: usize,
    },
}

impl Node {
    pub fn counts(&self) -> (usize, usize) {
        match *self {
            Node::Leaf { gamma, total } | Node::Split { gamma, total, .. } => (gamma, total),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartModel {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

/// The split attribute and the number of training rows sent left, which
/// together identify a split up to monotone rescaling of the attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSummary {
    pub attr: usize,
    pub left_count: usize,
}

/// `n · gini` for a node with `g` gammas among `n` rows.
fn weighted_gini(g: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (g, n) = (g as f64, n as f64);
    let h = n - g;
    n - (g * g + h * h) / n
}

struct Candidate {
    attr: usize,
    pos: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    params: &'a CartParams,
    /// `order[a]` holds row indices; every node owns one contiguous segment
    /// that is sorted by attribute `a`.
    order: Vec<Vec<usize>>,
    go_left: Vec<bool>,
    scratch: Vec<usize>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn best_split(&self, start: usize, end: usize, gamma: usize) -> Option<Candidate> {
        let n = end - start;
        let parent = weighted_gini(gamma, n);
        let mut best: Option<Candidate> = None;
        for (a, ord) in self.order.iter().enumerate() {
            let seg = &ord[start..end];
            let mut left_g = 0;
            for i in 0..n - 1 {
                let r = seg[i];
                left_g += usize::from(self.y[r]);
                let v = self.x[(r, a)];
                let next = self.x[(seg[i + 1], a)];
                if !(v < next) {
                    continue;
                }
                let nl = i + 1;
                let child = weighted_gini(left_g, nl) + weighted_gini(gamma - left_g, n - nl);
                let gain = parent - child;
                if gain > 1e-12 * n as f64 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = 0.5 * (v + next);
                    let threshold = if mid < next { mid } else { v };
                    best = Some(Candidate {
                        attr: a,
                        pos: nl,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Stable partition of every attribute's segment around the chosen split.
    fn partition(&mut self, start: usize, end: usize, c: &Candidate) {
        for &r in &self.order[c.attr][start..start + c.pos] {
            self.go_left[r] = true;
        }
        for &r in &self.order[c.attr][start + c.pos..end] {
            self.go_left[r] = false;
        }
        for a in 0..self.order.len() {
            if a == c.attr {
                continue;
            }
            let seg = &mut self.order[a][start..end];
            self.scratch.clear();
            let mut w = 0;
            for i in 0..seg.len() {
                let r = seg[i];
                if self.go_left[r] {
                    seg[w] = r;
                    w += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
        }
    }

    fn build(mut self) -> Vec<Node> {
        let n = self.x.rows();
        let gamma = self.y.iter().filter(|&&g| g).count();
        self.nodes.push(Node::Leaf { gamma, total: n });
        // (node index, segment start, segment end, depth)
        let mut stack = vec![(0usize, 0usize, n, 0usize)];
        while let Some((id, start, end, depth)) = stack.pop() {
            let (g, total) = self.nodes[id].counts();
            let splittable = total >= self.params.min_split.max(2)
                && g != 0
                && g != total
                && self.params.max_depth.is_none_or(|m| depth < m);
            if !splittable {
                continue;
            }
            let Some(c) = self.best_split(start, end, g) else {
                continue;
            };
            self.partition(start, end, &c);
            let mid = start + c.pos;
            let lg = self.order[c.attr][start..mid].iter().filter(|&&r| self.y[r]).count();
            let left = self.nodes.len();
            self.nodes.push(Node::Leaf { gamma: lg, total: c.pos });
            let right = self.nodes.len();
            self.nodes.push(Node::Leaf {
                gamma: g - lg,
                total: total - c.pos,
            });
            self.nodes[id] = Node::Split {
                attr: c.attr,
                threshold: c.threshold,
                left,
                right,
                gamma: g,
                total,
            };
            stack.push((right, mid, end, depth + 1));
            stack.push((left, start, mid, depth + 1));
        }
        self.nodes
    }
}

pub(super) fn fit(p: &CartParams, x: &Matrix, y: &[bool]) -> Result<CartModel> {
    if p.max_depth == Some(0) {
        return Err(Error::InvalidParameter("CART max_depth must be >= 1".into()));
    }
    let (n, d) = (x.rows(), x.cols());
    let order = (0..d)
        .map(|a| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| x[(i, a)].total_cmp(&x[(j, a)]).then(i.cmp(&j)));
            idx
        })
        .collect();
    let nodes = Builder {
        x,
        y,
        params: p,
        order,
        go_left: vec![false; n],
        scratch: Vec::with_capacity(n),
        nodes: Vec::new(),
    }
    .build();
    Ok(CartModel { nodes, n_features: d })
}

impl CartModel {
    fn leaf_for(&self, row: &[f64]) -> &Node {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    attr,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*attr] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    /// Gamma fraction of the leaf each row falls into.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|r| {
                let (g, t) = self.leaf_for(r).counts();
                g as f64 / t as f64
            })
            .collect()
    }

    /// Splits in pre-order (node, left subtree, right subtree).
    pub fn split_structure(&self) -> Vec<SplitSummary> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            if let Node::Split {
                attr, left, right, ..
            } = self.nodes[i]
            {
                out.push(SplitSummary {
                    attr,
                    left_count: self.nodes[left].counts().1,
                });
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0, 0)];
        while let Some((i, d)) = stack.pop() {
            best = best.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub(super) fn write_text(&self, s: &mut String) {
        s.push_str(&format!("n_features = {}\nnodes = {}\n", self.n_features, self.nodes.len()));
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Leaf { gamma, total } => s.push_str(&format!("{i} leaf {gamma} {total}\n")),
                Node::Split {
                    attr,
                    threshold,
                    left,
                    right,
                    gamma,
                    total,
                } => s.push_str(&format!(
                    "{i} split {attr} {threshold} {left} {right} {gamma} {total}\n"
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_xor_is_fit_exactly() {
        // Four jittered clusters; exact XOR corners would give zero gain
        // for every first split.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut state = 12345u64;
        let mut jitter = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.4
        };
        for i in 0..40 {
            let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
            rows.push(vec![a + jitter(), b + jitter()]);
            y.push((i % 2) != ((i / 2) % 2));
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit(&CartParams::default(), &x, &y).unwrap();
        let s = m.scores(&x);
        assert!(s.iter().zip(&y).all(|(&s, &g)| (s >= 0.5) == g));
    }

    #[test]
    fn threshold_is_midpoint_and_left_is_inclusive() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![5.0]]).unwrap();
        let m = fit(&CartParams::default(), &x, &[false, false, true, true]).unwrap();
        match m.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 2.5),
            _ => panic!("root should split"),
        }
        assert_eq!(m.split_structure(), vec![SplitSummary { attr: 0, left_count: 2 }]);
    }

    #[test]
    fn adjacent_floats_keep_threshold_between_them() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = Matrix::from_rows(&[vec![a], vec![b]]).unwrap();
        let m = fit(&CartParams::default(), &x, &[false, true]).unwrap();
        assert_eq!(m.scores(&x), vec![0.0, 1.0]);
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..32).map(|i| i % 2 == 0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit(
            &CartParams {
                max_depth: Some(2),
                ..CartParams::default()
            },
            &x,
            &y,
        )
        .unwrap();
        assert!(m.depth() <= 2);
        assert!(m.leaf_count() <= 4);
    }

    #[test]
    fn identical_rows_with_mixed_labels_stay_a_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let m = fit(&CartParams::default(), &x, &[true, false, true]).unwrap();
        assert_eq!(m.nodes.len(), 1);
        assert!((m.scores(&x)[0] - 2.0 / 3.0).abs() < 1e-15);
    }
}
