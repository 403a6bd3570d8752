//! CART regression tree: binary splits chosen by least-squares criterion,
//! leaves predicting the mean of their training labels.

use super::FEATURE_DIM;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Growth limits. Defaults: depth 20, at least 5 rows per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 20,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        feature: usize,
        /// Rows with feature value ≤ threshold go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree for one output coordinate, stored as a node arena with the
/// root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, features: &[f64; FEATURE_DIM]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Best split of `indices` on one feature: (threshold, SSE after split).
/// Uses prefix sums over the sorted column; splits only between distinct
/// feature values and only where both sides keep `min_leaf` rows.
fn best_split_on_feature(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    indices: &mut [usize],
    feature: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    indices.sort_by(|&a, &b| features[a][feature].total_cmp(&features[b][feature]));
    let n = indices.len();
    let total_sum: f64 = indices.iter().map(|&i| labels[i]).sum();
    let total_sq: f64 = indices.iter().map(|&i| labels[i] * labels[i]).sum();
    let mut left_sum = 0.0;
    let mut left_sq = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for split in 1..n {
        let i = indices[split - 1];
        left_sum += labels[i];
        left_sq += labels[i] * labels[i];
        if split < min_leaf || n - split < min_leaf {
            continue;
        }
        let lo = features[indices[split - 1]][feature];
        let hi = features[indices[split]][feature];
        if lo == hi {
            continue;
        }
        let nl = split as f64;
        let nr = (n - split) as f64;
        let right_sum = total_sum - left_sum;
        let right_sq = total_sq - left_sq;
        let sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        if best.map_or(true, |(_, s)| sse < s) {
            best = Some((0.5 * (lo + hi), sse));
        }
    }
    best
}

fn grow(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    indices: &mut Vec<usize>,
    depth: usize,
    params: &TreeParams,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = indices.len();
    let mean = indices.iter().map(|&i| labels[i]).sum::<f64>() / n as f64;
    let sse: f64 = indices.iter().map(|&i| (labels[i] - mean).powi(2)).sum();

    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            value: mean,
            count: n,
        });
        nodes.len() - 1
    };

    if depth >= params.max_depth || n < 2 * params.min_leaf || sse <= 0.0 {
        return make_leaf(nodes);
    }

    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..FEATURE_DIM {
        if let Some((threshold, split_sse)) =
            best_split_on_feature(features, labels, indices, feature, params.min_leaf)
        {
            if best.map_or(true, |(_, _, s)| split_sse < s) {
                best = Some((feature, threshold, split_sse));
            }
        }
    }
    let Some((feature, threshold, split_sse)) = best else {
        return make_leaf(nodes);
    };
    if split_sse >= sse {
        return make_leaf(nodes);
    }

    let mut left: Vec<usize> = Vec::new();
    let mut right: Vec<usize> = Vec::new();
    for &i in indices.iter() {
        if features[i][feature] <= threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    let node_idx = nodes.len();
    nodes.push(Node::Leaf {
        value: 0.0,
        count: 0,
    }); // placeholder
    let left_idx = grow(features, labels, &mut left, depth + 1, params, nodes);
    let right_idx = grow(features, labels, &mut right, depth + 1, params, nodes);
    nodes[node_idx] = Node::Split {
        feature,
        threshold,
        left: left_idx,
        right: right_idx,
    };
    node_idx
}

/// Fit a regression tree for one output coordinate.
pub fn fit(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    params: &TreeParams,
) -> Result<RegressionTree> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(crate::Error::DimensionMismatch {
            expected: features.len(),
            got: labels.len(),
        });
    }
    let mut indices: Vec<usize> = (0..features.len()).collect();
    let mut nodes = Vec::new();
    let root = grow(features, labels, &mut indices, 0, params, &mut nodes);
    debug_assert_eq!(root, 0);
    Ok(RegressionTree { nodes })
}
