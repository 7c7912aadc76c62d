//! Piecewise-linear functions of time, used for price curves.

use serde::{Deserialize, Serialize};

/// A continuous piecewise-linear function given by `(t, value)` nodes with
/// strictly increasing `t`. Evaluation clamps to the end values outside
/// the node range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    nodes: Vec<(f64, f64)>,
}

impl PiecewiseLinearFn {
    pub fn new(nodes: Vec<(f64, f64)>) -> Self {
        assert!(!nodes.is_empty(), "piecewise-linear function needs nodes");
        for w in nodes.windows(2) {
            assert!(w[1].0 > w[0].0, "nodes must have strictly increasing t");
        }
        PiecewiseLinearFn { nodes }
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if t <= self.nodes[0].0 {
            return self.nodes[0].1;
        }
        if t >= self.nodes[n - 1].0 {
            return self.nodes[n - 1].1;
        }
        let k = self.nodes.partition_point(|&(bt, _)| bt <= t) - 1;
        let (t0, v0) = self.nodes[k];
        let (t1, v1) = self.nodes[k + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn min_value(&self) -> f64 {
        self.nodes
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.nodes
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise map of node values (kinks unchanged).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> PiecewiseLinearFn {
        PiecewiseLinearFn {
            nodes: self.nodes.iter().map(|&(t, v)| (t, f(v))).collect(),
        }
    }
}
