//! Gradient-boosted decision trees for binary classification with logistic
//! loss, exact greedy split search, learned default directions for missing
//! values, and Platt-scaled probabilities.

mod io;
mod platt;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metafeatures::{MetaFeatureVector, NUM_SLOTS, SLOT_NAMES};

pub use io::{from_json, load_model, save_model, FORMAT_VERSION};
pub use platt::{fit_platt, fit_platt_detailed, PlattFit};
pub use train::{train, train_calibrated, train_rows, TrainParams, TrainReport};

pub const DEFAULT_ROUNDS: usize = 100;
pub const DEFAULT_MAX_DEPTH: usize = 6;
pub const DEFAULT_ETA: f64 = 0.09;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A tree node stored in a flat array; children are indices into the same
/// array and always greater than the parent's index.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        /// Route taken when the feature value is missing.
        default_left: bool,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    /// Whether `value` is routed to the left child (`value < threshold`,
    /// missing values follow the default direction).
    #[inline]
    pub fn goes_left(threshold: f64, default_left: bool, value: f64) -> bool {
        if value.is_nan() {
            default_left
        } else {
            value < threshold
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    /// Raw (unshrunk) leaf value reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    i = if TreeNode::goes_left(threshold, default_left, x[feature]) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            go(self, 0)
        }
    }

    /// Distinct features used by split nodes, ascending.
    pub fn features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

/// Trained ensemble: `margin(x) = base_score + eta * Σ tree(x)`, with the
/// calibrated probability `1 / (1 + exp(platt_a * margin + platt_b))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    pub trees: Vec<Tree>,
    pub base_score: f64,
    pub eta: f64,
    pub platt_a: f64,
    pub platt_b: f64,
    pub slot_names: Vec<String>,
}

impl GbtModel {
    /// Model with no trees and identity calibration.
    pub fn constant(base_score: f64) -> Self {
        GbtModel {
            trees: Vec::new(),
            base_score,
            eta: DEFAULT_ETA,
            platt_a: -1.0,
            platt_b: 0.0,
            slot_names: SLOT_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn num_features(&self) -> usize {
        self.slot_names.len()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_features() {
            return Err(Error::Dimension {
                expected: self.num_features(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Sum of raw tree outputs, in tree order.
    pub fn tree_sum(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum()
    }

    pub fn margin_unchecked(&self, x: &[f64]) -> f64 {
        self.base_score + self.eta * self.tree_sum(x)
    }

    pub fn predict_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.margin_unchecked(x))
    }

    pub fn predict_proba_raw(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.predict_margin(x)?))
    }

    pub fn calibrate(&self, margin: f64) -> f64 {
        sigmoid(-(self.platt_a * margin + self.platt_b))
    }

    pub fn predict_proba_calibrated(&self, x: &[f64]) -> Result<f64> {
        Ok(self.calibrate(self.predict_margin(x)?))
    }

    pub fn margin_of(&self, v: &MetaFeatureVector) -> Result<f64> {
        self.predict_margin(&v.values)
    }

    pub fn to_json(&self) -> Result<String> {
        io::to_json(self)
    }

    /// SHA-256 of the serialized model, hex encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = io::to_json(self).unwrap_or_default();
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl Default for GbtModel {
    fn default() -> Self {
        GbtModel::constant(0.0)
    }
}

pub(crate) fn default_slot_names() -> Vec<String> {
    debug_assert_eq!(SLOT_NAMES.len(), NUM_SLOTS);
    SLOT_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}
