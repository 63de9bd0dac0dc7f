//! Interventional Shapley attributions for the boosted ensemble and the
//! normalized importance summary built from them.
//!
//! Attributions are on the margin (log-odds) scale, where the ensemble is
//! additive; the sigmoid would break exact additivity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::{GbtModel, Tree, TreeNode};
use crate::metafeatures::MetaFeatureVector;

pub const DEFAULT_BACKGROUND: usize = 100;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub column_name: String,
    /// Expected margin over the background set.
    pub phi0: f64,
    pub phi: Vec<f64>,
}

impl Attribution {
    /// `phi0 + Σ phi`, which equals the model margin of the explained row.
    pub fn total(&self) -> f64 {
        self.phi0 + self.phi.iter().sum::<f64>()
    }

    /// Slots by descending |phi|, ties by slot index.
    pub fn ranked(&self) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.phi.iter().copied().enumerate().collect();
        v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        v
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Free,
    X,
    B,
}

/// Shapley weight for a member of a set of `a` "present" players against
/// `c` "absent" ones: (a-1)! c! / (a+c)!.
fn weight(a: usize, c: usize) -> f64 {
    // (a-1)! c! / (a+c)! = 1 / (a * C(a+c, a))
    let mut binom = 1.0;
    for i in 0..a.min(c) {
        binom = binom * ((a + c - i) as f64) / ((i + 1) as f64);
    }
    1.0 / (a as f64 * binom)
}

struct Walk<'a> {
    tree: &'a Tree,
    x: &'a [f64],
    b: &'a [f64],
    side: Vec<Side>,
    in_x: Vec<usize>,
    in_b: Vec<usize>,
}

impl Walk<'_> {
    fn go(&mut self, node: usize, phi: &mut [f64]) {
        match self.tree.nodes[node] {
            TreeNode::Leaf { value } => {
                let (a, c) = (self.in_x.len(), self.in_b.len());
                if a > 0 {
                    let w = value * weight(a, c);
                    for &j in &self.in_x {
                        phi[j] += w;
                    }
                }
                if c > 0 {
                    let w = value * weight(c, a);
                    for &j in &self.in_b {
                        phi[j] -= w;
                    }
                }
            }
            TreeNode::Split {
                feature,
                threshold,
                default_left,
                left,
                right,
            } => {
                let child = |v: f64| {
                    if TreeNode::goes_left(threshold, default_left, v) {
                        left
                    } else {
                        right
                    }
                };
                let (cx, cb) = (child(self.x[feature]), child(self.b[feature]));
                if cx == cb {
                    return self.go(cx, phi);
                }
                match self.side[feature] {
                    Side::X => self.go(cx, phi),
                    Side::B => self.go(cb, phi),
                    Side::Free => {
                        self.side[feature] = Side::X;
                        self.in_x.push(feature);
                        self.go(cx, phi);
                        self.in_x.pop();
                        self.side[feature] = Side::B;
                        self.in_b.push(feature);
                        self.go(cb, phi);
                        self.in_b.pop();
                        self.side[feature] = Side::Free;
                    }
                }
            }
        }
    }
}

/// Exact interventional Shapley values of one tree's raw output for input
/// `x` against a single reference row `b`, accumulated into `phi`.
/// The values sum to `tree(x) - tree(b)`.
pub fn tree_shap_single(tree: &Tree, x: &[f64], b: &[f64], phi: &mut [f64]) {
    if tree.nodes.is_empty() {
        return;
    }
    let mut w = Walk {
        tree,
        x,
        b,
        side: vec![Side::Free; x.len()],
        in_x: Vec::new(),
        in_b: Vec::new(),
    };
    w.go(0, phi);
}

/// Shapley values on raw rows; returns `(phi0, phi)`.
pub fn shap_rows(model: &GbtModel, x: &[f64], background: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    let d = model.num_features();
    if x.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x.len(),
        });
    }
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    if let Some(b) = background.iter().find(|b| b.len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: b.len(),
        });
    }
    let mut phi = vec![0.0; d];
    let mut base_sum = 0.0;
    for b in background {
        base_sum += model.tree_sum(b);
        for t in &model.trees {
            tree_shap_single(t, x, b, &mut phi);
        }
    }
    let n = background.len() as f64;
    for p in &mut phi {
        *p *= model.eta / n;
    }
    Ok((model.base_score + model.eta * base_sum / n, phi))
}

pub fn shap_values(
    model: &GbtModel,
    x: &MetaFeatureVector,
    background: &[MetaFeatureVector],
) -> Result<Attribution> {
    let bg: Vec<&[f64]> = background.iter().map(|v| v.values.as_slice()).collect();
    let (phi0, phi) = shap_rows(model, &x.values, &bg)?;
    Ok(Attribution {
        column_name: x.column_name.clone(),
        phi0,
        phi,
    })
}

/// Seeded subsample of at most `n` rows, kept in input order.
pub fn background_sample(rows: &[MetaFeatureVector], n: usize, seed: u64) -> Vec<MetaFeatureVector> {
    if rows.len() <= n {
        return rows.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, rows.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| rows[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub slot: usize,
    pub name: String,
    pub importance: f64,
    /// Standard deviation across fold models, when they were supplied.
    pub fold_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub slot_names: Vec<String>,
    /// Mean |phi| per slot, divided by the largest one.
    pub importance: Vec<f64>,
    pub fold_mean: Option<Vec<f64>>,
    pub fold_std: Option<Vec<f64>>,
    /// Every slot, descending by importance, ties by slot index.
    pub ranking: Vec<usize>,
    pub top_k: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    pub fn rank_of(&self, slot: usize) -> Option<usize> {
        self.ranking.iter().position(|&s| s == slot)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,slot,name,importance,fold_std\n");
        for (r, &s) in self.ranking.iter().enumerate() {
            let std = self
                .fold_std
                .as_ref()
                .map(|v| v[s].to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r + 1,
                s,
                self.slot_names[s],
                self.importance[s],
                std
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:>4}  {:<22} {:>10} {:>10}\n", "rank", "feature", "importance", "std");
        for (r, e) in self.top_k.iter().enumerate() {
            let std = e.fold_std.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:>4}  {:<22} {:>10.4} {:>10}\n",
                r + 1,
                e.name,
                e.importance,
                std
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceOptions {
    pub background: usize,
    pub seed: u64,
    pub top_k: usize,
}

impl Default for ImportanceOptions {
    fn default() -> Self {
        ImportanceOptions {
            background: DEFAULT_BACKGROUND,
            seed: 42,
            top_k: DEFAULT_TOP_K,
        }
    }
}

/// Mean |phi| per slot over `rows`, normalized by the maximum (all zeros
/// stay zero).
pub fn normalized_importance(
    model: &GbtModel,
    rows: &[MetaFeatureVector],
    background: &[MetaFeatureVector],
) -> Result<Vec<f64>> {
    let bg: Vec<&[f64]> = background.iter().map(|v| v.values.as_slice()).collect();
    let per_row: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|x| shap_rows(model, &x.values, &bg).map(|(_, phi)| phi))
        .collect::<Result<_>>()?;
    let d = model.num_features();
    let mut imp = vec![0.0; d];
    for phi in &per_row {
        for (acc, p) in imp.iter_mut().zip(phi) {
            *acc += p.abs();
        }
    }
    let n = rows.len().max(1) as f64;
    let max = imp.iter().fold(0.0f64, |m, &v| m.max(v / n));
    for v in &mut imp {
        *v /= n;
        if max > 0.0 {
            *v /= max;
        }
    }
    Ok(imp)
}

fn rank(importance: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    order
}

/// Importance of `model` over `rows`, with per-fold mean and spread when
/// `fold_models` is non-empty.
pub fn importance_report(
    model: &GbtModel,
    rows: &[MetaFeatureVector],
    fold_models: &[GbtModel],
    opts: &ImportanceOptions,
) -> Result<ImportanceReport> {
    if rows.is_empty() {
        return Err(Error::EmptyBackground);
    }
    let background = background_sample(rows, opts.background, opts.seed);
    let importance = normalized_importance(model, rows, &background)?;

    let (fold_mean, fold_std) = if fold_models.is_empty() {
        (None, None)
    } else {
        let per_fold: Vec<Vec<f64>> = fold_models
            .iter()
            .map(|m| normalized_importance(m, rows, &background))
            .collect::<Result<_>>()?;
        let d = importance.len();
        let k = per_fold.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| per_fold.iter().map(|f| f[j]).sum::<f64>() / k)
            .collect();
        let std: Vec<f64> = (0..d)
            .map(|j| {
                (per_fold.iter().map(|f| (f[j] - mean[j]).powi(2)).sum::<f64>() / k).sqrt()
            })
            .collect();
        (Some(mean), Some(std))
    };

    let ranking = rank(&importance);
    let top_k = ranking
        .iter()
        .take(opts.top_k)
        .map(|&s| ImportanceEntry {
            slot: s,
            name: model.slot_names[s].clone(),
            importance: importance[s],
            fold_std: fold_std.as_ref().map(|v| v[s]),
        })
        .collect();
    Ok(ImportanceReport {
        slot_names: model.slot_names.clone(),
        importance,
        fold_mean,
        fold_std,
        ranking,
        top_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metafeatures::NUM_SLOTS;

    fn stump(feature: usize, threshold: f64, l: f64, r: f64) -> Tree {
        Tree {
            nodes: vec![
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left: true,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { value: l },
                TreeNode::Leaf { value: r },
            ],
        }
    }

    #[test]
    fn weights_match_factorials() {
        let f = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        for a in 1..8 {
            for c in 0..8 {
                let exact = f(a - 1) * f(c) / f(a + c);
                assert!((weight(a, c) - exact).abs() < 1e-15 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn constant_tree_gives_zero_phi() {
        let mut m = GbtModel::constant(0.5);
        m.trees.push(Tree::leaf(2.0));
        let x = vec![1.0; NUM_SLOTS];
        let (phi0, phi) = shap_rows(&m, &x, &[&x[..]]).unwrap();
        assert!(phi.iter().all(|&p| p == 0.0));
        assert!((phi0 - (0.5 + m.eta * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn stump_credits_only_its_feature() {
        let mut m = GbtModel::constant(0.0);
        m.trees.push(stump(41, 0.5, -1.0, 1.0));
        let x = vec![0.9; NUM_SLOTS];
        let b = vec![0.1; NUM_SLOTS];
        let (phi0, phi) = shap_rows(&m, &x, &[&b[..]]).unwrap();
        for (j, &p) in phi.iter().enumerate() {
            if j == 41 {
                assert!((p - 2.0 * m.eta).abs() < 1e-15);
            } else {
                assert_eq!(p, 0.0);
            }
        }
        assert!((phi0 + phi.iter().sum::<f64>() - m.margin_unchecked(&x)).abs() < 1e-12);
    }

    #[test]
    fn empty_background_errors() {
        let m = GbtModel::constant(0.0);
        assert!(matches!(
            shap_rows(&m, &vec![0.0; NUM_SLOTS], &[]),
            Err(Error::EmptyBackground)
        ));
    }
}
