use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_slot_names, fit_platt, sigmoid, GbtModel, Tree, TreeNode};
use crate::error::{Error, Result};
use crate::folds;
use crate::metafeatures::MetaFeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Nodes (and candidate children) with less hessian mass stay leaves.
    pub min_hessian: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            rounds: super::DEFAULT_ROUNDS,
            max_depth: super::DEFAULT_MAX_DEPTH,
            eta: super::DEFAULT_ETA,
            lambda: 1.0,
            min_hessian: 1e-6,
            seed: 42,
        }
    }
}

/// Mean logistic loss before training (`losses[0]`) and after each round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub losses: Vec<f64>,
}

fn logloss(y: f64, margin: f64) -> f64 {
    // log(1 + exp(m)) - y*m, written to stay finite for large |m|.
    let softplus = if margin > 0.0 {
        margin + (-margin).exp().ln_1p()
    } else {
        margin.exp().ln_1p()
    };
    softplus - y * margin
}

pub(crate) fn mean_logloss(y: &[f64], margins: &[f64]) -> f64 {
    y.iter()
        .zip(margins)
        .map(|(&y, &m)| logloss(y, m))
        .sum::<f64>()
        / y.len() as f64
}

/// Row-major design matrix with per-feature presorted row orders.
struct Matrix<'a> {
    rows: &'a [&'a [f64]],
    n_features: usize,
    /// Rows with a present value, ascending by value (ties by row index).
    sorted: Vec<Vec<u32>>,
    /// Rows whose value is missing.
    missing: Vec<Vec<u32>>,
}

impl<'a> Matrix<'a> {
    fn new(rows: &'a [&'a [f64]], n_features: usize) -> Self {
        let (sorted, missing) = (0..n_features)
            .map(|f| {
                let (mut present, missing): (Vec<u32>, Vec<u32>) =
                    (0..rows.len() as u32).partition(|&i| !rows[i as usize][f].is_nan());
                present.sort_by(|&a, &b| {
                    rows[a as usize][f]
                        .total_cmp(&rows[b as usize][f])
                        .then(a.cmp(&b))
                });
                (present, missing)
            })
            .unzip();
        Matrix {
            rows,
            n_features,
            sorted,
            missing,
        }
    }

    #[inline]
    fn value(&self, row: u32, f: usize) -> f64 {
        self.rows[row as usize][f]
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    default_left: bool,
}

impl Candidate {
    /// Strict improvement; earlier (lower feature, smaller threshold,
    /// default-left) candidates win ties because they are offered first.
    fn better_than(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => self.gain > o.gain,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

struct Grower<'m> {
    m: &'m Matrix<'m>,
    params: TrainParams,
}

impl Grower<'_> {
    /// Best split for every open node over one feature.
    fn best_for_feature(
        &self,
        f: usize,
        node_of: &[u32],
        open: &[Option<Stats>],
        grad: &[f64],
        hess: &[f64],
    ) -> Vec<Option<Candidate>> {
        let lambda = self.params.lambda;
        let min_h = self.params.min_hessian;
        let n_nodes = open.len();
        let mut miss = vec![Stats::default(); n_nodes];
        let mut miss_count = vec![0usize; n_nodes];
        for &r in &self.m.missing[f] {
            let n = node_of[r as usize] as usize;
            if n < n_nodes && open[n].is_some() {
                miss[n].g += grad[r as usize];
                miss[n].h += hess[r as usize];
                miss_count[n] += 1;
            }
        }

        let mut left = vec![Stats::default(); n_nodes];
        let mut last: Vec<Option<f64>> = vec![None; n_nodes];
        let mut best: Vec<Option<Candidate>> = vec![None; n_nodes];

        let try_split = |best: &mut Option<Candidate>,
                         total: Stats,
                         pl: Stats,
                         pr: Stats,
                         threshold: f64,
                         default_left: bool| {
            if pl.h < min_h || pr.h < min_h {
                return;
            }
            let gain = 0.5
                * (score(pl.g, pl.h, lambda) + score(pr.g, pr.h, lambda)
                    - score(total.g, total.h, lambda));
            let cand = Candidate {
                gain,
                feature: f,
                threshold,
                default_left,
            };
            if gain > 0.0 && cand.better_than(best) {
                *best = Some(cand);
            }
        };

        for &r in &self.m.sorted[f] {
            let n = node_of[r as usize] as usize;
            let Some(total) = (if n < n_nodes { open[n] } else { None }) else {
                continue;
            };
            let x = self.m.value(r, f);
            if let Some(prev) = last[n] {
                if x > prev {
                    let mut threshold = prev + (x - prev) / 2.0;
                    if threshold <= prev {
                        threshold = x;
                    }
                    let present = Stats {
                        g: total.g - miss[n].g,
                        h: total.h - miss[n].h,
                    };
                    let l = left[n];
                    let r_ = Stats {
                        g: present.g - l.g,
                        h: present.h - l.h,
                    };
                    // Missing values on the left, then on the right.
                    try_split(
                        &mut best[n],
                        total,
                        Stats {
                            g: l.g + miss[n].g,
                            h: l.h + miss[n].h,
                        },
                        r_,
                        threshold,
                        true,
                    );
                    try_split(
                        &mut best[n],
                        total,
                        l,
                        Stats {
                            g: r_.g + miss[n].g,
                            h: r_.h + miss[n].h,
                        },
                        threshold,
                        false,
                    );
                }
            }
            left[n].g += grad[r as usize];
            left[n].h += hess[r as usize];
            last[n] = Some(x);
        }

        // Present values all left, missing values right.
        for n in 0..n_nodes {
            if let (Some(total), Some(_)) = (open[n], last[n]) {
                if miss_count[n] > 0 {
                    let present = Stats {
                        g: total.g - miss[n].g,
                        h: total.h - miss[n].h,
                    };
                    try_split(&mut best[n], total, present, miss[n], f64::MAX, false);
                }
            }
        }
        best
    }

    fn grow(&self, grad: &[f64], hess: &[f64]) -> Tree {
        let n_rows = grad.len();
        let lambda = self.params.lambda;
        let mut node_of = vec![0u32; n_rows];
        let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { value: 0.0 }];
        // Stats of every node created so far (indexed like `nodes`).
        let mut stats = vec![Stats::default(); 1];
        for i in 0..n_rows {
            stats[0].g += grad[i];
            stats[0].h += hess[i];
        }
        let mut frontier = vec![0usize];

        for _depth in 0..self.params.max_depth {
            let open: Vec<Option<Stats>> = (0..nodes.len())
                .map(|n| {
                    (frontier.contains(&n) && stats[n].h >= self.params.min_hessian)
                        .then_some(stats[n])
                })
                .collect();
            if open.iter().all(Option::is_none) {
                break;
            }

            let per_feature: Vec<Vec<Option<Candidate>>> = (0..self.m.n_features)
                .into_par_iter()
                .map(|f| self.best_for_feature(f, &node_of, &open, grad, hess))
                .collect();

            let mut next_frontier = Vec::new();
            let mut split_of: Vec<Option<(usize, usize, Candidate)>> = vec![None; nodes.len()];
            for &n in &frontier {
                if open[n].is_none() {
                    continue;
                }
                let mut best: Option<Candidate> = None;
                for cands in &per_feature {
                    if let Some(c) = cands[n] {
                        if c.better_than(&best) {
                            best = Some(c);
                        }
                    }
                }
                let Some(c) = best else { continue };
                let l = nodes.len();
                nodes.push(TreeNode::Leaf { value: 0.0 });
                nodes.push(TreeNode::Leaf { value: 0.0 });
                stats.push(Stats::default());
                stats.push(Stats::default());
                nodes[n] = TreeNode::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    default_left: c.default_left,
                    left: l,
                    right: l + 1,
                };
                split_of.push(None);
                split_of.push(None);
                split_of[n] = Some((l, l + 1, c));
                next_frontier.push(l);
                next_frontier.push(l + 1);
            }
            if next_frontier.is_empty() {
                break;
            }
            for i in 0..n_rows {
                let n = node_of[i] as usize;
                if let Some((l, r, c)) = split_of.get(n).copied().flatten() {
                    let v = self.m.rows[i][c.feature];
                    let child = if TreeNode::goes_left(c.threshold, c.default_left, v) {
                        l
                    } else {
                        r
                    };
                    node_of[i] = child as u32;
                    stats[child].g += grad[i];
                    stats[child].h += hess[i];
                }
            }
            frontier = next_frontier;
        }

        for (n, node) in nodes.iter_mut().enumerate() {
            if let TreeNode::Leaf { value } = node {
                *value = -stats[n].g / (stats[n].h + lambda);
            }
        }
        Tree { nodes }
    }
}

fn validate(rows: &[&[f64]], y: &[u8]) -> Result<usize> {
    if rows.len() != y.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            got: y.len(),
        });
    }
    if rows.len() < 2 {
        return Err(Error::DegenerateLabels("need at least two rows".into()));
    }
    let width = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::Dimension {
            expected: width,
            got: r.len(),
        });
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateLabels("both classes must be present".into()));
    }
    Ok(width)
}

/// Train on raw rows. Slot names default to the canonical feature layout
/// when the width matches it, otherwise `f0..fN`.
pub fn train_rows(rows: &[&[f64]], y: &[u8], params: &TrainParams) -> Result<(GbtModel, TrainReport)> {
    let width = validate(rows, y)?;
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let p = yf.iter().sum::<f64>() / yf.len() as f64;
    let base_score = (p / (1.0 - p)).ln();

    let m = Matrix::new(rows, width);
    let grower = Grower {
        m: &m,
        params: *params,
    };
    let mut tree_sum = vec![0.0; rows.len()];
    let margins = |ts: &[f64]| -> Vec<f64> { ts.iter().map(|s| base_score + params.eta * s).collect() };
    let mut losses = vec![mean_logloss(&yf, &margins(&tree_sum))];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut grad = vec![0.0; rows.len()];
    let mut hess = vec![0.0; rows.len()];

    for _ in 0..params.rounds {
        for i in 0..rows.len() {
            let pr = sigmoid(base_score + params.eta * tree_sum[i]);
            grad[i] = pr - yf[i];
            hess[i] = pr * (1.0 - pr);
        }
        let tree = grower.grow(&grad, &hess);
        for (i, r) in rows.iter().enumerate() {
            tree_sum[i] += tree.predict(r);
        }
        trees.push(tree);
        losses.push(mean_logloss(&yf, &margins(&tree_sum)));
    }

    let slot_names = if width == crate::metafeatures::NUM_SLOTS {
        default_slot_names()
    } else {
        (0..width).map(|i| format!("f{i}")).collect()
    };
    let model = GbtModel {
        trees,
        base_score,
        eta: params.eta,
        platt_a: -1.0,
        platt_b: 0.0,
        slot_names,
    };
    Ok((model, TrainReport { losses }))
}

/// Train on feature vectors with identity calibration.
pub fn train(x: &[MetaFeatureVector], y: &[u8], params: &TrainParams) -> Result<(GbtModel, TrainReport)> {
    let rows: Vec<&[f64]> = x.iter().map(|v| v.values.as_slice()).collect();
    train_rows(&rows, y, params)
}

/// Train on all rows, then fit Platt parameters on out-of-fold margins
/// from an internal stratified split of the same rows.
pub fn train_calibrated(
    x: &[MetaFeatureVector],
    y: &[u8],
    params: &TrainParams,
) -> Result<(GbtModel, TrainReport)> {
    let rows: Vec<&[f64]> = x.iter().map(|v| v.values.as_slice()).collect();
    let (mut model, report) = train_rows(&rows, y, params)?;

    let pos = y.iter().filter(|&&v| v == 1).count();
    let k = 5.min(pos).min(y.len() - pos);
    if k < 2 {
        warn!("too few examples per class for out-of-fold calibration; using identity");
        return Ok((model, report));
    }
    let fold = folds::stratified_folds(y, k, params.seed)?;
    let fold_margins: Vec<Result<Vec<(usize, f64)>>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train_idx, test_idx) = folds::split(&fold, f);
            let sub_rows: Vec<&[f64]> = train_idx.iter().map(|&i| rows[i]).collect();
            let sub_y: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
            let (m, _) = train_rows(&sub_rows, &sub_y, params)?;
            Ok(test_idx
                .into_iter()
                .map(|i| (i, m.margin_unchecked(rows[i])))
                .collect())
        })
        .collect();
    let mut oof = vec![0.0; y.len()];
    for fm in fold_margins {
        for (i, s) in fm? {
            oof[i] = s;
        }
    }
    match fit_platt(&oof, y) {
        Ok((a, b)) => {
            model.platt_a = a;
            model.platt_b = b;
        }
        Err(e) => warn!("Platt calibration failed ({e}); using identity"),
    }
    Ok((model, report))
}
