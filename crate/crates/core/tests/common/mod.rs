//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use phi_sentinel::gbt::{GbtModel, Tree, TreeNode};
use phi_sentinel::metafeatures::MetaFeatures;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// AUROC as the probability that a random positive outscores a random
/// negative, ties counted one half. O(n²).
pub fn pairwise_auroc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Average precision by walking distinct thresholds from high to low.
pub fn step_average_precision(scores: &[f64], labels: &[u8]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let (mut tp, mut fp) = (0.0, 0.0);
        for (s, &l) in scores.iter().zip(labels) {
            if *s >= t {
                if l == 1 {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        let recall = tp / n_pos;
        ap += (recall - prev_recall) * tp / (tp + fp);
        prev_recall = recall;
    }
    ap
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Interventional Shapley values of `model`'s margin by enumerating every
/// subset of `features`. Slots outside `features` get 0.
pub fn brute_force_shapley(model: &GbtModel, x: &[f64], background: &[Vec<f64>], features: &[usize]) -> (f64, Vec<f64>) {
    let d = features.len();
    let value = |mask: usize| -> f64 {
        background
            .iter()
            .map(|b| {
                let mut z = b.clone();
                for (bit, &f) in features.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        z[f] = x[f];
                    }
                }
                model.margin_unchecked(&z)
            })
            .sum::<f64>()
            / background.len() as f64
    };
    let v: Vec<f64> = (0..1usize << d).map(value).collect();
    let mut phi = vec![0.0; x.len()];
    for (bit, &f) in features.iter().enumerate() {
        let mut acc = 0.0;
        for mask in 0..1usize << d {
            if mask >> bit & 1 == 1 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = factorial(s) * factorial(d - s - 1) / factorial(d);
            acc += w * (v[mask | 1 << bit] - v[mask]);
        }
        phi[f] = acc;
    }
    (v[0], phi)
}

/// Margin recomputed by walking every tree independently of the library's
/// own evaluation loop.
pub fn walk_margin(model: &GbtModel, x: &[f64]) -> f64 {
    let mut sum = 0.0;
    for t in &model.trees {
        let mut i = 0;
        loop {
            match &t.nodes[i] {
                TreeNode::Leaf { value } => {
                    sum += value;
                    break;
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let v = x[*feature];
                    let go_left = if v.is_nan() { *default_left } else { v < *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }
    model.base_score + model.eta * sum
}

/// Random tree over the given feature slots, built breadth-first so child
/// indices exceed parents.
pub fn random_tree<R: Rng>(rng: &mut R, features: &[usize], max_depth: usize) -> Tree {
    let mut nodes: Vec<Option<TreeNode>> = vec![None];
    let mut queue = vec![(0usize, 0usize)];
    let mut head = 0;
    while head < queue.len() {
        let (idx, depth) = queue[head];
        head += 1;
        if depth < max_depth && rng.random_bool(0.75) {
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(None);
            nodes.push(None);
            nodes[idx] = Some(TreeNode::Split {
                feature: features[rng.random_range(0..features.len())],
                threshold: rng.random_range(-1.0..1.0),
                default_left: rng.random_bool(0.5),
                left,
                right,
            });
            queue.push((left, depth + 1));
            queue.push((right, depth + 1));
        } else {
            nodes[idx] = Some(TreeNode::Leaf {
                value: rng.random_range(-2.0..2.0),
            });
        }
    }
    Tree {
        nodes: nodes.into_iter().map(Option::unwrap).collect(),
    }
}

/// Random row of `width` values in [-1.5, 1.5), with some missing.
pub fn random_row<R: Rng>(rng: &mut R, width: usize, missing_rate: f64) -> Vec<f64> {
    (0..width)
        .map(|_| {
            if rng.random_bool(missing_rate) {
                f64::NAN
            } else {
                rng.random_range(-1.5..1.5)
            }
        })
        .collect()
}

// Feature oracles, written for clarity rather than speed.

pub fn gini_pairs(v: &[String]) -> f64 {
    let n = v.len() as f64;
    let differing = v.iter().flat_map(|a| v.iter().map(move |b| a != b)).filter(|&d| d).count();
    differing as f64 / (n * n)
}

pub fn diversity_pairs(v: &[String]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mut differing = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i != j && v[i] != v[j] {
                differing += 1;
            }
        }
    }
    differing as f64 / (n * (n - 1)) as f64
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

pub fn median(xs: &[f64]) -> f64 {
    let s = sorted(xs);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let s = sorted(xs);
    let h = (s.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Population skewness and excess kurtosis from raw power sums.
pub fn shape(xs: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    let spread = xs.iter().any(|&x| x != xs[0]);
    (spread && m2 > 0.0).then(|| (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
}

pub fn digits(t: &str) -> f64 {
    t.chars().filter(char::is_ascii_digit).count() as f64
}

pub fn random_tokens(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(1..=200);
    match rng.random_range(0..5) {
        0 => vec![rng.random_range(-50..50).to_string(); n],
        1 => (0..n).map(|_| rng.random_range(-1000..1000).to_string()).collect(),
        2 => (0..n)
            .map(|_| format!("{:.*}", rng.random_range(0..4), rng.random_range(-100.0..100.0)))
            .collect(),
        3 => (0..n).map(|_| rng.random_range(0..4).to_string()).collect(),
        _ => (0..n)
            .map(|_| ["a", "b", "c", "dd", "e"][rng.random_range(0..5)].to_string())
            .collect(),
    }
}


pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

/// First disagreement between `f` and the reference formulas for the
/// sample `values`, if any.
pub fn feature_oracle_mismatch(f: &MetaFeatures, values: &[String]) -> Option<String> {
    let check = |name: &str, got: f64, want: f64| (!close(got, want)).then(|| format!("{name}: {got} vs {want}"));
    let mut out = check("gini", f.gini_impurity, gini_pairs(values))
        .or_else(|| check("diversity", f.diversity_index, diversity_pairs(values)));
    if out.is_some() || !f.data_type.is_numeric() {
        return out;
    }
    let xs: Vec<f64> = values.iter().map(|v| v.parse().unwrap()).collect();
    let med = median(&xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    out = check("median", f.median?, med).or_else(|| check("mad", f.mad?, median(&dev)));
    for (got, p) in f.quantiles?.iter().zip([0.05, 0.25, 0.75, 0.95]) {
        out = out.or_else(|| check("quantile", *got, quantile(&xs, p)));
    }
    out = out.or_else(|| match (shape(&xs), f.skewness, f.kurtosis) {
        (Some((s, k)), Some(fs), Some(fk)) => check("skewness", fs, s).or_else(|| check("kurtosis", fk, k)),
        (None, None, None) => None,
        other => Some(format!("shape definedness {other:?}")),
    });
    let d: Vec<f64> = values.iter().map(|v| digits(v)).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let p = f.precision?;
    let s = sorted(&d);
    out.or_else(|| check("precision_min", p.min, s[0]))
        .or_else(|| check("precision_max", p.max, s[s.len() - 1]))
        .or_else(|| check("precision_mean", p.mean, mean))
        .or_else(|| check("precision_var", p.var, var))
        .or_else(|| check("precision_std", p.std, var.sqrt()))
        .or_else(|| check("precision_moe", p.moe, 1.96 * var.sqrt() / n.sqrt()))
}
