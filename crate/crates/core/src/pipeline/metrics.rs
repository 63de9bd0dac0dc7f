use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Table-3 style metric suite. Ratios with a zero denominator are 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub auroc: f64,
    pub auprc: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub npv: f64,
    pub accuracy: f64,
    pub f1: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 8] = [
        "AUROC",
        "AUPRC",
        "sensitivity",
        "specificity",
        "precision",
        "NPV",
        "accuracy",
        "F1",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.auroc,
            self.auprc,
            self.sensitivity,
            self.specificity,
            self.precision,
            self.npv,
            self.accuracy,
            self.f1,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        MetricSet {
            auroc: a[0],
            auprc: a[1],
            sensitivity: a[2],
            specificity: a[3],
            precision: a[4],
            npv: a[5],
            accuracy: a[6],
            f1: a[7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Confusion {
    /// Counts with `score >= threshold` predicted positive.
    pub fn at(scores: &[f64], labels: &[u8], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn sensitivity(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn npv(&self) -> f64 {
        ratio(self.tn, self.tn + self.fn_)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.sensitivity());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

/// Indices sorted by descending score, split into groups of equal score.
fn tie_groups(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn class_counts(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "ranking metrics need both classes".into(),
        ));
    }
    Ok((pos, neg))
}

/// Area under the ROC step curve; tied scores form one diagonal segment.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let (mut tp, mut fp) = (0usize, 0usize);
    // Twice the area in units of one (tp, fp) cell, kept integral.
    let mut area2 = 0usize;
    for g in tie_groups(scores) {
        let gp = g.iter().filter(|&&i| labels[i] == 1).count();
        let gn = g.len() - gp;
        area2 += gn * (2 * tp + gp);
        tp += gp;
        fp += gn;
    }
    debug_assert_eq!((tp, fp), (pos, neg));
    Ok(area2 as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Average precision: Σ over thresholds of (ΔTP / P) · precision.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, _) = class_counts(scores, labels)?;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut acc = 0.0;
    for g in tie_groups(scores) {
        let gp = g.iter().filter(|&&i| labels[i] == 1).count();
        tp += gp;
        seen += g.len();
        if gp > 0 {
            acc += gp as f64 * (tp as f64 / seen as f64);
        }
    }
    Ok(acc / pos as f64)
}

/// Ranking and threshold metrics. Single-class labels make the ranking
/// metrics undefined and are reported as an error.
pub fn compute_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<MetricSet> {
    let auroc = auroc(scores, labels)?;
    let auprc = average_precision(scores, labels)?;
    let c = Confusion::at(scores, labels, threshold);
    Ok(MetricSet {
        auroc,
        auprc,
        sensitivity: c.sensitivity(),
        specificity: c.specificity(),
        precision: c.precision(),
        npv: c.npv(),
        accuracy: c.accuracy(),
        f1: c.f1(),
    })
}
