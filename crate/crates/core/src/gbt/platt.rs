use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattFit {
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Negative log-likelihood of the targets under `1/(1+exp(a*s+b))`.
fn objective(scores: &[f64], t: &[f64], a: f64, b: f64) -> f64 {
    scores
        .iter()
        .zip(t)
        .map(|(&s, &ti)| {
            let f = a * s + b;
            if f >= 0.0 {
                ti * f + (-f).exp().ln_1p()
            } else {
                (ti - 1.0) * f + f.exp().ln_1p()
            }
        })
        .sum()
}

/// Fit the two sigmoid parameters by Newton's method with backtracking on
/// Platt's smoothed targets.
pub fn fit_platt_detailed(scores: &[f64], labels: &[u8]) -> Result<PlattFit> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Calibration("both classes must be present".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Calibration("non-finite score".into()));
    }
    let hi = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let lo = 1.0 / (n_neg as f64 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();

    let mut a = 0.0;
    let mut b = ((n_neg as f64 + 1.0) / (n_pos as f64 + 1.0)).ln();
    let mut fval = objective(scores, &t, a, b);
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&s, &ti) in scores.iter().zip(&t) {
            let f = a * s + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += s * s * d2;
            h22 += d2;
            h21 += s * d2;
            let d1 = ti - p;
            g1 += s * d1;
            g2 += d1;
        }
        grad_norm = g1.hypot(g2);
        if grad_norm < GRAD_TOL {
            break;
        }
        iterations += 1;

        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut moved = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(scores, &t, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            // Near the optimum the sufficient-decrease test is lost in
            // roundoff; a full Newton step is still a contraction there.
            a += da;
            b += db;
            fval = objective(scores, &t, a, b);
        }
    }
    Ok(PlattFit {
        a,
        b,
        iterations,
        grad_norm,
    })
}

pub fn fit_platt(scores: &[f64], labels: &[u8]) -> Result<(f64, f64)> {
    fit_platt_detailed(scores, labels).map(|f| (f.a, f.b))
}
