//! Small descriptive-statistics kernels shared by the metadata extractor.

/// Arithmetic mean; `None` for an empty slice.
pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Population central moments `(m2, m3, m4)` about the mean.
pub fn central_moments(xs: &[f64]) -> Option<(f64, f64, f64)> {
    let mu = mean(xs)?;
    let n = xs.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Some((m2 / n, m3 / n, m4 / n))
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median_sorted(sorted: &[f64]) -> Option<f64> {
    quantile_sorted(sorted, 0.5)
}

/// Median absolute deviation about the median (unscaled).
pub fn mad_sorted(sorted: &[f64]) -> Option<f64> {
    let med = median_sorted(sorted)?;
    let mut dev: Vec<f64> = sorted.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    median_sorted(&dev)
}

pub const HISTOGRAM_BINS: usize = 10;

/// Ten equal-width bins over `[min, max]`, normalised to sum to one. A
/// constant input puts all mass in the first bin with zero width.
pub fn histogram(xs: &[f64]) -> Option<([f64; HISTOGRAM_BINS], f64)> {
    if xs.is_empty() {
        return None;
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut counts = [0.0; HISTOGRAM_BINS];
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    // Also catches a NaN width.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(width > 0.0) {
        counts[0] = 1.0;
        return Some((counts, 0.0));
    }
    for &x in xs {
        let idx = (((x - lo) / width).floor() as usize).min(HISTOGRAM_BINS - 1);
        counts[idx] += 1.0;
    }
    let n = xs.len() as f64;
    for c in &mut counts {
        *c /= n;
    }
    Some((counts, width))
}

/// Number of ASCII digits in a token; signs, separators and the decimal
/// point are not counted.
pub fn digit_count(token: &str) -> usize {
    token.bytes().filter(u8::is_ascii_digit).count()
}
