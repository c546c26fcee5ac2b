//! Cross-dataset summaries: average performance ratio and average rank.
//!
//! Both take an `algorithms × datasets` accuracy matrix.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

fn check(acc: &ArrayView2<f64>) -> Result<()> {
    if acc.nrows() == 0 || acc.ncols() == 0 {
        return Err(Error::domain("accuracy matrix is empty"));
    }
    if acc.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::domain("accuracies must be finite and nonnegative"));
    }
    Ok(())
}

/// Mean over datasets of `A[a, d] / max_a' A[a', d]`.
pub fn apr(acc: ArrayView2<f64>) -> Result<Vec<f64>> {
    check(&acc)?;
    let mut out = vec![0.0; acc.nrows()];
    for (d, col) in acc.columns().into_iter().enumerate() {
        let best = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            return Err(Error::domain(format!(
                "dataset {d} has no positive accuracy"
            )));
        }
        for (a, v) in col.iter().enumerate() {
            out[a] += v / best;
        }
    }
    let m = acc.ncols() as f64;
    Ok(out.into_iter().map(|s| s / m).collect())
}

/// Ranks within one dataset, 1 for the highest accuracy; ties share the mean
/// of the positions they occupy.
pub fn ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut out = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = mean;
        }
        start = end;
    }
    out
}

/// Mean over datasets of each algorithm's rank.
pub fn avg_rank(acc: ArrayView2<f64>) -> Result<Vec<f64>> {
    check(&acc)?;
    let mut out = vec![0.0; acc.nrows()];
    for col in acc.columns() {
        for (a, r) in ranks(&col.to_vec()).into_iter().enumerate() {
            out[a] += r;
        }
    }
    let m = acc.ncols() as f64;
    Ok(out.into_iter().map(|s| s / m).collect())
}

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
