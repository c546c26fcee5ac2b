//! Inner problem: label propagation to `(I + λL)^{-1} Y`, cross-entropy
//! losses, and argmax classification.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregatedOperator, PropagationOperator};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Floor applied to probabilities before taking logs.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    /// Stop once `max |X^(r+1) - X^(r)| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Chebyshev semi-iterative acceleration over the spectral interval
    /// `[-ρ, ρ]`, with `ρ` the Gershgorin bound of `P`. Same fixed point.
    pub chebyshev: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            chebyshev: true,
        }
    }
}

impl PropagationConfig {
    /// Unaccelerated iteration.
    pub fn plain(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            chebyshev: false,
        }
    }
}

/// Node embedding `X` (`N x m`, or `N x 1` for one-vs-all problems).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    pub x: Array2<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Fixed-point iteration `X <- P X + b Y` started at `X^(0) = b Y`. All
/// columns advance together as one panel. Stops once successive iterates
/// differ by at most `tol` in max norm.
pub fn propagate<T: Scalar>(
    op: &PropagationOperator<T>,
    y: ArrayView2<'_, T>,
    cfg: &PropagationConfig,
) -> Result<Embedding<T>> {
    let (n, m) = y.dim();
    if n != op.n() {
        return Err(Error::domain(format!(
            "label matrix has {n} rows for a graph with {} nodes",
            op.n()
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::domain("propagation tolerance must be positive"));
    }
    let tol = T::lit(cfg.tol);
    let b = op.b_map();
    let mut by = vec![T::zero(); n * m];
    for (i, row) in y.rows().into_iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            by[i * m + c] = b[i] * v;
        }
    }
    let rho = op.contraction_bound();
    let accelerate = cfg.chebyshev && rho > T::zero() && rho < T::one();
    let rho2 = rho * rho;
    let quarter = T::lit(0.25);

    // `prev` only matters for the accelerated recurrence.
    let mut prev = by.clone();
    let mut cur = by.clone();
    let mut next = vec![T::zero(); n * m];
    let mut omega = T::one();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        op.apply_panel(&cur, m, &mut next);
        if accelerate {
            omega = match iterations {
                0 => T::one(),
                1 => T::one() / (T::one() - rho2 / T::lit(2.0)),
                _ => T::one() / (T::one() - rho2 * omega * quarter),
            };
        }
        let mut diff = T::zero();
        for (((nx, &base), &old), &older) in next.iter_mut().zip(&by).zip(&cur).zip(&prev) {
            let plain = *nx + base;
            *nx = if accelerate {
                older + omega * (plain - older)
            } else {
                plain
            };
            let d = (*nx - old).abs();
            if !(d <= diff) {
                if d.is_nan() {
                    return Err(Error::numeric("non-finite value during label propagation"));
                }
                diff = d;
            }
        }
        if accelerate {
            // prev <- cur, cur <- next; `next` is overwritten next round.
            std::mem::swap(&mut prev, &mut cur);
        }
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if !diff.is_finite() {
            return Err(Error::numeric("non-finite value during label propagation"));
        }
        if diff <= tol {
            converged = true;
            break;
        }
    }
    if !converged && m > 0 && n > 0 {
        log::warn!(
            "label propagation hit max_iter={} before tol={}",
            cfg.max_iter,
            cfg.tol
        );
    }
    if n == 0 || m == 0 {
        converged = true;
    }
    let x = Array2::from_shape_vec((n, m), cur).expect("panel shape");
    Ok(Embedding {
        x,
        iterations,
        converged,
    })
}

/// `max |(I + λL) X - Y|` for the aggregated graph.
pub fn system_residual<T: Scalar>(
    agg: &AggregatedOperator<T>,
    lambda: T,
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
) -> T {
    let (n, m) = x.dim();
    let mut r = Array2::<T>::zeros((n, m));
    for i in 0..n {
        for c in 0..m {
            r[[i, c]] = (T::one() + lambda * agg.deg[i]) * x[[i, c]] - y[[i, c]];
        }
    }
    for (i, j, w) in agg.adj.iter_directed() {
        for c in 0..m {
            r[[i, c]] = r[[i, c]] - lambda * w * x[[j, c]];
        }
    }
    r.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// A loss value and the number of rows that hit the log clamp because the
/// embedding carried no mass there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loss<T> {
    pub value: T,
    pub degenerate_rows: usize,
}

/// Multiclass cross-entropy over test rows `(node, true class)`, using the
/// row-normalized embedding as class probabilities.
pub fn multiclass_loss<T: Scalar>(
    x: ArrayView2<'_, T>,
    test: &[(usize, usize)],
) -> Result<Loss<T>> {
    if test.is_empty() {
        return Err(Error::domain("multiclass loss needs at least one test row"));
    }
    let floor = T::lit(LOG_CLAMP);
    let mut total = T::zero();
    let mut degenerate = 0;
    for &(i, c) in test {
        let row = x.row(i);
        let s: T = row.iter().copied().sum();
        let p = if s > T::zero() {
            row[c] / s
        } else {
            degenerate += 1;
            T::zero()
        };
        total = total - p.max(floor).ln();
    }
    Ok(Loss {
        value: total / T::from_usize_lossy(test.len()),
        degenerate_rows: degenerate,
    })
}

/// Binomial cross-entropy over test rows `(node, is_positive)` of a single
/// score column.
pub fn binomial_loss<T: Scalar>(x: &[T], test: &[(usize, bool)]) -> Result<Loss<T>> {
    if test.is_empty() {
        return Err(Error::domain("binomial loss needs at least one test row"));
    }
    let lo = T::lit(LOG_CLAMP);
    let hi = T::one() - lo;
    let mut total = T::zero();
    let mut degenerate = 0;
    for &(i, positive) in test {
        let raw = x[i];
        if positive && raw <= lo {
            degenerate += 1;
        }
        let p = raw.max(lo).min(hi);
        total = total
            - if positive {
                p.ln()
            } else {
                (T::one() - p).ln()
            };
    }
    Ok(Loss {
        value: total / T::from_usize_lossy(test.len()),
        degenerate_rows: degenerate,
    })
}

/// Per-node argmax over columns, ties to the smallest class index. Returns
/// the predictions and the number of all-zero rows.
pub fn classify<T: Scalar>(x: ArrayView2<'_, T>) -> (Vec<usize>, usize) {
    let mut zero_rows = 0;
    let pred = x
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_val = T::neg_infinity();
            let mut any = false;
            for (c, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    any = true;
                }
                if v > best_val {
                    best = c;
                    best_val = v;
                }
            }
            if !any {
                zero_rows += 1;
            }
            best
        })
        .collect();
    if zero_rows > 0 {
        log::debug!("{zero_rows} nodes received no label mass; assigned class 0");
    }
    (pred, zero_rows)
}

/// Fraction of `eval_set` with `pred == truth`.
pub fn accuracy(pred: &[usize], truth: &[usize], eval_set: &[usize]) -> Result<f64> {
    if eval_set.is_empty() {
        return Err(Error::domain("accuracy over an empty node set"));
    }
    let hits = eval_set.iter().filter(|&&i| pred[i] == truth[i]).count();
    Ok(hits as f64 / eval_set.len() as f64)
}
