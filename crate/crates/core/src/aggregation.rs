//! Entrywise generalized power-mean aggregation of multiplex layers and the
//! label-propagation operator built on the aggregated graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{degrees, MultilayerGraph, SparseSym};
use crate::scalar::Scalar;

/// Below this `|α|` the power mean is evaluated as its `α -> 0` limit, the
/// weighted geometric mean, in log domain.
pub const ALPHA_SWITCH: f64 = 1e-6;

/// Aggregation parameters `θ = (α, β, λ)`.
///
/// `β` is expected on the probability simplex inside the feasible set, but
/// [`Aggregator::aggregate`] accepts any nonnegative `β` with positive mass
/// so that finite-difference probes can step off the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta<T> {
    pub alpha: T,
    pub beta: Vec<T>,
    pub lambda: T,
}

impl<T: Scalar> Theta<T> {
    pub fn new(alpha: T, beta: Vec<T>, lambda: T) -> Self {
        Self {
            alpha,
            beta,
            lambda,
        }
    }

    /// `(α, 1/K, ..., 1/K, λ)`.
    pub fn uniform(k: usize, alpha: T, lambda: T) -> Self {
        let w = T::one() / T::from_usize_lossy(k);
        Self::new(alpha, vec![w; k], lambda)
    }

    /// Number of layers.
    #[inline]
    pub fn k(&self) -> usize {
        self.beta.len()
    }

    /// Flattened coordinates `(α, β_1, ..., β_K, λ)`.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.k() + 2);
        v.push(self.alpha);
        v.extend_from_slice(&self.beta);
        v.push(self.lambda);
        v
    }

    /// Inverse of [`Theta::to_vec`].
    pub fn from_slice(v: &[T]) -> Self {
        assert!(v.len() >= 3, "theta needs at least one layer weight");
        let k = v.len() - 2;
        Self::new(v[0], v[1..=k].to_vec(), v[k + 1])
    }

    pub fn beta_sum(&self) -> T {
        self.beta.iter().copied().sum()
    }

    /// Clips round-off negatives in `β` and rescales it to sum to one.
    pub fn renormalize_beta(&mut self) {
        for b in &mut self.beta {
            if *b < T::zero() {
                *b = T::zero();
            }
        }
        let s = self.beta_sum();
        if s > T::zero() {
            for b in &mut self.beta {
                *b = *b / s;
            }
        }
    }
}

/// Closed-form limits of the power mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitMean {
    /// `α -> -∞`
    Min,
    /// `α -> 0`, `Π_k a_k^{β_k}`
    Geometric,
    /// `α -> +∞`
    Max,
}

/// The aggregated adjacency `A(θ)` restricted to its support, with its
/// weighted degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedOperator<T> {
    pub adj: SparseSym<T>,
    pub deg: Vec<T>,
    pub theta: Theta<T>,
}

impl<T: Scalar> AggregatedOperator<T> {
    fn from_adj(adj: SparseSym<T>, theta: Theta<T>) -> Self {
        let deg = degrees(&adj);
        Self { adj, deg, theta }
    }

    /// `X <- λ (I + λD)^{-1} A X + (I + λD)^{-1} Y` operator pair.
    pub fn propagation_operator(&self, lambda: T) -> Result<PropagationOperator<T>> {
        PropagationOperator::new(self, lambda)
    }
}

/// Union support of all layers, precomputed once per graph so that repeated
/// aggregations only touch a dense `pairs x K` table.
#[derive(Debug, Clone)]
pub struct Aggregator<T> {
    n: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
    /// `values[p * k + l]`: weight of pair `p` in layer `l` (zero if absent).
    values: Vec<T>,
    /// Natural log of `values`, `-inf` where absent.
    log_values: Vec<T>,
}

impl<T: Scalar> Aggregator<T> {
    pub fn new(g: &MultilayerGraph<T>) -> Self {
        let k = g.k();
        let mut all: Vec<(usize, usize, usize, T)> = g
            .layers()
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| layer.entries().iter().map(move |&(i, j, w)| (i, j, l, w)))
            .collect();
        all.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));

        let mut pairs = Vec::new();
        let mut values = Vec::new();
        for (i, j, l, w) in all {
            if pairs.last() != Some(&(i, j)) {
                pairs.push((i, j));
                values.extend(std::iter::repeat_n(T::zero(), k));
            }
            let p = pairs.len() - 1;
            values[p * k + l] = w;
        }
        let log_values = values
            .iter()
            .map(|&w| {
                if w > T::zero() {
                    w.ln()
                } else {
                    T::neg_infinity()
                }
            })
            .collect();
        Self {
            n: g.n(),
            k,
            pairs,
            values,
            log_values,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Size of the union support.
    pub fn support_len(&self) -> usize {
        self.pairs.len()
    }

    fn check_beta(&self, beta: &[T]) -> Result<T> {
        if beta.len() != self.k {
            return Err(Error::domain(format!(
                "beta has {} weights for {} layers",
                beta.len(),
                self.k
            )));
        }
        if let Some(b) = beta.iter().find(|b| !b.is_finite() || **b < T::zero()) {
            return Err(Error::domain(format!(
                "beta weight {b} is negative or not finite"
            )));
        }
        let s: T = beta.iter().copied().sum();
        if s <= T::zero() {
            return Err(Error::domain("beta has no positive weight"));
        }
        Ok(s)
    }

    /// `A(α, β)_{ij} = (Σ_k β_k (A^(k)_{ij})^α)^{1/α}`.
    ///
    /// Layers with `β_k = 0` are left out. For `α <= 0` an entry exists only
    /// where every remaining layer has one; for `α > 0` missing entries
    /// contribute zero to the sum.
    pub fn aggregate(&self, theta: &Theta<T>) -> Result<AggregatedOperator<T>> {
        let beta_sum = self.check_beta(&theta.beta)?;
        let alpha = theta.alpha;
        if !alpha.is_finite() {
            return Err(Error::domain(format!("alpha {alpha} is not finite")));
        }
        let active: Vec<(usize, T)> = theta
            .beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b > T::zero())
            .map(|(l, b)| (l, *b))
            .collect();

        let geometric = alpha.abs() < T::lit(ALPHA_SWITCH);
        let inv_alpha = T::one() / alpha;
        let mut entries = Vec::with_capacity(self.pairs.len());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let vals = &self.values[p * self.k..(p + 1) * self.k];
            let logs = &self.log_values[p * self.k..(p + 1) * self.k];
            let w = if geometric {
                if active.iter().any(|&(l, _)| vals[l] == T::zero()) {
                    continue;
                }
                let s: T = active.iter().map(|&(l, b)| b * logs[l]).sum();
                (s / beta_sum).exp()
            } else if alpha > T::zero() {
                // Scale by the largest entry so that (a/m)^α <= 1.
                let mut log_m = T::neg_infinity();
                for &(l, _) in &active {
                    if vals[l] > T::zero() && logs[l] > log_m {
                        log_m = logs[l];
                    }
                }
                if log_m == T::neg_infinity() {
                    continue;
                }
                let s: T = active
                    .iter()
                    .filter(|&&(l, _)| vals[l] > T::zero())
                    .map(|&(l, b)| b * (alpha * (logs[l] - log_m)).exp())
                    .sum();
                (log_m + s.ln() * inv_alpha).exp()
            } else {
                // Scale by the smallest entry; (a/m)^α <= 1 again since α < 0.
                if active.iter().any(|&(l, _)| vals[l] == T::zero()) {
                    continue;
                }
                let log_m = active
                    .iter()
                    .map(|&(l, _)| logs[l])
                    .fold(T::infinity(), T::min);
                let s: T = active
                    .iter()
                    .map(|&(l, b)| b * (alpha * (logs[l] - log_m)).exp())
                    .sum();
                (log_m + s.ln() * inv_alpha).exp()
            };
            if w > T::zero() && w.is_finite() {
                entries.push((i, j, w));
            }
        }
        Ok(AggregatedOperator::from_adj(
            SparseSym::from_sorted_unchecked(self.n, entries),
            theta.clone(),
        ))
    }

    /// Exact `α -> -∞ / 0 / +∞` limits over layers with `β_k > 0`. Min and
    /// max ignore the values of `β`.
    pub fn aggregate_limit(&self, which: LimitMean, beta: &[T]) -> Result<AggregatedOperator<T>> {
        let beta_sum = self.check_beta(beta)?;
        let active: Vec<usize> = (0..self.k).filter(|&l| beta[l] > T::zero()).collect();
        let mut entries = Vec::with_capacity(self.pairs.len());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let vals = &self.values[p * self.k..(p + 1) * self.k];
            let w = match which {
                LimitMean::Max => active.iter().map(|&l| vals[l]).fold(T::zero(), T::max),
                LimitMean::Min => active.iter().map(|&l| vals[l]).fold(T::infinity(), T::min),
                LimitMean::Geometric => {
                    if active.iter().any(|&l| vals[l] == T::zero()) {
                        continue;
                    }
                    let logs = &self.log_values[p * self.k..(p + 1) * self.k];
                    let s: T = active.iter().map(|&l| beta[l] * logs[l]).sum();
                    (s / beta_sum).exp()
                }
            };
            if w > T::zero() && w.is_finite() {
                entries.push((i, j, w));
            }
        }
        let alpha = match which {
            LimitMean::Min => T::neg_infinity(),
            LimitMean::Geometric => T::zero(),
            LimitMean::Max => T::infinity(),
        };
        Ok(AggregatedOperator::from_adj(
            SparseSym::from_sorted_unchecked(self.n, entries),
            Theta::new(alpha, beta.to_vec(), T::one()),
        ))
    }
}

/// One-shot [`Aggregator::aggregate`].
pub fn aggregate<T: Scalar>(
    g: &MultilayerGraph<T>,
    theta: &Theta<T>,
) -> Result<AggregatedOperator<T>> {
    Aggregator::new(g).aggregate(theta)
}

/// One-shot [`Aggregator::aggregate_limit`].
pub fn aggregate_limit<T: Scalar>(
    g: &MultilayerGraph<T>,
    which: LimitMean,
    beta: &[T],
) -> Result<AggregatedOperator<T>> {
    Aggregator::new(g).aggregate_limit(which, beta)
}

/// Row-compressed `P = λ (I + λD)^{-1} A` together with `b = (I + λD)^{-1}`.
///
/// Row `i` of `P` sums to `λ D_ii / (1 + λ D_ii) < 1`, so the spectral radius
/// is below one and `X <- P X + b Y` converges to `(I + λL)^{-1} Y`.
#[derive(Debug, Clone)]
pub struct PropagationOperator<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
    b: Vec<T>,
    lambda: T,
}

impl<T: Scalar> PropagationOperator<T> {
    pub fn new(agg: &AggregatedOperator<T>, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "lambda {lambda} must be positive and finite"
            )));
        }
        let n = agg.adj.n();
        if u32::try_from(n).is_err() {
            return Err(Error::domain(format!(
                "{n} nodes exceed the supported index range"
            )));
        }
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in agg.adj.entries() {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let nnz = row_ptr[n];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![T::zero(); nnz];
        let mut fill = counts;
        let b: Vec<T> = agg
            .deg
            .iter()
            .map(|&d| T::one() / (T::one() + lambda * d))
            .collect();
        for (i, j, w) in agg.adj.iter_directed() {
            let pos = fill[i];
            cols[pos] = j as u32;
            vals[pos] = lambda * w * b[i];
            fill[i] += 1;
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
            b,
            lambda,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Diagonal of `(I + λD)^{-1}`.
    pub fn b_map(&self) -> &[T] {
        &self.b
    }

    /// `out = P x` for a row-major `n x m` panel.
    pub fn apply_panel(&self, x: &[T], m: usize, out: &mut [T]) {
        assert_eq!(x.len(), self.n * m);
        assert_eq!(out.len(), self.n * m);
        match m {
            1 => self.apply_vector(x, out),
            2 => self.apply_fixed::<2>(x, out),
            3 => self.apply_fixed::<3>(x, out),
            4 => self.apply_fixed::<4>(x, out),
            _ => {
                for i in 0..self.n {
                    let row = &mut out[i * m..(i + 1) * m];
                    row.iter_mut().for_each(|v| *v = T::zero());
                    for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                        let w = self.vals[idx];
                        let c = self.cols[idx] as usize;
                        let src = &x[c * m..(c + 1) * m];
                        for (o, s) in row.iter_mut().zip(src) {
                            *o = *o + w * *s;
                        }
                    }
                }
            }
        }
    }

    fn apply_vector(&self, x: &[T], out: &mut [T]) {
        for (i, dst) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *dst = self.cols[lo..hi]
                .iter()
                .zip(&self.vals[lo..hi])
                .fold(T::zero(), |acc, (&c, &w)| acc + w * x[c as usize]);
        }
    }

    fn apply_fixed<const M: usize>(&self, x: &[T], out: &mut [T]) {
        for (i, dst) in out.chunks_exact_mut(M).enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = [T::zero(); M];
            for (&c, &w) in self.cols[lo..hi].iter().zip(&self.vals[lo..hi]) {
                let c = c as usize;
                let src: &[T; M] = x[c * M..c * M + M].try_into().expect("panel width");
                for k in 0..M {
                    acc[k] = acc[k] + w * src[k];
                }
            }
            dst.copy_from_slice(&acc);
        }
    }

    /// `out = P x` for a single vector.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        self.apply_panel(x, 1, out);
    }

    /// Largest row sum of `P` (Gershgorin bound on its spectral radius).
    pub fn contraction_bound(&self) -> T {
        (0..self.n)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .copied()
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }

    /// Dense row-major copy of `P`. Intended for small graphs.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in dense.iter_mut().enumerate() {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[idx] as usize;
                row[c] = row[c] + self.vals[idx];
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DuplicateRule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn layer(n: usize, edges: &[(usize, usize, f64)]) -> SparseSym<f64> {
        SparseSym::from_triplets(n, edges.iter().copied(), DuplicateRule::Max, false).unwrap()
    }

    fn two_layer_pair(a: f64, b: f64) -> MultilayerGraph<f64> {
        let mk = |w: f64| {
            if w > 0.0 {
                layer(2, &[(0, 1, w)])
            } else {
                SparseSym::empty(2)
            }
        };
        MultilayerGraph::from_layers(vec![mk(a), mk(b)]).unwrap()
    }

    #[test]
    fn single_layer_is_identity() {
        let g =
            MultilayerGraph::from_layers(vec![layer(4, &[(0, 1, 0.3), (1, 2, 2.0), (2, 3, 7.5)])])
                .unwrap();
        for alpha in [-20.0, -1.0, 0.0, 1e-7, 0.5, 1.0, 20.0] {
            let agg = aggregate(&g, &Theta::new(alpha, vec![1.0], 1.0)).unwrap();
            for (&(i, j, w), &(_, _, w0)) in agg.adj.entries().iter().zip(g.layer(0).entries()) {
                assert_relative_eq!(w, w0, max_relative = 1e-12);
                assert!(i < j);
            }
            assert_eq!(agg.adj.nnz(), 3);
        }
    }

    #[test]
    fn harmonic_of_two_and_four() {
        let g = two_layer_pair(2.0, 4.0);
        let agg = aggregate(&g, &Theta::new(-1.0, vec![0.5, 0.5], 1.0)).unwrap();
        assert_relative_eq!(agg.adj.weight(0, 1), 8.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_annihilates_negative_power() {
        let g = two_layer_pair(2.0, 0.0);
        let agg = aggregate(&g, &Theta::new(-1.0, vec![0.5, 0.5], 1.0)).unwrap();
        assert!(agg.adj.is_empty());
        // Positive α keeps the entry: (0.5 * 2)^1 = 1.
        let agg = aggregate(&g, &Theta::new(1.0, vec![0.5, 0.5], 1.0)).unwrap();
        assert_relative_eq!(agg.adj.weight(0, 1), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_beta_excludes_layer() {
        let g = two_layer_pair(2.0, 0.0);
        let agg = aggregate(&g, &Theta::new(-3.0, vec![1.0, 0.0], 1.0)).unwrap();
        assert_relative_eq!(agg.adj.weight(0, 1), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn arithmetic_mean_at_alpha_one() {
        let g = two_layer_pair(2.0, 4.0);
        let agg = aggregate(&g, &Theta::uniform(2, 1.0, 1.0)).unwrap();
        assert_relative_eq!(agg.adj.weight(0, 1), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn negative_beta_is_domain_error() {
        let g = two_layer_pair(2.0, 4.0);
        let r = aggregate(&g, &Theta::new(1.0, vec![1.5, -0.5], 1.0));
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = aggregate(&g, &Theta::new(1.0, vec![0.0, 0.0], 1.0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn off_simplex_beta_evaluated_literally() {
        let g = two_layer_pair(2.0, 4.0);
        let agg = aggregate(&g, &Theta::new(2.0, vec![0.6, 0.5], 1.0)).unwrap();
        let expect = (0.6f64 * 4.0 + 0.5 * 16.0).sqrt();
        assert_relative_eq!(agg.adj.weight(0, 1), expect, max_relative = 1e-14);
    }

    #[test]
    fn limits_match_table() {
        let g = two_layer_pair(2.0, 4.0);
        let w = |which| {
            aggregate_limit(&g, which, &[0.5, 0.5])
                .unwrap()
                .adj
                .weight(0, 1)
        };
        assert_eq!(w(LimitMean::Max), 4.0);
        assert_eq!(w(LimitMean::Min), 2.0);
        let g = two_layer_pair(2.0, 8.0);
        assert_relative_eq!(
            aggregate_limit(&g, LimitMean::Geometric, &[0.5, 0.5])
                .unwrap()
                .adj
                .weight(0, 1),
            4.0,
            max_relative = 1e-14
        );
        let g = two_layer_pair(3.0, 0.0);
        assert!(aggregate_limit(&g, LimitMean::Geometric, &[0.5, 0.5])
            .unwrap()
            .adj
            .is_empty());
        assert!(aggregate_limit(&g, LimitMean::Min, &[0.5, 0.5])
            .unwrap()
            .adj
            .is_empty());
        assert_eq!(
            aggregate_limit(&g, LimitMean::Max, &[0.5, 0.5])
                .unwrap()
                .adj
                .weight(0, 1),
            3.0
        );
    }

    #[test]
    fn huge_alpha_does_not_overflow() {
        let g = two_layer_pair(1e-8, 1e8);
        for alpha in [-20.0, 20.0, 300.0, -300.0] {
            let w = aggregate(&g, &Theta::uniform(2, alpha, 1.0))
                .unwrap()
                .adj
                .weight(0, 1);
            assert!(
                w.is_finite() && w >= 1e-8 && w <= 1e8,
                "alpha={alpha} w={w}"
            );
        }
    }

    #[test]
    fn propagation_operator_single_edge() {
        let g = MultilayerGraph::from_layers(vec![layer(2, &[(0, 1, 1.0)])]).unwrap();
        let agg = aggregate(&g, &Theta::new(1.0, vec![1.0], 1.0)).unwrap();
        let op = agg.propagation_operator(1.0).unwrap();
        assert_eq!(op.to_dense(), vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert_eq!(op.b_map(), &[0.5, 0.5]);
    }

    #[test]
    fn propagation_operator_empty_graph() {
        let g = MultilayerGraph::from_layers(vec![SparseSym::<f64>::empty(3)]).unwrap();
        let agg = aggregate(&g, &Theta::new(1.0, vec![1.0], 1.0)).unwrap();
        let op = agg.propagation_operator(2.0).unwrap();
        assert!(op.to_dense().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(op.b_map(), &[1.0, 1.0, 1.0]);
        assert!(agg.propagation_operator(0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let l = SparseSym::<f32>::from_triplets(2, [(0, 1, 2.0f32)], DuplicateRule::Max, false)
            .unwrap();
        let r = SparseSym::<f32>::from_triplets(2, [(0, 1, 4.0f32)], DuplicateRule::Max, false)
            .unwrap();
        let g = MultilayerGraph::from_layers(vec![l, r]).unwrap();
        let w = aggregate(&g, &Theta::new(-1.0f32, vec![0.5, 0.5], 1.0))
            .unwrap()
            .adj
            .weight(0, 1);
        assert!((w - 8.0 / 3.0).abs() < 1e-5);
    }

    fn entries_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..5).prop_flat_map(|k| {
            (
                proptest::collection::vec(0.5f64..2.0, k),
                proptest::collection::vec(0.01f64..1.0, k),
            )
        })
    }

    fn graph_from_values(vals: &[f64]) -> MultilayerGraph<f64> {
        MultilayerGraph::from_layers(vals.iter().map(|&w| layer(2, &[(0, 1, w)])).collect())
            .unwrap()
    }

    fn simplex(raw: &[f64]) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|r| r / s).collect()
    }

    proptest! {
        #[test]
        fn power_mean_monotone_in_alpha((vals, raw) in entries_strategy(), a0 in -20.0f64..20.0, da in 0.0f64..5.0) {
            let beta = simplex(&raw);
            let agg = Aggregator::new(&graph_from_values(&vals));
            let lo = agg.aggregate(&Theta::new(a0, beta.clone(), 1.0)).unwrap().adj.weight(0, 1);
            let hi = agg.aggregate(&Theta::new(a0 + da, beta, 1.0)).unwrap().adj.weight(0, 1);
            prop_assert!(hi >= lo * (1.0 - 1e-12));
        }

        #[test]
        fn power_mean_within_min_max((vals, raw) in entries_strategy(), alpha in -40.0f64..40.0) {
            let beta = simplex(&raw);
            let w = aggregate(&graph_from_values(&vals), &Theta::new(alpha, beta, 1.0)).unwrap().adj.weight(0, 1);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(0.0, f64::max);
            prop_assert!(w >= lo * (1.0 - 1e-12) && w <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn continuous_across_alpha_switch((vals, raw) in entries_strategy(), sign in prop::bool::ANY, side in prop::bool::ANY) {
            let beta = simplex(&raw);
            let agg = Aggregator::new(&graph_from_values(&vals));
            let s = if sign { 1.0 } else { -1.0 };
            let f = if side { 1.0 + 1e-3 } else { 1.0 - 1e-3 };
            let alpha = s * ALPHA_SWITCH * f;
            let w = agg.aggregate(&Theta::new(alpha, beta.clone(), 1.0)).unwrap().adj.weight(0, 1);
            let geo = agg.aggregate_limit(LimitMean::Geometric, &beta).unwrap().adj.weight(0, 1);
            prop_assert!((w - geo).abs() <= 1e-6 * geo);
        }

        /// Near the ±∞ limits the power mean sits between `max * β_max^{1/α}`
        /// and `max` (mirrored for min).
        #[test]
        fn large_alpha_envelope((vals, raw) in entries_strategy()) {
            let beta = simplex(&raw);
            let agg = Aggregator::new(&graph_from_values(&vals));
            let hi = agg.aggregate_limit(LimitMean::Max, &beta).unwrap().adj.weight(0, 1);
            let lo = agg.aggregate_limit(LimitMean::Min, &beta).unwrap().adj.weight(0, 1);
            let at_hi = agg.aggregate(&Theta::new(20.0, beta.clone(), 1.0)).unwrap().adj.weight(0, 1);
            let at_lo = agg.aggregate(&Theta::new(-20.0, beta.clone(), 1.0)).unwrap().adj.weight(0, 1);
            let bmin = beta.iter().copied().fold(1.0, f64::min);
            prop_assert!(at_hi <= hi * (1.0 + 1e-12) && at_hi >= hi * bmin.powf(1.0 / 20.0) * (1.0 - 1e-12));
            prop_assert!(at_lo >= lo * (1.0 - 1e-12) && at_lo <= lo * bmin.powf(-1.0 / 20.0) * (1.0 + 1e-12));
        }
    }
}
