//! Sparse symmetric adjacency storage and multiplex graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How two records for the same unordered pair are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicateRule {
    #[default]
    Max,
    Sum,
}

impl DuplicateRule {
    #[inline]
    pub fn combine<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            DuplicateRule::Max => a.max(b),
            DuplicateRule::Sum => a + b,
        }
    }
}

/// Symmetric nonnegative sparse matrix stored once per unordered pair.
///
/// Entries are kept sorted by `(i, j)` with `i <= j`; zero weights are never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SparseSym<T> {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Builds a matrix from arbitrary-orientation triplets. Repeated pairs
    /// (in either orientation) are combined with `rule`; zero weights are
    /// dropped.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
        rule: DuplicateRule,
        allow_self_loops: bool,
    ) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (u, v, w) in triplets {
            check_entry(n, u, v, w, allow_self_loops)?;
            if w == T::zero() {
                continue;
            }
            let key = (u.min(v), u.max(v));
            map.entry(key)
                .and_modify(|cur| *cur = rule.combine(*cur, w))
                .or_insert(w);
        }
        Ok(Self {
            n,
            entries: map.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
        })
    }

    /// Wraps entries that are already canonical: `i < j`, strictly sorted,
    /// positive. Used on hot paths where the caller guarantees the layout.
    pub(crate) fn from_sorted_unchecked(n: usize, entries: Vec<(usize, usize, T)>) -> Self {
        debug_assert!(entries
            .windows(2)
            .all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        debug_assert!(entries
            .iter()
            .all(|&(i, j, w)| i <= j && j < n && w > T::zero()));
        Self { n, entries }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored unordered pairs.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical entries `(i, j, w)` with `i <= j`.
    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    /// Weight of `(i, j)`; zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> T {
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|idx| self.entries[idx].2)
            .unwrap_or_else(|_| T::zero())
    }

    /// Iterates both orientations of every off-diagonal entry (and each
    /// self-loop once).
    pub fn iter_directed(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.entries.iter().flat_map(|&(i, j, w)| {
            let back = if i != j { Some((j, i, w)) } else { None };
            std::iter::once((i, j, w)).chain(back)
        })
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(
            perm.len(),
            self.n,
            "permutation length must match node count"
        );
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(i, j, w)| {
                let (a, b) = (perm[i], perm[j]);
                (a.min(b), a.max(b), w)
            })
            .collect();
        entries.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Self { n: self.n, entries }
    }
}

fn check_entry<T: Scalar>(
    n: usize,
    u: usize,
    v: usize,
    w: T,
    allow_self_loops: bool,
) -> Result<()> {
    if u >= n {
        return Err(Error::Range { index: u, n });
    }
    if v >= n {
        return Err(Error::Range { index: v, n });
    }
    if !w.is_finite() || w < T::zero() {
        return Err(Error::domain(format!(
            "edge ({u}, {v}) has invalid weight {w}; weights must be finite and nonnegative"
        )));
    }
    if u == v && !allow_self_loops {
        return Err(Error::domain(format!(
            "self-loop at node {u} is not permitted"
        )));
    }
    Ok(())
}

/// Weighted degree of every node; each undirected edge counts once per
/// endpoint.
pub fn degrees<T: Scalar>(g: &SparseSym<T>) -> Vec<T> {
    let mut deg = vec![T::zero(); g.n()];
    for &(i, j, w) in g.entries() {
        deg[i] = deg[i] + w;
        if i != j {
            deg[j] = deg[j] + w;
        }
    }
    deg
}

/// A multiplex graph: `K >= 1` layers over one shared node set.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerGraph<T> {
    n: usize,
    layers: Vec<SparseSym<T>>,
    layer_names: Vec<String>,
}

impl<T: Scalar> MultilayerGraph<T> {
    pub fn new(layers: Vec<SparseSym<T>>, layer_names: Vec<String>) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::domain("a multilayer graph needs at least one layer"));
        };
        let n = first.n();
        if let Some(bad) = layers.iter().position(|l| l.n() != n) {
            return Err(Error::domain(format!(
                "layer {bad} has {} nodes, expected {n}",
                layers[bad].n()
            )));
        }
        if layer_names.len() != layers.len() {
            return Err(Error::domain(format!(
                "{} layer names for {} layers",
                layer_names.len(),
                layers.len()
            )));
        }
        Ok(Self {
            n,
            layers,
            layer_names,
        })
    }

    /// Layers named `0..K` in order.
    pub fn from_layers(layers: Vec<SparseSym<T>>) -> Result<Self> {
        let names = (0..layers.len()).map(|k| k.to_string()).collect();
        Self::new(layers, names)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of layers `K`.
    #[inline]
    pub fn k(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SparseSym<T>] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> &SparseSym<T> {
        &self.layers[k]
    }

    pub fn layer_names(&self) -> &[String] {
        &self.layer_names
    }

    /// Single-layer view of layer `k`.
    pub fn single_layer(&self, k: usize) -> Self {
        Self {
            n: self.n,
            layers: vec![self.layers[k].clone()],
            layer_names: vec![self.layer_names[k].clone()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degrees_of_single_edge() {
        let g = SparseSym::from_triplets(3, [(0, 1, 2.0)], DuplicateRule::Max, false).unwrap();
        assert_eq!(degrees(&g), vec![2.0, 2.0, 0.0]);
    }

    #[test]
    fn degrees_of_unit_triangle() {
        let g = SparseSym::from_triplets(
            3,
            [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
            DuplicateRule::Max,
            false,
        )
        .unwrap();
        assert_eq!(degrees(&g), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn degrees_of_empty_graph() {
        let g = SparseSym::<f64>::empty(4);
        assert_eq!(degrees(&g), vec![0.0; 4]);
    }

    #[test]
    fn duplicate_rules() {
        let trip = [(0, 1, 1.0), (1, 0, 3.0)];
        let max = SparseSym::from_triplets(2, trip, DuplicateRule::Max, false).unwrap();
        let sum = SparseSym::from_triplets(2, trip, DuplicateRule::Sum, false).unwrap();
        assert_eq!(max.weight(0, 1), 3.0);
        assert_eq!(sum.weight(1, 0), 4.0);
    }

    #[test]
    fn rejects_bad_entries() {
        let neg = SparseSym::from_triplets(2, [(0, 1, -1.0)], DuplicateRule::Max, false);
        assert!(matches!(neg, Err(Error::Domain(_))));
        let range = SparseSym::from_triplets(2, [(0, 2, 1.0)], DuplicateRule::Max, false);
        assert!(matches!(range, Err(Error::Range { index: 2, n: 2 })));
        let selfloop = SparseSym::from_triplets(2, [(1, 1, 1.0)], DuplicateRule::Max, false);
        assert!(matches!(selfloop, Err(Error::Domain(_))));
        let allowed = SparseSym::from_triplets(2, [(1, 1, 1.0)], DuplicateRule::Max, true).unwrap();
        assert_eq!(degrees(&allowed), vec![0.0, 1.0]);
    }

    #[test]
    fn layer_counts_must_agree() {
        let a = SparseSym::<f64>::empty(3);
        let b = SparseSym::<f64>::empty(4);
        assert!(MultilayerGraph::from_layers(vec![a, b]).is_err());
        assert!(MultilayerGraph::<f64>::from_layers(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn weight_is_symmetric(edges in proptest::collection::vec((0usize..8, 0usize..8, 0.1f64..5.0), 0..30)) {
            let edges: Vec<_> = edges.into_iter().filter(|e| e.0 != e.1).collect();
            let g = SparseSym::from_triplets(8, edges, DuplicateRule::Sum, false).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    prop_assert_eq!(g.weight(i, j), g.weight(j, i));
                }
            }
            let deg = degrees(&g);
            let total: f64 = deg.iter().sum();
            let twice: f64 = g.entries().iter().map(|e| 2.0 * e.2).sum();
            prop_assert!((total - twice).abs() < 1e-9);
        }

        #[test]
        fn permutation_preserves_degree_multiset(seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<(usize, usize, f64)> =
                (0..10).map(|i| (i, (i * 3 + 1) % 10, 1.0 + i as f64)).filter(|e| e.0 != e.1).collect();
            let g = SparseSym::from_triplets(10, edges, DuplicateRule::Max, false).unwrap();
            let mut perm: Vec<usize> = (0..10).collect();
            perm.shuffle(&mut rng);
            let p = g.permuted(&perm);
            let mut a = degrees(&g);
            let mut b = degrees(&p);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
