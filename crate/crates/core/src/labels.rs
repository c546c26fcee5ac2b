//! Known-label bookkeeping and the cyclic train/test fold protocol.

use std::collections::HashMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Partial assignment of nodes to `m` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    n: usize,
    classes: Vec<String>,
    assignment: Vec<Option<usize>>,
}

impl LabelMatrix {
    /// Builds from `(node, class_name)` records. Class indices are assigned
    /// in order of first appearance. Repeating a record is harmless; giving a
    /// node two different classes is a conflict.
    pub fn from_named<S: AsRef<str>>(
        n: usize,
        records: impl IntoIterator<Item = (usize, S)>,
    ) -> Result<Self> {
        let mut classes: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut assignment: Vec<Option<usize>> = vec![None; n];
        for (node, name) in records {
            let name = name.as_ref();
            if node >= n {
                return Err(Error::Range { index: node, n });
            }
            let c = *index.entry(name.to_string()).or_insert_with(|| {
                classes.push(name.to_string());
                classes.len() - 1
            });
            match assignment[node] {
                Some(prev) if prev != c => {
                    return Err(Error::LabelConflict {
                        node,
                        first: classes[prev].clone(),
                        second: name.to_string(),
                    })
                }
                _ => assignment[node] = Some(c),
            }
        }
        if classes.is_empty() {
            return Err(Error::NoLabels);
        }
        Ok(Self {
            n,
            classes,
            assignment,
        })
    }

    /// Builds from class indices; `classes[c]` names class `c`.
    pub fn from_assignment(assignment: Vec<Option<usize>>, classes: Vec<String>) -> Result<Self> {
        if let Some(bad) = assignment.iter().flatten().find(|&&c| c >= classes.len()) {
            return Err(Error::domain(format!(
                "class index {bad} but only {} classes",
                classes.len()
            )));
        }
        if assignment.iter().all(Option::is_none) {
            return Err(Error::NoLabels);
        }
        Ok(Self {
            n: assignment.len(),
            classes,
            assignment,
        })
    }

    /// Restricts to the given nodes; every other node becomes unlabeled.
    /// Class indices are kept.
    pub fn restricted_to(&self, nodes: &[usize]) -> Self {
        let mut assignment = vec![None; self.n];
        for &i in nodes {
            assignment[i] = self.assignment[i];
        }
        Self {
            n: self.n,
            classes: self.classes.clone(),
            assignment,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of classes `m`.
    #[inline]
    pub fn m(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn class_of(&self, node: usize) -> Option<usize> {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// Labeled nodes in increasing order.
    pub fn labeled(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.assignment[i].is_some())
            .collect()
    }

    /// Nodes without a known label.
    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.assignment[i].is_none())
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m()];
        for c in self.assignment.iter().flatten() {
            counts[*c] += 1;
        }
        counts
    }

    /// Dense `N x m` one-hot matrix; unlabeled rows are zero.
    pub fn one_hot<T: Scalar>(&self) -> Array2<T> {
        let mut y = Array2::zeros((self.n, self.m()));
        for (i, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                y[[i, *c]] = T::one();
            }
        }
        y
    }

    /// One-hot matrix with only `rows` populated.
    pub fn one_hot_rows<T: Scalar>(&self, rows: &[usize]) -> Array2<T> {
        let mut y = Array2::zeros((self.n, self.m()));
        for &i in rows {
            if let Some(c) = self.assignment[i] {
                y[[i, c]] = T::one();
            }
        }
        y
    }
}

/// Partition of the node set used by one training fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub held_out: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Round-robin dealing within each class.
    #[default]
    Stratified,
    /// One shuffle over all labeled nodes.
    Unstratified,
}

/// Assigns every labeled node to one of `n_folds` folds. Entry `i` is the
/// fold of `labeled[i]`, or `None` when the node must always train.
fn fold_assignment(
    labels: &LabelMatrix,
    n_folds: usize,
    rng_seed: u64,
    mode: SplitMode,
) -> Vec<(usize, Option<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::new();
    match mode {
        SplitMode::Stratified => {
            let mut slot = 0usize;
            let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); labels.m()];
            for i in labels.labeled() {
                per_class[labels.class_of(i).unwrap()].push(i);
            }
            for (c, mut nodes) in per_class.into_iter().enumerate() {
                if nodes.len() == 1 {
                    log::warn!(
                        "class `{}` has a single label; it is kept in every training fold",
                        labels.classes()[c]
                    );
                    out.push((nodes[0], None));
                    continue;
                }
                if nodes.len() < n_folds {
                    log::warn!(
                        "class `{}` has {} labels for {n_folds} folds",
                        labels.classes()[c],
                        nodes.len()
                    );
                }
                nodes.shuffle(&mut rng);
                for node in nodes {
                    out.push((node, Some(slot % n_folds)));
                    slot += 1;
                }
            }
        }
        SplitMode::Unstratified => {
            let mut nodes = labels.labeled();
            nodes.shuffle(&mut rng);
            out.extend(
                nodes
                    .into_iter()
                    .enumerate()
                    .map(|(pos, node)| (node, Some(pos % n_folds))),
            );
        }
    }
    out
}

/// Cyclic fold split: labeled nodes are dealt into `n_folds` near-equal sets
/// with a seeded shuffle; set `fold_index` is the test set and the rest train.
pub fn split_labels(
    labels: &LabelMatrix,
    fold_index: usize,
    n_folds: usize,
    rng_seed: u64,
    mode: SplitMode,
) -> Result<LabelSplit> {
    if n_folds < 2 {
        return Err(Error::domain("at least two folds are required"));
    }
    if fold_index >= n_folds {
        return Err(Error::domain(format!(
            "fold index {fold_index} >= {n_folds} folds"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (node, fold) in fold_assignment(labels, n_folds, rng_seed, mode) {
        if fold == Some(fold_index) {
            test.push(node);
        } else {
            train.push(node);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(LabelSplit {
        train,
        test,
        held_out: labels.unlabeled(),
    })
}
