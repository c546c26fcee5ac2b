//! Outer objective `f(θ) = loss(Y^te, (I + λL(θ))^{-1} Y^tr)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::Array2;

use crate::aggregation::{Aggregator, Theta};
use crate::error::{Error, Result};
use crate::labels::{LabelMatrix, LabelSplit};
use crate::optimizer::Objective;
use crate::propagation::{binomial_loss, multiclass_loss, propagate, PropagationConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    /// Multiclass cross-entropy over all `m` columns.
    Multi,
    /// One-vs-all binomial cross-entropy for a single class.
    Binomial { class: usize },
}

#[derive(Debug, Clone)]
enum Targets {
    Multi(Vec<(usize, usize)>),
    Binomial(Vec<(usize, bool)>),
}

/// Bilevel objective for one train/test split.
pub struct BilevelObjective<'a, T> {
    aggregator: &'a Aggregator<T>,
    y_train: Array2<T>,
    targets: Targets,
    propagation: PropagationConfig,
    evaluations: AtomicUsize,
    degenerate: AtomicUsize,
}

impl<'a, T: Scalar> BilevelObjective<'a, T> {
    pub fn new(
        aggregator: &'a Aggregator<T>,
        labels: &LabelMatrix,
        split: &LabelSplit,
        mode: LossMode,
        propagation: PropagationConfig,
    ) -> Result<Self> {
        if labels.n() != aggregator.n() {
            return Err(Error::domain(format!(
                "labels cover {} nodes, graph has {}",
                labels.n(),
                aggregator.n()
            )));
        }
        if split.test.is_empty() {
            return Err(Error::domain("test fold is empty"));
        }
        if split.train.is_empty() {
            return Err(Error::domain("training fold is empty"));
        }
        let class_of = |i: usize| {
            labels
                .class_of(i)
                .ok_or_else(|| Error::domain(format!("node {i} in a fold has no label")))
        };
        let (y_train, targets) = match mode {
            LossMode::Multi => {
                let test = split
                    .test
                    .iter()
                    .map(|&i| Ok((i, class_of(i)?)))
                    .collect::<Result<Vec<_>>>()?;
                (labels.one_hot_rows(&split.train), Targets::Multi(test))
            }
            LossMode::Binomial { class } => {
                if class >= labels.m() {
                    return Err(Error::domain(format!(
                        "class {class} out of {}",
                        labels.m()
                    )));
                }
                let mut y = Array2::zeros((labels.n(), 1));
                for &i in &split.train {
                    if class_of(i)? == class {
                        y[[i, 0]] = T::one();
                    }
                }
                let test = split
                    .test
                    .iter()
                    .map(|&i| Ok((i, class_of(i)? == class)))
                    .collect::<Result<Vec<_>>>()?;
                (y, Targets::Binomial(test))
            }
        };
        Ok(Self {
            aggregator,
            y_train,
            targets,
            propagation,
            evaluations: AtomicUsize::new(0),
            degenerate: AtomicUsize::new(0),
        })
    }

    /// Number of objective evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Evaluations in which some test row had no label mass.
    pub fn degenerate_evaluations(&self) -> usize {
        self.degenerate.load(Ordering::Relaxed)
    }
}

impl<T: Scalar> Objective<T> for BilevelObjective<'_, T> {
    fn k(&self) -> usize {
        self.aggregator.k()
    }

    fn value(&self, theta: &Theta<T>) -> Result<T> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let agg = self.aggregator.aggregate(theta)?;
        let op = agg.propagation_operator(theta.lambda)?;
        let emb = propagate(&op, self.y_train.view(), &self.propagation)?;
        let loss = match &self.targets {
            Targets::Multi(test) => multiclass_loss(emb.x.view(), test)?,
            Targets::Binomial(test) => {
                let col = emb.x.column(0).to_vec();
                binomial_loss(&col, test)?
            }
        };
        if loss.degenerate_rows > 0 {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
        }
        if !loss.value.is_finite() {
            return Err(Error::numeric(format!(
                "objective is {} at {theta:?}",
                loss.value
            )));
        }
        Ok(loss.value)
    }
}
