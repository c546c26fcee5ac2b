//! Semi-supervised node classification on multiplex graphs with a learned
//! generalized power-mean layer aggregation.
//!
//! The layers `A^(1..K)` of a multiplex graph are collapsed entrywise into
//! `A(α, β) = (Σ_k β_k (A^(k))^α)^(1/α)`. The parameters `θ = (α, β, λ)` are
//! learned from a handful of known labels by minimizing the held-out
//! cross-entropy of the Laplacian-regularized embedding
//! `X = (I + λ L(α, β))^{-1} Y` with a Frank-Wolfe method driven by
//! finite-difference gradients. Unlabeled nodes are then classified by label
//! propagation on the learned aggregated graph.
//!
//! All numerical code is generic over [`Scalar`]; the `*64` aliases at the
//! crate root fix it to `f64`, which is what the CLI and the benchmarks use.

pub mod aggregation;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod pipeline;
pub mod propagation;
pub mod scalar;
pub mod synth;

pub use aggregation::{
    aggregate, aggregate_limit, AggregatedOperator, Aggregator, LimitMean, PropagationOperator,
    Theta,
};
pub use error::{Error, Result};
pub use graph::{degrees, DuplicateRule, MultilayerGraph, SparseSym};
pub use labels::{split_labels, LabelMatrix, LabelSplit, SplitMode};
pub use objective::{BilevelObjective, LossMode};
pub use optimizer::{FeasibleSet, FwConfig, Objective, OptTrace, RunResult, Termination};
pub use pipeline::{ExperimentSpec, Method, MethodResult};
pub use propagation::{Embedding, PropagationConfig};
pub use scalar::Scalar;
pub use synth::{Setting, SynthInstance, SynthSpec};

pub type SparseSym64 = SparseSym<f64>;
pub type MultilayerGraph64 = MultilayerGraph<f64>;
pub type Theta64 = Theta<f64>;
pub type Aggregator64 = Aggregator<f64>;
pub type AggregatedOperator64 = AggregatedOperator<f64>;
pub type Embedding64 = Embedding<f64>;
pub type RunResult64 = RunResult<f64>;
pub type MethodResult64 = MethodResult<f64>;
pub type SynthInstance64 = SynthInstance<f64>;

pub type SparseSym32 = SparseSym<f32>;
pub type MultilayerGraph32 = MultilayerGraph<f32>;
pub type Theta32 = Theta<f32>;
