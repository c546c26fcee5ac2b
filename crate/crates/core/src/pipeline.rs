//! Training protocols: MULTI, BINOM, fixed-mean baselines and single layers.
//!
//! Learned methods tune `θ` on cyclic label folds: each fold uses one fifth
//! of the known labels as the test set of the outer objective and the rest
//! as propagation input. The `(fold, start)` pair with the lowest test loss
//! wins. Final predictions re-propagate every known label on the aggregated
//! graph at the winning `θ`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregatedOperator, Aggregator, LimitMean, Theta};
use crate::error::{Error, Result};
use crate::graph::MultilayerGraph;
use crate::labels::{split_labels, LabelMatrix, SplitMode};
use crate::objective::{BilevelObjective, LossMode};
use crate::optimizer::{multistart, FwConfig, OptTrace};
use crate::propagation::{accuracy, classify, propagate, PropagationConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Multi,
    Binom,
    Min,
    Geom,
    Arit,
    Harm,
    Max,
    /// Propagation on a single layer (0-based index) with `λ = 1`.
    Layer(usize),
}

impl Method {
    /// The methods compared in the benchmark grid, learned ones first.
    pub const MULTILAYER: [Method; 7] = [
        Method::Multi,
        Method::Binom,
        Method::Min,
        Method::Geom,
        Method::Arit,
        Method::Harm,
        Method::Max,
    ];

    pub fn is_learned(self) -> bool {
        matches!(self, Method::Multi | Method::Binom)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Multi => f.write_str("MULTI"),
            Method::Binom => f.write_str("BINOM"),
            Method::Min => f.write_str("MIN"),
            Method::Geom => f.write_str("GEOM"),
            Method::Arit => f.write_str("ARIT"),
            Method::Harm => f.write_str("HARM"),
            Method::Max => f.write_str("MAX"),
            Method::Layer(k) => write!(f, "LAYER{}", k + 1),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        Ok(match up.as_str() {
            "MULTI" => Method::Multi,
            "BINOM" => Method::Binom,
            "MIN" => Method::Min,
            "GEOM" | "GEO" => Method::Geom,
            "ARIT" => Method::Arit,
            "HARM" => Method::Harm,
            "MAX" => Method::Max,
            _ => {
                let k = up
                    .strip_prefix("LAYER")
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::domain(format!("unknown method `{s}`")))?;
                Method::Layer(k - 1)
            }
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub method: Method,
    pub n_folds: usize,
    pub n_starts: usize,
    pub rng_seed: u64,
    pub split_mode: SplitMode,
    pub optimizer: FwConfig,
    pub propagation: PropagationConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            method: Method::Multi,
            n_folds: 5,
            n_starts: 10,
            rng_seed: 0,
            split_mode: SplitMode::default(),
            optimizer: FwConfig::default(),
            propagation: PropagationConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn new(method: Method, rng_seed: u64) -> Self {
        Self {
            method,
            rng_seed,
            ..Self::default()
        }
    }
}

/// One Frank-Wolfe run inside a learned method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldRun<T> {
    /// Target class for BINOM, absent for MULTI.
    pub class: Option<usize>,
    pub fold: usize,
    pub start_id: usize,
    pub f_star: T,
    pub theta_star: Theta<T>,
    pub trace: OptTrace<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection<T> {
    pub class: Option<usize>,
    pub fold: usize,
    pub start_id: usize,
    pub f_star: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult<T> {
    pub method: Method,
    /// One `θ` for MULTI and the fixed rules, one per class for BINOM. Fixed
    /// limits report `α = ±∞` or `0`.
    pub thetas: Vec<Theta<T>>,
    /// Winning `(fold, start)` per learned `θ`.
    pub selected: Vec<Selection<T>>,
    /// Best test loss per fold, one row per learned `θ`; `None` for skipped
    /// folds.
    pub fold_losses: Vec<Vec<Option<T>>>,
    /// Nodes without a known label.
    pub held_out: Vec<usize>,
    /// Predicted class index for every node.
    pub predictions: Vec<usize>,
    /// Nodes the final propagation never reached (assigned class 0).
    pub unreached: usize,
    /// Accuracy on `held_out` when ground truth was supplied.
    pub accuracy: Option<f64>,
    pub runs: Vec<FoldRun<T>>,
    pub failures: Vec<String>,
    pub evaluations: usize,
}

impl<T: Scalar> MethodResult<T> {
    fn fixed(
        method: Method,
        theta: Theta<T>,
        predictions: Vec<usize>,
        unreached: usize,
        known: &LabelMatrix,
    ) -> Self {
        Self {
            method,
            thetas: vec![theta],
            selected: Vec::new(),
            fold_losses: Vec::new(),
            held_out: known.unlabeled(),
            predictions,
            unreached,
            accuracy: None,
            runs: Vec::new(),
            failures: Vec::new(),
            evaluations: 0,
        }
    }

    /// `(node, class)` pairs for the held-out nodes.
    pub fn held_out_predictions(&self) -> Vec<(usize, usize)> {
        self.held_out
            .iter()
            .map(|&i| (i, self.predictions[i]))
            .collect()
    }

    fn score(&mut self, truth: Option<&[usize]>) -> Result<()> {
        if let Some(truth) = truth {
            if truth.len() != self.predictions.len() {
                return Err(Error::domain(format!(
                    "ground truth covers {} nodes, graph has {}",
                    truth.len(),
                    self.predictions.len()
                )));
            }
            if !self.held_out.is_empty() {
                self.accuracy = Some(accuracy(&self.predictions, truth, &self.held_out)?);
            }
        }
        Ok(())
    }
}

/// Runs `spec.method` and, when `truth` is given, scores the held-out nodes.
pub fn run<T: Scalar>(
    graph: &MultilayerGraph<T>,
    known: &LabelMatrix,
    spec: &ExperimentSpec,
    truth: Option<&[usize]>,
) -> Result<MethodResult<T>> {
    if known.n() != graph.n() {
        return Err(Error::domain(format!(
            "labels cover {} nodes, graph has {}",
            known.n(),
            graph.n()
        )));
    }
    let mut result = match spec.method {
        Method::Multi => run_multi(graph, known, spec)?,
        Method::Binom => run_binom(graph, known, spec)?,
        Method::Layer(k) => run_single_layer(graph, known, k, &spec.propagation)?,
        fixed => run_fixed_mean(graph, known, fixed, &spec.propagation)?,
    };
    result.score(truth)?;
    Ok(result)
}

fn check_learnable(known: &LabelMatrix, spec: &ExperimentSpec) -> Result<()> {
    let present = known.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::domain(
            "learned methods need labeled nodes from at least two classes",
        ));
    }
    if spec.n_folds < 2 {
        return Err(Error::domain("at least two folds are required"));
    }
    spec.optimizer.validate()
}

struct Learned<T> {
    theta: Theta<T>,
    selection: Selection<T>,
    fold_losses: Vec<Option<T>>,
    runs: Vec<FoldRun<T>>,
    failures: Vec<String>,
    evaluations: usize,
}

/// Fold loop for one loss; returns the `(loss, fold, start)`-minimal run.
fn learn<T: Scalar>(
    aggregator: &Aggregator<T>,
    known: &LabelMatrix,
    spec: &ExperimentSpec,
    mode: LossMode,
) -> Result<Learned<T>> {
    let class = match mode {
        LossMode::Multi => None,
        LossMode::Binomial { class } => Some(class),
    };
    let per_fold: Vec<Result<Option<(Vec<FoldRun<T>>, Vec<String>, usize)>>> = (0..spec.n_folds)
        .into_par_iter()
        .map(|fold| {
            let split = split_labels(known, fold, spec.n_folds, spec.rng_seed, spec.split_mode)?;
            if split.train.is_empty() || split.test.is_empty() {
                log::warn!("fold {fold} has an empty train or test set; skipped");
                return Ok(None);
            }
            let obj = BilevelObjective::new(aggregator, known, &split, mode, spec.propagation)?;
            let outcome = match multistart(&obj, &spec.optimizer, spec.n_starts, spec.rng_seed) {
                Ok(o) => o,
                Err(e @ Error::OptimizerFailed(_)) => {
                    log::warn!("fold {fold}: {e}");
                    return Ok(Some((
                        Vec::new(),
                        vec![format!("fold {fold}: {e}")],
                        obj.evaluations(),
                    )));
                }
                Err(e) => return Err(e),
            };
            if obj.degenerate_evaluations() > 0 {
                log::debug!(
                    "fold {fold}: {} of {} evaluations left test rows without label mass",
                    obj.degenerate_evaluations(),
                    obj.evaluations()
                );
            }
            let failures = outcome
                .failures
                .iter()
                .map(|(id, e)| format!("fold {fold} start {id}: {e}"))
                .collect();
            let runs = outcome
                .runs
                .into_iter()
                .map(|r| FoldRun {
                    class,
                    fold,
                    start_id: r.start_id,
                    f_star: r.f_star,
                    theta_star: r.theta_star,
                    trace: r.trace,
                })
                .collect();
            Ok(Some((runs, failures, obj.evaluations())))
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut fold_losses = Vec::with_capacity(spec.n_folds);
    let mut evaluations = 0;
    for r in per_fold {
        match r? {
            None => fold_losses.push(None),
            Some((fold_runs, fold_failures, evals)) => {
                fold_losses.push(fold_runs.iter().map(|r| r.f_star).reduce(T::min));
                runs.extend(fold_runs);
                failures.extend(fold_failures);
                evaluations += evals;
            }
        }
    }
    let best = runs
        .iter()
        .min_by(|a, b| {
            a.f_star
                .partial_cmp(&b.f_star)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.fold.cmp(&b.fold))
                .then(a.start_id.cmp(&b.start_id))
        })
        .ok_or_else(|| {
            if failures.is_empty() {
                Error::domain("every fold was degenerate")
            } else {
                Error::OptimizerFailed(failures.clone())
            }
        })?;
    Ok(Learned {
        theta: best.theta_star.clone(),
        selection: Selection {
            class,
            fold: best.fold,
            start_id: best.start_id,
            f_star: best.f_star,
        },
        fold_losses,
        runs,
        failures,
        evaluations,
    })
}

fn propagate_at<T: Scalar>(
    aggregator: &Aggregator<T>,
    theta: &Theta<T>,
    y: &Array2<T>,
    cfg: &PropagationConfig,
) -> Result<Array2<T>> {
    let agg = aggregator.aggregate(theta)?;
    let op = agg.propagation_operator(theta.lambda)?;
    let emb = propagate(&op, y.view(), cfg)?;
    if !emb.converged {
        log::warn!(
            "final propagation stopped after {} iterations",
            emb.iterations
        );
    }
    Ok(emb.x)
}

/// Learns one `θ` for the multiclass loss.
pub fn run_multi<T: Scalar>(
    graph: &MultilayerGraph<T>,
    known: &LabelMatrix,
    spec: &ExperimentSpec,
) -> Result<MethodResult<T>> {
    check_learnable(known, spec)?;
    let aggregator = Aggregator::new(graph);
    let learned = learn(&aggregator, known, spec, LossMode::Multi)?;
    let x = propagate_at(
        &aggregator,
        &learned.theta,
        &known.one_hot(),
        &spec.propagation,
    )?;
    let (predictions, unreached) = classify(x.view());
    Ok(MethodResult {
        method: Method::Multi,
        thetas: vec![learned.theta],
        selected: vec![learned.selection],
        fold_losses: vec![learned.fold_losses],
        held_out: known.unlabeled(),
        predictions,
        unreached,
        accuracy: None,
        runs: learned.runs,
        failures: learned.failures,
        evaluations: learned.evaluations,
    })
}

/// Learns one `θ_k` per class with the one-vs-all loss, then classifies by
/// argmax over the per-class propagated scores.
pub fn run_binom<T: Scalar>(
    graph: &MultilayerGraph<T>,
    known: &LabelMatrix,
    spec: &ExperimentSpec,
) -> Result<MethodResult<T>> {
    check_learnable(known, spec)?;
    let aggregator = Aggregator::new(graph);
    let per_class = (0..known.m())
        .map(|class| learn(&aggregator, known, spec, LossMode::Binomial { class }))
        .collect::<Result<Vec<_>>>()?;
    let y = known.one_hot::<T>();
    let mut scores = Array2::zeros((known.n(), known.m()));
    for (class, learned) in per_class.iter().enumerate() {
        let col = y.column(class).to_owned().insert_axis(ndarray::Axis(1));
        let x = propagate_at(&aggregator, &learned.theta, &col, &spec.propagation)?;
        scores.column_mut(class).assign(&x.column(0));
    }
    let (predictions, unreached) = classify(scores.view());
    let mut result = MethodResult {
        method: Method::Binom,
        thetas: Vec::with_capacity(known.m()),
        selected: Vec::with_capacity(known.m()),
        fold_losses: Vec::with_capacity(known.m()),
        held_out: known.unlabeled(),
        predictions,
        unreached,
        accuracy: None,
        runs: Vec::new(),
        failures: Vec::new(),
        evaluations: 0,
    };
    for learned in per_class {
        result.thetas.push(learned.theta);
        result.selected.push(learned.selection);
        result.fold_losses.push(learned.fold_losses);
        result.runs.extend(learned.runs);
        result.failures.extend(learned.failures);
        result.evaluations += learned.evaluations;
    }
    Ok(result)
}

/// Aggregation of a fixed rule with uniform `β`.
pub fn fixed_aggregate<T: Scalar>(
    aggregator: &Aggregator<T>,
    method: Method,
) -> Result<AggregatedOperator<T>> {
    let k = aggregator.k();
    let beta = vec![T::one() / T::from_usize_lossy(k); k];
    match method {
        Method::Min => aggregator.aggregate_limit(LimitMean::Min, &beta),
        Method::Geom => aggregator.aggregate_limit(LimitMean::Geometric, &beta),
        Method::Max => aggregator.aggregate_limit(LimitMean::Max, &beta),
        Method::Arit => aggregator.aggregate(&Theta::uniform(k, T::one(), T::one())),
        Method::Harm => aggregator.aggregate(&Theta::uniform(k, -T::one(), T::one())),
        other => Err(Error::domain(format!(
            "{other} is not a fixed aggregation rule"
        ))),
    }
}

/// Fixed rule with `λ = 1`, propagating every known label. No fold split is
/// involved.
pub fn run_fixed_mean<T: Scalar>(
    graph: &MultilayerGraph<T>,
    known: &LabelMatrix,
    method: Method,
    propagation: &PropagationConfig,
) -> Result<MethodResult<T>> {
    let aggregator = Aggregator::new(graph);
    let agg = fixed_aggregate(&aggregator, method)?;
    let op = agg.propagation_operator(T::one())?;
    let emb = propagate(&op, known.one_hot::<T>().view(), propagation)?;
    let (predictions, unreached) = classify(emb.x.view());
    Ok(MethodResult::fixed(
        method,
        agg.theta,
        predictions,
        unreached,
        known,
    ))
}

/// Propagation with `λ = 1` on layer `layer` alone.
pub fn run_single_layer<T: Scalar>(
    graph: &MultilayerGraph<T>,
    known: &LabelMatrix,
    layer: usize,
    propagation: &PropagationConfig,
) -> Result<MethodResult<T>> {
    if layer >= graph.k() {
        return Err(Error::Range {
            index: layer,
            n: graph.k(),
        });
    }
    let single = graph.single_layer(layer);
    let aggregator = Aggregator::new(&single);
    let theta = Theta::uniform(1, T::one(), T::one());
    let x = propagate_at(&aggregator, &theta, &known.one_hot(), propagation)?;
    let (predictions, unreached) = classify(x.view());
    Ok(MethodResult::fixed(
        Method::Layer(layer),
        theta,
        predictions,
        unreached,
        known,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DuplicateRule, SparseSym};
    use crate::synth::{generate, Setting, SynthSpec};

    fn quick_spec(method: Method) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(method, 3);
        spec.n_starts = 3;
        spec.optimizer.max_iter = 15;
        spec
    }

    fn small_instance(setting: Setting, std: f64) -> crate::synth::SynthInstance<f64> {
        generate(&SynthSpec {
            n_per_community: 30,
            ..SynthSpec::new(setting, std, 5)
        })
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::MULTILAYER
            .into_iter()
            .chain([Method::Layer(0), Method::Layer(2)])
        {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!("geo".parse::<Method>().unwrap(), Method::Geom);
        assert!("LAYER0".parse::<Method>().is_err());
        assert!("median".parse::<Method>().is_err());
        let json = serde_json::to_string(&Method::Layer(1)).unwrap();
        assert_eq!(json, "\"LAYER2\"");
    }

    #[test]
    fn spec_rejects_unknown_keys() {
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"n_fold": 3}"#).is_err());
        let s: ExperimentSpec =
            serde_json::from_str(r#"{"method": "BINOM", "n_starts": 4}"#).unwrap();
        assert_eq!((s.method, s.n_starts, s.n_folds), (Method::Binom, 4, 5));
    }

    #[test]
    fn theta_counts_per_method() {
        let inst = small_instance(Setting::Noisy, 2.0);
        let multi = run(&inst.graph, &inst.known, &quick_spec(Method::Multi), None).unwrap();
        assert_eq!(multi.thetas.len(), 1);
        let binom = run(&inst.graph, &inst.known, &quick_spec(Method::Binom), None).unwrap();
        assert_eq!(binom.thetas.len(), 3);
        let arit = run(
            &inst.graph,
            &inst.known,
            &quick_spec(Method::Arit),
            Some(&inst.truth),
        )
        .unwrap();
        assert!(arit.runs.is_empty() && arit.accuracy.is_some());
        assert_eq!(arit.thetas[0].lambda, 1.0);
    }

    #[test]
    fn selection_is_minimal_loss() {
        let inst = small_instance(Setting::Informative, 3.0);
        let r = run(&inst.graph, &inst.known, &quick_spec(Method::Multi), None).unwrap();
        let best = r
            .runs
            .iter()
            .map(|x| x.f_star)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.selected[0].f_star, best);
        let winner = r
            .runs
            .iter()
            .find(|x| x.fold == r.selected[0].fold && x.start_id == r.selected[0].start_id)
            .unwrap();
        assert_eq!(winner.theta_star, r.thetas[0]);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let inst = small_instance(Setting::Complementary, 2.0);
        let spec = quick_spec(Method::Binom);
        let a = run(&inst.graph, &inst.known, &spec, Some(&inst.truth)).unwrap();
        let b = run(&inst.graph, &inst.known, &spec, Some(&inst.truth)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn arit_matches_learned_operator_at_arithmetic_theta() {
        let inst = small_instance(Setting::Informative, 4.0);
        let fixed = run_fixed_mean(
            &inst.graph,
            &inst.known,
            Method::Arit,
            &PropagationConfig::default(),
        )
        .unwrap();
        let aggregator = Aggregator::new(&inst.graph);
        let x = propagate_at(
            &aggregator,
            &Theta::uniform(3, 1.0, 1.0),
            &inst.known.one_hot(),
            &PropagationConfig::default(),
        )
        .unwrap();
        assert_eq!(classify(x.view()).0, fixed.predictions);
    }

    #[test]
    fn max_of_identical_layers_is_single_layer() {
        let inst = small_instance(Setting::Informative, 4.0);
        let l = inst.graph.layer(0).clone();
        let g = MultilayerGraph::from_layers(vec![l.clone(), l.clone(), l]).unwrap();
        let cfg = PropagationConfig::default();
        let max = run_fixed_mean(&g, &inst.known, Method::Max, &cfg).unwrap();
        let one = run_single_layer(&g, &inst.known, 0, &cfg).unwrap();
        assert_eq!(max.predictions, one.predictions);
    }

    #[test]
    fn single_class_is_rejected_for_learning() {
        let l = SparseSym::from_triplets(4, [(0, 1, 1.0), (2, 3, 1.0)], DuplicateRule::Max, false)
            .unwrap();
        let g = MultilayerGraph::from_layers(vec![l]).unwrap();
        let known = LabelMatrix::from_named(4, [(0, "a"), (2, "a")]).unwrap();
        assert!(run(&g, &known, &quick_spec(Method::Multi), None).is_err());
        // A single class is fine for fixed rules: every node lands in class 0.
        let r = run(&g, &known, &quick_spec(Method::Min), None).unwrap();
        assert!(r.predictions.iter().all(|&c| c == 0));
    }

    #[test]
    fn single_layer_graph_forces_unit_beta() {
        let inst = small_instance(Setting::Informative, 2.0);
        let g = inst.graph.single_layer(0);
        let r = run(
            &g,
            &inst.known,
            &quick_spec(Method::Multi),
            Some(&inst.truth),
        )
        .unwrap();
        assert_eq!(r.thetas[0].beta, vec![1.0]);
        assert!(r.accuracy.unwrap() > 0.9);
    }

    #[test]
    fn truth_length_checked() {
        let inst = small_instance(Setting::Informative, 2.0);
        assert!(run(
            &inst.graph,
            &inst.known,
            &quick_spec(Method::Max),
            Some(&[0, 1])
        )
        .is_err());
    }
}
