//! Label propagation against dense linear algebra.

use genmean::propagation::{propagate, system_residual};
use genmean::{
    aggregate, DuplicateRule, MultilayerGraph64, PropagationConfig, SparseSym64, Theta64,
};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    graph: MultilayerGraph64,
    theta: Theta64,
    y: Array2<f64>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (3usize..30, 1usize..4).prop_flat_map(|(n, k)| {
        let edges = prop::collection::vec((0..n, 0..n, 0.5f64..2.0), 0..4 * n);
        let layers = prop::collection::vec(edges, k);
        let beta = prop::collection::vec(0.01f64..1.0, k);
        let labels = prop::collection::vec(prop::option::weighted(0.4, 0usize..3), n);
        (layers, -20.0f64..20.0, beta, 0.1f64..10.0, labels).prop_map(
            move |(layers, alpha, beta, lambda, labels)| {
                let layers = layers
                    .into_iter()
                    .map(|e| {
                        let e = e.into_iter().filter(|(u, v, _)| u != v);
                        SparseSym64::from_triplets(n, e, DuplicateRule::Max, false).unwrap()
                    })
                    .collect();
                let s: f64 = beta.iter().sum();
                let mut y = Array2::zeros((n, 3));
                for (i, c) in labels.iter().enumerate() {
                    if let Some(c) = c {
                        y[[i, *c]] = 1.0;
                    }
                }
                Instance {
                    graph: MultilayerGraph64::from_layers(layers).unwrap(),
                    theta: Theta64::new(alpha, beta.iter().map(|b| b / s).collect(), lambda),
                    y,
                }
            },
        )
    })
}

/// Dense `A(θ)` read back from the aggregated operator.
fn dense_adjacency(inst: &Instance) -> DMatrix<f64> {
    let agg = aggregate(&inst.graph, &inst.theta).unwrap();
    let n = inst.graph.n();
    DMatrix::from_fn(n, n, |i, j| agg.adj.weight(i, j))
}

fn dense_solve(inst: &Instance) -> DMatrix<f64> {
    let a = dense_adjacency(inst);
    let n = a.nrows();
    let lambda = inst.theta.lambda;
    let mut m = -&a * lambda;
    for i in 0..n {
        m[(i, i)] = 1.0 + lambda * a.row(i).sum();
    }
    let rhs = DMatrix::from_fn(n, 3, |i, c| inst.y[[i, c]]);
    m.lu().solve(&rhs).unwrap()
}

fn max_gap(x: &Array2<f64>, exact: &DMatrix<f64>) -> f64 {
    x.indexed_iter()
        .map(|((i, c), v)| (v - exact[(i, c)]).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_dense_solve(inst in instance()) {
        let exact = dense_solve(&inst);
        let op = aggregate(&inst.graph, &inst.theta).unwrap().propagation_operator(inst.theta.lambda).unwrap();
        for cfg in [PropagationConfig { tol: 1e-13, ..Default::default() }, PropagationConfig::plain(1e-13, 200_000)] {
            let emb = propagate(&op, inst.y.view(), &cfg).unwrap();
            prop_assert!(emb.converged);
            prop_assert!(max_gap(&emb.x, &exact) <= 1e-9, "gap {}", max_gap(&emb.x, &exact));
        }
    }

    #[test]
    fn fixed_point_residual_within_tolerance(inst in instance()) {
        let agg = aggregate(&inst.graph, &inst.theta).unwrap();
        let lambda = inst.theta.lambda;
        let op = agg.propagation_operator(lambda).unwrap();
        let max_deg = agg.deg.iter().copied().fold(0.0, f64::max);
        for cfg in [PropagationConfig::default(), PropagationConfig::plain(1e-10, 100_000)] {
            let emb = propagate(&op, inst.y.view(), &cfg).unwrap();
            let r = system_residual(&agg, lambda, emb.x.view(), inst.y.view());
            prop_assert!(r <= 10.0 * cfg.tol * (1.0 + lambda * max_deg), "residual {r}");
        }
    }

    #[test]
    fn substochastic(inst in instance()) {
        let op = aggregate(&inst.graph, &inst.theta).unwrap().propagation_operator(inst.theta.lambda).unwrap();
        let emb = propagate(&op, inst.y.view(), &PropagationConfig::default()).unwrap();
        for row in emb.x.rows() {
            prop_assert!(row.iter().all(|&v| v >= -1e-8));
            prop_assert!(row.sum() <= 1.0 + 1e-8);
        }
    }

    /// `P = λBA` is similar to the symmetric `S = λB^{1/2}AB^{1/2}`, so in the
    /// `B^{-1/2}`-weighted norm the error contracts by exactly `ρ(S)` per sweep.
    #[test]
    fn error_decays_at_spectral_rate(inst in instance(), sweeps in 1usize..40) {
        let a = dense_adjacency(&inst);
        let n = a.nrows();
        let lambda = inst.theta.lambda;
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + lambda * a.row(i).sum())).collect();
        let s = DMatrix::from_fn(n, n, |i, j| lambda * b[i].sqrt() * a[(i, j)] * b[j].sqrt());
        let rho = SymmetricEigen::new(s).eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        prop_assert!(rho < 1.0);

        let exact = dense_solve(&inst);
        let weighted = |x: &Array2<f64>| {
            x.indexed_iter()
                .map(|((i, c), v)| (v - exact[(i, c)]).powi(2) / b[i])
                .sum::<f64>()
                .sqrt()
        };
        let op = aggregate(&inst.graph, &inst.theta).unwrap().propagation_operator(lambda).unwrap();
        let x0 = Array2::from_shape_fn((n, 3), |(i, c)| b[i] * inst.y[[i, c]]);
        let capped = propagate(&op, inst.y.view(), &PropagationConfig::plain(1e-300, sweeps)).unwrap();
        let bound = rho.powi(sweeps as i32) * weighted(&x0);
        prop_assert!(weighted(&capped.x) <= bound * (1.0 + 1e-9) + 1e-13,
            "error {} vs bound {bound}", weighted(&capped.x));
    }
}

#[test]
fn acceleration_cuts_sweeps_on_slow_instances() {
    // Path graph at the largest λ: contraction factor close to one.
    let n = 200;
    let edges = (0..n - 1).map(|i| (i, i + 1, 1.0));
    let graph = MultilayerGraph64::from_layers(vec![SparseSym64::from_triplets(
        n,
        edges,
        DuplicateRule::Max,
        false,
    )
    .unwrap()])
    .unwrap();
    let theta = Theta64::uniform(1, 1.0, 10.0);
    let mut y = Array2::zeros((n, 2));
    y[[0, 0]] = 1.0;
    y[[n - 1, 1]] = 1.0;
    let op = aggregate(&graph, &theta)
        .unwrap()
        .propagation_operator(10.0)
        .unwrap();
    let fast = propagate(&op, y.view(), &PropagationConfig::default()).unwrap();
    let slow = propagate(&op, y.view(), &PropagationConfig::plain(1e-10, 1_000_000)).unwrap();
    assert!(fast.converged && slow.converged);
    assert!(
        fast.iterations * 3 < slow.iterations,
        "{} vs {}",
        fast.iterations,
        slow.iterations
    );
    let gap = fast
        .x
        .iter()
        .zip(slow.x.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-6, "gap {gap}");
}
