use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::{fw_solve, FeasibleSet, FwConfig, Objective, RunResult};
use crate::aggregation::Theta;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Arithmetic start `(1, 1/K.., 1)`, harmonic start `(-1, 1/K.., 1)`, then
/// `n_starts - 2` seeded random points with `α`, `λ` uniform in their boxes
/// and `β` from a flat Dirichlet.
pub fn start_points<T: Scalar>(
    k: usize,
    set: &FeasibleSet,
    n_starts: usize,
    seed: u64,
) -> Vec<Theta<T>> {
    let mut starts = vec![
        Theta::uniform(k, T::one(), T::one()),
        Theta::uniform(k, -T::one(), T::one()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 2..n_starts {
        let alpha = rng.random_range(-set.a..=set.a);
        let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let lambda = rng.random_range(set.l0..=set.l1);
        let mut theta = Theta::new(
            T::lit(alpha),
            raw.iter().map(|r| T::lit(r / total)).collect(),
            T::lit(lambda),
        );
        theta.renormalize_beta();
        starts.push(theta);
    }
    starts.truncate(n_starts.max(2));
    starts
}

#[derive(Debug, Clone)]
pub struct MultistartOutcome<T> {
    /// Successful runs in start order.
    pub runs: Vec<RunResult<T>>,
    /// Aborted runs as `(start_id, reason)`.
    pub failures: Vec<(usize, String)>,
    best: usize,
}

impl<T: Scalar> MultistartOutcome<T> {
    /// Run with the smallest `f*`; ties go to the lower `start_id`.
    pub fn best(&self) -> &RunResult<T> {
        &self.runs[self.best]
    }
}

/// Runs [`fw_solve`] from every start point concurrently and keeps the best.
pub fn multistart<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    cfg: &FwConfig,
    n_starts: usize,
    seed: u64,
) -> Result<MultistartOutcome<T>> {
    if n_starts < 2 {
        return Err(Error::domain(
            "multistart needs at least the two fixed starts",
        ));
    }
    cfg.validate()?;
    let starts = start_points(obj.k(), &cfg.feasible, n_starts, seed);
    let results: Vec<Result<RunResult<T>>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(id, start)| fw_solve(obj, start, cfg, id))
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                log::warn!("start {id} aborted: {e}");
                failures.push((id, e.to_string()));
            }
        }
    }
    if runs.is_empty() {
        return Err(Error::OptimizerFailed(
            failures
                .iter()
                .map(|(id, e)| format!("start {id}: {e}"))
                .collect(),
        ));
    }
    let best = (0..runs.len())
        .min_by(|&a, &b| {
            runs[a]
                .f_star
                .partial_cmp(&runs[b].f_star)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(runs[a].start_id.cmp(&runs[b].start_id))
        })
        .expect("non-empty");
    Ok(MultistartOutcome {
        runs,
        failures,
        best,
    })
}
