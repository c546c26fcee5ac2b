use super::linesearch::{armijo_search, LineSearch};
use super::lmo::lmo;
use super::{dot, FwConfig, IterRecord, Objective, OptTrace, RunResult, Termination};
use crate::aggregation::Theta;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frank-Wolfe with inexact gradients and Armijo steps, started at `start`.
///
/// Each iteration estimates the gradient with step `h_n` (halved every
/// iteration down to `h_min`), takes the LMO vertex `θ̂_n`, and moves to
/// `θ_n + η_n (θ̂_n - θ_n)`. The run stops when the estimated gap
/// `g̃_n <= τ`, when the line search stalls, or after `max_iter` iterations.
pub fn fw_solve<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    start: Theta<T>,
    cfg: &FwConfig,
    start_id: usize,
) -> Result<RunResult<T>> {
    cfg.validate()?;
    let set = &cfg.feasible;
    let k = obj.k();
    if start.k() != k {
        return Err(Error::domain(format!(
            "start has {} weights for {k} layers",
            start.k()
        )));
    }
    if !set.contains(&start, 1e-10) {
        return Err(Error::domain("start point lies outside the feasible set"));
    }
    let tau = T::lit(cfg.tau);

    let mut theta = start;
    let mut f = obj.value(&theta)?;
    let mut records = Vec::new();
    let mut termination = Termination::IterationCap;

    for n in 0..cfg.max_iter {
        let h = T::lit(cfg.step_size(n, k));
        let gradient = obj.gradient(&theta, f, h)?;
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite gradient estimate at iteration {n}"
            )));
        }
        let (_, direction) = lmo(&gradient, set, &theta);
        let g_tilde = -dot(&gradient, &direction);
        let mut record = IterRecord {
            n,
            f,
            g_tilde,
            eta: None,
            f_next: None,
            h,
            backtracks: 0,
            theta: theta.clone(),
            gradient,
            direction,
        };
        if g_tilde < T::zero() {
            records.push(record);
            termination = Termination::NonpositiveGap;
            break;
        }
        if g_tilde <= tau {
            records.push(record);
            termination = Termination::GapBelowTolerance;
            break;
        }
        let search = armijo_search(
            obj,
            &theta,
            f,
            &record.direction,
            g_tilde,
            cfg.gamma,
            cfg.delta,
            cfg.max_backtracks,
            set,
        )?;
        match search {
            LineSearch::Accepted {
                eta,
                theta: next,
                f: f_next,
                backtracks,
            } => {
                record.eta = Some(eta);
                record.f_next = Some(f_next);
                record.backtracks = backtracks;
                records.push(record);
                theta = next;
                f = f_next;
            }
            LineSearch::Stalled { backtracks } => {
                record.backtracks = backtracks;
                records.push(record);
                termination = Termination::LineSearchStall;
                break;
            }
        }
    }

    Ok(RunResult {
        theta_star: theta,
        f_star: f,
        trace: OptTrace {
            records,
            termination,
        },
        start_id,
    })
}
