//! Frank-Wolfe with inexact gradients over `S = [-a, a] x Δ_K x [l0, l1]`.

mod diagnostics;
mod frank_wolfe;
mod gradient;
mod linesearch;
mod lmo;
mod multistart;

use serde::{Deserialize, Serialize};

use crate::aggregation::Theta;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use diagnostics::{
    check_lemma_bound, estimate_lipschitz, fd_step_cap, gap_rate_bound, LemmaReport,
};
pub use frank_wolfe::fw_solve;
pub use gradient::fd_gradient;
pub use linesearch::{armijo_search, LineSearch};
pub use lmo::lmo;
pub use multistart::{multistart, start_points, MultistartOutcome};

/// Something Frank-Wolfe can minimize over `S`.
pub trait Objective<T: Scalar>: Sync {
    /// Number of layer weights `K`.
    fn k(&self) -> usize;

    fn value(&self, theta: &Theta<T>) -> Result<T>;

    /// Gradient estimate at `theta`; `f_theta` is `value(theta)` and `h` the
    /// current finite-difference step. Forward differences unless overridden.
    fn gradient(&self, theta: &Theta<T>, f_theta: T, h: T) -> Result<Vec<T>> {
        fd_gradient(self, theta, h, Some(f_theta))
    }
}

/// Box x simplex x box feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibleSet {
    /// `α ∈ [-a, a]`
    pub a: f64,
    /// `λ ∈ [l0, l1]`
    pub l0: f64,
    pub l1: f64,
}

impl Default for FeasibleSet {
    fn default() -> Self {
        Self {
            a: 20.0,
            l0: 0.1,
            l1: 10.0,
        }
    }
}

impl FeasibleSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::domain(format!(
                "alpha half-width a={} must be positive",
                self.a
            )));
        }
        if !(self.l0 > 0.0 && self.l0 < self.l1) || !self.l1.is_finite() {
            return Err(Error::domain(format!(
                "lambda bounds must satisfy 0 < l0 < l1, got [{}, {}]",
                self.l0, self.l1
            )));
        }
        Ok(())
    }

    pub fn contains<T: Scalar>(&self, theta: &Theta<T>, simplex_tol: f64) -> bool {
        let alpha = theta.alpha.to_f64_lossy();
        let lambda = theta.lambda.to_f64_lossy();
        let sum = theta.beta_sum().to_f64_lossy();
        alpha.abs() <= self.a
            && lambda >= self.l0
            && lambda <= self.l1
            && theta.beta.iter().all(|b| *b >= T::zero())
            && (sum - 1.0).abs() <= simplex_tol
    }

    /// Clamps `α`, `λ` into their boxes and renormalizes `β`. Only meant to
    /// absorb floating-point drift.
    pub fn project<T: Scalar>(&self, theta: &mut Theta<T>) {
        theta.alpha = theta.alpha.max(T::lit(-self.a)).min(T::lit(self.a));
        theta.lambda = theta.lambda.max(T::lit(self.l0)).min(T::lit(self.l1));
        theta.renormalize_beta();
    }

    /// All `4K` vertices of `S`.
    pub fn vertices<T: Scalar>(&self, k: usize) -> Vec<Theta<T>> {
        let mut out = Vec::with_capacity(4 * k);
        for alpha in [-self.a, self.a] {
            for j in 0..k {
                for lambda in [self.l0, self.l1] {
                    let mut beta = vec![T::zero(); k];
                    beta[j] = T::one();
                    out.push(Theta::new(T::lit(alpha), beta, T::lit(lambda)));
                }
            }
        }
        out
    }

    /// Euclidean diameter of `S` for `K` layers.
    pub fn diameter(&self, k: usize) -> f64 {
        let simplex = if k >= 2 { 2.0 } else { 0.0 };
        (4.0 * self.a * self.a + simplex + (self.l1 - self.l0).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FwConfig {
    /// Stop when the estimated gap `g̃_n <= tau`.
    pub tau: f64,
    /// Initial finite-difference step; halved every iteration.
    pub h0: f64,
    /// Floor for the halving schedule.
    pub h_min: f64,
    /// Armijo sufficient-decrease constant, in `(0, 1/2)`.
    pub gamma: f64,
    /// Armijo backtracking factor, in `(0, 1)`.
    pub delta: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub feasible: FeasibleSet,
    /// Optional Lipschitz estimate `M` of `∇f`. When set together with a
    /// positive `sigma`, steps are additionally capped at `ξ τ`.
    pub lipschitz_estimate: Option<f64>,
    pub sigma: f64,
}

impl Default for FwConfig {
    fn default() -> Self {
        Self {
            tau: 1e-4,
            h0: 1e-4,
            h_min: 1e-9,
            gamma: 0.25,
            delta: 0.5,
            max_iter: 100,
            max_backtracks: 30,
            feasible: FeasibleSet::default(),
            lipschitz_estimate: None,
            sigma: 0.0,
        }
    }
}

impl FwConfig {
    pub fn validate(&self) -> Result<()> {
        self.feasible.validate()?;
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::domain(format!(
                "gamma={} must lie in (0, 1/2)",
                self.gamma
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!(
                "delta={} must lie in (0, 1)",
                self.delta
            )));
        }
        if !(self.h0 > 0.0 && self.h_min > 0.0 && self.h_min <= self.h0) {
            return Err(Error::domain("need 0 < h_min <= h0"));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::domain("tau must be nonnegative"));
        }
        if !(self.sigma >= 0.0 && self.sigma < 0.5) {
            return Err(Error::domain("sigma must lie in [0, 1/2)"));
        }
        if let Some(m) = self.lipschitz_estimate {
            if !(m > 0.0) {
                return Err(Error::domain("lipschitz_estimate must be positive"));
            }
        }
        Ok(())
    }

    /// Finite-difference step at outer iteration `n`.
    pub fn step_size(&self, n: usize, k: usize) -> f64 {
        let halved = self.h0 * 0.5f64.powi(n.min(1000) as i32);
        let mut h = halved.max(self.h_min);
        if let Some(m) = self.lipschitz_estimate {
            if self.sigma > 0.0 {
                h = h.min(fd_step_cap(
                    self.sigma,
                    m,
                    self.feasible.diameter(k),
                    k,
                    self.tau,
                ));
            }
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `g̃_n <= tau`
    GapBelowTolerance,
    /// `g̃_n < 0`: the estimated direction is not a descent direction.
    NonpositiveGap,
    IterationCap,
    LineSearchStall,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::GapBelowTolerance => "gap-below-tolerance",
            Termination::NonpositiveGap => "nonpositive estimated gap",
            Termination::IterationCap => "iteration-cap",
            Termination::LineSearchStall => "line-search stall",
        };
        f.write_str(s)
    }
}

/// Diagnostics for one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord<T> {
    pub n: usize,
    /// `f(θ_n)`
    pub f: T,
    /// `g̃_n = -∇̃f(θ_n)ᵀ d_n`
    pub g_tilde: T,
    /// Accepted step, absent on the terminating iteration.
    pub eta: Option<T>,
    /// `f(θ_{n+1})` when a step was accepted.
    pub f_next: Option<T>,
    pub h: T,
    pub backtracks: usize,
    pub theta: Theta<T>,
    pub gradient: Vec<T>,
    pub direction: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptTrace<T> {
    pub records: Vec<IterRecord<T>>,
    pub termination: Termination,
}

impl<T: Scalar> OptTrace<T> {
    /// Records whose step was accepted.
    pub fn accepted(&self) -> impl Iterator<Item = &IterRecord<T>> {
        self.records.iter().filter(|r| r.eta.is_some())
    }

    /// Smallest estimated gap among the first `n` records.
    pub fn best_gap(&self, n: usize) -> Option<T> {
        self.records
            .iter()
            .take(n)
            .map(|r| r.g_tilde)
            .reduce(T::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    pub theta_star: Theta<T>,
    pub f_star: T,
    pub trace: OptTrace<T>,
    pub start_id: usize,
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
