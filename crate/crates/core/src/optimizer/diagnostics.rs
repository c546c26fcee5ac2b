//! Runtime checks of the step-size and rate guarantees.

use serde::Serialize;

use super::{norm2, OptTrace};
use crate::scalar::Scalar;

/// Step cap `h <= ξ τ` with `ξ = 2σ / ((1 + σ) M Δ (2 + K))`, which makes
/// the forward-difference error small relative to the gap.
pub fn fd_step_cap(sigma: f64, lipschitz: f64, diameter: f64, k: usize, tau: f64) -> f64 {
    let xi = 2.0 * sigma / ((1.0 + sigma) * lipschitz * diameter * (2.0 + k as f64));
    xi * tau
}

/// Upper bound on `min_{i<n} g_i` after `n` iterations for a sequence with
/// sufficient-decrease constant `rho`.
pub fn gap_rate_bound(
    diameter: f64,
    lipschitz: f64,
    f_gap: f64,
    n: usize,
    rho: f64,
    sigma: f64,
) -> f64 {
    let n = n as f64;
    let first =
        (diameter * diameter * lipschitz * f_gap / (n * rho * (1.0 - sigma).powi(2))).sqrt();
    let second = 2.0 * f_gap / (n * (1.0 - 3.0 * sigma));
    first.max(second)
}

/// Largest observed `|∇̃f(θ_{n+1}) - ∇̃f(θ_n)| / |θ_{n+1} - θ_n|` along a
/// trace.
pub fn estimate_lipschitz<T: Scalar>(trace: &OptTrace<T>) -> Option<f64> {
    trace
        .records
        .windows(2)
        .filter_map(|w| {
            let dg: Vec<T> = w[1]
                .gradient
                .iter()
                .zip(&w[0].gradient)
                .map(|(a, b)| *a - *b)
                .collect();
            let dt: Vec<T> = w[1]
                .theta
                .to_vec()
                .iter()
                .zip(w[0].theta.to_vec())
                .map(|(a, b)| *a - b)
                .collect();
            let step = norm2(&dt).to_f64_lossy();
            (step > 0.0).then(|| norm2(&dg).to_f64_lossy() / step)
        })
        .reduce(f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// `min{1, 2δ(1 - γ - σ)}`
    pub factor: f64,
    pub checked: usize,
    /// Iterations with `η_n < factor · η̄_n`.
    pub violations: Vec<usize>,
}

/// Checks `η_n >= min{1, 2δ(1-γ-σ)} · min(1, g̃_n / (M |d_n|²))` on every
/// accepted step. `lipschitz` is an estimate, so this is a soft diagnostic.
pub fn check_lemma_bound<T: Scalar>(
    trace: &OptTrace<T>,
    lipschitz: f64,
    sigma: f64,
    gamma: f64,
    delta: f64,
) -> LemmaReport {
    let factor = (2.0 * delta * (1.0 - gamma - sigma)).min(1.0);
    let mut checked = 0;
    let mut violations = Vec::new();
    for rec in trace.accepted() {
        let eta = rec.eta.expect("accepted").to_f64_lossy();
        let d2 = norm2(&rec.direction).to_f64_lossy().powi(2);
        let g = rec.g_tilde.to_f64_lossy();
        let eta_bar = if d2 > 0.0 {
            (g / (lipschitz * d2)).min(1.0)
        } else {
            1.0
        };
        checked += 1;
        if eta < factor * eta_bar * (1.0 - 1e-12) {
            violations.push(rec.n);
        }
    }
    LemmaReport {
        factor,
        checked,
        violations,
    }
}
