use rayon::prelude::*;

use super::Objective;
use crate::aggregation::Theta;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Forward differences `(f(θ + h e_i) - f(θ)) / h` over the `K + 2`
/// coordinates `(α, β_1..β_K, λ)`. Probes are evaluated as given, even when
/// they leave the feasible set. The probes run concurrently.
pub fn fd_gradient<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    theta: &Theta<T>,
    h: T,
    f_theta: Option<T>,
) -> Result<Vec<T>> {
    if !(h > T::zero()) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let f0 = match f_theta {
        Some(f) => f,
        None => obj.value(theta)?,
    };
    let base = theta.to_vec();
    (0..base.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = base.clone();
            probe[i] = probe[i] + h;
            let f = obj.value(&Theta::from_slice(&probe))?;
            Ok((f - f0) / h)
        })
        .collect()
}
