use super::FeasibleSet;
use crate::aggregation::Theta;
use crate::scalar::Scalar;

/// Linear minimization over `S`, solved block by block.
///
/// `α̂ = -a` if `∂_α > 0` else `a`; `λ̂ = l0` if `∂_λ > 0` else `l1`;
/// `β̂ = e_j` for the smallest-index minimizer `j` of `∂_β`.
/// Returns the vertex and the direction `d = θ̂ - θ`.
pub fn lmo<T: Scalar>(grad: &[T], set: &FeasibleSet, theta: &Theta<T>) -> (Theta<T>, Vec<T>) {
    let k = theta.k();
    assert_eq!(grad.len(), k + 2, "gradient length must be K + 2");
    let alpha = if grad[0] > T::zero() { -set.a } else { set.a };
    let lambda = if grad[k + 1] > T::zero() {
        set.l0
    } else {
        set.l1
    };
    let mut best = 0;
    for j in 1..k {
        if grad[1 + j] < grad[1 + best] {
            best = j;
        }
    }
    let mut beta = vec![T::zero(); k];
    beta[best] = T::one();
    let vertex = Theta::new(T::lit(alpha), beta, T::lit(lambda));
    let direction = vertex
        .to_vec()
        .iter()
        .zip(theta.to_vec())
        .map(|(v, t)| *v - t)
        .collect();
    (vertex, direction)
}
