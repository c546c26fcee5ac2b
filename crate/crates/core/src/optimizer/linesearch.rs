use super::{FeasibleSet, Objective};
use crate::aggregation::Theta;
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum LineSearch<T> {
    Accepted {
        eta: T,
        theta: Theta<T>,
        f: T,
        backtracks: usize,
    },
    Stalled {
        backtracks: usize,
    },
}

/// Point `θ + η d`, with round-off pulled back into `S`.
pub(crate) fn step_point<T: Scalar>(
    theta: &Theta<T>,
    d: &[T],
    eta: T,
    set: &FeasibleSet,
) -> Theta<T> {
    let v: Vec<T> = theta
        .to_vec()
        .iter()
        .zip(d)
        .map(|(t, di)| *t + eta * *di)
        .collect();
    let mut next = Theta::from_slice(&v);
    set.project(&mut next);
    next
}

/// Armijo backtracking: `η = δ^j` for the smallest `j` in
/// `0..=max_backtracks` with `f(θ) - f(θ + η d) >= γ η g̃`.
#[allow(clippy::too_many_arguments)]
pub fn armijo_search<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    theta: &Theta<T>,
    f_theta: T,
    d: &[T],
    g_tilde: T,
    gamma: f64,
    delta: f64,
    max_backtracks: usize,
    set: &FeasibleSet,
) -> Result<LineSearch<T>> {
    let gamma = T::lit(gamma);
    let delta = T::lit(delta);
    let mut eta = T::one();
    for j in 0..=max_backtracks {
        let trial = step_point(theta, d, eta, set);
        let f = obj.value(&trial)?;
        if f_theta - f >= gamma * eta * g_tilde {
            return Ok(LineSearch::Accepted {
                eta,
                theta: trial,
                f,
                backtracks: j,
            });
        }
        eta = eta * delta;
    }
    Ok(LineSearch::Stalled {
        backtracks: max_backtracks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(θ) = ½ (α - c)²`.
    struct AlphaQuad(f64);

    impl Objective<f64> for AlphaQuad {
        fn k(&self) -> usize {
            1
        }
        fn value(&self, theta: &Theta<f64>) -> Result<f64> {
            Ok(0.5 * (theta.alpha - self.0).powi(2))
        }
    }

    struct Flat;

    impl Objective<f64> for Flat {
        fn k(&self) -> usize {
            1
        }
        fn value(&self, _: &Theta<f64>) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn accepts_full_step_on_quadratic() {
        // f(t) = ½ t² from t = 1 along d = -1: g̃ = 1, η = 1 decreases by 0.5.
        let obj = AlphaQuad(0.0);
        let theta = Theta::new(1.0, vec![1.0], 1.0);
        let d = [-1.0, 0.0, 0.0];
        let r = armijo_search(
            &obj,
            &theta,
            0.5,
            &d,
            1.0,
            0.25,
            0.5,
            30,
            &FeasibleSet::default(),
        )
        .unwrap();
        match r {
            LineSearch::Accepted {
                eta, f, backtracks, ..
            } => {
                assert_eq!(eta, 1.0);
                assert_eq!(f, 0.0);
                assert_eq!(backtracks, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backtracks_on_overshoot() {
        // From t = 1 along d = -4: η = 1 lands at -3 (worse), η = 1/2 at -1
        // (no decrease), η = 1/4 at 0.
        let obj = AlphaQuad(0.0);
        let theta = Theta::new(1.0, vec![1.0], 1.0);
        let d = [-4.0, 0.0, 0.0];
        let r = armijo_search(
            &obj,
            &theta,
            0.5,
            &d,
            4.0,
            0.25,
            0.5,
            30,
            &FeasibleSet::default(),
        )
        .unwrap();
        match r {
            LineSearch::Accepted {
                eta, f, backtracks, ..
            } => {
                assert_eq!((eta, backtracks), (0.25, 2));
                assert!(0.5 - f >= 0.25 * eta * 4.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stalls_on_flat_objective() {
        let theta = Theta::new(1.0, vec![1.0], 1.0);
        let r = armijo_search(
            &Flat,
            &theta,
            1.0,
            &[1.0, 0.0, 0.0],
            1.0,
            0.25,
            0.5,
            7,
            &FeasibleSet::default(),
        )
        .unwrap();
        assert_eq!(r, LineSearch::Stalled { backtracks: 7 });
    }
}
