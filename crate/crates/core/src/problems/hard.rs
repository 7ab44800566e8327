use crate::analysis::rate_q;
use crate::error::{Error, Result};
use crate::numkernel::{q_embed_add, Point};
use crate::problems::chain::ChainComponent;
use crate::problems::finite_sum::{Component, FiniteSumProblem};
use crate::problems::nesterov::{guarded_dim, rho_for_norm, NesterovFunction};
use crate::scalar::Scalar;

/// Per-component chain parameters `(n mu, L - mu + n mu)` of the separable
/// hard instance; their ratio is `kappa_c = 1 + (kappa - 1)/n`.
pub fn component_params<T: Scalar>(n: usize, mu: T, l: T) -> (T, T) {
    let n_mu = T::from_usize_lossy(n) * mu;
    (n_mu, l - mu + n_mu)
}

/// Builds `f(x) = mu/2 ||x||^2 + (1/n) sum_i h_i(Q_i^T x)` with
/// `h_i = N_{n mu, L - mu + n mu} - (n mu / 2)||.||^2` and every component
/// minimizer of norm `gamma / sqrt(n)`, so that `||x*|| = gamma`.
pub fn build_hard_instance<T: Scalar>(
    n: usize,
    mu: T,
    l: T,
    gamma: T,
    dim_per_component: usize,
) -> Result<FiniteSumProblem<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "component count must be positive".into(),
        });
    }
    if !(l > mu) {
        return Err(Error::InvalidParameter {
            name: "L",
            reason: format!("must exceed mu = {mu}, got {l}"),
        });
    }
    let (c_mu, c_l) = component_params(n, mu, l);
    let q = rate_q(l / mu, n)?;
    let required = guarded_dim(q);
    if dim_per_component < required {
        return Err(Error::DimensionTooSmall {
            dim: dim_per_component,
            required,
            reason: format!("per-component tail guard for q = {q}"),
        });
    }
    let gamma_i = gamma / T::from_usize_lossy(n).sqrt();
    let rho = rho_for_norm(gamma_i, q)?;
    let chain = NesterovFunction::new(c_mu, c_l, rho, dim_per_component)?;

    let local_star = chain.minimizer();
    let mut x_star = Point::zeros(n * dim_per_component);
    let mut components: Vec<Box<dyn Component<T>>> = Vec::with_capacity(n);
    for i in 0..n {
        q_embed_add(i, n, local_star.as_slice(), x_star.as_mut_slice());
        components.push(Box::new(ChainComponent::new(i, n, chain, c_mu)));
    }
    FiniteSumProblem::new(mu, l, components)?.with_minimizer(x_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_component_is_the_chain_quadratic() {
        let p = build_hard_instance(1, 1.0, 4.0, 1.0, 64).unwrap();
        let rho = rho_for_norm(1.0, 1.0 / 3.0).unwrap();
        let chain = NesterovFunction::new(1.0, 4.0, rho, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = Point::from_fn(64, |_| rng.random_range(-1.0..1.0));
            let (v, g) = p.value_grad(&x).unwrap();
            assert_relative_eq!(v, chain.value(&x).unwrap(), max_relative = 1e-12);
            assert!(g.distance(&chain.grad(&x).unwrap()) <= 1e-12 * g.norm());
        }
    }

    #[test]
    fn per_component_rate() {
        // n = 4, kappa = 5: kappa_c = 2, q = 3 - 2 sqrt(2)
        let (c_mu, c_l) = component_params(4, 1.0, 5.0);
        assert_eq!((c_mu, c_l), (4.0, 8.0));
        let chain = NesterovFunction::new(c_mu, c_l, 1.0, 64).unwrap();
        assert_relative_eq!(chain.q(), 3.0 - 2.0 * 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn minimizer_has_norm_gamma_and_is_stationary() {
        for (n, kappa, gamma) in [(2usize, 10.0f64, 1.0f64), (8, 101.0, 3.0)] {
            let p = build_hard_instance(n, 1.0, kappa, gamma, 400).unwrap();
            let x = p.minimizer().unwrap();
            assert!((x.norm() - gamma).abs() <= 1e-10);
            let (_, g) = p.value_grad(x).unwrap();
            assert!(g.norm() <= 1e-10 * gamma * kappa);
        }
    }

    #[test]
    fn tail_guard_names_required_dim() {
        let err = build_hard_instance(1, 1.0, 100.0, 1.0, 50).unwrap_err();
        assert!(matches!(err, Error::DimensionTooSmall { required: 138, .. }));
    }
}
