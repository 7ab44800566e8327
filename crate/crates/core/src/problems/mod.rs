//! Concrete objectives: the chain quadratic, the separable hard instance and
//! regularized least squares on sphere data.

mod chain;
mod finite_sum;
mod hard;
mod nesterov;
mod rls;

pub(crate) use chain::chain_eval;
pub use chain::ChainComponent;
pub use finite_sum::{Component, FiniteSumProblem};
pub use hard::{build_hard_instance, component_params};
pub use nesterov::{chain_rate, guarded_dim, rho_for_norm, NesterovFunction, TAIL_GUARD};
pub use rls::{rls_component, sample_sphere_dataset, LossConvention, RlsComponent, RlsDataset, RlsHeader};
