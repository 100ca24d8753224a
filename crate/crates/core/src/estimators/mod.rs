//! Statistical condition estimators.

mod lanczos;
mod pce;
mod ssce;
mod wallis;

pub use lanczos::{sphere_component_quantile, spectral_interval, LinearOperator, NormInterval, MAX_LANCZOS_STEPS};
pub use pce::{estimate_kappa2_pce, PceEstimate, PceOperator};
pub use ssce::{estimate_kappa2_ssce, estimate_kappa_inf_ssce, sample_directions, InfSsceEstimate, SsceConfig};
pub use wallis::wallis;
