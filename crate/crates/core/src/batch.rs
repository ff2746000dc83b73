//! Data-parallel helpers. With the `parallel` feature (default) the `*_parallel` variants
//! and the dispatching functions use rayon; without it everything runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::policy::VsdsPolicy;
use crate::quaternion::{TangentVector, UnitQuaternion};

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Order-preserving map over independent jobs (scenarios, sample states, ...).
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// `τ_vs` at every state.
pub fn torque_field(policy: &VsdsPolicy, states: &[UnitQuaternion]) -> Vec<Result<TangentVector>> {
    map(states, |q| policy.torque(q))
}

/// Largest `|Σ w̃ − 1|` over the states.
pub fn max_weight_sum_error(policy: &VsdsPolicy, states: &[UnitQuaternion]) -> f64 {
    map(states, |q| {
        (policy.kernel_weights(q).iter().sum::<f64>() - 1.0).abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}
