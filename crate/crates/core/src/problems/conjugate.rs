//! Local (conjugate) variational factors of exponential-family form.
//!
//! For `q(z_n | phi_n)` with natural parameter `eta(phi_n)` and log-partition
//! `a`, the local objective up to a constant is
//!
//! ```text
//! L(phi) = (eta(phi) - c)' grad a(eta(phi)) - a(eta(phi)),   c = [t(x_n); 1] + E[eta_g]
//! ```
//!
//! whose gradient is `J(phi)' hess a(eta(phi)) (eta(phi) - c)`. It vanishes
//! when `eta(phi) = c`, which is the closed-form conjugate update.

use crate::linalg::{dot, sub};

pub trait ExponentialFamily {
    /// `eta(phi)`
    fn natural_params(&self, phi: &[f64]) -> Vec<f64>;

    /// Jacobian `d eta / d phi`, one row per natural parameter.
    fn natural_params_jacobian(&self, phi: &[f64]) -> Vec<Vec<f64>>;

    fn log_partition(&self, eta: &[f64]) -> f64;

    fn log_partition_grad(&self, eta: &[f64]) -> Vec<f64>;

    fn log_partition_hessian(&self, eta: &[f64]) -> Vec<Vec<f64>>;
}

fn target(data_stats: &[f64], expected_global: &[f64]) -> Vec<f64> {
    assert_eq!(data_stats.len(), expected_global.len(), "statistic dimension");
    data_stats
        .iter()
        .zip(expected_global)
        .map(|(a, b)| a + b)
        .collect()
}

/// Local objective `L(phi)` (without its constant).
pub fn conjugate_objective<F: ExponentialFamily + ?Sized>(
    family: &F,
    phi: &[f64],
    data_stats: &[f64],
    expected_global: &[f64],
) -> f64 {
    let eta = family.natural_params(phi);
    let resid = sub(&eta, &target(data_stats, expected_global));
    dot(&resid, &family.log_partition_grad(&eta)) - family.log_partition(&eta)
}

/// Gradient of [`conjugate_objective`] in `phi`.
pub fn conjugate_grad_phi<F: ExponentialFamily + ?Sized>(
    family: &F,
    phi: &[f64],
    data_stats: &[f64],
    expected_global: &[f64],
) -> Vec<f64> {
    let eta = family.natural_params(phi);
    let resid = sub(&eta, &target(data_stats, expected_global));
    let hess = family.log_partition_hessian(&eta);
    let inner: Vec<f64> = hess.iter().map(|row| dot(row, &resid)).collect();
    let jac = family.natural_params_jacobian(phi);
    (0..phi.len())
        .map(|j| jac.iter().zip(&inner).map(|(row, v)| row[j] * v).sum())
        .collect()
}
