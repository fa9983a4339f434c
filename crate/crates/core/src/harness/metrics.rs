use crate::linalg::{dot, norm};
use crate::problems::{blr_grad_terms, lr_stochastic_grad, sigmoid, Batch, Dataset, VariationalParams};

/// Norm of the full-data logistic-regression gradient.
pub fn compute_nog_lr(theta: &[f64], data: &Dataset) -> f64 {
    norm(&lr_stochastic_grad(theta, data, &Batch::full(data.n_samples())))
}

/// Norm of the full-data gradient of the delta objective in `mu`.
pub fn compute_nog_blr(vp: &VariationalParams, data: &Dataset) -> f64 {
    norm(&blr_grad_terms(
        &vp.mu,
        vp.s(),
        vp.s0_inv(),
        data,
        &Batch::full(data.n_samples()),
    ))
}

/// Fraction of rows where `sigmoid(theta' x) >= 0.5` agrees with the label.
/// For the Bayesian model pass the variational mean.
pub fn compute_acc(theta: &[f64], data: &Dataset) -> f64 {
    let hits = data
        .rows()
        .filter(|(x, z)| u8::from(sigmoid(dot(theta, x)) >= 0.5) == *z)
        .count();
    hits as f64 / data.n_samples() as f64
}
