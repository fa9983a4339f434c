//! Delta-method variational inference for Bayesian logistic regression.
//!
//! The posterior over the weights is approximated by `N(mu, S)` under a
//! zero-mean Gaussian prior `N(0, S0)`. With the per-sample-averaged
//!
//! ```text
//! d(theta) = (1/N) sum_n nll_n(theta) + (1/N) * 0.5 * theta' S0^-1 theta
//! ```
//!
//! the minimized objective is `d(mu) + 0.5 * (Tr[hess d(mu) S] - log det S)`.
//! Its gradient in `mu` picks up a third-derivative term through the trace,
//! and its minimizer in `S` is `hess d(mu)^-1`.

use super::{logistic_nll, sigmoid, Batch, Dataset, StochasticObjective};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{axpy, dot, SymMatrix};

/// Variational mean and covariance together with the prior covariance.
#[derive(Debug, Clone)]
pub struct VariationalParams {
    pub mu: Vec<f64>,
    s: SymMatrix,
    s0: SymMatrix,
    s0_inv: SymMatrix,
}

impl VariationalParams {
    pub fn new(mu: Vec<f64>, s: SymMatrix, s0: SymMatrix) -> Result<Self> {
        ensure_dim(mu.len(), s.dim())?;
        ensure_dim(mu.len(), s0.dim())?;
        s.cholesky()?;
        let s0_inv = s0.cholesky()?.inverse();
        Ok(Self { mu, s, s0, s0_inv })
    }

    /// `mu` with identity covariance and identity prior.
    pub fn standard(mu: Vec<f64>) -> Self {
        let d = mu.len();
        Self {
            mu,
            s: SymMatrix::identity(d),
            s0: SymMatrix::identity(d),
            s0_inv: SymMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    pub fn s0(&self) -> &SymMatrix {
        &self.s0
    }

    pub fn s0_inv(&self) -> &SymMatrix {
        &self.s0_inv
    }

    pub fn set_s(&mut self, s: SymMatrix) -> Result<()> {
        ensure_dim(self.dim(), s.dim())?;
        s.cholesky()?;
        self.s = s;
        Ok(())
    }
}

/// Batch-averaged logistic loss plus the `1/N`-scaled Gaussian prior term.
pub fn blr_d_value(theta: &[f64], vp: &VariationalParams, data: &Dataset, batch: &Batch) -> f64 {
    assert_eq!(theta.len(), data.dim(), "parameter dimension");
    let nll: f64 = batch
        .indices()
        .iter()
        .map(|&i| logistic_nll(dot(theta, data.row(i)), data.label(i)))
        .sum();
    let prior = 0.5 * vp.s0_inv.quad_form(theta) / data.n_samples() as f64;
    nll / batch.len() as f64 + prior
}

/// Mini-batch gradient of the delta objective in `mu` from raw pieces.
///
/// `s` need not be positive definite here; passing the zero matrix drops the
/// curvature term and leaves the logistic gradient plus the prior term.
pub fn blr_grad_terms(
    mu: &[f64],
    s: &SymMatrix,
    s0_inv: &SymMatrix,
    data: &Dataset,
    batch: &Batch,
) -> Vec<f64> {
    assert_eq!(mu.len(), data.dim(), "parameter dimension");
    let mut g = vec![0.0; data.dim()];
    for &i in batch.indices() {
        let x = data.row(i);
        let p = sigmoid(dot(mu, x));
        let third = p * (1.0 - p) * (1.0 - 2.0 * p);
        let coef = (p - f64::from(data.label(i))) + 0.5 * third * s.quad_form(x);
        axpy(coef, x, &mut g);
    }
    let inv_m = 1.0 / batch.len() as f64;
    g.iter_mut().for_each(|v| *v *= inv_m);
    let prior = s0_inv.mul_vec(mu);
    axpy(1.0 / data.n_samples() as f64, &prior, &mut g);
    g
}

pub fn blr_stochastic_grad_mu(vp: &VariationalParams, data: &Dataset, batch: &Batch) -> Vec<f64> {
    blr_grad_terms(&vp.mu, &vp.s, &vp.s0_inv, data, batch)
}

/// `hess d(mu) = (1/N) [sum_n p_n (1 - p_n) x_n x_n' + S0^-1]`.
pub fn blr_hessian_d(mu: &[f64], s0_inv: &SymMatrix, data: &Dataset) -> SymMatrix {
    let d = data.dim();
    let mut lower = vec![0.0; d * d];
    for (x, _) in data.rows() {
        let p = sigmoid(dot(mu, x));
        let w = p * (1.0 - p);
        for i in 0..d {
            let wxi = w * x[i];
            let row = &mut lower[i * d..i * d + i + 1];
            for (r, xj) in row.iter_mut().zip(x) {
                *r += wxi * xj;
            }
        }
    }
    let inv_n = 1.0 / data.n_samples() as f64;
    SymMatrix::from_fn(d, |i, j| (lower[i * d + j] + s0_inv[(i, j)]) * inv_n)
}

/// Full-data delta objective `d(mu) + 0.5 (Tr[hess d(mu) S] - log det S)`.
pub fn blr_delta_objective(vp: &VariationalParams, data: &Dataset) -> Result<f64> {
    let chol = vp.s.cholesky()?;
    let d_mu = blr_d_value(&vp.mu, vp, data, &Batch::full(data.n_samples()));
    let hess = blr_hessian_d(&vp.mu, &vp.s0_inv, data);
    Ok(d_mu + 0.5 * (hess.trace_product(&vp.s) - chol.log_det()))
}

/// Closed-form minimizer of the delta objective in `S`: `hess d(mu)^-1`.
pub fn blr_update_s(vp: &VariationalParams, data: &Dataset) -> Result<SymMatrix> {
    let hess = blr_hessian_d(&vp.mu, &vp.s0_inv, data);
    Ok(hess.cholesky()?.inverse())
}

/// The delta objective as a function of `mu`, with `S` refreshed through
/// [`StochasticObjective::refresh`].
#[derive(Debug, Clone)]
pub struct BayesianLogistic<'a> {
    data: &'a Dataset,
    vp: VariationalParams,
}

impl<'a> BayesianLogistic<'a> {
    pub fn new(data: &'a Dataset, vp: VariationalParams) -> Result<Self> {
        ensure_dim(data.dim(), vp.dim())?;
        Ok(Self { data, vp })
    }

    pub fn params(&self) -> &VariationalParams {
        &self.vp
    }

    /// Variational parameters with the mean replaced by `mu`.
    pub fn params_at(&self, mu: &[f64]) -> VariationalParams {
        let mut vp = self.vp.clone();
        vp.mu = mu.to_vec();
        vp
    }
}

impl StochasticObjective for BayesianLogistic<'_> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn n_samples(&self) -> usize {
        self.data.n_samples()
    }

    fn stochastic_grad(&self, x: &[f64], batch: &Batch) -> Vec<f64> {
        blr_grad_terms(x, &self.vp.s, &self.vp.s0_inv, self.data, batch)
    }

    fn full_loss(&self, x: &[f64]) -> f64 {
        blr_delta_objective(&self.params_at(x), self.data).unwrap_or(f64::NAN)
    }

    fn refresh(&mut self, x: &[f64]) -> Result<()> {
        let s = blr_update_s(&self.params_at(x), self.data)?;
        if !s.is_finite() {
            return Err(Error::NonFinite("variational covariance".into()));
        }
        self.vp.set_s(s)?;
        self.vp.mu = x.to_vec();
        Ok(())
    }
}
