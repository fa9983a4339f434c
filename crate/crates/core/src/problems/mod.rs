//! Stochastic objectives: the common interface plus logistic regression and
//! the delta-method Bayesian logistic regression.

mod bayes;
mod conjugate;
mod logistic;

pub use bayes::{
    blr_d_value, blr_delta_objective, blr_grad_terms, blr_hessian_d, blr_stochastic_grad_mu,
    blr_update_s, BayesianLogistic, VariationalParams,
};
pub use conjugate::{conjugate_grad_phi, conjugate_objective, ExponentialFamily};
pub use logistic::{lr_loss, lr_stochastic_grad, LogisticRegression};

use rand::Rng;

use crate::error::{Error, Result};

/// Feature matrix with binary labels. Rows are stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        features: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset must have at least one row".into()));
        }
        if d == 0 || features.len() != n * d {
            return Err(Error::InvalidArgument(format!(
                "feature buffer of length {} does not hold {n} rows of dimension {d}",
                features.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&z| z > 1) {
            return Err(Error::NonBinaryLabels(format!("label value {bad}")));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "feature ({}, {})",
                pos / d,
                pos % d
            )));
        }
        Ok(Self {
            name: name.into(),
            n,
            d,
            features,
            labels,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        Self::new(name, d, rows.concat(), labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], u8)> {
        self.features.chunks_exact(self.d).zip(self.labels.iter().copied())
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            name: self.name.clone(),
            n: indices.len(),
            d: self.d,
            features,
            labels,
        }
    }

    /// Prepends a constant 1 to every row so the first coefficient acts as a bias.
    pub fn with_bias_column(&self) -> Self {
        let d = self.d + 1;
        let mut features = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            features.push(1.0);
            features.extend_from_slice(self.row(i));
        }
        Self {
            name: self.name.clone(),
            n: self.n,
            d,
            features,
            labels: self.labels.clone(),
        }
    }

    /// Applies `x -> (x - mean) / scale` column-wise.
    pub fn standardized_with(&self, mean: &[f64], scale: &[f64]) -> Self {
        let mut out = self.clone();
        for row in out.features.chunks_exact_mut(self.d) {
            for ((v, m), s) in row.iter_mut().zip(mean).zip(scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    /// Column means and standard deviations (zero deviations replaced by 1).
    pub fn column_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let mut mean = vec![0.0; self.d];
        for row in self.features.chunks_exact(self.d) {
            crate::linalg::axpy(1.0 / n, row, &mut mean);
        }
        let mut var = vec![0.0; self.d];
        for row in self.features.chunks_exact(self.d) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        (mean, scale)
    }

    pub fn positive_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&z| z == 1).count() as f64 / self.n as f64
    }
}

/// Distinct row indices forming one mini-batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    indices: Vec<usize>,
}

impl Batch {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() || indices.len() > n {
            return Err(Error::InvalidArgument(format!(
                "batch of size {} for {n} rows",
                indices.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "batch index {i} out of range or repeated"
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn single(i: usize) -> Self {
        Self { indices: vec![i] }
    }

    /// Uniform sample of `m` distinct rows out of `n`.
    pub fn sample<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidArgument(format!("batch size {m} for {n} rows")));
        }
        Ok(Self {
            indices: rand::seq::index::sample(rng, n, m).into_vec(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// An objective `f(x) = E[F(x, xi)]` approximated by a finite sample, with
/// unbiased mini-batch gradients.
pub trait StochasticObjective {
    fn dim(&self) -> usize;

    fn n_samples(&self) -> usize;

    fn stochastic_grad(&self, x: &[f64], batch: &Batch) -> Vec<f64>;

    fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        self.stochastic_grad(x, &Batch::full(self.n_samples()))
    }

    fn full_loss(&self, x: &[f64]) -> f64;

    /// Hook run by the training loop at the end of every interval. Objectives
    /// with auxiliary state (the variational covariance) refresh it here.
    fn refresh(&mut self, _x: &[f64]) -> Result<()> {
        Ok(())
    }
}

pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(u))` without overflow for large `|u|`.
pub fn log_sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        -(-u).exp().ln_1p()
    } else {
        u - u.exp().ln_1p()
    }
}

/// Negative log-likelihood of one labelled sample at margin `u`.
pub(crate) fn logistic_nll(u: f64, z: u8) -> f64 {
    if z == 1 {
        -log_sigmoid(u)
    } else {
        -log_sigmoid(-u)
    }
}
