use super::{logistic_nll, sigmoid, Batch, Dataset, StochasticObjective};
use crate::linalg::{axpy, dot};

/// Mean negative log-likelihood of the logistic model over `batch`.
pub fn lr_loss(theta: &[f64], data: &Dataset, batch: &Batch) -> f64 {
    assert_eq!(theta.len(), data.dim(), "parameter dimension");
    let total: f64 = batch
        .indices()
        .iter()
        .map(|&i| logistic_nll(dot(theta, data.row(i)), data.label(i)))
        .sum();
    total / batch.len() as f64
}

/// Gradient of [`lr_loss`]: `-(1/m) sum (z_n - sigmoid(theta' x_n)) x_n`.
pub fn lr_stochastic_grad(theta: &[f64], data: &Dataset, batch: &Batch) -> Vec<f64> {
    assert_eq!(theta.len(), data.dim(), "parameter dimension");
    let mut g = vec![0.0; data.dim()];
    for &i in batch.indices() {
        let x = data.row(i);
        let coef = sigmoid(dot(theta, x)) - f64::from(data.label(i));
        axpy(coef, x, &mut g);
    }
    let inv_m = 1.0 / batch.len() as f64;
    g.iter_mut().for_each(|v| *v *= inv_m);
    g
}

/// Logistic regression over a borrowed dataset.
#[derive(Debug, Clone, Copy)]
pub struct LogisticRegression<'a> {
    data: &'a Dataset,
}

impl<'a> LogisticRegression<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }
}

impl StochasticObjective for LogisticRegression<'_> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn n_samples(&self) -> usize {
        self.data.n_samples()
    }

    fn stochastic_grad(&self, x: &[f64], batch: &Batch) -> Vec<f64> {
        lr_stochastic_grad(x, self.data, batch)
    }

    fn full_loss(&self, x: &[f64]) -> f64 {
        lr_loss(x, self.data, &Batch::full(self.data.n_samples()))
    }
}
