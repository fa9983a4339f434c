//! First-order baselines: plain SGD, robust stochastic approximation (suffix
//! averaging with `r / sqrt(k)` steps), stochastic approximation averaging
//! (Polyak averaging of every iterate) and Adam.

use super::{step_size, HyperParams, Optimizer, StepRule};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{all_finite, axpy};
use crate::problems::{Batch, StochasticObjective};
use crate::rng::{seeded, SeededRng};

fn sampled_grad(
    x: &[f64],
    obj: &dyn StochasticObjective,
    hp: &HyperParams,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    ensure_dim(obj.dim(), x.len())?;
    let batch = Batch::sample(obj.n_samples(), hp.batch_size, rng)?;
    Ok(obj.stochastic_grad(x, &batch))
}

fn check_finite(x: &[f64], k: usize) -> Result<()> {
    if all_finite(x) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("iterate at iteration {k}")))
    }
}

#[derive(Debug, Clone)]
pub struct Sgd {
    x: Vec<f64>,
    k: usize,
    hp: HyperParams,
    rng: SeededRng,
}

impl Sgd {
    pub fn new(x0: Vec<f64>, hp: HyperParams, seed: u64) -> Self {
        Self {
            x: x0,
            k: 0,
            hp,
            rng: seeded(seed),
        }
    }
}

impl Optimizer for Sgd {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()> {
        let g = sampled_grad(&self.x, obj, &self.hp, &mut self.rng)?;
        self.k += 1;
        axpy(-step_size(self.k, &self.hp.step_rule), &g, &mut self.x);
        check_finite(&self.x, self.k)
    }

    fn iterate(&self) -> &[f64] {
        &self.x
    }

    fn iterations(&self) -> usize {
        self.k
    }
}

/// Running average of iterates from a start index on.
#[derive(Debug, Clone)]
struct Average {
    from: usize,
    sum: Vec<f64>,
    count: usize,
}

impl Average {
    fn new(d: usize, from: usize) -> Self {
        Self {
            from,
            sum: vec![0.0; d],
            count: 0,
        }
    }

    fn record(&mut self, k: usize, x: &[f64]) {
        if k >= self.from {
            axpy(1.0, x, &mut self.sum);
            self.count += 1;
        }
    }

    fn value(&self, fallback: &[f64]) -> Vec<f64> {
        if self.count == 0 {
            return fallback.to_vec();
        }
        let inv = 1.0 / self.count as f64;
        self.sum.iter().map(|v| v * inv).collect()
    }
}

/// Robust stochastic approximation: steps `r / sqrt(k)` with `r` taken from
/// the configured rule, reporting the average of iterates from `horizon / 2` on.
#[derive(Debug, Clone)]
pub struct Rsa {
    inner: Sgd,
    avg: Average,
}

impl Rsa {
    pub fn new(x0: Vec<f64>, hp: HyperParams, seed: u64, horizon: usize) -> Self {
        let hp = HyperParams {
            step_rule: StepRule::RoverSqrtK {
                r: hp.step_rule.scale(),
            },
            ..hp
        };
        let avg = Average::new(x0.len(), (horizon / 2).max(1));
        Self {
            inner: Sgd::new(x0, hp, seed),
            avg,
        }
    }
}

impl Optimizer for Rsa {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()> {
        self.inner.step(obj)?;
        self.avg.record(self.inner.k, &self.inner.x);
        Ok(())
    }

    fn iterate(&self) -> &[f64] {
        &self.inner.x
    }

    fn solution(&self) -> Vec<f64> {
        self.avg.value(&self.inner.x)
    }

    fn iterations(&self) -> usize {
        self.inner.k
    }
}

/// SGD with the configured rule, reporting the uniform average of all iterates.
#[derive(Debug, Clone)]
pub struct Saa {
    inner: Sgd,
    avg: Average,
}

impl Saa {
    pub fn new(x0: Vec<f64>, hp: HyperParams, seed: u64) -> Self {
        let avg = Average::new(x0.len(), 1);
        Self {
            inner: Sgd::new(x0, hp, seed),
            avg,
        }
    }
}

impl Optimizer for Saa {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()> {
        self.inner.step(obj)?;
        self.avg.record(self.inner.k, &self.inner.x);
        Ok(())
    }

    fn iterate(&self) -> &[f64] {
        &self.inner.x
    }

    fn solution(&self) -> Vec<f64> {
        self.avg.value(&self.inner.x)
    }

    fn iterations(&self) -> usize {
        self.inner.k
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One bias-corrected Adam update at iteration `k` (from 1).
pub fn adam_step(x: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64], k: usize, alpha: f64) {
    let c1 = 1.0 - ADAM_BETA1.powi(k as i32);
    let c2 = 1.0 - ADAM_BETA2.powi(k as i32);
    for i in 0..x.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
        x[i] -= alpha * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    x: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    k: usize,
    hp: HyperParams,
    rng: SeededRng,
}

impl Adam {
    pub fn new(x0: Vec<f64>, hp: HyperParams, seed: u64) -> Self {
        let d = x0.len();
        Self {
            x: x0,
            m: vec![0.0; d],
            v: vec![0.0; d],
            k: 0,
            hp,
            rng: seeded(seed),
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()> {
        let g = sampled_grad(&self.x, obj, &self.hp, &mut self.rng)?;
        self.k += 1;
        let alpha = step_size(self.k, &self.hp.step_rule);
        adam_step(&mut self.x, &mut self.m, &mut self.v, &g, self.k, alpha);
        check_finite(&self.x, self.k)
    }

    fn iterate(&self) -> &[f64] {
        &self.x
    }

    fn iterations(&self) -> usize {
        self.k
    }
}
