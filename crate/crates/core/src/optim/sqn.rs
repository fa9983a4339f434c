//! The stochastic quasi-Newton loop with interval-averaged curvature pairs.

use super::damping::{CorrectionPair, LbfgsMemory};
use super::hessian::build_hessian_approx;
use super::{step_size, HyperParams, Optimizer};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{all_finite, axpy, dot, norm, sub, Cholesky, SymMatrix};
use crate::problems::{Batch, StochasticObjective};
use crate::rng::{seeded, SeededRng};

#[derive(Debug, Clone)]
pub struct SqnState {
    pub x: Vec<f64>,
    /// Completed iterations.
    pub k: usize,
    /// Completed averaging intervals.
    pub t: usize,
    interval_sum: Vec<f64>,
    prev_avg: Vec<f64>,
    memory: LbfgsMemory,
    hessian: Option<SymMatrix>,
    factor: Option<Cholesky>,
    rng: SeededRng,
}

impl SqnState {
    pub fn new(x0: Vec<f64>, hp: &HyperParams, seed: u64) -> Self {
        let d = x0.len();
        Self {
            prev_avg: x0.clone(),
            x: x0,
            k: 0,
            t: 0,
            interval_sum: vec![0.0; d],
            memory: LbfgsMemory::new(hp.memory),
            hessian: None,
            factor: None,
            rng: seeded(seed),
        }
    }

    pub fn memory(&self) -> &LbfgsMemory {
        &self.memory
    }

    /// Current Hessian approximation, once one has been built.
    pub fn hessian(&self) -> Option<&SymMatrix> {
        self.hessian.as_ref()
    }

    fn close_interval(&mut self, obj: &dyn StochasticObjective, hp: &HyperParams) -> Result<()> {
        let inv_l = 1.0 / hp.interval as f64;
        let avg: Vec<f64> = self.interval_sum.iter().map(|v| v * inv_l).collect();
        self.interval_sum.iter_mut().for_each(|v| *v = 0.0);
        let s = sub(&avg, &self.prev_avg);
        let batch = Batch::sample(obj.n_samples(), hp.batch_size, &mut self.rng)?;
        let y = sub(&obj.stochastic_grad(&avg, &batch), &obj.stochastic_grad(&self.prev_avg, &batch));
        let negligible = norm(&s) <= 1e-14 * (1.0 + norm(&avg));
        if !negligible && all_finite(&s) && all_finite(&y) {
            self.memory.push(CorrectionPair::new(s, y, hp)?);
        }
        self.prev_avg = avg;
        self.t += 1;
        if self.t > 1 {
            if let Some(newest) = self.memory.newest() {
                let b = build_hessian_approx(&self.memory, newest.tau_next, hp)?;
                self.factor = Some(b.cholesky()?);
                self.hessian = Some(b);
            }
        }
        Ok(())
    }
}

/// One iteration of the damped, regularized stochastic L-BFGS method.
pub fn sdreg_lbfgs_step(state: &mut SqnState, obj: &dyn StochasticObjective, hp: &HyperParams) -> Result<()> {
    ensure_dim(obj.dim(), state.x.len())?;
    let eta = step_size(state.k + 1, &hp.step_rule);
    let batch = Batch::sample(obj.n_samples(), hp.batch_size, &mut state.rng)?;
    let g = obj.stochastic_grad(&state.x, &batch);
    axpy(1.0, &state.x, &mut state.interval_sum);
    let direction = match (&state.factor, state.t >= 2) {
        (Some(factor), true) => {
            let dir = factor.solve(&g)?;
            let slope = dot(&g, &dir);
            if !(slope > 0.0) && dot(&g, &g) > 0.0 {
                return Err(Error::InvariantViolation(format!(
                    "quasi-Newton direction is not a descent direction (g'd = {slope:e})"
                )));
            }
            dir
        }
        _ => g,
    };
    axpy(-eta, &direction, &mut state.x);
    if !all_finite(&state.x) {
        return Err(Error::NonFinite(format!("iterate at iteration {}", state.k + 1)));
    }
    state.k += 1;
    if state.k % hp.interval == 0 {
        state.close_interval(obj, hp)?;
    }
    Ok(())
}

/// The same loop with `gamma = delta = 0`, i.e. Powell damping only.
pub fn sdlbfgs_step(state: &mut SqnState, obj: &dyn StochasticObjective, hp: &HyperParams) -> Result<()> {
    sdreg_lbfgs_step(state, obj, &hp.without_regularization())
}

#[derive(Debug, Clone)]
pub struct SdRegLbfgs {
    state: SqnState,
    hp: HyperParams,
}

impl SdRegLbfgs {
    pub fn new(x0: Vec<f64>, hp: HyperParams, seed: u64) -> Self {
        Self {
            state: SqnState::new(x0, &hp, seed),
            hp,
        }
    }

    pub fn state(&self) -> &SqnState {
        &self.state
    }

    pub fn hyper_params(&self) -> &HyperParams {
        &self.hp
    }
}

impl Optimizer for SdRegLbfgs {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()> {
        sdreg_lbfgs_step(&mut self.state, obj, &self.hp)
    }

    fn iterate(&self) -> &[f64] {
        &self.state.x
    }

    fn iterations(&self) -> usize {
        self.state.k
    }
}
