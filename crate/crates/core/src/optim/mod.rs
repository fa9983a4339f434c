//! Stochastic optimizers.
//!
//! [`SdRegLbfgs`] is the damped, regularized limited-memory BFGS method with
//! averaged-iterate curvature pairs. Setting `gamma = delta = 0` turns it into
//! the Powell-damped baseline. The first-order baselines live in
//! [`baselines`].

pub mod baselines;
mod damping;
mod hessian;
mod sqn;

pub use baselines::{adam_step, Adam, Rsa, Saa, Sgd};
pub use damping::{
    damped_theta, damped_ydiff_with_theta, initial_scaling, modified_ydiff,
    res_update_counterexample_check, CorrectionPair, LbfgsMemory,
};
pub use hessian::{
    build_hessian_approx, classic_bfgs_update, damped_regularized_bfgs_update, lower_bound_q_l,
    pair_curvature_magnitude, upper_bound_q_u,
};
pub use sqn::{sdlbfgs_step, sdreg_lbfgs_step, SdRegLbfgs, SqnState};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problems::StochasticObjective;

/// Step-size schedules. `k` counts iterations from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `r / k`
    RoverK { r: f64 },
    /// `r / sqrt(k)`
    RoverSqrtK { r: f64 },
    /// `eta0 / Q_U / (k^upsilon + (L_f / 2) eta0 / Q_L^2)`
    Theorem1 {
        eta0: f64,
        upsilon: f64,
        q_upper: f64,
        q_lower: f64,
        lipschitz: f64,
    },
    Constant { alpha: f64 },
}

impl StepRule {
    /// Theorem-1 schedule with `Q_U`, `Q_L` from the spectral bounds for a
    /// curvature bound `rho`, and `L_f` estimated as `rho`.
    pub fn theorem1(eta0: f64, upsilon: f64, rho: f64, hp: &HyperParams) -> Self {
        StepRule::Theorem1 {
            eta0,
            upsilon,
            q_upper: upper_bound_q_u(rho, hp.beta, hp.gamma, hp.delta, hp.memory),
            q_lower: lower_bound_q_l(rho, hp.beta, hp.gamma, hp.delta, hp.memory),
            lipschitz: rho,
        }
    }

    /// The leading constant (`r`, `eta0` or `alpha`).
    pub fn scale(&self) -> f64 {
        match *self {
            StepRule::RoverK { r } | StepRule::RoverSqrtK { r } => r,
            StepRule::Theorem1 { eta0, .. } => eta0,
            StepRule::Constant { alpha } => alpha,
        }
    }
}

pub fn step_size(k: usize, rule: &StepRule) -> f64 {
    assert!(k >= 1, "step index starts at 1");
    let kf = k as f64;
    match *rule {
        StepRule::RoverK { r } => r / kf,
        StepRule::RoverSqrtK { r } => r / kf.sqrt(),
        StepRule::Theorem1 {
            eta0,
            upsilon,
            q_upper,
            q_lower,
            lipschitz,
        } => (eta0 / q_upper) / (kf.powf(upsilon) + 0.5 * lipschitz * eta0 / (q_lower * q_lower)),
        StepRule::Constant { alpha } => alpha,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Eigenvalue floor added by every inner update.
    pub gamma: f64,
    /// Diagonal shift inside the damping surrogate.
    pub delta: f64,
    /// Floor on the initial scaling `tau`.
    pub beta: f64,
    pub memory: usize,
    /// Iterations per averaging interval.
    pub interval: usize,
    pub batch_size: usize,
    pub step_rule: StepRule,
    /// Optional bound `rho` on per-sample Hessian norms; when set, every
    /// rebuilt approximation is checked against `Q_U` and `Q_L`.
    pub curvature_bound: Option<f64>,
}

impl Default for HyperParams {
    fn default() -> Self {
        let gamma = 1e-4;
        Self {
            gamma,
            delta: 1.25 * gamma + 0.01,
            beta: 0.01,
            memory: 10,
            interval: 10,
            batch_size: 20,
            step_rule: StepRule::RoverK { r: 7.0 },
            curvature_bound: None,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma >= 0.0 && self.delta >= 0.0) {
            return bad(format!("gamma = {}, delta = {} must be non-negative", self.gamma, self.delta));
        }
        let powell_limit = self.gamma == 0.0 && self.delta == 0.0;
        if !powell_limit && !(0.8 * self.delta > self.gamma) {
            return bad(format!(
                "need 0.8 delta > gamma, got delta = {}, gamma = {}",
                self.delta, self.gamma
            ));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta = {} must be positive", self.beta));
        }
        if self.memory == 0 || self.interval == 0 || self.batch_size == 0 {
            return bad("memory, interval and batch size must be positive".into());
        }
        if let StepRule::Theorem1 { upsilon, .. } = self.step_rule {
            if !(upsilon > 0.5 && upsilon < 1.0) {
                return bad(format!("upsilon = {upsilon} must lie in (0.5, 1)"));
            }
        }
        if !(self.step_rule.scale() > 0.0) {
            return bad("step constant must be positive".into());
        }
        Ok(())
    }

    /// Same settings with the regularization removed (`gamma = delta = 0`),
    /// which reduces the damping to Powell's rule.
    pub fn without_regularization(&self) -> Self {
        Self {
            gamma: 0.0,
            delta: 0.0,
            ..self.clone()
        }
    }
}

/// One optimizer run over a fixed objective.
pub trait Optimizer {
    fn step(&mut self, obj: &dyn StochasticObjective) -> Result<()>;

    /// Current iterate.
    fn iterate(&self) -> &[f64];

    /// Reported solution estimate. Averaging methods override this.
    fn solution(&self) -> Vec<f64> {
        self.iterate().to_vec()
    }

    fn iterations(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SdRegLbfgs,
    SdLbfgs,
    Sgd,
    Rsa,
    Saa,
    Adam,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::SdRegLbfgs,
        Algorithm::SdLbfgs,
        Algorithm::Sgd,
        Algorithm::Rsa,
        Algorithm::Saa,
        Algorithm::Adam,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::SdRegLbfgs => "sdreg_lbfgs",
            Algorithm::SdLbfgs => "sdlbfgs",
            Algorithm::Sgd => "sgd",
            Algorithm::Rsa => "rsa",
            Algorithm::Saa => "saa",
            Algorithm::Adam => "adam",
        }
    }

    /// Instantiates the optimizer. `horizon` is the planned iteration count
    /// (used by suffix averaging); `adam_alpha` is Adam's constant step.
    pub fn build(
        &self,
        x0: Vec<f64>,
        hp: &HyperParams,
        seed: u64,
        horizon: usize,
        adam_alpha: f64,
    ) -> Result<Box<dyn Optimizer + Send>> {
        hp.validate()?;
        Ok(match self {
            Algorithm::SdRegLbfgs => Box::new(SdRegLbfgs::new(x0, hp.clone(), seed)),
            Algorithm::SdLbfgs => Box::new(SdRegLbfgs::new(x0, hp.without_regularization(), seed)),
            Algorithm::Sgd => Box::new(Sgd::new(x0, hp.clone(), seed)),
            Algorithm::Rsa => Box::new(Rsa::new(x0, hp.clone(), seed, horizon)),
            Algorithm::Saa => Box::new(Saa::new(x0, hp.clone(), seed)),
            Algorithm::Adam => {
                let mut adam_hp = hp.clone();
                adam_hp.step_rule = StepRule::Constant { alpha: adam_alpha };
                Box::new(Adam::new(x0, adam_hp, seed))
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}
