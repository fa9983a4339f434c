//! Curvature pairs and the damped, regularized gradient difference.

use std::collections::VecDeque;

use super::HyperParams;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, SymMatrix};

/// Scaling `tau = max(y'y / s'y + gamma, beta)`; `beta` when `s'y = 0`.
pub fn initial_scaling(s: &[f64], y: &[f64], hp: &HyperParams) -> f64 {
    let sy = dot(s, y);
    if sy == 0.0 {
        return hp.beta;
    }
    let tau = dot(y, y) / sy + hp.gamma;
    if tau.is_nan() {
        hp.beta
    } else {
        tau.max(hp.beta)
    }
}

/// Damping coefficient for a pair whose initial Hessian guess is `tau * I`.
///
/// Returns 1 when `s'y > 0.2 s'(tau + delta)s + gamma s's`, otherwise the
/// value that puts `s'y~` exactly on `0.2 s'(tau + delta)s`.
pub fn damped_theta(s: &[f64], y: &[f64], tau_next: f64, hp: &HyperParams) -> Result<f64> {
    let ss = dot(s, s);
    if !(ss > 0.0) {
        return Err(Error::InvariantViolation("zero displacement in damping".into()));
    }
    if !(tau_next >= hp.beta) {
        return Err(Error::InvariantViolation(format!(
            "tau = {tau_next} below floor beta = {}",
            hp.beta
        )));
    }
    let sy = dot(s, y);
    let sbs = (tau_next + hp.delta) * ss;
    if sy > 0.2 * sbs + hp.gamma * ss {
        return Ok(1.0);
    }
    let theta = (0.8 * sbs - hp.gamma * ss) / (sbs - sy);
    if !(theta > 0.0 && theta <= 1.0 + 1e-12) {
        return Err(Error::InvariantViolation(format!(
            "damping coefficient {theta} outside (0, 1]"
        )));
    }
    Ok(theta.min(1.0))
}

/// `theta y + (1 - theta)(tau + delta) s - gamma s` for a given `theta`.
pub fn damped_ydiff_with_theta(
    theta: f64,
    s: &[f64],
    y: &[f64],
    tau_next: f64,
    hp: &HyperParams,
) -> Vec<f64> {
    let shift = (1.0 - theta) * (tau_next + hp.delta) - hp.gamma;
    y.iter().zip(s).map(|(yi, si)| theta * yi + shift * si).collect()
}

/// The modified gradient difference `y~` used by the inner update.
pub fn modified_ydiff(pair: &CorrectionPair, hp: &HyperParams) -> Result<Vec<f64>> {
    let theta = damped_theta(&pair.s, &pair.y, pair.tau_next, hp)?;
    let ytil = damped_ydiff_with_theta(theta, &pair.s, &pair.y, pair.tau_next, hp);
    let floor = 0.2 * (pair.tau_next + hp.delta) * dot(&pair.s, &pair.s);
    let sy = dot(&pair.s, &ytil);
    if sy < floor - 1e-12 * floor.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "s'y~ = {sy:e} below damping floor {floor:e}"
        )));
    }
    Ok(ytil)
}

/// Whether naively combining Powell damping (with matrix `b`) and the
/// `y - gamma s` regularization loses positive curvature: `s'(y_bar - gamma s) <= 0`.
pub fn res_update_counterexample_check(s: &[f64], y: &[f64], b: &SymMatrix, gamma: f64) -> bool {
    let bs = b.mul_vec(s);
    let sbs = dot(s, &bs);
    let sy = dot(s, y);
    let theta = if sy <= 0.2 * sbs {
        0.8 * sbs / (sbs - sy)
    } else {
        1.0
    };
    let s_ybar = theta * sy + (1.0 - theta) * sbs;
    s_ybar - gamma * dot(s, s) <= 0.0
}

/// Displacement and gradient difference between two interval averages,
/// with the initial scaling frozen at creation.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub tau_next: f64,
}

impl CorrectionPair {
    pub fn new(s: Vec<f64>, y: Vec<f64>, hp: &HyperParams) -> Result<Self> {
        let tau_next = initial_scaling(&s, &y, hp);
        Self::with_tau(s, y, tau_next)
    }

    pub fn with_tau(s: Vec<f64>, y: Vec<f64>, tau_next: f64) -> Result<Self> {
        if s.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: y.len(),
            });
        }
        if !all_finite(&s) || !all_finite(&y) || !tau_next.is_finite() {
            return Err(Error::NonFinite("correction pair".into()));
        }
        if dot(&s, &s) == 0.0 {
            return Err(Error::InvalidArgument("zero displacement".into()));
        }
        Ok(Self { s, y, tau_next })
    }
}

/// The `M` most recent correction pairs, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsMemory {
    capacity: usize,
    pairs: VecDeque<CorrectionPair>,
}

impl LbfgsMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "memory size must be positive");
        Self {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, pair: CorrectionPair) {
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(pair);
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn newest(&self) -> Option<&CorrectionPair> {
        self.pairs.back()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CorrectionPair> {
        self.pairs.iter()
    }
}
