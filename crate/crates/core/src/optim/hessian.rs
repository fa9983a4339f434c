//! Explicit Hessian approximation from the correction memory, plus the
//! spectral bounds that hold for it.

use super::damping::{modified_ydiff, LbfgsMemory};
use super::HyperParams;
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{dot, norm, SymMatrix};

/// `B + y y' / s'y - B s s' B / s'B s + gamma I`.
fn rank_two_update(b: &SymMatrix, s: &[f64], y: &[f64], gamma: f64) -> Result<SymMatrix> {
    ensure_dim(b.dim(), s.len())?;
    ensure_dim(b.dim(), y.len())?;
    let sy = dot(s, y);
    if !(sy > 0.0) {
        return Err(Error::CurvatureNotPositive(sy));
    }
    let bs = b.mul_vec(s);
    let sbs = dot(s, &bs);
    if !(sbs > 0.0) {
        return Err(Error::InvariantViolation(format!("s'Bs = {sbs:e} not positive")));
    }
    let out = SymMatrix::from_fn(b.dim(), |i, j| {
        let diag = if i == j { gamma } else { 0.0 };
        b[(i, j)] + y[i] * y[j] / sy - bs[i] * bs[j] / sbs + diag
    });
    if !out.is_finite() {
        return Err(Error::NonFinite("Hessian approximation".into()));
    }
    Ok(out)
}

/// Textbook BFGS update; requires `s'y > 0`.
pub fn classic_bfgs_update(b: &SymMatrix, s: &[f64], y: &[f64]) -> Result<SymMatrix> {
    rank_two_update(b, s, y, 0.0)
}

/// Full-matrix damped, regularized update: the damping surrogate is
/// `s'(B + delta I)s` instead of the scaled identity used in limited memory.
pub fn damped_regularized_bfgs_update(
    b: &SymMatrix,
    s: &[f64],
    y: &[f64],
    gamma: f64,
    delta: f64,
) -> Result<SymMatrix> {
    ensure_dim(b.dim(), s.len())?;
    let ss = dot(s, s);
    let sbs = b.quad_form(s) + delta * ss;
    let sy = dot(s, y);
    let theta = if sy > 0.2 * sbs + gamma * ss {
        1.0
    } else {
        (0.8 * sbs - gamma * ss) / (sbs - sy)
    };
    let mut bd = b.clone();
    bd.add_diag(delta);
    let bds = bd.mul_vec(s);
    let ytil: Vec<f64> = (0..s.len())
        .map(|i| theta * y[i] + (1.0 - theta) * bds[i] - gamma * s[i])
        .collect();
    rank_two_update(b, s, &ytil, gamma)
}

/// Builds `B_t` by applying every stored pair, oldest first, to `tau_t I`.
///
/// When `hp.curvature_bound` is set, the result is checked against the
/// spectral bounds; a violation is an error.
pub fn build_hessian_approx(memory: &LbfgsMemory, tau_t: f64, hp: &HyperParams) -> Result<SymMatrix> {
    let pair = memory
        .newest()
        .ok_or_else(|| Error::InvalidArgument("empty correction memory".into()))?;
    let mut b = SymMatrix::scaled_identity(pair.s.len(), tau_t);
    for pair in memory.iter() {
        let ytil = modified_ydiff(pair, hp)?;
        b = rank_two_update(&b, &pair.s, &ytil, hp.gamma)?;
    }
    // lambda_min(B) >= gamma, checked as positive definiteness of the shift
    let mut shifted = b.clone();
    shifted.add_diag(-(hp.gamma - 1e-10));
    if let Err(e) = shifted.cholesky() {
        return Err(Error::InvariantViolation(format!(
            "eigenvalue floor gamma = {} violated: {e}",
            hp.gamma
        )));
    }
    if let Some(rho) = hp.curvature_bound {
        let q_u = upper_bound_q_u(rho, hp.beta, hp.gamma, hp.delta, memory.len());
        let mut gap = SymMatrix::scaled_identity(b.dim(), q_u * (1.0 + 1e-12));
        for i in 0..b.dim() {
            for j in 0..=i {
                gap.set(i, j, gap[(i, j)] - b[(i, j)]);
            }
        }
        if gap.cholesky().is_err() {
            return Err(Error::InvariantViolation(format!(
                "largest eigenvalue exceeds Q_U = {q_u:e}"
            )));
        }
        let q_l = lower_bound_q_l(rho, hp.beta, hp.gamma, hp.delta, memory.len());
        let mut low = b.clone();
        low.add_diag(-q_l * (1.0 - 1e-9));
        if low.cholesky().is_err() {
            return Err(Error::InvariantViolation(format!(
                "smallest eigenvalue below Q_L = {q_l:e}"
            )));
        }
    }
    Ok(b)
}

/// Per-pair curvature magnitude `max(|y|/|s|, y'y / s'y)`; a `rho` at least
/// this large over every pair makes the spectral bounds applicable.
pub fn pair_curvature_magnitude(s: &[f64], y: &[f64]) -> f64 {
    let ratio = norm(y) / norm(s);
    let sy = dot(s, y);
    if sy > 0.0 {
        ratio.max(dot(y, y) / sy)
    } else {
        ratio
    }
}

fn q_constant(rho: f64, beta: f64, gamma: f64, delta: f64) -> f64 {
    let a = beta + delta;
    let b = beta + rho + gamma + delta;
    let rg2 = (rho + gamma).powi(2);
    (5.0 * rg2 / a + 5.0 * a).max(5.0 * rg2 / b + 5.0 * b)
}

/// Upper bound on `||B_t||` for `m` stored pairs.
pub fn upper_bound_q_u(rho: f64, beta: f64, gamma: f64, delta: f64, m: usize) -> f64 {
    let q = q_constant(rho, beta, gamma, delta);
    beta + rho + gamma + m as f64 * (q + 5.0 * rho + gamma)
}

/// Lower bound on `lambda_min(B_t)` for `m` stored pairs: the larger of the
/// inverse of the bound on `||B_t^-1||` and `gamma`.
pub fn lower_bound_q_l(rho: f64, beta: f64, gamma: f64, delta: f64, m: usize) -> f64 {
    let q = q_constant(rho, beta, gamma, delta);
    let qr = q + 5.0 * rho;
    let w = (qr / (0.2 * (beta + delta))).sqrt() + 1.0;
    let w2m = w.powi(2 * m as i32);
    let q_tilde = (w2m - 1.0) / (qr + 2.0 * (0.2 * qr * (beta + delta)).sqrt()) + w2m / beta;
    (1.0 / q_tilde).max(gamma)
}
