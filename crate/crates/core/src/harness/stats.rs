//! One-sided paired tests returning `log10 p` for "a beats b".

use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

fn check_paired(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("paired test needs at least one pair".into()));
    }
    Ok(())
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Number of pairs with `a > b`.
pub fn sign_statistic(a: &[f64], b: &[f64]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x > y).count()
}

/// `log10 P(T >= t)` for `T ~ Binomial(n, 1/2)` where `t` counts wins of
/// `a` over `b` and `n` counts all pairs.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<f64> {
    check_paired(a, b)?;
    let n = a.len() as u64;
    let t = sign_statistic(a, b) as u64;
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let ln_p = log_sum_exp((t..=n).map(|i| ln_binomial(n, i) + ln_half_n));
    Ok((ln_p / std::f64::consts::LN_10).min(0.0))
}

/// Ranks of `values` (1-based) with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Signed-rank statistic `T = sum sign(d_i) R_i` over nonzero differences,
/// returned with the (average) ranks used.
pub fn wilcoxon_statistic(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let t = diffs.iter().zip(&ranks).map(|(d, r)| d.signum() * r).sum();
    (t, ranks)
}

/// Below this many nonzero differences the exact null distribution is used.
pub const WILCOXON_EXACT_LIMIT: usize = 20;

/// Right-sided `log10 p` of the signed-rank test.
pub fn wilcoxon_test(a: &[f64], b: &[f64]) -> Result<f64> {
    check_paired(a, b)?;
    let (t, ranks) = wilcoxon_statistic(a, b);
    let n_r = ranks.len();
    if n_r == 0 {
        return Err(Error::AllTies);
    }
    let log10_p = if n_r < WILCOXON_EXACT_LIMIT {
        exact_signed_rank_tail(&ranks, t).log10()
    } else {
        let n = n_r as f64;
        let sigma = (n * (n + 1.0) * (2.0 * n + 1.0) / 6.0).sqrt();
        log10_normal_upper_tail(t / sigma)
    };
    Ok(log10_p.min(0.0))
}

/// `P(T >= t)` when each rank's sign is an independent fair coin.
fn exact_signed_rank_tail(ranks: &[f64], t: f64) -> f64 {
    // average ranks are multiples of 1/2, so doubled ranks are integers
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    // T = 2 W+ - sum(R), with W+ the positive-rank sum; in doubled units
    let w2_obs = (2.0 * t + total as f64) / 2.0;
    let threshold = (w2_obs - 1e-9).ceil().max(0.0) as usize;
    let tail: f64 = counts.iter().skip(threshold).sum();
    tail / 2f64.powi(ranks.len() as i32)
}

fn log10_normal_upper_tail(z: f64) -> f64 {
    let p = 0.5 * erfc(z / std::f64::consts::SQRT_2);
    if p > 0.0 {
        return p.log10();
    }
    // Mills-ratio asymptote once the tail underflows
    let ln_p = -0.5 * z * z - (z * (2.0 * std::f64::consts::PI).sqrt()).ln();
    ln_p / std::f64::consts::LN_10
}
