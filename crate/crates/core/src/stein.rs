//! Exchangeable-pair (Stein) bound on the estimator's design bias.
//!
//! Swapping a uniformly chosen treated unit with a uniformly chosen control
//! makes the assignment an exchangeable pair whose Dirichlet form is
//!
//! ```text
//! Gamma(f)(S) = 1/(2 n1 n0) * sum_{i in S} sum_{j not in S} (swap_delta f)^2
//! ```
//!
//! For any eigenvalue lower bound `lambda` of the swap walk's generator on
//! mean-zero functions, `|E f| <= sqrt(2 E Gamma) / lambda`; the
//! Poincare-style plug-in `lambda_hat = max(gap, E Gamma / Var f)` keeps the
//! bound valid while adapting to the function at hand. All expectations are
//! over the uniform assignment law and are computed either exhaustively
//! (small designs) or by Monte Carlo under explicit budgets.

use rand::Rng;

use crate::error::Result;
use crate::estimators::{Estimator, Population};
use crate::rng::{derive_rng, tags};
use crate::swap::{swap_delta_dim, OlsSwapContext, SwapConfig};
use crate::util;

/// Dirichlet form at one assignment, averaging over every (treated,
/// control) pair.
pub fn gamma_all_pairs(
    pop: &Population,
    est: Estimator,
    treated: &[usize],
    cfg: &SwapConfig,
) -> Result<f64> {
    let n1 = treated.len();
    let n0 = pop.n - n1;
    let control = util::complement(pop.n, treated);
    let mut acc = 0.0;
    match est {
        Estimator::Dim => {
            for &i in treated {
                for &j in &control {
                    let d = swap_delta_dim(pop, n1, i, j);
                    acc += d * d;
                }
            }
        }
        Estimator::OlsRa => {
            let ctx = OlsSwapContext::new(pop, treated, *cfg)?;
            for &i in treated {
                for &j in &control {
                    let d = ctx.swap_delta(i, j)?.value;
                    acc += d * d;
                }
            }
        }
    }
    Ok(acc / (2.0 * n1 as f64 * n0 as f64))
}

/// Dirichlet form estimated from `b_pair` uniformly sampled pairs (used when
/// `n1 * n0` exceeds the pair budget).
pub fn gamma_subsampled(
    pop: &Population,
    est: Estimator,
    treated: &[usize],
    b_pair: usize,
    cfg: &SwapConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    let n1 = treated.len();
    let n0 = pop.n - n1;
    if b_pair >= n1 * n0 {
        return gamma_all_pairs(pop, est, treated, cfg);
    }
    let control = util::complement(pop.n, treated);
    let mut acc = 0.0;
    match est {
        Estimator::Dim => {
            for _ in 0..b_pair {
                let i = treated[rng.random_range(0..n1)];
                let j = control[rng.random_range(0..n0)];
                let d = swap_delta_dim(pop, n1, i, j);
                acc += d * d;
            }
        }
        Estimator::OlsRa => {
            let ctx = OlsSwapContext::new(pop, treated, *cfg)?;
            for _ in 0..b_pair {
                let i = treated[rng.random_range(0..n1)];
                let j = control[rng.random_range(0..n0)];
                let d = ctx.swap_delta(i, j)?.value;
                acc += d * d;
            }
        }
    }
    Ok(acc / (2.0 * b_pair as f64))
}

/// Spectral gap of the one-swap walk on size-`m` subsets of `n` items:
/// `n / (m (n - m))`.
pub fn spectral_gap(n: usize, m: usize) -> f64 {
    assert!(m > 0 && m < n, "subset size must be strictly between 0 and n");
    n as f64 / (m as f64 * (n - m) as f64)
}

/// Bias bound estimate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BiasEstimate {
    /// Estimated `E Gamma`.
    pub e_gamma_hat: f64,
    /// Estimated `Var f` over the assignment law.
    pub var_f_hat: f64,
    /// Estimated mean of `f` (only trustworthy in exhaustive mode).
    pub mean_f_hat: f64,
    /// Plug-in eigenvalue bound `max(gap, E Gamma / Var f)`.
    pub lambda_hat: f64,
    /// Bias bound `sqrt(2 E Gamma) / lambda_hat` (or `|mean f|` when the
    /// function is constant over assignments).
    pub b_star_hat: f64,
    /// Whether every assignment (and pair) was enumerated.
    pub exhaustive: bool,
}

impl BiasEstimate {
    /// A zero bias term (used for the unbiased difference in means when
    /// building intervals).
    pub fn zero() -> Self {
        BiasEstimate {
            e_gamma_hat: 0.0,
            var_f_hat: 0.0,
            mean_f_hat: 0.0,
            lambda_hat: f64::INFINITY,
            b_star_hat: 0.0,
            exhaustive: true,
        }
    }
}

/// Estimate the Stein bias bound for `f(S) = estimate(S) - tau`.
///
/// If the exhaustive workload `C(n, n1) * n1 * n0` is within
/// `exhaustive_threshold` swap evaluations, every assignment and pair is
/// enumerated and the moments are exact; otherwise `b_s` assignments are
/// sampled and each Dirichlet form uses at most `b_pair` pairs.
pub fn mc_bias(
    pop: &Population,
    est: Estimator,
    n1: usize,
    budgets: &crate::martingale::Budgets,
    exhaustive_threshold: u64,
    cfg: &SwapConfig,
    stream_seed: u64,
) -> Result<BiasEstimate> {
    let n = pop.n;
    let n0 = n - n1;
    let workload = util::binomial(n, n1).saturating_mul((n1 * n0) as u128);
    let exhaustive = workload <= exhaustive_threshold as u128;

    let (f_vals, gamma_vals, pop_divisor) = if exhaustive {
        let units: Vec<usize> = (0..n).collect();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        util::for_each_subset(&units, n1, |s| subsets.push(s.to_vec()));
        let results = crate::par::par_map(subsets.len(), |k| -> Result<(f64, f64)> {
            let s = &subsets[k];
            let f = est.estimate(pop, s)? - pop.tau;
            let g = gamma_all_pairs(pop, est, s, cfg)?;
            Ok((f, g))
        });
        let mut fs = Vec::with_capacity(results.len());
        let mut gs = Vec::with_capacity(results.len());
        for r in results {
            let (f, g) = r?;
            fs.push(f);
            gs.push(g);
        }
        (fs, gs, true)
    } else {
        let results = crate::par::par_map(budgets.b_s.max(2), |k| -> Result<(f64, f64)> {
            let mut rng = derive_rng(stream_seed, &[tags::BIAS_ASSIGNMENT, k as u64]);
            let s = crate::rng::sample_subset(&mut rng, n, n1);
            let f = est.estimate(pop, &s)? - pop.tau;
            let mut pair_rng = derive_rng(stream_seed, &[tags::BIAS_PAIR, k as u64]);
            let g = gamma_subsampled(pop, est, &s, budgets.b_pair, cfg, &mut pair_rng)?;
            Ok((f, g))
        });
        let mut fs = Vec::with_capacity(results.len());
        let mut gs = Vec::with_capacity(results.len());
        for r in results {
            let (f, g) = r?;
            fs.push(f);
            gs.push(g);
        }
        (fs, gs, false)
    };

    let e_gamma = util::mean(&gamma_vals);
    let mean_f = util::mean(&f_vals);
    let var_f = if pop_divisor {
        util::pop_variance(&f_vals)
    } else {
        util::sample_variance(&f_vals)
    };
    let gap = spectral_gap(n, n1);
    if var_f <= 0.0 {
        // The estimator is constant over assignments; its bias is exactly
        // that constant (estimated by mean_f).
        return Ok(BiasEstimate {
            e_gamma_hat: e_gamma,
            var_f_hat: 0.0,
            mean_f_hat: mean_f,
            lambda_hat: gap,
            b_star_hat: mean_f.abs(),
            exhaustive,
        });
    }
    let lambda = gap.max(e_gamma / var_f);
    Ok(BiasEstimate {
        e_gamma_hat: e_gamma,
        var_f_hat: var_f,
        mean_f_hat: mean_f,
        lambda_hat: lambda,
        b_star_hat: (2.0 * e_gamma).sqrt() / lambda,
        exhaustive,
    })
}

/// Closed-form `E Gamma` for the difference in means:
/// `n/(n-1) * (Var y1 / n1^2 + Var y0 / n0^2 + 2 Cov / (n1 n0))` with
/// population (divisor `n`) moments.
pub fn dim_expected_gamma_closed_form(pop: &Population, n1: usize) -> f64 {
    let n = pop.n;
    let n0 = n - n1;
    let y1: Vec<f64> = pop.y1.iter().cloned().collect();
    let y0: Vec<f64> = pop.y0.iter().cloned().collect();
    let v1 = util::pop_variance(&y1);
    let v0 = util::pop_variance(&y0);
    let m1 = util::mean(&y1);
    let m0 = util::mean(&y0);
    let cov = (0..n).map(|i| (y1[i] - m1) * (y0[i] - m0)).sum::<f64>() / n as f64;
    n as f64 / (n - 1) as f64
        * (v1 / (n1 * n1) as f64 + v0 / (n0 * n0) as f64 + 2.0 * cov / (n1 * n0) as f64)
}

/// Closed-form Stein bias bound for the difference in means (the walk acts
/// linearly on it, so `lambda = E Gamma / Var f` exactly and the bound is
/// computable without sampling).
pub fn dim_bias_bound_closed_form(pop: &Population, n1: usize) -> f64 {
    let e_gamma = dim_expected_gamma_closed_form(pop, n1);
    // Var f for the difference in means over the uniform assignment law:
    // e_gamma / lambda_lin with lambda_lin = n/(n1 n0).
    let lambda_lin = pop.n as f64 / (n1 * (pop.n - n1)) as f64;
    let var_f = e_gamma / lambda_lin;
    if var_f <= 0.0 {
        return 0.0;
    }
    let lambda = spectral_gap(pop.n, n1).max(e_gamma / var_f);
    (2.0 * e_gamma).sqrt() / lambda
}

/// Verify that the swap walk acts linearly on the difference in means:
/// enumerates all assignments and returns the maximum residual of
/// `P f - f + lambda_lin f` with `lambda_lin = n/(n1 n0)`.
pub fn dim_stein_linearity_check(pop: &Population, n1: usize) -> Result<f64> {
    let n = pop.n;
    let n0 = n - n1;
    let units: Vec<usize> = (0..n).collect();
    let mut worst = 0.0_f64;
    let mut err = None;
    util::for_each_subset(&units, n1, |s| {
        if err.is_some() {
            return;
        }
        let f_s = match Estimator::Dim.estimate(pop, s) {
            Ok(v) => v - pop.tau,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let control = util::complement(n, s);
        let mut acc = 0.0;
        for &i in s {
            for &j in &control {
                acc += f_s + swap_delta_dim(pop, n1, i, j);
            }
        }
        let pf = acc / (n1 * n0) as f64;
        let lambda_lin = n as f64 / (n1 * n0) as f64;
        worst = worst.max((pf - f_s + lambda_lin * f_s).abs());
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(worst)
}
