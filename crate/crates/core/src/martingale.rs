//! Sequential-reveal martingale analysis of an ATE estimator.
//!
//! Fix an assignment drawn as the first `n1` entries of a uniform
//! permutation. Revealing treated units one at a time generates a Doob
//! martingale for `f(S1) = tau_hat(S1) - tau`, whose increments can be
//! written in terms of one-swap sensitivities: at step `t` the increment is
//! `-alpha_t` times a conditional swap average, where
//! `alpha_t = n0 / (n - t + 1)`.
//!
//! The per-step influence of a candidate unit `i` is
//!
//! ```text
//! zeta_t(i) = E[ swap_delta(i, J) of f at the proxy set S(i, T) ]
//! ```
//!
//! with `T` a uniform completion of the treated set from the remaining pool
//! minus `i`, and `J` uniform over the remaining controls. The concentration
//! parameters are `V* = sum_t alpha_t^2 Var_i(zeta_t(i))` over the pool and
//! `R* = max_t alpha_t max_i |zeta_t(i)|`; plugging them into a Freedman
//! inequality yields a finite-sample deviation radius.
//!
//! This module provides exact closed forms for the difference in means, a
//! Rao-Blackwellized Monte Carlo estimator for the adjusted estimator
//! (exact average over the control index `J`, sampling only over `T`), the
//! empirical benchmarks used in the experiments, and the radius itself.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::{Estimator, Population};
use crate::rng::{derive_rng, sample_from, tags};
use crate::swap::{swap_delta_dim, OlsSwapContext, SwapConfig};
use crate::util;

/// A reveal order: a permutation of `0..n` whose first `n1` entries are the
/// treated units.
#[derive(Debug, Clone)]
pub struct RevealOrder {
    pi: Vec<usize>,
    n1: usize,
}

impl RevealOrder {
    pub fn new(pi: Vec<usize>, n1: usize) -> Result<Self> {
        let n = pi.len();
        if n1 == 0 || n1 >= n {
            return Err(Error::invalid("reveal order needs 0 < n1 < n"));
        }
        let mut seen = vec![false; n];
        for &u in &pi {
            if u >= n || seen[u] {
                return Err(Error::invalid("reveal order must be a permutation of 0..n"));
            }
            seen[u] = true;
        }
        Ok(RevealOrder { pi, n1 })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn permutation(&self) -> &[usize] {
        &self.pi
    }

    /// Sorted treated set (first `n1` revealed units).
    pub fn treated(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.pi[..self.n1].to_vec();
        s.sort_unstable();
        s
    }

    /// The unit revealed at step `t` (1-based).
    pub fn revealed_at(&self, t: usize) -> usize {
        assert!((1..=self.n1).contains(&t), "step out of range");
        self.pi[t - 1]
    }

    /// State just before step `t` (1-based): units revealed so far and the
    /// remaining pool, plus the step weight `alpha_t`.
    pub fn state(&self, t: usize) -> RevealState {
        assert!((1..=self.n1).contains(&t), "step out of range");
        let n = self.pi.len();
        let past: Vec<usize> = self.pi[..t - 1].to_vec();
        let mut in_past = vec![false; n];
        for &u in &past {
            in_past[u] = true;
        }
        let pool: Vec<usize> = (0..n).filter(|&u| !in_past[u]).collect();
        let n0 = n - self.n1;
        RevealState {
            t,
            alpha: n0 as f64 / (n - t + 1) as f64,
            remaining_slots: self.n1 - t + 1,
            past,
            pool,
        }
    }
}

/// Pre-step state for one reveal step.
#[derive(Debug, Clone)]
pub struct RevealState {
    pub t: usize,
    /// `alpha_t = n0 / (n - t + 1)`.
    pub alpha: f64,
    /// Treated slots still to fill, `n1 - t + 1`.
    pub remaining_slots: usize,
    /// Units revealed before step `t` (reveal order).
    pub past: Vec<usize>,
    /// Remaining pool `R_{t-1}`, sorted.
    pub pool: Vec<usize>,
}

// ======================================================================
// Exact influences (difference in means) and enumerated influences
// ======================================================================

/// Exact step influence for the difference in means. The swap sensitivity
/// does not depend on the proxy set, so the conditional average collapses to
/// a mean over the pool excluding `i`.
pub fn zeta_exact_dim(pop: &Population, pool: &[usize], n1: usize, i: usize) -> f64 {
    let n0 = pop.n - n1;
    let others: Vec<usize> = pool.iter().cloned().filter(|&u| u != i).collect();
    let m1 = others.iter().map(|&u| pop.y1[u]).sum::<f64>() / others.len() as f64;
    let m0 = others.iter().map(|&u| pop.y0[u]).sum::<f64>() / others.len() as f64;
    (m1 - pop.y1[i]) / n1 as f64 + (m0 - pop.y0[i]) / n0 as f64
}

/// Exact step influence by full enumeration over completions `T` and control
/// indices `J`. Exponential cost; intended for small-`n` oracles.
pub fn zeta_exact_enum(
    pop: &Population,
    est: Estimator,
    past: &[usize],
    pool: &[usize],
    n1: usize,
    i: usize,
    cfg: &SwapConfig,
) -> Result<f64> {
    if est == Estimator::Dim {
        return Ok(zeta_exact_dim(pop, pool, n1, i));
    }
    let slots = n1 - past.len();
    let rest: Vec<usize> = pool.iter().cloned().filter(|&u| u != i).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut err = None;
    util::for_each_subset(&rest, slots - 1, |t_set| {
        if err.is_some() {
            return;
        }
        let mut prox: Vec<usize> = past.iter().cloned().chain([i]).chain(t_set.iter().cloned()).collect();
        prox.sort_unstable();
        match proxy_swap_average(pop, &prox, i, None, cfg) {
            Ok((mean, _)) => {
                total += mean;
                count += 1;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total / count as f64)
}

/// Average (and per-`J` values) of the swap sensitivity of `i` against every
/// feasible control `J` at a fixed proxy treated set. When `restrict_max` is
/// given, also returns the max of `|delta|` over `J` in that set.
fn proxy_swap_average(
    pop: &Population,
    prox: &[usize],
    i: usize,
    restrict_max: Option<&[bool]>,
    cfg: &SwapConfig,
) -> Result<(f64, f64)> {
    let ctx = OlsSwapContext::new(pop, prox, cfg.clone())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut mx = 0.0_f64;
    for &j in &ctx.control {
        let d = ctx.swap_delta(i, j)?.value;
        sum += d;
        count += 1;
        if restrict_max.map(|mask| mask[j]).unwrap_or(false) {
            mx = mx.max(d.abs());
        }
    }
    Ok((sum / count as f64, mx))
}

// ======================================================================
// Monte Carlo variance / range estimation
// ======================================================================

/// Budgets for the Monte Carlo concentration and bias estimators.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Budgets {
    /// Assignments drawn for the bias estimate.
    pub b_s: usize,
    /// Swap pairs per assignment for the bias estimate.
    pub b_pair: usize,
    /// Per-step cap on the number of pool units whose influence is estimated.
    pub b_i: usize,
    /// Completions sampled per influence estimate.
    pub b_cond: usize,
}

impl Budgets {
    pub const FULL: Budgets = Budgets { b_s: 100, b_pair: 200, b_i: 10, b_cond: 20 };
    pub const DESK: Budgets = Budgets { b_s: 30, b_pair: 100, b_i: 5, b_cond: 8 };
}

/// Configuration for [`mc_var_range`] and the surrogate diagnostics.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub budgets: Budgets,
    /// Subtract the within-influence Monte Carlo variance from the across-
    /// unit variance (debiases the variance estimate upward noise).
    pub denoise_v: bool,
    /// Inflate the range estimate into a high-probability upper bound.
    pub ucb: bool,
    /// Failure probability for the UCB inflation.
    pub eta: f64,
    /// Worst-case swap bound used by the UCB inflation.
    pub delta_max: Option<f64>,
    pub swap: SwapConfig,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            budgets: Budgets::FULL,
            denoise_v: false,
            ucb: false,
            eta: 0.05,
            delta_max: None,
            swap: SwapConfig::default(),
        }
    }
}

/// Estimated concentration parameters for one assignment + reveal order.
#[derive(Debug, Clone)]
pub struct ConcentrationEstimate {
    /// Estimated `V*` (denoised when requested).
    pub v_hat: f64,
    /// Un-denoised across-unit quadratic variation (the PQV surrogate);
    /// equals `v_hat` when denoising is off.
    pub v_raw: f64,
    /// Plain plug-in estimate of `R*`.
    pub r_hat_plain: f64,
    /// UCB-inflated estimate of `R*`, when requested.
    pub r_hat_ucb: Option<f64>,
    /// Per-step influence tables `(t, alpha_t, [(unit, zeta_hat)])`.
    pub steps: Vec<StepInfluences>,
}

impl ConcentrationEstimate {
    /// The range estimate to use downstream (UCB when available).
    pub fn r_hat(&self) -> f64 {
        self.r_hat_ucb.unwrap_or(self.r_hat_plain)
    }
}

#[derive(Debug, Clone)]
pub struct StepInfluences {
    pub t: usize,
    pub alpha: f64,
    /// Number of candidate units (treated units not yet revealed).
    pub pool_size: usize,
    /// `(unit, zeta_hat)` for each probed unit.
    pub members: Vec<(usize, f64)>,
}

/// One Rao-Blackwellized influence estimate: sample `b_cond` completions,
/// average exactly over the control index for each. Returns the estimate and
/// the per-completion values (used for denoising).
fn zeta_rb(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    state: &RevealState,
    i: usize,
    mc: &McConfig,
    rng: &mut impl Rng,
) -> Result<(f64, Vec<f64>)> {
    if est == Estimator::Dim {
        // The swap sensitivity does not depend on the set it is applied to,
        // so conditioning on the realized assignment gives the exact per-unit
        // increment `mu_i` with no Monte Carlo error for any budget.
        let z = dim_mu(pop, &order.treated(), i);
        return Ok((z, vec![z]));
    }
    let rest: Vec<usize> = state.pool.iter().cloned().filter(|&u| u != i).collect();
    let mut draws = Vec::with_capacity(mc.budgets.b_cond);
    for _ in 0..mc.budgets.b_cond.max(1) {
        let t_set = sample_from(rng, &rest, state.remaining_slots - 1);
        let mut prox: Vec<usize> =
            state.past.iter().cloned().chain([i]).chain(t_set.iter().cloned()).collect();
        prox.sort_unstable();
        let (mean, _) = proxy_swap_average(pop, &prox, i, None, &mc.swap)?;
        draws.push(mean);
    }
    Ok((util::mean(&draws), draws))
}

/// Estimate `(V*, R*)` for one assignment and reveal order.
///
/// Follows the reveal steps. At each step the candidate set is the treated
/// units not yet revealed (conditioning on the realized assignment), probed
/// in full or as a uniform subsample of `b_i` units. Each candidate's
/// influence is estimated by Rao-Blackwellized Monte Carlo over completion
/// sets drawn from the full remaining pool, and the results accumulate as
/// `V_hat = sum_t alpha_t^2 Var_i(zeta_hat)` and
/// `R_hat = max_t alpha_t max_i |zeta_hat|`. When the candidate set is
/// subsampled the across-unit variance uses the unbiased finite-population
/// correction.
pub fn mc_var_range(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    mc: &McConfig,
    stream_seed: u64,
) -> Result<ConcentrationEstimate> {
    let n1 = order.n1();
    if mc.ucb && mc.delta_max.is_none() {
        return Err(Error::invalid("UCB range estimate requires delta_max"));
    }
    let step_results =
        crate::par::par_map(n1, |t0| -> Result<(StepInfluences, f64, f64, f64, f64)> {
            let t = t0 + 1;
            let state = order.state(t);
            // Candidates: treated units that have not been revealed yet.
            let candidates: Vec<usize> = order.permutation()[t - 1..n1].to_vec();
            let m = candidates.len();
            let probed: Vec<usize> = if m <= mc.budgets.b_i || mc.budgets.b_i == 0 {
                candidates
            } else {
                let mut rng = derive_rng(stream_seed, &[tags::SUBSAMPLE_I, t as u64]);
                sample_from(&mut rng, &candidates, mc.budgets.b_i)
            };
            let mut zetas = Vec::with_capacity(probed.len());
            let mut within = Vec::with_capacity(probed.len());
            for &i in &probed {
                let mut rng = derive_rng(stream_seed, &[tags::COMPLETION, t as u64, i as u64]);
                let (z, draws) = zeta_rb(pop, est, order, &state, i, mc, &mut rng)?;
                zetas.push(z);
                if draws.len() >= 2 {
                    within.push(util::sample_variance(&draws) / draws.len() as f64);
                }
            }
            let k = zetas.len();
            let raw_var = if k == m {
                util::pop_variance(&zetas)
            } else {
                // Unbiased for the population variance (divisor m) of the
                // full candidate set: sample variance times (m-1)/m.
                util::sample_variance(&zetas) * (m - 1) as f64 / m as f64
            };
            let mut var = raw_var;
            if mc.denoise_v && !within.is_empty() {
                var = (var - util::mean(&within)).max(0.0);
            }
            let v_term = state.alpha * state.alpha * var;
            let v_raw_term = state.alpha * state.alpha * raw_var;
            let max_abs = zetas.iter().fold(0.0_f64, |a, z| a.max(z.abs()));
            let r_plain_term = state.alpha * max_abs;
            let r_ucb_term = if mc.ucb {
                let dm = mc.delta_max.unwrap_or(f64::INFINITY);
                let infl = dm
                    * ((2.0 * k as f64 * n1 as f64 / mc.eta).ln()
                        / (2.0 * mc.budgets.b_cond as f64))
                        .sqrt();
                state.alpha * (max_abs + infl)
            } else {
                0.0
            };
            let members: Vec<(usize, f64)> = probed.into_iter().zip(zetas).collect();
            Ok((
                StepInfluences { t, alpha: state.alpha, pool_size: m, members },
                v_term,
                v_raw_term,
                r_plain_term,
                r_ucb_term,
            ))
        });
    let mut v_hat = 0.0;
    let mut v_raw = 0.0;
    let mut r_plain = 0.0_f64;
    let mut r_ucb = 0.0_f64;
    let mut steps = Vec::with_capacity(n1);
    for res in step_results {
        let (step, v_term, v_raw_term, rp, ru) = res?;
        v_hat += v_term;
        v_raw += v_raw_term;
        r_plain = r_plain.max(rp);
        r_ucb = r_ucb.max(ru);
        steps.push(step);
    }
    Ok(ConcentrationEstimate {
        v_hat,
        v_raw,
        r_hat_plain: r_plain,
        r_hat_ucb: if mc.ucb { Some(r_ucb) } else { None },
        steps,
    })
}

/// Exact `(V*, R*)` for the difference in means, enumerating the pool at
/// every step.
pub fn dim_exact_var_range(pop: &Population, order: &RevealOrder) -> (f64, f64) {
    let n1 = order.n1();
    let mut v = 0.0;
    let mut r = 0.0_f64;
    for t in 1..=n1 {
        let state = order.state(t);
        let zetas: Vec<f64> =
            state.pool.iter().map(|&i| zeta_exact_dim(pop, &state.pool, n1, i)).collect();
        v += state.alpha * state.alpha * util::pop_variance(&zetas);
        let max_abs = zetas.iter().fold(0.0_f64, |a, z| a.max(z.abs()));
        r = r.max(state.alpha * max_abs);
    }
    (v, r)
}

/// Assignment-conditional per-unit increment for the difference in means:
/// `mu_i = (mean_{S0} y1 - y1_i)/n1 + (mean_{S0} y0 - y0_i)/n0`, the exact
/// average of the swap sensitivity of unit `i` over the realized controls.
pub fn dim_mu(pop: &Population, treated: &[usize], i: usize) -> f64 {
    let n1 = treated.len();
    let n0 = pop.n - n1;
    let control = util::complement(pop.n, treated);
    let c_mean1 = control.iter().map(|&j| pop.y1[j]).sum::<f64>() / n0 as f64;
    let c_mean0 = control.iter().map(|&j| pop.y0[j]).sum::<f64>() / n0 as f64;
    (c_mean1 - pop.y1[i]) / n1 as f64 + (c_mean0 - pop.y0[i]) / n0 as f64
}

/// Empirical per-unit benchmark for the difference in means:
/// `mu_i = (mean_{S0} y1 - y1_i)/n1 + (mean_{S0} y0 - y0_i)/n0`, aggregated
/// along the realized reveal order into `(V_emp, R_emp)`.
pub fn dim_emp_diagnostics(pop: &Population, order: &RevealOrder) -> (f64, f64) {
    let n1 = order.n1();
    let n0 = pop.n - n1;
    let treated = order.treated();
    let control = util::complement(pop.n, &treated);
    let c_mean1 = control.iter().map(|&j| pop.y1[j]).sum::<f64>() / n0 as f64;
    let c_mean0 = control.iter().map(|&j| pop.y0[j]).sum::<f64>() / n0 as f64;
    let mu = |i: usize| (c_mean1 - pop.y1[i]) / n1 as f64 + (c_mean0 - pop.y0[i]) / n0 as f64;

    let mut v_emp = 0.0;
    for t in 1..=n1 {
        let state = order.state(t);
        let remaining: Vec<f64> =
            order.permutation()[t - 1..n1].iter().map(|&i| mu(i)).collect();
        v_emp += state.alpha * state.alpha * util::pop_variance(&remaining);
    }
    let mut r_emp = 0.0_f64;
    for t in 1..=n1 {
        let i = order.revealed_at(t);
        let alpha = order.state(t).alpha;
        r_emp = r_emp.max(alpha * mu(i).abs());
    }
    (v_emp, r_emp)
}

// ======================================================================
// Surrogate benchmarks for the adjusted estimator
// ======================================================================

/// Monte Carlo surrogate benchmarks: a pseudo-quadratic-variation proxy for
/// `V*` restricted to the units that actually get treated, and a swap
/// envelope upper-bounding `R*` by maximizing instead of averaging over the
/// entering control.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateDiagnostics {
    pub v_pqv: f64,
    pub r_swap: f64,
}

pub fn surrogate_diagnostics(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    mc: &McConfig,
    stream_seed: u64,
) -> Result<SurrogateDiagnostics> {
    let n1 = order.n1();
    let treated = order.treated();
    let mut is_control = vec![true; pop.n];
    for &i in &treated {
        is_control[i] = false;
    }

    if est == Estimator::Dim {
        // Both quantities are completion-free.
        let mut v = 0.0;
        let mut r = 0.0_f64;
        for t in 1..=n1 {
            let state = order.state(t);
            let remaining: Vec<usize> = order.permutation()[t - 1..n1].to_vec();
            let ms: Vec<f64> =
                remaining.iter().map(|&i| zeta_exact_dim(pop, &state.pool, n1, i)).collect();
            v += state.alpha * state.alpha * util::pop_variance(&ms);
            for &i in &remaining {
                let mut mx = 0.0_f64;
                for j in 0..pop.n {
                    if is_control[j] {
                        mx = mx.max(swap_delta_dim(pop, n1, i, j).abs());
                    }
                }
                r = r.max(state.alpha * mx);
            }
        }
        return Ok(SurrogateDiagnostics { v_pqv: v, r_swap: r });
    }

    let step_results = crate::par::par_map(n1, |t0| -> Result<(f64, f64)> {
        let t = t0 + 1;
        let state = order.state(t);
        let remaining: Vec<usize> = order.permutation()[t - 1..n1].to_vec();
        let mut means = Vec::with_capacity(remaining.len());
        let mut r_term = 0.0_f64;
        for &i in &remaining {
            let mut rng = derive_rng(stream_seed, &[tags::COMPLETION, t as u64, i as u64, 1]);
            let rest: Vec<usize> = state.pool.iter().cloned().filter(|&u| u != i).collect();
            let mut rb_means = Vec::with_capacity(mc.budgets.b_cond);
            let mut maxima = Vec::with_capacity(mc.budgets.b_cond);
            for _ in 0..mc.budgets.b_cond.max(1) {
                let t_set = sample_from(&mut rng, &rest, state.remaining_slots - 1);
                let mut prox: Vec<usize> =
                    state.past.iter().cloned().chain([i]).chain(t_set.iter().cloned()).collect();
                prox.sort_unstable();
                let (mean, mx) = proxy_swap_average(pop, &prox, i, Some(&is_control), &mc.swap)?;
                rb_means.push(mean);
                maxima.push(mx);
            }
            means.push(util::mean(&rb_means));
            r_term = r_term.max(state.alpha * util::mean(&maxima));
        }
        let v_term = state.alpha * state.alpha * util::pop_variance(&means);
        Ok((v_term, r_term))
    });
    let mut v = 0.0;
    let mut r = 0.0_f64;
    for res in step_results {
        let (vt, rt) = res?;
        v += vt;
        r = r.max(rt);
    }
    Ok(SurrogateDiagnostics { v_pqv: v, r_swap: r })
}

// ======================================================================
// Martingale oracles (enumeration) and the Freedman radius
// ======================================================================

/// Conditional expectation `E[f(S1) | revealed set]` by enumerating all
/// completions of the revealed prefix. `f = estimate - tau`.
pub fn cond_exp_f(
    pop: &Population,
    est: Estimator,
    past: &[usize],
    n1: usize,
) -> Result<f64> {
    let pool = {
        let mut in_past = vec![false; pop.n];
        for &u in past {
            in_past[u] = true;
        }
        (0..pop.n).filter(|&u| !in_past[u]).collect::<Vec<usize>>()
    };
    let slots = n1 - past.len();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut err = None;
    util::for_each_subset(&pool, slots, |t_set| {
        if err.is_some() {
            return;
        }
        let mut s1: Vec<usize> = past.iter().cloned().chain(t_set.iter().cloned()).collect();
        s1.sort_unstable();
        match est.estimate(pop, &s1) {
            Ok(v) => {
                total += v - pop.tau;
                count += 1;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total / count as f64)
}

/// Finite-sample Freedman deviation radius
/// `sqrt(2 V log(2/delta)) + (R/3) log(2/delta)`.
pub fn freedman_radius(v: f64, r: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0,1)"));
    }
    if v < 0.0 || r < 0.0 || !v.is_finite() || !r.is_finite() {
        return Err(Error::invalid("freedman radius needs finite nonnegative V and R"));
    }
    let l = (2.0 / delta).ln();
    Ok((2.0 * v * l).sqrt() + r / 3.0 * l)
}

/// Exhaustively computed exact `(V*, R*)` for any estimator at small `n`:
/// enumerates completions and control indices at every step.
pub fn exact_var_range_enum(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    cfg: &SwapConfig,
) -> Result<(f64, f64)> {
    let n1 = order.n1();
    let mut v = 0.0;
    let mut r = 0.0_f64;
    for t in 1..=n1 {
        let state = order.state(t);
        let mut zetas = Vec::with_capacity(state.pool.len());
        for &i in &state.pool {
            zetas.push(zeta_exact_enum(pop, est, &state.past, &state.pool, n1, i, cfg)?);
        }
        v += state.alpha * state.alpha * util::pop_variance(&zetas);
        let max_abs = zetas.iter().fold(0.0_f64, |a, z| a.max(z.abs()));
        r = r.max(state.alpha * max_abs);
    }
    Ok((v, r))
}

/// Per-unit influence table at a single step (exact enumeration), exposed
/// for tests and the acceptance gate.
pub fn zeta_table_enum(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    t: usize,
    cfg: &SwapConfig,
) -> Result<HashMap<usize, f64>> {
    let state = order.state(t);
    let n1 = order.n1();
    let mut out = HashMap::new();
    for &i in &state.pool {
        out.insert(i, zeta_exact_enum(pop, est, &state.past, &state.pool, n1, i, cfg)?);
    }
    Ok(out)
}
