//! Exact one-swap sensitivity of the ATE estimators.
//!
//! `swap_delta(i, j)` is the change in the estimate when treated unit `i`
//! trades places with control unit `j`. For the regression-adjusted
//! estimator it decomposes into four atomic moves per arm (treated arm:
//! delete `i`, insert `j`; control arm: delete `j`, insert `i`), each a
//! change of adjusted intercept.
//!
//! Ground truth for every atomic move is *fresh recomputation*: factor the
//! modified arm from scratch and difference the intercepts. Two rank-one
//! fast paths are layered on top and verified against the fresh path by
//! oracle-equivalence tests:
//!
//! * deletion (both branches): `delta = -<e_i,1>_Q <e_i,y^c>_Q / phi_del`
//!   with `phi_del = <1,1>_Q Q_ii - <e_i,1>_Q^2`; when `phi_del`
//!   degenerates (for instance when `Q` has rank one and the reduced arm
//!   changes branch) the move is recomputed fresh;
//! * insertion (K branch with full-rank Gram only): the bordered-inverse
//!   (Schur complement) closed form. No validated closed form exists for
//!   insertions in the annihilator branch, so those always recompute.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use nalgebra::DVector;

use crate::error::Result;
use crate::estimators::Population;
use crate::qcore::{ArmData, QBranch, DEFAULT_TOL};
use crate::util;

/// Evaluation configuration for swap sensitivities.
#[derive(Debug, Clone, Copy)]
pub struct SwapConfig {
    /// Use rank-one fast paths where validated; the fresh path defines
    /// correctness either way.
    pub fast_paths: bool,
    pub tol: f64,
}

impl Default for SwapConfig {
    fn default() -> Self {
        SwapConfig { fast_paths: true, tol: DEFAULT_TOL }
    }
}

/// One-swap sensitivity of the difference in means: closed form, independent
/// of which other units are treated.
pub fn swap_delta_dim(pop: &Population, n1: usize, i: usize, j: usize) -> f64 {
    let n0 = pop.n - n1;
    (pop.y1[j] - pop.y1[i]) / n1 as f64 + (pop.y0[j] - pop.y0[i]) / n0 as f64
}

/// Decomposed swap sensitivity for the regression-adjusted estimator.
#[derive(Debug, Clone, Copy)]
pub struct SwapDelta {
    /// Treated unit leaving, control unit entering (population ids).
    pub i: usize,
    pub j: usize,
    /// Intercept change in the treated arm from deleting `i`.
    pub del1: f64,
    /// Intercept change in the treated arm from then inserting `j`.
    pub ins1: f64,
    /// Intercept change in the control arm from deleting `j`.
    pub del0: f64,
    /// Intercept change in the control arm from then inserting `i`.
    pub ins0: f64,
    /// Total estimator change `(del1 + ins1) - (del0 + ins0)`.
    pub value: f64,
}

/// Intercept change from deleting row `pos` of an arm.
pub fn delta_del(arm: &ArmData, pos: usize, cfg: &SwapConfig) -> Result<f64> {
    assert!(pos < arm.xs.nrows(), "delete position out of range");
    if cfg.fast_paths {
        let qd = arm.q.q_diag(pos);
        let phi = arm.one_q_one * qd - arm.q_one[pos] * arm.q_one[pos];
        // Cauchy-Schwarz puts phi in [0, <1,1>_Q Q_ii], so that product is
        // the natural scale for the degeneracy test. A vanishing phi means
        // the rank-one update collapses (e.g. Q itself has rank one and the
        // reduced arm changes branch), so only the fresh path is reliable
        // there.
        if phi > cfg.tol.sqrt() * arm.one_q_one * qd {
            return Ok(-arm.q_one[pos] * arm.q_yc[pos] / phi);
        }
    }
    delta_del_fresh(arm, pos)
}

/// Fresh-recomputation oracle for deletion.
pub fn delta_del_fresh(arm: &ArmData, pos: usize) -> Result<f64> {
    let reduced = arm.without_row(pos)?;
    Ok(reduced.mu_hat - arm.mu_hat)
}

/// Intercept change from inserting a row `(x_j, y_j)` into an arm.
pub fn delta_ins(arm: &ArmData, x_j: &DVector<f64>, y_j: f64, cfg: &SwapConfig) -> Result<f64> {
    if cfg.fast_paths
        && arm.q.branch() == QBranch::KBranch
        && arm.q.rank() == arm.xs.nrows()
    {
        let u = &arm.xs * x_j;
        let qu = arm.q.q_apply(&u);
        let sigma2 = x_j.norm_squared() - u.dot(&qu);
        if sigma2 > cfg.tol * x_j.norm_squared().max(1.0) {
            let alpha = arm.q_one.dot(&u);
            let phi = arm.one_q_one * sigma2 + (1.0 - alpha) * (1.0 - alpha);
            if phi <= cfg.tol {
                return Ok(0.0);
            }
            let resid = y_j - arm.mu_hat - arm.q_yc.dot(&u);
            return Ok((1.0 - alpha) * resid / phi);
        }
        // x_j inside the row space: fall through to fresh recomputation.
    }
    delta_ins_fresh(arm, x_j, y_j)
}

/// Fresh-recomputation oracle for insertion.
pub fn delta_ins_fresh(arm: &ArmData, x_j: &DVector<f64>, y_j: f64) -> Result<f64> {
    let grown = arm.with_row(x_j, y_j)?;
    Ok(grown.mu_hat - arm.mu_hat)
}

/// Swap-evaluation context for one assignment: both arms factored once,
/// reduced arms memoized per removed unit.
pub struct OlsSwapContext<'p> {
    pub pop: &'p Population,
    pub treated: Vec<usize>,
    pub control: Vec<usize>,
    pub arm1: ArmData,
    pub arm0: ArmData,
    cfg: SwapConfig,
    reduced1: RefCell<HashMap<usize, Rc<ArmData>>>,
    reduced0: RefCell<HashMap<usize, Rc<ArmData>>>,
}

impl<'p> OlsSwapContext<'p> {
    pub fn new(pop: &'p Population, treated: &[usize], cfg: SwapConfig) -> Result<Self> {
        let control = util::complement(pop.n, treated);
        let arm1 = pop.arm(treated, true)?;
        let arm0 = pop.arm(&control, false)?;
        Ok(OlsSwapContext {
            pop,
            treated: treated.to_vec(),
            control,
            arm1,
            arm0,
            cfg,
            reduced1: RefCell::new(HashMap::new()),
            reduced0: RefCell::new(HashMap::new()),
        })
    }

    pub fn cfg(&self) -> SwapConfig {
        self.cfg
    }

    fn reduced(&self, treated_arm: bool, unit: usize) -> Result<Rc<ArmData>> {
        let (cache, arm, members) = if treated_arm {
            (&self.reduced1, &self.arm1, &self.treated)
        } else {
            (&self.reduced0, &self.arm0, &self.control)
        };
        if let Some(r) = cache.borrow().get(&unit) {
            return Ok(Rc::clone(r));
        }
        let pos = members.iter().position(|&u| u == unit).expect("unit not in arm");
        let reduced = Rc::new(arm.without_row(pos)?);
        cache.borrow_mut().insert(unit, Rc::clone(&reduced));
        Ok(reduced)
    }

    /// Full swap sensitivity for treated unit `i` and control unit `j`.
    ///
    /// Single-unit arms have no deletion telescope (the intermediate empty
    /// arm is undefined), so the swap is recomputed directly in that case.
    pub fn swap_delta(&self, i: usize, j: usize) -> Result<SwapDelta> {
        if self.treated.len() < 2 || self.control.len() < 2 {
            let mut swapped: Vec<usize> =
                self.treated.iter().cloned().filter(|&u| u != i).chain([j]).collect();
            swapped.sort_unstable();
            let est = crate::estimators::Estimator::OlsRa;
            let value = est.estimate(self.pop, &swapped)? - est.estimate(self.pop, &self.treated)?;
            return Ok(SwapDelta { i, j, del1: f64::NAN, ins1: f64::NAN, del0: f64::NAN, ins0: f64::NAN, value });
        }
        let pos_i = self
            .treated
            .iter()
            .position(|&u| u == i)
            .unwrap_or_else(|| panic!("unit {i} is not treated"));
        let pos_j = self
            .control
            .iter()
            .position(|&u| u == j)
            .unwrap_or_else(|| panic!("unit {j} is not a control"));

        let del1 = delta_del(&self.arm1, pos_i, &self.cfg)?;
        let r1 = self.reduced(true, i)?;
        let ins1 = delta_ins(&r1, &self.pop.x_row(j), self.pop.y1[j], &self.cfg)?;

        let del0 = delta_del(&self.arm0, pos_j, &self.cfg)?;
        let r0 = self.reduced(false, j)?;
        let ins0 = delta_ins(&r0, &self.pop.x_row(i), self.pop.y0[i], &self.cfg)?;

        let value = (del1 + ins1) - (del0 + ins0);
        Ok(SwapDelta { i, j, del1, ins1, del0, ins0, value })
    }
}

/// Swap sensitivity of an estimator (dispatching on the estimator kind).
pub fn swap_delta(
    est: crate::estimators::Estimator,
    pop: &Population,
    treated: &[usize],
    i: usize,
    j: usize,
    cfg: &SwapConfig,
) -> Result<f64> {
    match est {
        crate::estimators::Estimator::Dim => Ok(swap_delta_dim(pop, treated.len(), i, j)),
        crate::estimators::Estimator::OlsRa => {
            let ctx = OlsSwapContext::new(pop, treated, *cfg)?;
            Ok(ctx.swap_delta(i, j)?.value)
        }
    }
}

// ======================================================================
// Leverage diagnostics and envelopes
// ======================================================================

/// Leverage-style diagnostics for one arm, one (optional) member unit, and
/// one (optional) candidate insertion row.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeverageReport {
    /// Member leverage `ell_i = <e_i,1>_Q^2 / (Q_ii <1,1>_Q)`.
    pub ell_i: Option<f64>,
    /// Deletion denominator `phi_del = <1,1>_Q Q_ii - <e_i,1>_Q^2`.
    pub phi_del: Option<f64>,
    /// Cross leverage `ell_tilde = alpha^2 / (<1,1>_Q sigma^2)`, 1 when
    /// `sigma^2 = 0`.
    pub ell_tilde_j: Option<f64>,
    /// Out-of-span energy `sigma^2 = ||x_j||^2 - ||X_S x_j||_Q^2`.
    pub sigma2_j: Option<f64>,
    /// `alpha = <1, X_S x_j>_Q`.
    pub alpha_j: Option<f64>,
    /// Aspect ratio `rho = ||X_S x_j||_Q / sigma`.
    pub rho_j: Option<f64>,
    /// Insertion denominator `phi_ins = <1,1>_Q sigma^2 + (1 - alpha)^2`.
    pub phi_ins: Option<f64>,
}

/// Compute leverage diagnostics.
pub fn leverage_report(
    arm: &ArmData,
    member_pos: Option<usize>,
    x_j: Option<&DVector<f64>>,
) -> LeverageReport {
    let mut rep = LeverageReport::default();
    if let Some(pos) = member_pos {
        let qd = arm.q.q_diag(pos);
        let denom = qd * arm.one_q_one;
        let ell = if denom > 0.0 {
            (arm.q_one[pos] * arm.q_one[pos] / denom).min(1.0)
        } else {
            1.0
        };
        rep.ell_i = Some(ell);
        rep.phi_del = Some(arm.one_q_one * qd - arm.q_one[pos] * arm.q_one[pos]);
    }
    if let Some(x) = x_j {
        let u = &arm.xs * x;
        let qu = arm.q.q_apply(&u);
        let u_q2 = u.dot(&qu).max(0.0);
        let sigma2 = (x.norm_squared() - u_q2).max(0.0);
        let alpha = arm.q_one.dot(&u);
        let ell_tilde = if sigma2 > 0.0 {
            alpha * alpha / (arm.one_q_one * sigma2)
        } else {
            1.0
        };
        let rho = if sigma2 > 0.0 {
            (u_q2 / sigma2).sqrt()
        } else if u_q2 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        rep.sigma2_j = Some(sigma2);
        rep.alpha_j = Some(alpha);
        rep.ell_tilde_j = Some(ell_tilde);
        rep.rho_j = Some(rho);
        rep.phi_ins = Some(arm.one_q_one * sigma2 + (1.0 - alpha) * (1.0 - alpha));
    }
    rep
}

/// Leverage envelope on the deletion move:
/// `|delta_del| <= |<e_i,y^c>_Q| / (||e_i||_Q ||1||_Q) * sqrt(l)/(1-l)`.
/// Returns `+inf` when the leverage reaches 1.
pub fn deletion_envelope(arm: &ArmData, pos: usize, tol: f64) -> f64 {
    let qd = arm.q.q_diag(pos);
    let rep = leverage_report(arm, Some(pos), None);
    let ell = rep.ell_i.unwrap();
    if ell >= 1.0 - tol {
        return f64::INFINITY;
    }
    if qd <= 0.0 {
        return f64::INFINITY;
    }
    let front = arm.q_yc[pos].abs() / (qd.sqrt() * arm.one_q_one.sqrt());
    front * ell.sqrt() / (1.0 - ell)
}

/// Leverage envelope on the insertion move:
/// `||y^c||_Q / ||1||_Q * rho * sqrt(l~)/(1-l~)`; zero when `rho = 0`,
/// `+inf` when the cross leverage reaches 1 with `rho > 0`.
pub fn insertion_envelope(arm: &ArmData, x_j: &DVector<f64>, tol: f64) -> f64 {
    let rep = leverage_report(arm, None, Some(x_j));
    let rho = rep.rho_j.unwrap();
    if rho == 0.0 {
        return 0.0;
    }
    let lt = rep.ell_tilde_j.unwrap();
    if lt >= 1.0 - tol {
        return f64::INFINITY;
    }
    let r = arm.residual_scale();
    r * rho * lt.sqrt() / (1.0 - lt)
}

/// How to bound the worst-case swap sensitivity of an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMaxMode {
    /// Exact maximum of `|swap_delta|` over every (treated, control) pair.
    Exhaustive,
    /// Closed-form bound `(1 + max rho) sqrt(k)/(1-k) * (R1 + R0)` from the
    /// largest observed leverage `k` and aspect ratio.
    Leverage,
}

/// Worst-case swap sensitivity bound for the regression-adjusted estimator.
pub fn delta_max_envelope(
    pop: &Population,
    treated: &[usize],
    mode: DeltaMaxMode,
    cfg: &SwapConfig,
) -> Result<f64> {
    let ctx = OlsSwapContext::new(pop, treated, *cfg)?;
    match mode {
        DeltaMaxMode::Exhaustive => {
            let mut best = 0.0_f64;
            for &i in &ctx.treated {
                for &j in &ctx.control {
                    best = best.max(ctx.swap_delta(i, j)?.value.abs());
                }
            }
            Ok(best)
        }
        DeltaMaxMode::Leverage => {
            let mut kappa = 0.0_f64;
            let mut upsilon = 0.0_f64;
            for (arm, outsiders) in [(&ctx.arm1, &ctx.control), (&ctx.arm0, &ctx.treated)] {
                for pos in 0..arm.xs.nrows() {
                    let rep = leverage_report(arm, Some(pos), None);
                    kappa = kappa.max(rep.ell_i.unwrap());
                }
                for &j in outsiders.iter() {
                    let xj = pop.x_row(j);
                    let rep = leverage_report(arm, None, Some(&xj));
                    kappa = kappa.max(rep.ell_tilde_j.unwrap());
                    let rho = rep.rho_j.unwrap();
                    if rho.is_finite() {
                        upsilon = upsilon.max(rho);
                    } else {
                        return Ok(f64::INFINITY);
                    }
                }
            }
            if kappa >= 1.0 - cfg.tol {
                return Ok(f64::INFINITY);
            }
            let c = (1.0 + upsilon) * kappa.sqrt() / (1.0 - kappa);
            Ok(c * (ctx.arm1.residual_scale() + ctx.arm0.residual_scale()))
        }
    }
}
