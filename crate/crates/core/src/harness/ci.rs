//! Finite-sample confidence interval for a single assignment.
//!
//! The interval is centered at the estimate with radius
//!
//! ```text
//! sqrt(2 V_hat log(2/delta)) + (R_hat / 3) log(2/delta) + B_hat
//! ```
//!
//! where `(V_hat, R_hat)` come from the reveal-martingale Monte Carlo and
//! `B_hat` is the Stein bias bound (zero for the unbiased difference in
//! means).

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{Estimator, Population};
use crate::martingale::{freedman_radius, mc_var_range, McConfig, RevealOrder};
use crate::stein::BiasEstimate;
use crate::swap::{delta_max_envelope, swap_delta_dim, DeltaMaxMode};

/// One assignment's interval and its ingredients.
#[derive(Debug, Clone, Serialize)]
pub struct CiReport {
    pub estimate: f64,
    pub tau: f64,
    pub radius: f64,
    /// `sqrt(2 V_hat log(2/delta))`.
    pub sqrt_term: f64,
    /// `(R_hat / 3) log(2/delta)`.
    pub range_term: f64,
    /// Bias bound added to the radius.
    pub bias_term: f64,
    pub v_hat: f64,
    /// Un-denoised quadratic-variation surrogate (`v_hat` before denoising).
    pub v_raw: f64,
    pub r_hat: f64,
    pub delta: f64,
    pub covered: bool,
}

impl CiReport {
    pub fn width(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Exact worst-case swap magnitude for UCB inflation (closed form for the
/// difference in means, exhaustive pair sweep otherwise).
fn delta_max_for(pop: &Population, est: Estimator, treated: &[usize], mc: &McConfig) -> Result<f64> {
    match est {
        Estimator::Dim => {
            let control = crate::util::complement(pop.n, treated);
            let mut best = 0.0_f64;
            for &i in treated {
                for &j in &control {
                    best = best.max(swap_delta_dim(pop, treated.len(), i, j).abs());
                }
            }
            Ok(best)
        }
        Estimator::OlsRa => delta_max_envelope(pop, treated, DeltaMaxMode::Exhaustive, &mc.swap),
    }
}

/// Build the finite-sample interval for one assignment + reveal order.
pub fn ci_for_assignment(
    pop: &Population,
    est: Estimator,
    order: &RevealOrder,
    delta: f64,
    mc: &McConfig,
    bias: &BiasEstimate,
    stream_seed: u64,
) -> Result<CiReport> {
    let mut mc = mc.clone();
    if mc.ucb && mc.delta_max.is_none() {
        mc.delta_max = Some(delta_max_for(pop, est, &order.treated(), &mc)?);
    }
    let conc = mc_var_range(pop, est, order, &mc, stream_seed)?;
    let v_hat = conc.v_hat;
    let v_raw = conc.v_raw;
    let r_hat = conc.r_hat();
    let l = (2.0 / delta).ln();
    let sqrt_term = (2.0 * v_hat * l).sqrt();
    let range_term = r_hat / 3.0 * l;
    let bias_term = bias.b_star_hat;
    let radius = freedman_radius(v_hat, r_hat, delta)? + bias_term;
    let estimate = est.estimate(pop, &order.treated())?;
    Ok(CiReport {
        estimate,
        tau: pop.tau,
        radius,
        sqrt_term,
        range_term,
        bias_term,
        v_hat,
        v_raw,
        r_hat,
        delta,
        covered: (estimate - pop.tau).abs() <= radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::Budgets;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn ci_fixture_radius() {
        // Conditional concentration estimates V = 0.015625, R = 0.625 at
        // delta = 0.05 give radius
        // sqrt(2 * 0.015625 * ln 40) + (0.625/3) ln 40 ~ 1.10804.
        let x = DMatrix::zeros(4, 1);
        let y1 = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let y0 = DVector::zeros(4);
        let pop = crate::estimators::Population::new(x, y1, y0, 0.0, 0).unwrap();
        let order = RevealOrder::new(vec![0, 1, 2, 3], 2).unwrap();
        let mc = McConfig {
            budgets: Budgets { b_s: 1, b_pair: 1, b_i: 100, b_cond: 1 },
            ..Default::default()
        };
        let report = ci_for_assignment(
            &pop,
            Estimator::Dim,
            &order,
            0.05,
            &mc,
            &BiasEstimate::zero(),
            11,
        )
        .unwrap();
        assert_abs_diff_eq!(report.v_hat, 0.015625, epsilon = 1e-12);
        assert_abs_diff_eq!(report.r_hat, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(report.radius, 1.108042, epsilon = 1e-5);
        assert_abs_diff_eq!(report.sqrt_term + report.range_term, report.radius, epsilon = 1e-12);
        assert_abs_diff_eq!(report.estimate, 1.5, epsilon = 1e-12);
        // |1.5 - 2.5| = 1 <= 2.116: covered.
        assert!(report.covered);
        assert_abs_diff_eq!(report.width(), 2.0 * report.radius, epsilon = 1e-15);
    }

    #[test]
    fn bias_term_enters_radius() {
        let x = DMatrix::zeros(4, 1);
        let y1 = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let y0 = DVector::zeros(4);
        let pop = crate::estimators::Population::new(x, y1, y0, 0.0, 0).unwrap();
        let order = RevealOrder::new(vec![0, 1, 2, 3], 2).unwrap();
        let mc = McConfig {
            budgets: Budgets { b_s: 1, b_pair: 1, b_i: 100, b_cond: 1 },
            ..Default::default()
        };
        let bias = BiasEstimate { b_star_hat: 0.25, ..BiasEstimate::zero() };
        let with = ci_for_assignment(&pop, Estimator::Dim, &order, 0.05, &mc, &bias, 11).unwrap();
        let without =
            ci_for_assignment(&pop, Estimator::Dim, &order, 0.05, &mc, &BiasEstimate::zero(), 11)
                .unwrap();
        assert_abs_diff_eq!(with.radius - without.radius, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(with.bias_term, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ucb_widens_the_interval() {
        let x = DMatrix::zeros(4, 1);
        let y1 = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let y0 = DVector::zeros(4);
        let pop = crate::estimators::Population::new(x, y1, y0, 0.0, 0).unwrap();
        let order = RevealOrder::new(vec![0, 1, 2, 3], 2).unwrap();
        let base = McConfig {
            budgets: Budgets { b_s: 1, b_pair: 1, b_i: 100, b_cond: 4 },
            ..Default::default()
        };
        let ucb = McConfig { ucb: true, ..base.clone() };
        let plain =
            ci_for_assignment(&pop, Estimator::Dim, &order, 0.05, &base, &BiasEstimate::zero(), 2)
                .unwrap();
        let inflated =
            ci_for_assignment(&pop, Estimator::Dim, &order, 0.05, &ucb, &BiasEstimate::zero(), 2)
                .unwrap();
        assert!(inflated.radius > plain.radius);
    }
}
