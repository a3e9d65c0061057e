//! Finite populations, treatment-effect estimators, and the Wald baseline.
//!
//! A [`Population`] holds both potential-outcome vectors, so the true average
//! treatment effect is known exactly and coverage can be measured directly.
//! Internally all unit indices are 0-based; serialized forms are 1-based.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{ArmData, DEFAULT_TOL};
use crate::util;

/// A finite experimental population with fixed covariates and both
/// potential outcomes.
#[derive(Debug, Clone)]
pub struct Population {
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub seed: u64,
    /// Covariate matrix, `n x p`.
    pub x: DMatrix<f64>,
    /// Treated potential outcomes.
    pub y1: DVector<f64>,
    /// Control potential outcomes.
    pub y0: DVector<f64>,
    /// True average treatment effect `mean(y1 - y0)`.
    pub tau: f64,
}

#[derive(Serialize, Deserialize)]
struct PopulationJson {
    n: usize,
    p: usize,
    gamma: f64,
    seed: u64,
    /// Row-major covariates.
    x: Vec<f64>,
    y1: Vec<f64>,
    y0: Vec<f64>,
    tau: f64,
}

impl Population {
    pub fn new(
        x: DMatrix<f64>,
        y1: DVector<f64>,
        y0: DVector<f64>,
        gamma: f64,
        seed: u64,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 {
            return Err(Error::invalid("population must be nonempty"));
        }
        if y1.len() != n || y0.len() != n {
            return Err(Error::invalid("outcome vectors must have length n"));
        }
        let tau = (0..n).map(|i| y1[i] - y0[i]).sum::<f64>() / n as f64;
        Ok(Population { n, p, gamma, seed, x, y1, y0, tau })
    }

    /// Covariate row of unit `i` as a column vector.
    pub fn x_row(&self, i: usize) -> DVector<f64> {
        self.x.row(i).transpose()
    }

    /// Design block for a unit set (rows in the order given).
    pub fn design_block(&self, units: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(units.len(), self.p, |r, c| self.x[(units[r], c)])
    }

    /// Outcome sub-vector for arm `a` (1 = treated) over a unit set.
    pub fn outcomes(&self, units: &[usize], treated_arm: bool) -> DVector<f64> {
        let src = if treated_arm { &self.y1 } else { &self.y0 };
        DVector::from_fn(units.len(), |r, _| src[units[r]])
    }

    /// Factored arm for a unit set.
    pub fn arm(&self, units: &[usize], treated_arm: bool) -> Result<ArmData> {
        ArmData::new(self.design_block(units), self.outcomes(units, treated_arm), DEFAULT_TOL)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut xv = Vec::with_capacity(self.n * self.p);
        for i in 0..self.n {
            for j in 0..self.p {
                xv.push(self.x[(i, j)]);
            }
        }
        let rec = PopulationJson {
            n: self.n,
            p: self.p,
            gamma: self.gamma,
            seed: self.seed,
            x: xv,
            y1: self.y1.iter().cloned().collect(),
            y0: self.y0.iter().cloned().collect(),
            tau: self.tau,
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: PopulationJson = serde_json::from_str(text)?;
        if rec.x.len() != rec.n * rec.p {
            return Err(Error::invalid("population json: x length != n*p"));
        }
        let x = DMatrix::from_row_slice(rec.n, rec.p, &rec.x);
        let pop = Population::new(
            x,
            DVector::from_vec(rec.y1),
            DVector::from_vec(rec.y0),
            rec.gamma,
            rec.seed,
        )?;
        if (pop.tau - rec.tau).abs() > 1e-8 * (1.0 + rec.tau.abs()) {
            return Err(Error::invalid("population json: stored tau inconsistent with outcomes"));
        }
        Ok(pop)
    }
}

/// Which estimator of the average treatment effect to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// Unadjusted difference in means.
    Dim,
    /// Regression adjustment with minimum-norm OLS and unpenalized intercept.
    OlsRa,
}

impl Estimator {
    /// Point estimate of the ATE given the treated set (sorted 0-based ids).
    pub fn estimate(&self, pop: &Population, treated: &[usize]) -> Result<f64> {
        match self {
            Estimator::Dim => dim_estimate(pop, treated),
            Estimator::OlsRa => ols_ra_estimate(pop, treated),
        }
    }
}

fn validate_assignment(pop: &Population, treated: &[usize]) -> Result<Vec<usize>> {
    if treated.is_empty() || treated.len() >= pop.n {
        return Err(Error::invalid("both arms must be nonempty"));
    }
    for w in treated.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::invalid("treated set must be sorted and distinct"));
        }
    }
    if *treated.last().unwrap() >= pop.n {
        return Err(Error::invalid("treated id out of range"));
    }
    Ok(util::complement(pop.n, treated))
}

/// Difference in means of observed outcomes.
pub fn dim_estimate(pop: &Population, treated: &[usize]) -> Result<f64> {
    let control = validate_assignment(pop, treated)?;
    let m1 = treated.iter().map(|&i| pop.y1[i]).sum::<f64>() / treated.len() as f64;
    let m0 = control.iter().map(|&j| pop.y0[j]).sum::<f64>() / control.len() as f64;
    Ok(m1 - m0)
}

/// Regression-adjusted estimate: difference of the two arms' adjusted
/// intercepts.
pub fn ols_ra_estimate(pop: &Population, treated: &[usize]) -> Result<f64> {
    let control = validate_assignment(pop, treated)?;
    let arm1 = pop.arm(treated, true)?;
    let arm0 = pop.arm(&control, false)?;
    Ok(arm1.mu_hat - arm0.mu_hat)
}

/// Plug-in Wald (Neyman) confidence radius from observed per-arm outcomes:
/// `z_{1-delta/2} * sqrt(s1^2/n1 + s0^2/n0)` with sample variances.
pub fn neyman_wald_radius(pop: &Population, treated: &[usize], delta: f64) -> Result<f64> {
    let control = validate_assignment(pop, treated)?;
    if treated.len() < 2 || control.len() < 2 {
        return Err(Error::invalid("wald radius needs at least two units per arm"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0,1)"));
    }
    let obs1: Vec<f64> = treated.iter().map(|&i| pop.y1[i]).collect();
    let obs0: Vec<f64> = control.iter().map(|&j| pop.y0[j]).collect();
    let v = util::sample_variance(&obs1) / obs1.len() as f64
        + util::sample_variance(&obs0) / obs0.len() as f64;
    let z = util::normal_quantile(1.0 - delta / 2.0)?;
    Ok(z * v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::for_each_subset;
    use approx::assert_abs_diff_eq;

    fn fixture() -> Population {
        // n = 4, single centered covariate, y1 = (1,2,3,4), y0 = 0.
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let y1 = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let y0 = DVector::zeros(4);
        Population::new(x, y1, y0, 0.0, 0).unwrap()
    }

    #[test]
    fn dim_fixture_value() {
        let pop = fixture();
        assert_abs_diff_eq!(pop.tau, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dim_estimate(&pop, &[0, 1]).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn ols_ra_worked_example() {
        // X = (1,-1,1,-1), y1 = (2,0,_,_), y0 = (_,_,1,3), S1 = {0,1}:
        // both arms are M branch with mu1 = 1, mu0 = 2, so tau_hat = -1.
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let y1 = DVector::from_column_slice(&[2.0, 0.0, 9.0, 9.0]);
        let y0 = DVector::from_column_slice(&[9.0, 9.0, 1.0, 3.0]);
        let pop = Population::new(x, y1, y0, 0.0, 0).unwrap();
        assert_abs_diff_eq!(ols_ra_estimate(&pop, &[0, 1]).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ols_reduces_to_dim_for_zero_design() {
        let x = DMatrix::zeros(5, 2);
        let y1 = DVector::from_column_slice(&[1.0, 4.0, 2.0, 8.0, 5.0]);
        let y0 = DVector::from_column_slice(&[0.0, 1.0, 1.0, 2.0, 3.0]);
        let pop = Population::new(x, y1, y0, 0.0, 0).unwrap();
        for s1 in [[0usize, 1], [1, 3], [2, 4]] {
            assert_abs_diff_eq!(
                ols_ra_estimate(&pop, &s1).unwrap(),
                dim_estimate(&pop, &s1).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn dim_is_design_unbiased() {
        // Mean of the estimator over all assignments equals tau exactly.
        let pop = fixture();
        let units: Vec<usize> = (0..4).collect();
        let mut sum = 0.0;
        let mut count = 0.0;
        for_each_subset(&units, 2, |s| {
            sum += dim_estimate(&pop, s).unwrap();
            count += 1.0;
        });
        assert_abs_diff_eq!(sum / count, pop.tau, epsilon = 1e-12);
    }

    #[test]
    fn ols_invariant_to_shared_linear_signal_in_m_branch() {
        // Adding X beta to both potential outcomes leaves the adjusted
        // estimate unchanged when both arms stay in the annihilator branch.
        let mut rng = crate::rng::derive_rng(23, &[8]);
        use rand_distr::Distribution;
        for _ in 0..20 {
            let n = 8;
            let p = 2;
            let x = DMatrix::from_fn(n, p, |_, _| rand_distr::StandardNormal.sample(&mut rng));
            let y1 = DVector::from_fn(n, |_, _| rand_distr::StandardNormal.sample(&mut rng));
            let y0 = DVector::from_fn(n, |_, _| rand_distr::StandardNormal.sample(&mut rng));
            let beta = DVector::from_fn(p, |_, _| rand_distr::StandardNormal.sample(&mut rng));
            let shift = &x * &beta;
            let pop = Population::new(x.clone(), y1.clone(), y0.clone(), 0.0, 0).unwrap();
            let pop2 = Population::new(x, &y1 + &shift, &y0 + &shift, 0.0, 0).unwrap();
            let s1 = [0usize, 2, 5];
            let a = ols_ra_estimate(&pop, &s1).unwrap();
            let b = ols_ra_estimate(&pop2, &s1).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn wald_radius_simple_case() {
        let x = DMatrix::zeros(4, 1);
        let y1 = DVector::from_column_slice(&[1.0, 3.0, 0.0, 0.0]);
        let y0 = DVector::from_column_slice(&[0.0, 0.0, 2.0, 6.0]);
        let pop = Population::new(x, y1, y0, 0.0, 0).unwrap();
        // s1^2 = 2, s0^2 = 8, radius = z * sqrt(2/2 + 8/2) = z*sqrt(5).
        let z = crate::util::normal_quantile(0.975).unwrap();
        let r = neyman_wald_radius(&pop, &[0, 1], 0.05).unwrap();
        assert_abs_diff_eq!(r, z * 5.0_f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn population_json_round_trip() {
        let pop = fixture();
        let text = pop.to_json().unwrap();
        let back = Population::from_json(&text).unwrap();
        assert_eq!(back.n, pop.n);
        assert_eq!(back.p, pop.p);
        assert_abs_diff_eq!(back.tau, pop.tau, epsilon = 1e-12);
        assert_abs_diff_eq!((back.x - pop.x).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_assignments_rejected() {
        let pop = fixture();
        assert!(dim_estimate(&pop, &[]).is_err());
        assert!(dim_estimate(&pop, &[0, 1, 2, 3]).is_err());
        assert!(dim_estimate(&pop, &[1, 0]).is_err());
        assert!(dim_estimate(&pop, &[0, 7]).is_err());
    }
}
