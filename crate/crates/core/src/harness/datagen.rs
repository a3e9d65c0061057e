//! Synthetic population generation and design draws.
//!
//! The covariate matrix is carved out of a conceptual `n x ceil(n^1.5)`
//! master Gaussian draw: column `j` is generated from its own derived RNG
//! stream, so populations with the same seed but different widths share
//! their leading raw columns and the master never needs materializing.
//!
//! After centering, designs are normalized so every column has norm
//! `sqrt(n)`; tall designs (`p <= n - 1`) are additionally orthonormalized
//! so `X^T X = n I`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimators::Population;
use crate::martingale::RevealOrder;
use crate::rng::{derive_rng, sample_subset, shuffle, tags};
use crate::util::round_half_even;

/// Covariate count for width exponent `gamma`: `ceil(n^gamma)`, with a small
/// guard against floating-point overshoot on exact powers.
pub fn covariate_count(n: usize, gamma: f64) -> usize {
    let v = (n as f64).powf(gamma);
    ((v - 1e-9).ceil() as usize).max(1)
}

/// Number of treated units at treatment fraction `rho` (banker's rounding).
pub fn treated_count(n: usize, rho: f64) -> usize {
    round_half_even(rho * n as f64).clamp(1, n - 1)
}

/// Raw (uncentered) master column `j` for a given seed.
pub fn master_column(n: usize, seed: u64, j: usize) -> DVector<f64> {
    let mut rng = derive_rng(seed, &[tags::MASTER_COL, j as u64]);
    DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
}

/// Generate a population: normalized Gaussian design plus potential
/// outcomes `y_a = theta * X beta_star + eps_a` with independent standard
/// normal noise per arm (`theta = 0` gives pure-noise outcomes).
pub fn gen_population(n: usize, gamma: f64, theta: f64, seed: u64) -> Result<Population> {
    if n < 4 {
        return Err(Error::invalid("population size must be at least 4"));
    }
    if gamma < 0.0 {
        return Err(Error::invalid("gamma must be nonnegative"));
    }
    let p = covariate_count(n, gamma);
    let mut x = DMatrix::zeros(n, p);
    for j in 0..p {
        x.set_column(j, &master_column(n, seed, j));
    }
    // Center columns.
    for j in 0..p {
        let mean = x.column(j).sum() / n as f64;
        for i in 0..n {
            x[(i, j)] -= mean;
        }
    }
    let sqrt_n = (n as f64).sqrt();
    if p <= n - 1 {
        // Orthonormalize the centered columns (they live in the hyperplane
        // orthogonal to the ones vector, so orthonormal combinations stay
        // centered), then scale to X^T X = n I.
        let qr = x.clone().qr();
        let r = qr.r();
        for j in 0..p {
            if r[(j, j)].abs() <= 1e-10 {
                return Err(Error::degenerate("master draw produced rank-deficient design"));
            }
        }
        x = qr.q() * sqrt_n;
    } else {
        for j in 0..p {
            let norm = x.column(j).norm();
            if norm <= 1e-12 {
                return Err(Error::degenerate("master draw produced a zero column"));
            }
            let scale = sqrt_n / norm;
            for i in 0..n {
                x[(i, j)] *= scale;
            }
        }
    }

    let signal: DVector<f64> = if theta != 0.0 {
        let mut rng = derive_rng(seed, &[tags::BETA_STAR]);
        let mut beta = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
        let norm = beta.norm();
        if norm > 0.0 {
            beta /= norm;
        }
        &x * beta * theta
    } else {
        DVector::zeros(n)
    };
    let mut rng1 = derive_rng(seed, &[tags::EPSILON, 1]);
    let mut rng0 = derive_rng(seed, &[tags::EPSILON, 0]);
    let y1 = DVector::from_fn(n, |i, _| {
        let e: f64 = StandardNormal.sample(&mut rng1);
        signal[i] + e
    });
    let y0 = DVector::from_fn(n, |i, _| {
        let e: f64 = StandardNormal.sample(&mut rng0);
        signal[i] + e
    });
    Population::new(x, y1, y0, gamma, seed)
}

/// Uniform random treated set of size `n1`, sorted.
pub fn draw_assignment(n: usize, n1: usize, rng: &mut impl Rng) -> Vec<usize> {
    sample_subset(rng, n, n1)
}

/// Uniform reveal order consistent with a treated set: treated units in
/// random order first, then the controls in random order.
pub fn draw_reveal_order(n: usize, treated: &[usize], rng: &mut impl Rng) -> Result<RevealOrder> {
    let mut first: Vec<usize> = treated.to_vec();
    shuffle(rng, &mut first);
    let mut rest: Vec<usize> = crate::util::complement(n, treated);
    shuffle(rng, &mut rest);
    first.extend(rest);
    RevealOrder::new(first, treated.len())
}
