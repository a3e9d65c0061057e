//! Design-based finite-sample inference for randomized experiments.
//!
//! This crate computes confidence intervals for the average treatment effect
//! that are valid for any sample size, any outcome vectors, and any design
//! matrix, without asymptotic approximations. The machinery has four layers:
//!
//! * [`qcore`] — pseudoinverse-based linear algebra for regression adjustment
//!   with an unpenalized intercept, including rank-one update formulas.
//! * [`swap`] — exact sensitivity of an estimator to swapping one treated
//!   unit with one control unit, with cheap leverage-based envelopes.
//! * [`martingale`] — a sequential-reveal martingale decomposition of the
//!   estimator, Monte Carlo estimators of its concentration parameters, and
//!   a Freedman-style deviation radius.
//! * [`stein`] — an exchangeable-pair (Stein) bound on the estimator's bias.
//!
//! The [`harness`] module ties these together into CI construction and the
//! two simulation experiments exposed by the `randinfer` command-line tool.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod martingale;
pub mod par;
pub mod qcore;
pub mod rng;
pub mod stein;
pub mod swap;
pub mod util;

pub use error::{Error, Result};
