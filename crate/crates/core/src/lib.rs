//! Bayesian nonparametric inference for partially identified models whose
//! identified set is an interval.
//!
//! The crate simulates Dirichlet-process priors and posteriors by truncated
//! stick-breaking, turns each draw into a random identified set, and estimates
//! coverage and capacity functionals, credible regions and point estimates
//! from the resulting batches. It also draws the partially identified
//! parameter itself under four conditional prior families.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional;
pub mod dirichlet;
pub mod error;
pub mod kernel;
pub mod random_set;
pub mod scenarios;

pub use error::{Error, Result};
